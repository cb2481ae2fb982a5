#pragma once

#include <stdexcept>
#include <string>

namespace sepmel {

enum class ErrorCode {
    // configuration / input
    SchemaViolation,
    UnknownPreset,
    InvalidConfig,
    RealityViolation,
    // numerical
    NoConvergence,
    NotASaddle,
    EnergyMismatch,
    NoConnection,
    LostHyperbolicity,
    ToleranceNotMet,
    MultiHarmonic,
    DegenerateHessian,
    PoleCrossing,
    IllConditioned,
    PoleOnPath,
    StepFailure,
    Escape,
    FoldTooSharp,
};

const char* error_code_name(ErrorCode c);

/// True for errors caused by bad input rather than failed numerics.
bool is_config_error(ErrorCode c);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace sepmel
