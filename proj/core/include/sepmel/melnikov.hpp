#pragma once

#include <string>
#include <vector>

#include "sepmel/orbit.hpp"

namespace sepmel {

/// M(theta) = sum_j Mhat_j e^{i j theta} as a trigonometric polynomial,
/// with per-coefficient quadrature error estimates.
struct MelnikovSeries {
    int N = 0;
    double omega = 1.0;
    std::vector<cd> coeffs;     // j = -N..N at index j + N
    std::vector<double> err;
    std::string orbit_id;
    std::string convention = "arclength-midpoint";

    cd coeff(int j) const { return coeffs.at(j + N); }
    double coeff_err(int j) const { return err.at(j + N); }
};

struct MelnikovOptions {
    double tol = 1e-10;     // per-coefficient absolute quadrature target
    int threads = 1;
};

/// Improper-integral Melnikov coefficient along the orbit:
///   Mhat_j = int DH(x^h(t)) . g_hat_j(x^h(t)) e^{i j omega t} dt,
/// adaptive quadrature on a decay-determined window plus analytic
/// exponential tails. Returns (value, error estimate <= tol).
std::pair<cd, double> melnikov_coefficient(const Orbit& orbit, const PlanarSystem& sys, int j,
                                           double tol = 1e-10);

MelnikovSeries melnikov_series(const Orbit& orbit, const PlanarSystem& sys,
                               const MelnikovOptions& opts = {});

double eval_melnikov(const MelnikovSeries& s, double theta);
double eval_melnikov_deriv(const MelnikovSeries& s, double theta);

enum class Verdict { NonIntegrable, Inconclusive };

const char* verdict_name(Verdict v);

struct Certificate {
    Verdict verdict = Verdict::Inconclusive;
    int witness = 0;        // harmonic with maximal |Mhat_j| among j != 0
    double witness_abs = 0.0;
    double witness_err = 0.0;
    double margin = 0.0;    // |Mhat_l| - (tol_cert + err_l); verdict iff > 0
    double tol_cert = 0.0;
};

/// Nonconstancy certificate: the oscillatory part of M exceeds tolerance.
/// Never claims integrability.
Certificate certify_nonintegrability(const MelnikovSeries& s, double tol_cert = 1e-8);

struct SimpleZero {
    double theta;
    double dM;
    bool simple;
};

/// All zeros of M on [0, 2pi): dense sampling, bisection, Newton polish.
/// Throws InvalidConfig for a constant series.
std::vector<SimpleZero> simple_zeros(const MelnikovSeries& s, double tol_simple = 1e-8);

/// |Mhat_0| / (2 |Mhat_1|) for single-harmonic series; zeros exist iff < 1.
/// Throws MultiHarmonic when the form is violated.
double zero_existence_ratio(const MelnikovSeries& s, double tol_cert = 1e-8);

std::string series_to_json(const MelnikovSeries& s);
MelnikovSeries series_from_json(const std::string& text);

}  // namespace sepmel
