#pragma once

#include <complex>
#include <functional>

#include "sepmel/errors.hpp"

namespace sepmel {

struct QuadResult {
    std::complex<double> value{};
    double err = 0.0;
    long evals = 0;
};

/// Adaptive quadrature of a complex-valued integrand on [a, b] with a
/// Gauss–Legendre 15/7 pair per panel; panels are bisected until the summed
/// pairwise discrepancy falls below tol_abs + tol_rel * |integral|. Throws
/// ToleranceNotMet if the panel stack is exhausted without reaching it.
QuadResult quad_adaptive(const std::function<std::complex<double>(double)>& f, double a, double b,
                         double tol_abs, double tol_rel = 0.0);

}  // namespace sepmel
