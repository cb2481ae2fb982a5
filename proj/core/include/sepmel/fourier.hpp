#pragma once

#include <functional>
#include <vector>

#include "sepmel/system.hpp"

namespace sepmel {

/// Trapezoidal Fourier extraction on 2N+2 equispaced nodes; exact (to
/// round-off) for trigonometric polynomials of degree <= N. Returns
/// g_hat_j for j = -N..N (index j + N).
std::vector<CVec2> fourier_coefficients(const std::function<Vec2(double)>& g, int N);

struct RealForm {
    Vec2 a0;
    std::vector<Vec2> a, b;  // j = 1..N
};

/// a0 = g_hat_0, a_j = g_hat_j + g_hat_{-j}, b_j = i(g_hat_j - g_hat_{-j}).
/// Throws RealityViolation if the reality condition fails beyond tol.
RealForm real_form(const std::vector<CVec2>& coeffs, double tol = 1e-10);

/// State of the autonomous extension: (x, eps, u_1..u_N, v_1..v_N).
struct ExtendedState {
    Vec2 x;
    double eps = 0.0;
    std::vector<double> u, v;
};

struct ExtendedDeriv {
    Vec2 x_dot;
    double eps_dot = 0.0;  // identically zero
    std::vector<double> u_dot, v_dot;
};

/// Right-hand side of the autonomous extended system:
///   x' = J DH(x) + eps a0(x) + sum_j (a_j(x) u_j + b_j(x) v_j),
///   eps' = 0, u_j' = -j w v_j, v_j' = j w u_j.
ExtendedDeriv extended_field(const PlanarSystem& sys, const ExtendedState& s);

/// Flat-vector packing used when integrating the extended system.
std::vector<double> pack_extended(const ExtendedState& s);
ExtendedState unpack_extended(const std::vector<double>& y, int N);
void extended_field_flat(const PlanarSystem& sys, const std::vector<double>& y,
                         std::vector<double>& dydt);

}  // namespace sepmel
