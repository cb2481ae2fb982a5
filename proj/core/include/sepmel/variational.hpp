#pragma once

#include "sepmel/melnikov.hpp"
#include "sepmel/orbit.hpp"

namespace sepmel {

/// Limits of the separatrix velocity and of the chi primitive:
///   xi_pm  = lim_{t->pm inf} J DH(x^h(t)) e^{pm lambda_pm t}
///   chi_pm = lim_{t->pm inf} chi(t) e^{∓2 lambda_pm t}
/// axis = 2 for the D_{x2}H construction, 1 for the swapped one.
struct OrbitAsymptotics {
    Vec2 xi_plus, xi_minus;
    double chi_plus = 0.0, chi_minus = 0.0;
    int axis = 2;
};

OrbitAsymptotics orbit_asymptotics(const Orbit& orbit);

/// Fundamental matrix X(t) of the homogeneous xi-equation on one branch
/// (branch = sign of t), with chi integrated from the branch reference point.
/// Throws PoleCrossing if [t_ref, t] crosses a zero of D_{x2}H(x^h).
Mat2 fundamental_X(const Orbit& orbit, double t, int branch);

/// c_pm = -(J D^2H(x_pm) + i l w id) g_hat_l(x_pm) / (lambda_pm^2 + l^2 w^2).
std::pair<CVec2, CVec2> c_vectors(const PlanarSystem& sys, const Saddle& plus, const Saddle& minus,
                                  int ell);

struct MValues {
    cd m_minus{};  // normalized to zero
    cd m_plus{};   // equals Mhat_l under that normalization
    double err = 0.0;
};

MValues m_values(const Orbit& orbit, const PlanarSystem& sys, int ell, double tol = 1e-10);

struct VariationalOptions {
    double decay_exponent = 23.0;  // lambda * T_match
    double rtol = 1e-12;
    double atol = 1e-14;
    double quad_tol = 1e-10;
    double gauge_plus = 0.0;   // free parameter of B_plus (0 = residual-minimizing)
    double gauge_minus = 0.0;  // free parameter of B_minus
};

/// Connection matrices of the xi-equation between the saddle frames,
/// computed by dominant-direction shooting of the distinguished solutions
/// with Wronskian completion of the subdominant partners.
struct ConnectionMatrices {
    Mat2 B_plus, B_minus, B0;
    double T_minus = 0.0, T_plus = 0.0;
    double residual_minus = 0.0, residual_plus = 0.0;  // defining-limit residuals at ∓T, +T
};

ConnectionMatrices connection_matrices(const PlanarSystem& sys, const Orbit& orbit,
                                       const VariationalOptions& opts = {});

/// Everything the closed-form monodromy assembly needs.
struct AsymptoticData {
    int ell = 1;
    double omega = 1.0;
    double lambda_plus = 0.0, lambda_minus = 0.0;
    Vec2 xi_plus, xi_minus;
    double chi_plus = 0.0, chi_minus = 0.0;
    int axis = 2;
    cd m_minus{}, m_plus{};
    double m_err = 0.0;
    CVec2 c_plus, c_minus;
    CVec2 b_plus, b_minus;
    Mat2 Q_plus, Q_minus;  // eigenbases ordered (+l,-l) at x_+ and (-l,+l) at x_-
    Mat2 B_plus, B_minus, B0;
    double connection_residual = 0.0;
};

AsymptoticData make_asymptotic_data(const PlanarSystem& sys, const Orbit& orbit, int ell,
                                    const VariationalOptions& opts = {});

struct MonodromyPair {
    CMat3 M_plus, M_minus;
    double commutator_norm = 0.0;
};

MonodromyPair monodromy_pair(const AsymptoticData& d);

Verdict commutator_certificate(const MonodromyPair& pair, double tol = 1e-8);

/// The side-local monodromy matrix in the Phi_side frame (closed form).
CMat3 monodromy_side_closed_form(const AsymptoticData& d, int side);

struct ContinuationOptions {
    double re_t0 = 8.0;   // |Re t0| of the loop base point
    double rtol = 3e-16;  // the loop runs in long double; frame conditioning
    double atol = 1e-20;  // at the base point is e^{2 lambda |t0|}
};

/// Monodromy by numerical continuation of the variational equation around
/// the saddle in complex time, expressed in the Phi_side-asymptotic frame.
/// Closed-form orbits only. side = -1 or +1.
CMat3 monodromy_via_continuation(const PlanarSystem& sys, const Orbit& orbit, int ell, int side,
                                 const ContinuationOptions& opts = {});

/// Constant term of the Laurent expansion of chi'(t) at the side saddle
/// (eqn-chi-style data sees only the leading exponential; this coefficient
/// drives a resonant log term in the actual monodromy). Extracted exactly as
/// the mean of chi' over a vertical period circle deep in the tail.
double chi_linear_coefficient(const Orbit& orbit, int side);

/// Side-local monodromy including the resonant log block that the plain
/// closed form omits; chi_lin is the coefficient from chi_linear_coefficient.
CMat3 monodromy_side_resonant(const AsymptoticData& d, double chi_lin, int side);

std::string monodromy_report_json(const AsymptoticData& d, const MonodromyPair& pair,
                                  Verdict verdict);

}  // namespace sepmel
