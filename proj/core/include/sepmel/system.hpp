#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sepmel/errors.hpp"
#include "sepmel/linalg.hpp"
#include "sepmel/poly.hpp"

namespace sepmel {

template <class Coef>
struct PolyVec2 {
    Polynomial2<Coef> c1, c2;

    template <class S>
    auto eval(S x1, S x2) const {
        return std::pair{c1.eval(x1, x2), c2.eval(x1, x2)};
    }
    bool empty() const { return c1.empty() && c2.empty(); }
};

using RPolyVec2 = PolyVec2<double>;
using CPolyVec2 = PolyVec2<cd>;

/// Finite Fourier vector field g(x, theta) = sum_{j=-N..N} g_hat_j(x) e^{i j theta}.
/// Only j >= 0 is stored; g_hat_{-j} is the coefficient-conjugate of g_hat_j,
/// which is exactly the reality condition on the real slice.
class FourierField {
public:
    FourierField() = default;

    /// From the real cosine/sine form: g = a0 + sum_j (a_j cos j.theta + b_j sin j.theta).
    static FourierField from_real_form(RPolyVec2 a0, std::vector<RPolyVec2> a, std::vector<RPolyVec2> b);

    /// From raw complex coefficients for j = -N..N (index k = j + N).
    /// Throws RealityViolation if g_hat_{-j} deviates from conj(g_hat_j) beyond tol.
    static FourierField from_complex(const std::vector<CPolyVec2>& coeffs, double tol = 1e-10);

    int harmonics() const { return N_; }

    /// g_hat_j(x) for any |j| <= N, complex x allowed.
    CPolyVec2 coeff_hat(int j) const;

    /// Value of g_hat_j at a real point.
    CVec2 coeff_hat_at(int j, Vec2 x) const;

    const RPolyVec2& a0() const { return a0_; }
    const RPolyVec2& a(int j) const { return a_.at(j - 1); }
    const RPolyVec2& b(int j) const { return b_.at(j - 1); }

    /// Real field value g(x, theta).
    Vec2 eval(Vec2 x, double theta) const;

    bool zero() const;

private:
    int N_ = 0;
    RPolyVec2 a0_;
    std::vector<RPolyVec2> a_, b_;      // j = 1..N
    std::vector<CPolyVec2> hat_pos_;    // g_hat_j, j = 1..N
    CPolyVec2 hat0_;
};

struct PlanarSystem {
    RPoly2 H;
    FourierField g;
    double omega = 1.0;
    std::string name = "custom";

    // cached exact derivatives of H
    RPoly2 H1, H2, H11, H12, H22;
    RPoly2 H111, H112, H122, H222;

    PlanarSystem() = default;
    PlanarSystem(RPoly2 hamiltonian, FourierField pert, double omega_, std::string name_ = "custom");

    Vec2 grad_H(Vec2 x) const { return {H1.eval(x.x, x.y), H2.eval(x.x, x.y)}; }
    Mat2 hessian_H(Vec2 x) const {
        double h11 = H11.eval(x.x, x.y), h12 = H12.eval(x.x, x.y), h22 = H22.eval(x.x, x.y);
        return {h11, h12, h12, h22};
    }
    /// J D^2H(x) -- the variational coefficient matrix; trace-free.
    Mat2 jac_field(Vec2 x) const {
        Mat2 h = hessian_H(x);
        return {h.a21, h.a22, -h.a11, -h.a12};
    }
    double energy(Vec2 x) const { return H.eval(x.x, x.y); }
};

/// J DH(x), the unperturbed vector field.
Vec2 hamiltonian_field(const PlanarSystem& sys, Vec2 x);

/// Full perturbed field of the time-periodic system at forcing phase psi.
Vec2 perturbed_field(const PlanarSystem& sys, Vec2 x, double eps, double psi);

struct Saddle {
    Vec2 x;
    double lambda = 0.0;
    Vec2 v_u, v_s;   // unit eigenvectors of J D^2H for +lambda, -lambda
    Mat2 hessian;
};

/// Newton-refine an equilibrium of J DH and classify it as a saddle.
/// Throws NoConvergence or NotASaddle.
Saddle refine_saddle(const PlanarSystem& sys, Vec2 guess, double tol_eq = 1e-12);

struct PresetParams {
    double beta = 1.0;
    double delta = 0.0;
    double omega = 1.0;
};

/// Built-in systems; throws UnknownPreset.
PlanarSystem make_preset(const std::string& name, const PresetParams& p);

/// Parse a system-definition JSON document (see README for the schema).
PlanarSystem parse_system(const std::string& json_text);
PlanarSystem parse_system_file(const std::string& path);

}  // namespace sepmel
