#pragma once

#include <string>
#include <vector>

#include "sepmel/system.hpp"

namespace sepmel {

enum class OrbitKind { closed_form, numeric };

struct OrbitPoint {
    Vec2 x;
    Vec2 xdot;
};

/// A homo-/heteroclinic solution of the unperturbed system together with its
/// saddles and an evaluation contract valid for all real t (linearized decay
/// past the stored range). Immutable after construction.
class Orbit {
public:
    OrbitKind kind() const { return kind_; }
    const Saddle& source() const { return source_; }   // reached as t -> -inf
    const Saddle& target() const { return target_; }   // reached as t -> +inf
    double energy() const { return h_; }
    double lambda_minus() const { return source_.lambda; }
    double lambda_plus() const { return target_.lambda; }
    const PlanarSystem& system() const { return sys_; }
    const std::string& id() const { return id_; }
    /// Extent of the stored dense grid (numeric) or the advertised domain.
    double t_grid_lo() const { return t_lo_; }
    double t_grid_hi() const { return t_hi_; }

    OrbitPoint eval(double t) const;

    /// Holomorphic evaluation for closed-form presets; throws InvalidConfig
    /// for numeric orbits.
    std::pair<CVec2, CVec2> eval_complex(cd t) const;
    bool has_complex_eval() const { return kind_ == OrbitKind::closed_form; }

    /// Extended-precision holomorphic position (monodromy work is conditioned
    /// like e^{2 lambda |Re t|}, which exceeds double precision).
    std::array<std::complex<long double>, 2> position_complex_ld(std::complex<long double> t) const;

    /// Distance from the nearest pole of the holomorphic extension to the
    /// segment t0 -> t1 (closed-form only; used for path checks).
    double pole_distance(cd t0, cd t1) const;

    /// View of the same connection with time origin moved: result(t) = this(t + tau).
    Orbit shifted(double tau) const;

    /// CSV rows t, x1, x2, dx1, dx2, H_error on n uniform samples of [a, b].
    std::string to_csv(double a, double b, int n) const;

private:
    friend Orbit closed_form_orbit(const std::string&, int);
    friend struct ShootAccess;

    OrbitKind kind_ = OrbitKind::closed_form;
    PlanarSystem sys_;
    Saddle source_, target_;
    double h_ = 0.0;
    std::string id_;
    double shift_ = 0.0;

    // closed-form payload
    std::string preset_;
    int branch_ = 1;

    // numeric payload: uniform grid with exact velocities/accelerations
    double t_lo_ = 0.0, t_hi_ = 0.0, dt_ = 0.0;
    std::vector<Vec2> xs_, vs_, as_;
    double tail_c_minus_ = 0.0, tail_c_plus_ = 0.0;  // eigen-coefficients of the tail anchors

    Vec2 eval_position(double t) const;
};

/// Exact orbits of the built-in presets (paper parametrization, t = 0 at the apex).
Orbit closed_form_orbit(const std::string& preset, int branch = +1);

struct ShootOptions {
    double delta0 = 1e-8;     // seed offset along the unstable eigenvector
    double r_stop = 1e-6;     // capture radius around the target saddle
    double rtol = 1e-13;
    double atol = 1e-15;
    double tol_energy = 1e-8;
    double box = 0.0;         // 0 = auto (3x the separatrix extent estimate)
    double t_max = 400.0;
    int branch = +1;
    double grid_dt = 0.0;     // 0 = auto
};

/// Numerically shoot the connection from one saddle to another and return a
/// dense-output Orbit (t = 0 at the arclength midpoint of the connection).
Orbit shoot_separatrix(const PlanarSystem& sys, const Saddle& from, const Saddle& to,
                       const ShootOptions& opts = {});

/// x^h(t) and its derivative J DH(x^h(t)).
OrbitPoint orbit_eval(const Orbit& orbit, double t);

}  // namespace sepmel
