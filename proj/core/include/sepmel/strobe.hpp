#pragma once

#include <vector>

#include "sepmel/orbit.hpp"

namespace sepmel {

/// Time-2pi/omega flow map of the forced system at section phase theta0.
struct StrobeMap {
    PlanarSystem sys;
    double eps = 0.0;
    double theta0 = 0.0;
    double rtol = 1e-12;
    double atol = 1e-14;
    double box = 12.0;

    double period() const { return 2.0 * M_PI / sys.omega; }
};

Vec2 strobe(const StrobeMap& map, Vec2 x);
/// Time-reversed integration over one period (exact inverse of strobe).
Vec2 inverse_strobe(const StrobeMap& map, Vec2 x);

/// Central finite-difference Jacobian of the strobe map.
Mat2 strobe_jacobian(const StrobeMap& map, Vec2 x, double h = 4e-6);

struct PeriodicSaddle {
    Vec2 x;
    cd mu_u, mu_s;   // multipliers, |mu_u| >= |mu_s|
    Vec2 w_u, w_s;   // unit eigenvectors when the multipliers are real
    bool hyperbolic = false;
};

/// Fixed point of the strobe map by Newton with FD Jacobian.
PeriodicSaddle periodic_saddle(const StrobeMap& map, Vec2 guess);

enum class ManifoldSide { unstable, stable };

struct ManifoldTrace {
    Vec2 anchor;
    ManifoldSide side;
    std::vector<Vec2> points;
    std::vector<double> arclength;
};

struct ManifoldOptions {
    double delta_seed = 1e-7;
    double ds_max = 1e-3;
    int direction = +1;      // sign of the eigenvector used for the seed
    std::size_t max_points = 2'000'000;
};

/// Grow a 1-D invariant manifold of the strobe map by fundamental-domain
/// refinement up to the requested arclength.
ManifoldTrace manifold_trace(const StrobeMap& map, const PeriodicSaddle& ps, ManifoldSide side,
                             double length, const ManifoldOptions& opts = {});

std::string trace_to_csv(const ManifoldTrace& t);

struct SplitSample {
    double theta;
    double d;         // signed manifold distance along the DH normal
    double d_scaled;  // d * |DH(x_ref)| / eps
};

struct SplittingOptions {
    double delta_seed = 1e-7;
    double trust_radius = 0.6;
    int threads = 1;
    int max_generations = 24;
};

/// Measured separatrix splitting at the section through x^h(0) along the
/// DH normal, for each phase in theta_grid.
std::vector<SplitSample> splitting_profile(const PlanarSystem& sys, const Orbit& orbit, double eps,
                                           const std::vector<double>& theta_grid,
                                           const SplittingOptions& opts = {});

}  // namespace sepmel
