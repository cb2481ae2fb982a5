#include "sepmel/strobe.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <sstream>
#include <thread>

#include "sepmel/format.hpp"
#include "sepmel/log.hpp"
#include "sepmel/ode.hpp"

namespace sepmel {

namespace {

Vec2 flow_period(const StrobeMap& map, Vec2 x, bool reverse) {
    auto f = [&](double t, const std::array<double, 2>& y, std::array<double, 2>& dy) {
        double psi = reverse ? map.theta0 - map.sys.omega * t : map.theta0 + map.sys.omega * t;
        Vec2 v = perturbed_field(map.sys, {y[0], y[1]}, map.eps, psi);
        if (reverse) v = -v;
        dy[0] = v.x;
        dy[1] = v.y;
    };
    OdeOptions oo;
    oo.rtol = map.rtol;
    oo.atol = map.atol;
    const double T = map.period();
    const int chunks = 16;
    std::array<double, 2> y{x.x, x.y};
    for (int k = 0; k < chunks; ++k) {
        if (std::max(std::abs(y[0]), std::abs(y[1])) > map.box)
            throw Error(ErrorCode::Escape, "trajectory left the strobe bounding box");
        y = ode_integrate(f, T * k / chunks, y, T * (k + 1) / chunks, oo);
    }
    if (std::max(std::abs(y[0]), std::abs(y[1])) > map.box)
        throw Error(ErrorCode::Escape, "trajectory left the strobe bounding box");
    return {y[0], y[1]};
}

}  // namespace

Vec2 strobe(const StrobeMap& map, Vec2 x) { return flow_period(map, x, false); }

Vec2 inverse_strobe(const StrobeMap& map, Vec2 x) { return flow_period(map, x, true); }

Mat2 strobe_jacobian(const StrobeMap& map, Vec2 x, double h) {
    double hh = h * std::max(1.0, std::max(std::abs(x.x), std::abs(x.y)));
    Vec2 px1 = strobe(map, {x.x + hh, x.y}), mx1 = strobe(map, {x.x - hh, x.y});
    Vec2 px2 = strobe(map, {x.x, x.y + hh}), mx2 = strobe(map, {x.x, x.y - hh});
    return {(px1.x - mx1.x) / (2 * hh), (px2.x - mx2.x) / (2 * hh),
            (px1.y - mx1.y) / (2 * hh), (px2.y - mx2.y) / (2 * hh)};
}

PeriodicSaddle periodic_saddle(const StrobeMap& map, Vec2 guess) {
    Vec2 x = guess;
    bool ok = false;
    try {
        for (int it = 0; it < 30; ++it) {
            Vec2 F = strobe(map, x) - x;
            if (F.norm() < 1e-11) {
                ok = true;
                break;
            }
            Mat2 J = strobe_jacobian(map, x) + Mat2{-1, 0, 0, -1};
            if (std::abs(J.det()) < 1e-300)
                throw Error(ErrorCode::NoConvergence, "singular Newton system for the fixed point");
            Vec2 step = solve2(J, F);
            // the saddle multiplier e^{lambda T} makes the map violently
            // nonlinear one step out; keep Newton inside the local basin
            if (step.norm() > 0.2) step = step * (0.2 / step.norm());
            x = x - step;
            if (!std::isfinite(x.x) || !std::isfinite(x.y))
                throw Error(ErrorCode::NoConvergence, "fixed-point Newton diverged");
        }
        if (!ok && (strobe(map, x) - x).norm() >= 1e-9)
            throw Error(ErrorCode::NoConvergence, "fixed-point Newton stalled");
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Escape)
            throw Error(ErrorCode::NoConvergence, "fixed-point Newton left the bounding box");
        throw;
    }

    PeriodicSaddle ps;
    ps.x = x;
    Mat2 J = strobe_jacobian(map, x);
    double tr = J.a11 + J.a22, det = J.det();
    double disc = tr * tr - 4.0 * det;
    if (disc >= 0.0) {
        double rt = std::sqrt(disc);
        double m1 = 0.5 * (tr + rt), m2 = 0.5 * (tr - rt);
        if (std::abs(m1) < std::abs(m2)) std::swap(m1, m2);
        ps.mu_u = m1;
        ps.mu_s = m2;
        auto evec = [&](double mu) {
            Vec2 v = (std::abs(J.a12) >= std::abs(J.a21)) ? Vec2{J.a12, mu - J.a11}
                                                          : Vec2{mu - J.a22, J.a21};
            double n = v.norm();
            if (n < 1e-300) return Vec2{1.0, 0.0};
            v = v * (1.0 / n);
            if (v.x < -1e-14 || (std::abs(v.x) <= 1e-14 && v.y < 0.0)) v = -v;
            return v;
        };
        ps.w_u = evec(m1);
        ps.w_s = evec(m2);
        ps.hyperbolic = std::abs(m1) > 1.0 + 1e-9 && std::abs(m2) < 1.0 - 1e-9;
    } else {
        double rt = std::sqrt(-disc);
        ps.mu_u = cd(0.5 * tr, 0.5 * rt);
        ps.mu_s = cd(0.5 * tr, -0.5 * rt);
        ps.hyperbolic = false;
    }
    return ps;
}

namespace {

struct TraceJob {
    const StrobeMap& map;
    const PeriodicSaddle& ps;
    bool forward;  // true = unstable manifold (forward map)
    Vec2 seed_a, seed_dir;

    Vec2 seed(double sigma) const { return seed_a + seed_dir * sigma; }

    Vec2 advance(Vec2 p) const { return forward ? strobe(map, p) : inverse_strobe(map, p); }

    Vec2 point(double sigma, int gen) const {
        Vec2 p = seed(sigma);
        for (int k = 0; k < gen; ++k) p = advance(p);
        return p;
    }
};

// The fundamental domain [delta, mu delta] is chord-approximated linearly, so
// its length must stay below the scale on which the manifold curves.
double effective_seed(double delta_seed, const PeriodicSaddle& ps, bool forward) {
    double growth = forward ? std::abs(ps.mu_u) : 1.0 / std::abs(ps.mu_s);
    return std::min(delta_seed, 3e-4 / std::max(1.0, growth - 1.0));
}

}  // namespace

ManifoldTrace manifold_trace(const StrobeMap& map, const PeriodicSaddle& ps, ManifoldSide side,
                             double length, const ManifoldOptions& opts) {
    if (!ps.hyperbolic)
        throw Error(ErrorCode::LostHyperbolicity, "fixed point is not hyperbolic");

    TraceJob job{map, ps, side == ManifoldSide::unstable, {}, {}};
    Vec2 w = (side == ManifoldSide::unstable) ? ps.w_u : ps.w_s;
    w = w * static_cast<double>(opts.direction);
    job.seed_a = ps.x + w * effective_seed(opts.delta_seed, ps, job.forward);
    Vec2 b = job.advance(job.seed_a);
    job.seed_dir = b - job.seed_a;

    ManifoldTrace tr;
    tr.anchor = ps.x;
    tr.side = side;
    tr.points.push_back(job.seed_a);
    tr.arclength.push_back(0.0);

    int gen = 0;
    while (tr.arclength.back() < length) {
        // refine one fundamental-domain image [P(0,gen), P(1,gen)] to spacing <= ds_max
        struct Node {
            double sigma;
            Vec2 p;
        };
        std::deque<Node> work;
        work.push_back({0.0, tr.points.back()});
        Node right{1.0, job.point(1.0, gen)};
        std::vector<Node> emitted;
        while (!work.empty()) {
            Node left = work.front();
            Node r = work.size() > 1 ? work[1] : right;
            // bisect until the segment is short enough
            int depth = 0;
            while ((r.p - left.p).norm() > opts.ds_max) {
                if (++depth > 48)
                    throw Error(ErrorCode::FoldTooSharp, "curvature refinement exhausted");
                double sm = 0.5 * (left.sigma + r.sigma);
                r = {sm, job.point(sm, gen)};
                work.insert(work.begin() + 1, r);
            }
            emitted.push_back(left);
            work.pop_front();
        }
        emitted.push_back(right);
        for (std::size_t i = 1; i < emitted.size(); ++i) {
            double ds = (emitted[i].p - tr.points.back()).norm();
            tr.points.push_back(emitted[i].p);
            tr.arclength.push_back(tr.arclength.back() + ds);
            if (tr.points.size() > opts.max_points)
                throw Error(ErrorCode::FoldTooSharp, "manifold point budget exhausted");
            if (tr.arclength.back() >= length) return tr;
        }
        ++gen;
        if (gen > 64) throw Error(ErrorCode::FoldTooSharp, "generation budget exhausted");
    }
    return tr;
}

std::string trace_to_csv(const ManifoldTrace& t) {
    std::ostringstream os;
    os << "s,x1,x2\n";
    for (std::size_t i = 0; i < t.points.size(); ++i)
        os << format_double(t.arclength[i]) << ',' << format_double(t.points[i].x) << ','
           << format_double(t.points[i].y) << '\n';
    return os.str();
}

namespace {

/// Primary crossing of a 1-D manifold with the normal-line section: scan the
/// images of the fundamental domain generation by generation, bracket the sign
/// change of the tangential coordinate near x_ref, then bisect in the seed
/// parameter.
Vec2 section_crossing(const StrobeMap& map, const PeriodicSaddle& ps, bool forward, int dir_sign,
                      Vec2 x_ref, Vec2 normal, const SplittingOptions& opts) {
    TraceJob job{map, ps, forward, {}, {}};
    Vec2 w = forward ? ps.w_u : ps.w_s;
    w = w * static_cast<double>(dir_sign);
    job.seed_a = ps.x + w * effective_seed(opts.delta_seed, ps, forward);
    Vec2 b = job.advance(job.seed_a);
    job.seed_dir = b - job.seed_a;

    Vec2 tangent{-normal.y, normal.x};
    auto h_of = [&](Vec2 p) { return dot(p - x_ref, tangent); };

    const int K = 48;
    std::vector<Vec2> pts(K + 1);
    for (int i = 0; i <= K; ++i) pts[i] = job.seed(double(i) / K);

    for (int gen = 0; gen < opts.max_generations; ++gen) {
        for (int i = 0; i <= K; ++i) pts[i] = job.advance(pts[i]);
        int g = gen + 1;
        for (int i = 0; i < K; ++i) {
            Vec2 p0 = pts[i], p1 = pts[i + 1];
            if ((p0 - x_ref).norm() > opts.trust_radius && (p1 - x_ref).norm() > opts.trust_radius)
                continue;
            double h0 = h_of(p0), h1 = h_of(p1);
            if ((h0 < 0 && h1 >= 0) || (h0 > 0 && h1 <= 0)) {
                double lo = double(i) / K, hi = double(i + 1) / K;
                double hlo = h0;
                for (int it = 0; it < 52; ++it) {
                    double mid = 0.5 * (lo + hi);
                    Vec2 pm = job.point(mid, g);
                    double hm = h_of(pm);
                    if ((hlo < 0) == (hm < 0)) {
                        lo = mid;
                        hlo = hm;
                    } else {
                        hi = mid;
                    }
                }
                return job.point(0.5 * (lo + hi), g);
            }
        }
    }
    throw Error(ErrorCode::FoldTooSharp, "no section crossing within the generation budget");
}

}  // namespace

std::vector<SplitSample> splitting_profile(const PlanarSystem& sys, const Orbit& orbit, double eps,
                                           const std::vector<double>& theta_grid,
                                           const SplittingOptions& opts) {
    std::vector<SplitSample> out(theta_grid.size());
    if (theta_grid.empty()) return out;

    OrbitPoint ref = orbit.eval(0.0);
    Vec2 dh = sys.grad_H(ref.x);
    double dh_norm = dh.norm();
    Vec2 normal = dh * (1.0 / dh_norm);

    if (eps == 0.0) {
        // unperturbed manifolds coincide with the separatrix
        for (std::size_t i = 0; i < theta_grid.size(); ++i) out[i] = {theta_grid[i], 0.0, 0.0};
        return out;
    }

    // seed orientations from the orbit tails
    double t_tail = std::min(12.0 / orbit.lambda_minus(), -orbit.t_grid_lo());
    Vec2 dep = orbit.eval(-t_tail).xdot;
    double t_tail_p = std::min(12.0 / orbit.lambda_plus(), orbit.t_grid_hi());
    Vec2 arr = orbit.eval(t_tail_p).x - orbit.target().x;

    // Newton from the unperturbed saddle only converges while the one-period
    // response, amplified by e^{lambda T}, stays inside the local basin;
    // continue in eps from that scale, shrinking the step on failure.
    auto saddle_path = [&](double theta, Vec2 seed, double lambda) {
        double mu = std::exp(lambda * 2.0 * M_PI / sys.omega);
        double step = std::max(1e-6, 0.1 / mu);
        PeriodicSaddle ps = periodic_saddle(StrobeMap{sys, 0.0, theta}, seed);
        double eps_cur = 0.0;
        int attempts = 0;
        while (eps_cur < eps) {
            double eps_next = std::min(eps, eps_cur + step);
            try {
                PeriodicSaddle trial = periodic_saddle(StrobeMap{sys, eps_next, theta}, ps.x);
                ps = trial;
                eps_cur = eps_next;
                step *= 1.7;
            } catch (const Error&) {
                step *= 0.4;
                if (++attempts > 120 || step < 1e-9)
                    throw Error(ErrorCode::NoConvergence,
                                "eps-continuation of the periodic saddle stalled");
            }
        }
        return ps;
    };

    auto one = [&](double theta) -> SplitSample {
        StrobeMap map{sys, eps, theta};
        PeriodicSaddle pu = saddle_path(theta, orbit.source().x, orbit.lambda_minus());
        PeriodicSaddle psad = saddle_path(theta, orbit.target().x, orbit.lambda_plus());
        if (!pu.hyperbolic || !psad.hyperbolic)
            throw Error(ErrorCode::LostHyperbolicity, "perturbed fixed point not hyperbolic");
        int su = dot(pu.w_u, dep) >= 0 ? +1 : -1;
        int ss = dot(psad.w_s, arr) >= 0 ? +1 : -1;
        Vec2 cu = section_crossing(map, pu, true, su, ref.x, normal, opts);
        Vec2 cs = section_crossing(map, psad, false, ss, ref.x, normal, opts);
        double d = dot(cu - cs, normal);
        return {theta, d, d * dh_norm / eps};
    };

    int nthreads = std::max(1, opts.threads);
    if (nthreads == 1) {
        for (std::size_t i = 0; i < theta_grid.size(); ++i) out[i] = one(theta_grid[i]);
        return out;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(nthreads);
    for (int w = 0; w < nthreads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < theta_grid.size(); i += nthreads)
                    out[i] = one(theta_grid[i]);
            } catch (...) {
                errs[w] = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace sepmel
