#include "sepmel/quadrature.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace sepmel {

namespace {

// Gauss–Legendre nodes/weights on [-1, 1], computed once by Newton on P_n.
struct GaussRule {
    std::vector<double> x, w;
};

GaussRule make_rule(int n) {
    GaussRule r;
    r.x.resize(n);
    r.w.resize(n);
    for (int i = 0; i < n; ++i) {
        long double t = std::cos(M_PI * (i + 0.75L) / (n + 0.5L));
        for (int it = 0; it < 100; ++it) {
            long double p0 = 1.0L, p1 = t;
            for (int k = 2; k <= n; ++k) {
                long double p2 = ((2.0L * k - 1.0L) * t * p1 - (k - 1.0L) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            long double dp = n * (t * p1 - p0) / (t * t - 1.0L);
            long double dt = p1 / dp;
            t -= dt;
            if (std::abs((double)dt) < 1e-19) break;
        }
        long double p0 = 1.0L, p1 = t;
        for (int k = 2; k <= n; ++k) {
            long double p2 = ((2.0L * k - 1.0L) * t * p1 - (k - 1.0L) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        long double dp = n * (t * p1 - p0) / (t * t - 1.0L);
        r.x[i] = (double)t;
        r.w[i] = (double)(2.0L / ((1.0L - t * t) * dp * dp));
    }
    return r;
}

const GaussRule& rule15() {
    static const GaussRule r = make_rule(15);
    return r;
}
const GaussRule& rule7() {
    static const GaussRule r = make_rule(7);
    return r;
}

struct Panel {
    double a, b;
    std::complex<double> val;
    double err;
};

Panel eval_panel(const std::function<std::complex<double>(double)>& f, double a, double b, long& evals) {
    const GaussRule& g15 = rule15();
    const GaussRule& g7 = rule7();
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    std::complex<double> i15{}, i7{};
    for (int k = 0; k < 15; ++k) i15 += g15.w[k] * f(mid + half * g15.x[k]);
    for (int k = 0; k < 7; ++k) i7 += g7.w[k] * f(mid + half * g7.x[k]);
    evals += 22;
    i15 *= half;
    i7 *= half;
    return {a, b, i15, std::abs(i15 - i7)};
}

}  // namespace

QuadResult quad_adaptive(const std::function<std::complex<double>(double)>& f, double a, double b,
                         double tol_abs, double tol_rel) {
    QuadResult res;
    if (a == b) return res;
    if (a > b) {
        res = quad_adaptive(f, b, a, tol_abs, tol_rel);
        res.value = -res.value;
        return res;
    }

    std::vector<Panel> active;
    active.push_back(eval_panel(f, a, b, res.evals));

    const int max_panels = 4000;
    const double min_width = 1e-13 * std::abs(b - a);
    std::vector<Panel> done;

    while (!active.empty()) {
        // total pending error against the running tolerance
        double err_active = 0.0;
        std::complex<double> total{};
        for (const auto& p : active) {
            err_active += p.err;
            total += p.val;
        }
        double err_done = 0.0;
        for (const auto& p : done) {
            err_done += p.err;
            total += p.val;
        }
        double tol = tol_abs + tol_rel * std::abs(total);
        if (err_active + err_done <= tol) break;

        // split the worst active panel (deterministic: first maximal)
        std::size_t worst = 0;
        for (std::size_t i = 1; i < active.size(); ++i)
            if (active[i].err > active[worst].err) worst = i;
        Panel p = active[worst];
        active.erase(active.begin() + worst);

        if (p.b - p.a < min_width || (int)(active.size() + done.size()) > max_panels)
            throw Error(ErrorCode::ToleranceNotMet, "adaptive quadrature refinement exhausted");

        double mid = 0.5 * (p.a + p.b);
        Panel l = eval_panel(f, p.a, mid, res.evals);
        Panel r = eval_panel(f, mid, p.b, res.evals);
        // panels with negligible error retire to the done list
        for (Panel q : {l, r}) {
            if (q.err <= 0.02 * tol / std::max<std::size_t>(1, active.size() + done.size() + 2))
                done.push_back(q);
            else
                active.push_back(q);
        }
    }

    for (const auto& p : active) {
        res.value += p.val;
        res.err += p.err;
    }
    for (const auto& p : done) {
        res.value += p.val;
        res.err += p.err;
    }
    return res;
}

}  // namespace sepmel
