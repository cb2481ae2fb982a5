#include "sepmel/melnikov.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "json.hpp"
#include "sepmel/log.hpp"
#include "sepmel/quadrature.hpp"

namespace sepmel {

namespace {

cd integrand_factor(const Orbit& orbit, const PlanarSystem& sys, int j, double t) {
    OrbitPoint p = orbit.eval(t);
    Vec2 dh = sys.grad_H(p.x);
    CVec2 gh = sys.g.coeff_hat_at(j, p.x);
    return dh.x * gh.x + dh.y * gh.y;
}

}  // namespace

std::pair<cd, double> melnikov_coefficient(const Orbit& orbit, const PlanarSystem& sys, int j,
                                           double tol) {
    if (std::abs(j) > sys.g.harmonics())
        throw Error(ErrorCode::InvalidConfig, "harmonic index beyond the field cutoff");
    if (sys.g.coeff_hat(j).empty()) return {cd{}, 0.0};

    const double lam_m = orbit.lambda_minus();
    const double lam_p = orbit.lambda_plus();
    const double lam_min = std::min(lam_m, lam_p);
    const double w = sys.omega;

    // window sized by the exponential decay of DH . g_hat_j along the orbit
    auto pick_T = [&](double sign, double lam) {
        double T = 20.0 / lam_min;
        while (T < 200.0 / lam && std::abs(integrand_factor(orbit, sys, j, sign * T)) / lam >
                                      tol / 10.0)
            T *= 1.25;
        return T;
    };
    const double Tm = pick_T(-1.0, lam_m);
    const double Tp = pick_T(+1.0, lam_p);

    auto f = [&](double t) {
        double ang = j * w * t;
        return integrand_factor(orbit, sys, j, t) * cd(std::cos(ang), std::sin(ang));
    };
    QuadResult q = quad_adaptive(f, -Tm, Tp, 0.5 * tol);

    // analytic tails from the decay model F(t) ~ F(+-T) e^{-lambda |t - (+-T)|}
    cd fp = integrand_factor(orbit, sys, j, Tp);
    cd fm = integrand_factor(orbit, sys, j, -Tm);
    cd tail_p = fp * cd(std::cos(j * w * Tp), std::sin(j * w * Tp)) / cd(lam_p, -j * w);
    cd tail_m = fm * cd(std::cos(j * w * Tm), -std::sin(j * w * Tm)) / cd(lam_m, j * w);

    double tail_err = (std::abs(tail_p) * std::exp(-lam_p * Tp) * lam_p +
                       std::abs(tail_m) * std::exp(-lam_m * Tm) * lam_m) *
                          10.0 +
                      1e-300;
    double err = q.err + tail_err;
    if (err > tol)
        throw Error(ErrorCode::ToleranceNotMet, "Melnikov coefficient error estimate above tol");
    return {q.value + tail_p + tail_m, err};
}

MelnikovSeries melnikov_series(const Orbit& orbit, const PlanarSystem& sys,
                               const MelnikovOptions& opts) {
    const int N = sys.g.harmonics();
    MelnikovSeries s;
    s.N = N;
    s.omega = sys.omega;
    s.orbit_id = orbit.id();
    s.convention =
        (orbit.kind() == OrbitKind::closed_form) ? "paper-parametrization" : "arclength-midpoint";
    s.coeffs.assign(2 * N + 1, cd{});
    s.err.assign(2 * N + 1, 0.0);

    auto compute = [&](int j) { return melnikov_coefficient(orbit, sys, j, opts.tol); };

    if (opts.threads > 1 && N > 0) {
        std::vector<std::future<std::pair<cd, double>>> futs;
        for (int j = -N; j <= N; ++j)
            futs.push_back(std::async(std::launch::async, compute, j));
        for (int j = -N; j <= N; ++j) {
            auto [v, e] = futs[j + N].get();
            s.coeffs[j + N] = v;
            s.err[j + N] = e;
        }
    } else {
        for (int j = -N; j <= N; ++j) {
            auto [v, e] = compute(j);
            s.coeffs[j + N] = v;
            s.err[j + N] = e;
        }
    }

    // enforce reality: Mhat_{-j} = conj(Mhat_j)
    for (int j = 1; j <= N; ++j) {
        cd plus = s.coeffs[N + j], minus = s.coeffs[N - j];
        double asym = std::abs(minus - std::conj(plus));
        if (asym > 10.0 * opts.tol)
            SM_WARN("Melnikov reality asymmetry %.3e at j=%d exceeds 10*tol", asym, j);
        cd sym = 0.5 * (plus + std::conj(minus));
        s.coeffs[N + j] = sym;
        s.coeffs[N - j] = std::conj(sym);
    }
    s.coeffs[N] = cd(s.coeffs[N].real(), 0.0);
    return s;
}

double eval_melnikov(const MelnikovSeries& s, double theta) {
    double v = s.coeffs[s.N].real();
    for (int j = 1; j <= s.N; ++j) {
        cd e(std::cos(j * theta), std::sin(j * theta));
        v += 2.0 * (s.coeffs[s.N + j] * e).real();
    }
    return v;
}

double eval_melnikov_deriv(const MelnikovSeries& s, double theta) {
    double v = 0.0;
    for (int j = 1; j <= s.N; ++j) {
        cd e(std::cos(j * theta), std::sin(j * theta));
        v += 2.0 * (cd(0.0, j) * s.coeffs[s.N + j] * e).real();
    }
    return v;
}

const char* verdict_name(Verdict v) {
    return v == Verdict::NonIntegrable ? "non-integrable" : "inconclusive";
}

Certificate certify_nonintegrability(const MelnikovSeries& s, double tol_cert) {
    Certificate c;
    c.tol_cert = tol_cert;
    c.witness = 1;
    for (int j = 1; j <= s.N; ++j) {
        double a = std::abs(s.coeff(j));
        if (a > c.witness_abs) {
            c.witness_abs = a;
            c.witness_err = s.coeff_err(j);
            c.witness = j;
        }
    }
    c.margin = c.witness_abs - (tol_cert + c.witness_err);
    c.verdict = (c.margin > 0.0) ? Verdict::NonIntegrable : Verdict::Inconclusive;
    return c;
}

std::vector<SimpleZero> simple_zeros(const MelnikovSeries& s, double tol_simple) {
    double osc = 0.0;
    for (int j = 1; j <= s.N; ++j) osc = std::max(osc, std::abs(s.coeff(j)));
    if (osc <= 1e-14)
        throw Error(ErrorCode::InvalidConfig, "simple_zeros requires a nonconstant series");

    const int m = std::max(64 * std::max(1, s.N), 256);
    std::vector<SimpleZero> zeros;
    double prev = eval_melnikov(s, 0.0);
    for (int i = 1; i <= m; ++i) {
        double th = 2.0 * M_PI * i / m;
        double cur = eval_melnikov(s, th);
        if ((prev < 0.0 && cur >= 0.0) || (prev > 0.0 && cur <= 0.0)) {
            double a = 2.0 * M_PI * (i - 1) / m, b = th;
            double fa = prev;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (a + b);
                double fm = eval_melnikov(s, mid);
                if ((fa < 0.0) == (fm < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            double th0 = 0.5 * (a + b);
            for (int it = 0; it < 4; ++it) {
                double d = eval_melnikov_deriv(s, th0);
                if (std::abs(d) < 1e-14) break;
                th0 -= eval_melnikov(s, th0) / d;
            }
            th0 = std::fmod(th0 + 2.0 * M_PI, 2.0 * M_PI);
            double d = eval_melnikov_deriv(s, th0);
            bool dup = false;
            for (const auto& z : zeros)
                if (std::abs(z.theta - th0) < 1e-9 ||
                    std::abs(std::abs(z.theta - th0) - 2.0 * M_PI) < 1e-9)
                    dup = true;
            if (!dup) zeros.push_back({th0, d, std::abs(d) > tol_simple});
        }
        prev = cur;
    }
    std::sort(zeros.begin(), zeros.end(),
              [](const SimpleZero& a, const SimpleZero& b) { return a.theta < b.theta; });
    return zeros;
}

double zero_existence_ratio(const MelnikovSeries& s, double tol_cert) {
    for (int j = 2; j <= s.N; ++j)
        if (std::abs(s.coeff(j)) > tol_cert)
            throw Error(ErrorCode::MultiHarmonic,
                        "series has harmonics beyond |j| = 1; use simple_zeros");
    double m0 = std::abs(s.coeff(0));
    double m1 = (s.N >= 1) ? std::abs(s.coeff(1)) : 0.0;
    if (m1 == 0.0) return (m0 == 0.0) ? 0.0 : std::numeric_limits<double>::infinity();
    return m0 / (2.0 * m1);
}

std::string series_to_json(const MelnikovSeries& s) {
    nlohmann::ordered_json j;
    j["omega"] = s.omega;
    j["N"] = s.N;
    j["convention"] = s.convention;
    j["orbit_id"] = s.orbit_id;
    j["coeffs"] = nlohmann::ordered_json::array();
    for (int k = -s.N; k <= s.N; ++k) {
        nlohmann::ordered_json c;
        c["j"] = k;
        c["re"] = s.coeff(k).real();
        c["im"] = s.coeff(k).imag();
        c["err"] = s.coeff_err(k);
        j["coeffs"].push_back(c);
    }
    return j.dump(2) + "\n";
}

MelnikovSeries series_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw Error(ErrorCode::SchemaViolation, std::string("invalid series JSON: ") + e.what());
    }
    MelnikovSeries s;
    s.N = j.at("N").get<int>();
    s.omega = j.at("omega").get<double>();
    s.convention = j.value("convention", std::string("unknown"));
    s.orbit_id = j.value("orbit_id", std::string());
    s.coeffs.assign(2 * s.N + 1, cd{});
    s.err.assign(2 * s.N + 1, 0.0);
    for (const auto& c : j.at("coeffs")) {
        int k = c.at("j").get<int>();
        if (std::abs(k) > s.N) throw Error(ErrorCode::SchemaViolation, "coefficient index beyond N");
        s.coeffs[k + s.N] = cd(c.at("re").get<double>(), c.at("im").get<double>());
        s.err[k + s.N] = c.value("err", 0.0);
    }
    return s;
}

}  // namespace sepmel
