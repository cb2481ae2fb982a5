#include "sepmel/variational.hpp"

#include <array>
#include <cmath>

#include "json.hpp"
#include "sepmel/log.hpp"
#include "sepmel/ode.hpp"
#include "sepmel/quadrature.hpp"

namespace sepmel {

namespace {

// one Aitken delta-squared sweep
std::vector<double> aitken(const std::vector<double>& x) {
    std::vector<double> y;
    for (std::size_t k = 0; k + 2 < x.size(); ++k) {
        double den = x[k + 2] - 2.0 * x[k + 1] + x[k];
        y.push_back(std::abs(den) < 1e-300 ? x[k + 2]
                                           : x[k + 2] - (x[k + 2] - x[k + 1]) * (x[k + 2] - x[k + 1]) / den);
    }
    if (y.empty()) y.push_back(x.back());
    return y;
}

double extrapolate(std::vector<double> x) {
    while (x.size() >= 3) x = aitken(x);
    return x.back();
}

int pick_axis(const PlanarSystem& sys, const Saddle& sp, const Saddle& sm) {
    double h22p = std::abs(sys.H22.eval(sp.x.x, sp.x.y));
    double h22m = std::abs(sys.H22.eval(sm.x.x, sm.x.y));
    if (h22p > 1e-12 && h22m > 1e-12) return 2;
    double h11p = std::abs(sys.H11.eval(sp.x.x, sp.x.y));
    double h11m = std::abs(sys.H11.eval(sm.x.x, sm.x.y));
    if (h11p > 1e-12 && h11m > 1e-12) return 1;
    throw Error(ErrorCode::DegenerateHessian, "both D^2_{x1}H and D^2_{x2}H vanish at a saddle");
}

Mat2 q_minus_basis(const Saddle& s) { return columns(s.v_s, s.v_u); }  // (-l, +l)
Mat2 q_plus_basis(const Saddle& s) { return columns(s.v_u, s.v_s); }   // (+l, -l)

// variational coefficient along the orbit
Mat2 ve_matrix(const PlanarSystem& sys, const Orbit& orbit, double t) {
    return sys.jac_field(orbit.eval(t).x);
}

struct ScaledVec {
    Vec2 v;
    double log_scale = 0.0;  // true vector = v * exp(log_scale)
};

/// Integrate the xi-variational equation from t0 to t1 with norm rescaling.
ScaledVec propagate_ve(const PlanarSystem& sys, const Orbit& orbit, Vec2 y0, double t0, double t1,
                       const VariationalOptions& opts) {
    ScaledVec s{y0, 0.0};
    auto f = [&](double t, const std::array<double, 2>& y, std::array<double, 2>& dy) {
        Mat2 A = ve_matrix(sys, orbit, t);
        dy[0] = A.a11 * y[0] + A.a12 * y[1];
        dy[1] = A.a21 * y[0] + A.a22 * y[1];
    };
    OdeOptions oo;
    oo.rtol = opts.rtol;
    oo.atol = opts.atol;
    const double dir = (t1 > t0) ? 1.0 : -1.0;
    const double chunk = 2.0;
    double t = t0;
    std::array<double, 2> y{s.v.x, s.v.y};
    while (dir * (t1 - t) > 1e-14) {
        double tn = t + dir * std::min(chunk, dir * (t1 - t));
        y = ode_integrate(f, t, y, tn, oo);
        t = tn;
        double n = std::hypot(y[0], y[1]);
        if (n > 1e4 || (n < 1e-4 && n > 0.0)) {
            y[0] /= n;
            y[1] /= n;
            s.log_scale += std::log(n);
        }
    }
    s.v = {y[0], y[1]};
    return s;
}

Mat2 shear_gauge(const Mat2& Q, double g) {
    // Q [[1,0],[g,1]] Q^{-1}
    Mat2 s{1.0, 0.0, g, 1.0};
    return Q * s * inverse(Q);
}

CVec2 mat_apply(const Mat2& m, CVec2 v) {
    return {m.a11 * v.x + m.a12 * v.y, m.a21 * v.x + m.a22 * v.y};
}

// ---- extended-precision helpers for the continuation path ----

using cld = std::complex<long double>;

cld eval_rpoly_ld(const RPoly2& p, cld x, cld y) {
    cld acc{};
    for (const auto& [e, c] : p.terms()) {
        cld t((long double)c, 0.0L);
        for (int k = 0; k < e.first; ++k) t *= x;
        for (int k = 0; k < e.second; ++k) t *= y;
        acc += t;
    }
    return acc;
}

cld eval_cpoly_ld(const CPoly2& p, cld x, cld y) {
    cld acc{};
    for (const auto& [e, c] : p.terms()) {
        cld t((long double)c.real(), (long double)c.imag());
        for (int k = 0; k < e.first; ++k) t *= x;
        for (int k = 0; k < e.second; ++k) t *= y;
        acc += t;
    }
    return acc;
}

struct LMat3 {
    std::array<std::array<cld, 3>, 3> m{};
    cld& operator()(int i, int j) { return m[i][j]; }
    const cld& operator()(int i, int j) const { return m[i][j]; }

    LMat3 operator*(const LMat3& o) const {
        LMat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                cld s{};
                for (int k = 0; k < 3; ++k) s += m[i][k] * o.m[k][j];
                r.m[i][j] = s;
            }
        return r;
    }
    static LMat3 identity() {
        LMat3 r;
        for (int i = 0; i < 3; ++i) r.m[i][i] = 1.0L;
        return r;
    }
};

LMat3 inverse(const LMat3& a) {
    auto c = [&](int i, int j) {
        int i1 = (i + 1) % 3, i2 = (i + 2) % 3, j1 = (j + 1) % 3, j2 = (j + 2) % 3;
        return a(i1, j1) * a(i2, j2) - a(i1, j2) * a(i2, j1);
    };
    cld det = a(0, 0) * c(0, 0) + a(0, 1) * c(0, 1) + a(0, 2) * c(0, 2);
    LMat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = c(j, i) / det;
    return r;
}

}  // namespace

OrbitAsymptotics orbit_asymptotics(const Orbit& orbit) {
    const PlanarSystem& sys = orbit.system();
    const Saddle& sp = orbit.target();
    const Saddle& sm = orbit.source();
    OrbitAsymptotics oa;
    oa.axis = pick_axis(sys, sp, sm);

    auto limit_vec = [&](int side) {
        double lam = (side > 0) ? sp.lambda : sm.lambda;
        double t_side = (side > 0) ? orbit.t_grid_hi() : -orbit.t_grid_lo();
        double T0 = std::min(14.0 / lam, 0.70 * t_side);
        double dT = std::min(0.9 / lam, 0.05 * t_side);
        std::vector<double> fx, fy;
        for (int k = 0; k < 6; ++k) {
            double T = T0 + k * dT;
            OrbitPoint p = orbit.eval(side * T);
            double w = std::exp(lam * T);
            fx.push_back(p.xdot.x * w);
            fy.push_back(p.xdot.y * w);
        }
        return Vec2{extrapolate(fx), extrapolate(fy)};
    };
    oa.xi_plus = limit_vec(+1);
    oa.xi_minus = limit_vec(-1);

    auto chi_closed = [&](const Saddle& s, Vec2 xi, int sign) {
        double haa = (oa.axis == 2) ? sys.H22.eval(s.x.x, s.x.y) : sys.H11.eval(s.x.x, s.x.y);
        double comp = (oa.axis == 2) ? xi.x : xi.y;
        if (std::abs(comp) < 1e-12)
            throw Error(ErrorCode::DegenerateHessian, "vanishing xi component for the chosen axis");
        return sign * haa / (2.0 * s.lambda * comp * comp);
    };
    // the chi primitive grows toward +inf and falls from -inf, hence the sign split
    oa.chi_plus = chi_closed(sp, oa.xi_plus, +1);
    oa.chi_minus = chi_closed(sm, oa.xi_minus, -1);
    return oa;
}

Mat2 fundamental_X(const Orbit& orbit, double t, int branch) {
    if (branch != 1 && branch != -1) throw Error(ErrorCode::InvalidConfig, "branch must be +1 or -1");
    const PlanarSystem& sys = orbit.system();
    OrbitAsymptotics oa = orbit_asymptotics(orbit);
    const double t_ref = branch * 1.0;

    auto denom = [&](double s) {
        OrbitPoint p = orbit.eval(s);
        return (oa.axis == 2) ? sys.H2.eval(p.x.x, p.x.y) : sys.H1.eval(p.x.x, p.x.y);
    };
    // guard against a pole of chi between the reference point and t
    {
        int n = 64 + static_cast<int>(16.0 * std::abs(t - t_ref));
        double d0 = denom(t_ref);
        for (int i = 1; i <= n; ++i) {
            double s = t_ref + (t - t_ref) * i / n;
            double d = denom(s);
            if (d * d0 <= 0.0 || std::abs(d) < 1e-12)
                throw Error(ErrorCode::PoleCrossing, "zero of D_aH(x^h) between t_ref and t");
        }
    }

    auto integrand = [&](double s) -> cd {
        OrbitPoint p = orbit.eval(s);
        double num = (oa.axis == 2) ? sys.H22.eval(p.x.x, p.x.y) : sys.H11.eval(p.x.x, p.x.y);
        double den = denom(s);
        return cd(num / (den * den), 0.0);
    };
    // chi grows like e^{2 lambda |t|}; tolerate relative to its own size
    double chi = (t == t_ref) ? 0.0 : quad_adaptive(integrand, t_ref, t, 1e-13, 1e-12).value.real();

    OrbitPoint p = orbit.eval(t);
    Vec2 v = p.xdot;
    double den = denom(t);
    Vec2 w = (oa.axis == 2) ? Vec2{0.0, 1.0 / den} : Vec2{1.0 / den, 0.0};
    Vec2 col2 = v * chi + w;
    return columns(v, col2);
}

std::pair<CVec2, CVec2> c_vectors(const PlanarSystem& sys, const Saddle& plus, const Saddle& minus,
                                  int ell) {
    if (ell == 0) throw Error(ErrorCode::InvalidConfig, "ell must be nonzero");
    double w = sys.omega;
    auto one = [&](const Saddle& s) {
        CVec2 g = sys.g.coeff_hat_at(ell, s.x);
        CMat2 A(sys.jac_field(s.x));
        cd ilw(0.0, ell * w);
        CVec2 num{A.a11 * g.x + A.a12 * g.y + ilw * g.x, A.a21 * g.x + A.a22 * g.y + ilw * g.y};
        double den = s.lambda * s.lambda + double(ell) * ell * w * w;
        return CVec2{-num.x / den, -num.y / den};
    };
    return {one(plus), one(minus)};
}

MValues m_values(const Orbit& orbit, const PlanarSystem& sys, int ell, double tol) {
    if (ell == 0) throw Error(ErrorCode::InvalidConfig, "ell must be nonzero");
    MValues m;
    auto [v, e] = melnikov_coefficient(orbit, sys, ell, tol);
    m.m_minus = 0.0;
    m.m_plus = v;
    m.err = e;
    return m;
}

ConnectionMatrices connection_matrices(const PlanarSystem& sys, const Orbit& orbit,
                                       const VariationalOptions& opts) {
    const Saddle& sm = orbit.source();
    const Saddle& sp = orbit.target();
    const Mat2 Qm = q_minus_basis(sm), Qp = q_plus_basis(sp);
    const double Tm = opts.decay_exponent / sm.lambda;
    const double Tp = opts.decay_exponent / sp.lambda;

    // distinguished solutions, each integrated in its dominant direction
    ScaledVec um0 = propagate_ve(sys, orbit, sm.v_u, -Tm, 0.0, opts);  // u_-(0) * e^{+lam Tm} scaled
    ScaledVec sp0 = propagate_ve(sys, orbit, sp.v_s, Tp, 0.0, opts);   // s_+(0) * e^{+lam Tp} scaled
    Vec2 u_minus0 = um0.v * std::exp(um0.log_scale - sm.lambda * Tm);
    Vec2 s_plus0 = sp0.v * std::exp(sp0.log_scale - sp.lambda * Tp);

    // Wronskian completion: det[u_+, s_+] = det Q_+ and det[s_-, u_-] = det Q_-
    double dp = Qp.det(), dm = Qm.det();
    double nsp = dot(s_plus0, s_plus0), num = dot(u_minus0, u_minus0);
    if (nsp < 1e-280 || num < 1e-280)
        throw Error(ErrorCode::IllConditioned, "distinguished solution collapsed");
    Vec2 u_plus0{dp / nsp * s_plus0.y, -dp / nsp * s_plus0.x};
    Vec2 s_minus0{dm / num * u_minus0.y, -dm / num * u_minus0.x};

    Mat2 plus_frame = columns(u_plus0, s_plus0);
    double cond = std::abs(plus_frame.det()) / (u_plus0.norm() * s_plus0.norm());
    if (cond < 1e-12) throw Error(ErrorCode::IllConditioned, "matching frame nearly singular");

    Mat2 C = inverse(plus_frame) * columns(s_minus0, u_minus0);

    ConnectionMatrices out;
    out.T_minus = Tm;
    out.T_plus = Tp;
    // B~_-(g) = Q_- [[1,0],[g,1]] Q_-^{-1} (so the default gauge is the identity),
    // B~_+(v) = Q_- C^{-1} Q_+^{-1} shear(v); B0 = B_+^{-1} B_-.
    out.B_minus = shear_gauge(Qm, opts.gauge_minus);
    out.B_plus = Qm * inverse(C) * inverse(Qp) * shear_gauge(Qp, opts.gauge_plus);
    out.B0 = inverse(out.B_plus) * out.B_minus;

    // defining-limit residuals of the asymptotic matching at the window ends
    {
        ScaledVec upT = propagate_ve(sys, orbit, u_plus0, 0.0, Tp, opts);
        Vec2 up_scaled = upT.v * std::exp(upT.log_scale - sp.lambda * Tp);
        Mat2 r = columns(up_scaled, sp.v_s) * inverse(Qp);
        Mat2 e = r + Mat2{-1, 0, 0, -1};
        out.residual_plus =
            std::sqrt(e.a11 * e.a11 + e.a12 * e.a12 + e.a21 * e.a21 + e.a22 * e.a22);
    }
    {
        ScaledVec smT = propagate_ve(sys, orbit, s_minus0, 0.0, -Tm, opts);
        Vec2 sm_scaled = smT.v * std::exp(smT.log_scale - sm.lambda * Tm);
        Mat2 r = columns(sm_scaled, sm.v_u) * inverse(Qm);
        Mat2 e = r + Mat2{-1, 0, 0, -1};
        out.residual_minus =
            std::sqrt(e.a11 * e.a11 + e.a12 * e.a12 + e.a21 * e.a21 + e.a22 * e.a22);
    }
    return out;
}

AsymptoticData make_asymptotic_data(const PlanarSystem& sys, const Orbit& orbit, int ell,
                                    const VariationalOptions& opts) {
    AsymptoticData d;
    d.ell = ell;
    d.omega = sys.omega;
    d.lambda_plus = orbit.lambda_plus();
    d.lambda_minus = orbit.lambda_minus();

    OrbitAsymptotics oa = orbit_asymptotics(orbit);
    d.xi_plus = oa.xi_plus;
    d.xi_minus = oa.xi_minus;
    d.chi_plus = oa.chi_plus;
    d.chi_minus = oa.chi_minus;
    d.axis = oa.axis;

    auto [cp, cm] = c_vectors(sys, orbit.target(), orbit.source(), ell);
    d.c_plus = cp;
    d.c_minus = cm;

    MValues mv = m_values(orbit, sys, ell, opts.quad_tol);
    d.m_minus = mv.m_minus;
    d.m_plus = mv.m_plus;
    d.m_err = mv.err;

    auto zeta = [&](Vec2 xi, double chi) {
        Vec2 offs = (d.axis == 2) ? Vec2{0.0, 1.0 / xi.x} : Vec2{-1.0 / xi.y, 0.0};
        return xi * chi + offs;
    };
    Vec2 zp = zeta(d.xi_plus, d.chi_plus);
    Vec2 zm = zeta(d.xi_minus, d.chi_minus);
    d.b_plus = CVec2{-zp.x * d.m_plus - d.c_plus.x, -zp.y * d.m_plus - d.c_plus.y};
    d.b_minus = CVec2{-zm.x * d.m_minus - d.c_minus.x, -zm.y * d.m_minus - d.c_minus.y};

    ConnectionMatrices cm2 = connection_matrices(sys, orbit, opts);
    d.B_plus = cm2.B_plus;
    d.B_minus = cm2.B_minus;
    d.B0 = cm2.B0;
    d.connection_residual = std::max(cm2.residual_minus, cm2.residual_plus);

    d.Q_plus = q_plus_basis(orbit.target());
    d.Q_minus = q_minus_basis(orbit.source());
    return d;
}

MonodromyPair monodromy_pair(const AsymptoticData& d) {
    MonodromyPair p;
    double mu_m = std::exp(-2.0 * M_PI * d.ell * d.omega / d.lambda_minus);
    double mu_p = std::exp(2.0 * M_PI * d.ell * d.omega / d.lambda_plus);

    CVec2 top_m = d.c_minus * cd(mu_m - 1.0, 0.0);
    p.M_minus = block_upper(CMat2::identity(), top_m, mu_m);

    CVec2 bpc{d.b_plus.x + d.c_plus.x, d.b_plus.y + d.c_plus.y};
    CVec2 t = mat_apply(inverse(d.B0), bpc);
    CVec2 top_p{(t.x - d.b_minus.x) * (mu_p - 1.0), (t.y - d.b_minus.y) * (mu_p - 1.0)};
    p.M_plus = block_upper(CMat2::identity(), top_p, mu_p);

    p.commutator_norm = commutator_frobenius(p.M_plus, p.M_minus);
    return p;
}

Verdict commutator_certificate(const MonodromyPair& pair, double tol) {
    return pair.commutator_norm > tol ? Verdict::NonIntegrable : Verdict::Inconclusive;
}

CMat3 monodromy_side_closed_form(const AsymptoticData& d, int side) {
    double lam = (side > 0) ? d.lambda_plus : d.lambda_minus;
    double mu = std::exp(side * 2.0 * M_PI * d.ell * d.omega / lam);
    CVec2 c = (side > 0) ? d.c_plus : d.c_minus;
    return block_upper(CMat2::identity(), c * cd(mu - 1.0, 0.0), mu);
}

CMat3 monodromy_via_continuation(const PlanarSystem& sys, const Orbit& orbit, int ell, int side,
                                 const ContinuationOptions& opts) {
    if (!orbit.has_complex_eval())
        throw Error(ErrorCode::InvalidConfig,
                    "continuation requires a closed-form (holomorphic) orbit");
    if (ell == 0) throw Error(ErrorCode::InvalidConfig, "ell must be nonzero");
    if (side != 1 && side != -1) throw Error(ErrorCode::InvalidConfig, "side must be +1 or -1");

    const Saddle& sd = (side > 0) ? orbit.target() : orbit.source();
    const double lam = sd.lambda;
    const double w = sys.omega;
    const Mat2 Q = (side > 0) ? q_plus_basis(sd) : q_minus_basis(sd);
    const Mat2 Qi = inverse(Q);
    const cd ilw(0.0, ell * w);

    const double t0 = side * opts.re_t0;
    const double sigma = -side;  // orientation fixing the eta-corner of the result

    cd loop_end = cd(t0, 0.0) + cd(0.0, sigma * 2.0 * M_PI / lam);
    if (orbit.pole_distance(cd(t0, 0.0), loop_end) < 0.3)
        throw Error(ErrorCode::PoleOnPath, "orbit pole too close to the continuation path");

    const cld ilw_ld(0.0L, (long double)(ell)*w);

    // Phi_side(t): closed-form asymptotic frame of the limit system
    auto phi_frame = [&](long double t) {
        long double e_first = std::exp(side * (long double)lam * t);
        long double e_second = std::exp(-side * (long double)lam * t);
        auto qv = [&](double a) { return (long double)a; };
        // X = Q diag(e1, e2) Q^{-1}
        long double X11 = qv(Q.a11) * e_first * qv(Qi.a11) + qv(Q.a12) * e_second * qv(Qi.a21);
        long double X12 = qv(Q.a11) * e_first * qv(Qi.a12) + qv(Q.a12) * e_second * qv(Qi.a22);
        long double X21 = qv(Q.a21) * e_first * qv(Qi.a11) + qv(Q.a22) * e_second * qv(Qi.a21);
        long double X22 = qv(Q.a21) * e_first * qv(Qi.a12) + qv(Q.a22) * e_second * qv(Qi.a22);
        CVec2 g = sys.g.coeff_hat_at(ell, sd.x);
        cld g1((long double)g.x.real(), (long double)g.x.imag());
        cld g2((long double)g.y.real(), (long double)g.y.imag());
        cld gq1 = qv(Qi.a11) * g1 + qv(Qi.a12) * g2;
        cld gq2 = qv(Qi.a21) * g1 + qv(Qi.a22) * g2;
        cld mu1 = cld(-side * (long double)lam, 0.0L) + ilw_ld;
        cld mu2 = cld(side * (long double)lam, 0.0L) + ilw_ld;
        cld y1 = (std::exp(mu1 * t) - 1.0L) / mu1 * gq1;
        cld y2 = (std::exp(mu2 * t) - 1.0L) / mu2 * gq2;
        cld Y1 = qv(Q.a11) * y1 + qv(Q.a12) * y2;
        cld Y2 = qv(Q.a21) * y1 + qv(Q.a22) * y2;
        LMat3 F;
        F(0, 0) = X11; F(0, 1) = X12; F(0, 2) = X11 * Y1 + X12 * Y2;
        F(1, 0) = X21; F(1, 1) = X22; F(1, 2) = X21 * Y1 + X22 * Y2;
        F(2, 2) = std::exp(ilw_ld * t);
        return F;
    };

    using State = std::array<cld, 9>;
    auto pack = [](const LMat3& m) {
        State s;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) s[3 * i + j] = m(i, j);
        return s;
    };
    auto unpack = [](const State& s) {
        LMat3 m;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) m(i, j) = s[3 * i + j];
        return m;
    };

    const CPolyVec2 ghat = sys.g.coeff_hat(ell);
    auto rhs = [&](cld t, const State& y, State& dy, cld dt_ds) {
        auto x = orbit.position_complex_ld(t);
        cld h11 = eval_rpoly_ld(sys.H11, x[0], x[1]);
        cld h12 = eval_rpoly_ld(sys.H12, x[0], x[1]);
        cld h22 = eval_rpoly_ld(sys.H22, x[0], x[1]);
        cld g1 = eval_cpoly_ld(ghat.c1, x[0], x[1]);
        cld g2 = eval_cpoly_ld(ghat.c2, x[0], x[1]);
        // A = [[h12, h22, g1], [-h11, -h12, g2], [0, 0, i l w]]
        for (int j = 0; j < 3; ++j) {
            cld r0 = y[0 + j], r1 = y[3 + j], r2 = y[6 + j];
            dy[0 + j] = (h12 * r0 + h22 * r1 + g1 * r2) * dt_ds;
            dy[3 + j] = (-h11 * r0 - h12 * r1 + g2 * r2) * dt_ds;
            dy[6 + j] = (ilw_ld * r2) * dt_ds;
        }
    };

    OdeOptions oo;
    oo.rtol = opts.rtol;
    oo.atol = opts.atol;

    // The raw asymptotic frame Phi_side is only e^{-lambda |t0|}-accurate at the
    // base point, which is not enough at |t0| ~ 8; transporting it from deeper
    // along the real axis is dichotomy-unstable. Instead correct it in place to
    // O(z^2), z = e^{-side lambda t}: Psi = (I + P1 z) Phi_side with P1 from the
    // order-z matching condition (a Sylvester equation, nonresonant at order 1).
    CMat3 P1;
    {
        OrbitAsymptotics oa = orbit_asymptotics(orbit);
        Vec2 xi = (side > 0) ? oa.xi_plus : oa.xi_minus;
        Vec2 w1 = xi * (-side / lam);  // leading coefficient of x^h(t) - x_side in z

        Vec2 xs = sd.x;
        double d111 = sys.H111.eval(xs.x, xs.y), d112 = sys.H112.eval(xs.x, xs.y);
        double d122 = sys.H122.eval(xs.x, xs.y), d222 = sys.H222.eval(xs.x, xs.y);
        // directional derivative of the Hessian along w1, then J *
        double m11 = d111 * w1.x + d112 * w1.y, m12 = d112 * w1.x + d122 * w1.y;
        double m22 = d122 * w1.x + d222 * w1.y;
        Mat2 jd{m12, m22, -m11, -m12};

        const CPolyVec2 gh = sys.g.coeff_hat(ell);
        cd xc(xs.x, 0.0), yc(xs.y, 0.0);
        cd dg1 = gh.c1.d_x1().eval(xc, yc) * w1.x + gh.c1.d_x2().eval(xc, yc) * w1.y;
        cd dg2 = gh.c2.d_x1().eval(xc, yc) * w1.x + gh.c2.d_x2().eval(xc, yc) * w1.y;

        CMat3 V1;
        V1(0, 0) = jd.a11; V1(0, 1) = jd.a12; V1(0, 2) = dg1;
        V1(1, 0) = jd.a21; V1(1, 1) = jd.a22; V1(1, 2) = dg2;

        // eigenbasis of the limit matrix A~ = [[A, g],[0, i l w]]
        Mat2 A = sys.jac_field(xs);
        CVec2 g0 = sys.g.coeff_hat_at(ell, xs);
        CMat2 Ashift(A);
        Ashift.a11 -= ilw;
        Ashift.a22 -= ilw;
        CVec2 v3 = inverse(Ashift) * CVec2{-g0.x, -g0.y};
        CMat3 T;
        T(0, 0) = Q.a11; T(0, 1) = Q.a12; T(0, 2) = v3.x;
        T(1, 0) = Q.a21; T(1, 1) = Q.a22; T(1, 2) = v3.y;
        T(2, 2) = 1.0;
        CMat3 Ti = inverse(T);
        std::array<cd, 3> dd{cd(side * lam, 0.0), cd(-side * lam, 0.0), ilw};
        CMat3 W = Ti * V1 * T;
        CMat3 S;
        for (int i = 0; i < 3; ++i)
            for (int jj = 0; jj < 3; ++jj) {
                cd den = cd(-side * lam, 0.0) - dd[i] + dd[jj];
                S(i, jj) = W(i, jj) / den;
            }
        P1 = T * S * Ti;
    }

    const long double z0 = std::exp(-side * (long double)lam * (long double)t0);
    LMat3 corr = LMat3::identity();
    for (int i = 0; i < 3; ++i)
        for (int jj = 0; jj < 3; ++jj)
            corr(i, jj) += cld((long double)P1(i, jj).real(), (long double)P1(i, jj).imag()) * z0;
    LMat3 F0 = corr * phi_frame((long double)t0);
    State y = pack(F0);

    // one loop around the saddle: t = t0 + i sigma s
    {
        auto f = [&](double s, const State& yy, State& dyy) {
            rhs(cld((long double)t0, sigma * (long double)s), yy, dyy, cld(0.0L, sigma));
        };
        y = ode_integrate(f, 0.0, y, 2.0 * M_PI / lam, oo);
    }
    LMat3 M_ld = inverse(F0) * unpack(y);
    CMat3 out;
    for (int i = 0; i < 3; ++i)
        for (int jj = 0; jj < 3; ++jj)
            out(i, jj) = cd((double)M_ld(i, jj).real(), (double)M_ld(i, jj).imag());
    return out;
}

double chi_linear_coefficient(const Orbit& orbit, int side) {
    if (!orbit.has_complex_eval())
        throw Error(ErrorCode::InvalidConfig, "requires a closed-form (holomorphic) orbit");
    if (side != 1 && side != -1) throw Error(ErrorCode::InvalidConfig, "side must be +1 or -1");
    const PlanarSystem& sys = orbit.system();
    const Saddle& sd = (side > 0) ? orbit.target() : orbit.source();
    OrbitAsymptotics oa = orbit_asymptotics(orbit);
    const long double lam = sd.lambda;
    const long double tc = side * 3.0L / lam;

    // mean of chi'(t) over a vertical period circle: all z^k modes with k != 0
    // integrate to zero, leaving exactly the resonant constant term
    const int n = 512;
    cld acc{};
    for (int k = 0; k < n; ++k) {
        long double s = 2.0L * (long double)M_PIl / lam * k / n;
        auto x = orbit.position_complex_ld(cld(tc, s));
        cld num = (oa.axis == 2) ? eval_rpoly_ld(sys.H22, x[0], x[1])
                                 : eval_rpoly_ld(sys.H11, x[0], x[1]);
        cld den = (oa.axis == 2) ? eval_rpoly_ld(sys.H2, x[0], x[1])
                                 : eval_rpoly_ld(sys.H1, x[0], x[1]);
        acc += num / (den * den);
    }
    acc /= (long double)n;
    if (std::abs(acc.imag()) > 1e-8)
        SM_WARN("chi_linear_coefficient: imaginary residue %.3e", (double)std::abs(acc.imag()));
    return (double)acc.real();
}

CMat3 monodromy_side_resonant(const AsymptoticData& d, double chi_lin, int side) {
    const double lam = (side > 0) ? d.lambda_plus : d.lambda_minus;
    const double mu_exp = side * 2.0 * M_PI * d.ell * d.omega / lam;
    const cd mu = std::exp(cd(mu_exp, 0.0));
    const Mat2 Q = (side > 0) ? d.Q_plus : d.Q_minus;
    const CVec2 c = (side > 0) ? d.c_plus : d.c_minus;
    const Vec2 xi = (side > 0) ? d.xi_plus : d.xi_minus;
    const double chi = (side > 0) ? d.chi_plus : d.chi_minus;

    Vec2 offs = (d.axis == 2) ? Vec2{0.0, 1.0 / xi.x} : Vec2{-1.0 / xi.y, 0.0};
    Vec2 zeta = xi * chi + offs;

    // the chi log-jump around the loop maps the subdominant frame column to
    // itself plus gamma times the dominant one
    const double sigma = -side;
    cd dchi = cd(0.0, sigma * 2.0 * M_PI / lam) * chi_lin;
    Vec2 q_first{Q.a11, Q.a21};   // eigencolumn with rate side*lam
    Vec2 q_second{Q.a12, Q.a22};  // eigencolumn with rate -side*lam
    double nu = dot(xi, q_second);
    double sg = dot(zeta, q_first);
    cd gamma = dchi * (nu / sg);

    CVec2 wq = {cd(Q.a22, 0) * c.x - cd(Q.a12, 0) * c.y, -cd(Q.a21, 0) * c.x + cd(Q.a11, 0) * c.y};
    double qdet = Q.det();
    wq = wq * cd(1.0 / qdet, 0.0);  // Q^{-1} c

    CMat3 Msol = CMat3::identity();
    Msol(1, 0) = gamma;
    Msol(0, 2) = (mu - 1.0) * wq.x;
    Msol(1, 2) = (mu - 1.0) * wq.y - gamma * wq.x;
    Msol(2, 2) = mu;

    CMat3 B;
    B(0, 0) = Q.a11; B(0, 1) = Q.a12; B(1, 0) = Q.a21; B(1, 1) = Q.a22; B(2, 2) = 1.0;
    return B * Msol * inverse(B);
}

std::string monodromy_report_json(const AsymptoticData& d, const MonodromyPair& pair,
                                  Verdict verdict) {
    nlohmann::ordered_json j;
    j["ell"] = d.ell;
    j["omega"] = d.omega;
    j["lambda_plus"] = d.lambda_plus;
    j["lambda_minus"] = d.lambda_minus;
    auto mat = [](const CMat3& m) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (int i = 0; i < 3; ++i) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (int jj = 0; jj < 3; ++jj)
                row.push_back({{"re", m(i, jj).real()}, {"im", m(i, jj).imag()}});
            rows.push_back(row);
        }
        return rows;
    };
    j["M_plus"] = mat(pair.M_plus);
    j["M_minus"] = mat(pair.M_minus);
    j["commutator_norm"] = pair.commutator_norm;
    j["verdict"] = verdict_name(verdict);
    j["m_plus"] = {{"re", d.m_plus.real()}, {"im", d.m_plus.imag()}};
    j["connection_residual"] = d.connection_residual;
    return j.dump(2) + "\n";
}

}  // namespace sepmel
