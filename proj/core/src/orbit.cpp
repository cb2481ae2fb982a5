#include "sepmel/orbit.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "sepmel/format.hpp"
#include "sepmel/log.hpp"
#include "sepmel/ode.hpp"

namespace sepmel {

namespace {

struct QuinticBasis {
    double h0, h1, h2, h3, h4, h5;
};

QuinticBasis quintic(double s) {
    double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    return {1 - 10 * s3 + 15 * s4 - 6 * s5,
            s - 6 * s3 + 8 * s4 - 3 * s5,
            0.5 * (s2 - 3 * s3 + 3 * s4 - s5),
            10 * s3 - 15 * s4 + 6 * s5,
            -4 * s3 + 7 * s4 - 3 * s5,
            0.5 * (s3 - 2 * s4 + s5)};
}

double dist_point_segment(cd p, cd a, cd b) {
    cd ab = b - a;
    double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(p - a);
    double u = ((p - a).real() * ab.real() + (p - a).imag() * ab.imag()) / len2;
    u = std::clamp(u, 0.0, 1.0);
    return std::abs(p - (a + u * ab));
}

}  // namespace

Vec2 Orbit::eval_position(double t) const {
    double te = t + shift_;
    if (kind_ == OrbitKind::closed_form) {
        double s = static_cast<double>(branch_);
        if (preset_ == "duffing1") {
            double sech = 1.0 / std::cosh(te);
            return {s * std::sqrt(2.0) * sech, -s * std::sqrt(2.0) * sech * std::tanh(te)};
        }
        double u = te / std::sqrt(2.0);
        double sech = 1.0 / std::cosh(u);
        return {s * std::tanh(u), s * sech * sech / std::sqrt(2.0)};
    }

    if (te < t_lo_) {
        double c = tail_c_minus_ * std::exp(source_.lambda * (te - t_lo_));
        return source_.x + source_.v_u * c;
    }
    if (te > t_hi_) {
        double c = tail_c_plus_ * std::exp(-target_.lambda * (te - t_hi_));
        return target_.x + target_.v_s * c;
    }
    std::size_t n = xs_.size();
    double u = (te - t_lo_) / dt_;
    std::size_t k = std::min<std::size_t>(n - 2, static_cast<std::size_t>(std::max(0.0, std::floor(u))));
    double s = u - static_cast<double>(k);
    QuinticBasis q = quintic(s);
    double h = dt_, h2 = dt_ * dt_;
    Vec2 p = xs_[k] * q.h0 + vs_[k] * (h * q.h1) + as_[k] * (h2 * q.h2) + xs_[k + 1] * q.h3 +
             vs_[k + 1] * (h * q.h4) + as_[k + 1] * (h2 * q.h5);
    return p;
}

OrbitPoint Orbit::eval(double t) const {
    Vec2 x = eval_position(t);
    return {x, hamiltonian_field(sys_, x)};
}

std::pair<CVec2, CVec2> Orbit::eval_complex(cd t) const {
    if (kind_ != OrbitKind::closed_form)
        throw Error(ErrorCode::InvalidConfig, "complex evaluation requires a closed-form orbit");
    cd te = t + shift_;
    cd s(static_cast<double>(branch_), 0.0);
    CVec2 x;
    if (preset_ == "duffing1") {
        cd sech = 1.0 / std::cosh(te);
        x = {s * std::sqrt(2.0) * sech, -s * std::sqrt(2.0) * sech * std::tanh(te)};
    } else {
        cd u = te / std::sqrt(2.0);
        cd sech = 1.0 / std::cosh(u);
        x = {s * std::tanh(u), s * sech * sech / std::sqrt(2.0)};
    }
    cd h2 = sys_.H2.eval(x.x, x.y);
    cd h1 = sys_.H1.eval(x.x, x.y);
    return {x, CVec2{h2, -h1}};
}

std::array<std::complex<long double>, 2> Orbit::position_complex_ld(std::complex<long double> t) const {
    using cld = std::complex<long double>;
    if (kind_ != OrbitKind::closed_form)
        throw Error(ErrorCode::InvalidConfig, "complex evaluation requires a closed-form orbit");
    cld te = t + (long double)shift_;
    long double s = (long double)branch_;
    const long double rt2 = std::sqrt((long double)2.0L);
    if (preset_ == "duffing1") {
        cld sech = 1.0L / std::cosh(te);
        return {s * rt2 * sech, -s * rt2 * sech * std::tanh(te)};
    }
    cld u = te / rt2;
    cld sech = 1.0L / std::cosh(u);
    return {s * std::tanh(u), s * sech * sech / rt2};
}

double Orbit::pole_distance(cd t0, cd t1) const {
    if (kind_ != OrbitKind::closed_form) return 0.0;
    double period = (preset_ == "duffing1") ? M_PI : M_PI * std::sqrt(2.0);
    double im_max = std::max(std::abs(t0.imag()), std::abs(t1.imag())) + 2.0 * period;
    double best = 1e300;
    for (double im = period / 2.0; im <= im_max; im += period) {
        for (double sgn : {1.0, -1.0}) {
            cd pole(-shift_, sgn * im);
            best = std::min(best, dist_point_segment(pole, t0, t1));
        }
    }
    return best;
}

Orbit Orbit::shifted(double tau) const {
    Orbit o = *this;
    o.shift_ += tau;
    o.id_ += "+shift";
    return o;
}

std::string Orbit::to_csv(double a, double b, int n) const {
    std::ostringstream os;
    os << "t,x1,x2,dx1,dx2,H_error\n";
    for (int i = 0; i < n; ++i) {
        double t = a + (b - a) * i / (n - 1);
        OrbitPoint p = eval(t);
        double he = sys_.energy(p.x) - h_;
        os << format_double(t) << ',' << format_double(p.x.x) << ',' << format_double(p.x.y) << ','
           << format_double(p.xdot.x) << ',' << format_double(p.xdot.y) << ',' << format_double(he)
           << '\n';
    }
    return os.str();
}

Orbit closed_form_orbit(const std::string& preset, int branch) {
    if (preset != "duffing1" && preset != "duffing2") throw Error(ErrorCode::UnknownPreset, preset);
    if (branch != 1 && branch != -1) throw Error(ErrorCode::InvalidConfig, "branch must be +1 or -1");

    Orbit o;
    o.kind_ = OrbitKind::closed_form;
    o.sys_ = make_preset(preset, {});
    o.preset_ = preset;
    o.branch_ = branch;
    o.id_ = preset + (branch > 0 ? "+closed" : "-closed");
    if (preset == "duffing1") {
        Saddle s = refine_saddle(o.sys_, {0.0, 0.0});
        o.source_ = s;
        o.target_ = s;
    } else {
        Saddle sm = refine_saddle(o.sys_, {-0.95, 0.0});
        Saddle sp = refine_saddle(o.sys_, {0.95, 0.0});
        o.source_ = (branch > 0) ? sm : sp;
        o.target_ = (branch > 0) ? sp : sm;
    }
    o.h_ = o.sys_.energy(o.source_.x);
    o.t_lo_ = -40.0;
    o.t_hi_ = 40.0;
    return o;
}

namespace {

struct RawPoint {
    double t;
    Vec2 x;
    double arc;
};

}  // namespace

struct ShootAccess {
    static Orbit build(const PlanarSystem& sys, const Saddle& from, const Saddle& to,
                       const ShootOptions& opts);
};

Orbit shoot_separatrix(const PlanarSystem& sys, const Saddle& from, const Saddle& to,
                       const ShootOptions& opts) {
    return ShootAccess::build(sys, from, to, opts);
}

Orbit ShootAccess::build(const PlanarSystem& sys, const Saddle& from, const Saddle& to,
                         const ShootOptions& opts) {
    if (std::abs(sys.energy(from.x) - sys.energy(to.x)) > opts.tol_energy)
        throw Error(ErrorCode::EnergyMismatch, "saddles lie on different energy levels");

    const double lam_max = std::max(from.lambda, to.lambda);
    const double box = opts.box > 0.0
                           ? opts.box
                           : 3.0 * (std::max({std::abs(from.x.x), std::abs(from.x.y),
                                              std::abs(to.x.x), std::abs(to.x.y)}) +
                                    1.5);

    auto field = [&](double, const std::array<double, 2>& y, std::array<double, 2>& dy) {
        Vec2 f = hamiltonian_field(sys, {y[0], y[1]});
        dy[0] = f.x;
        dy[1] = f.y;
    };

    OdeOptions oo;
    oo.rtol = opts.rtol;
    oo.atol = opts.atol;

    // pass 1: chunked shoot until capture, recording a coarse polyline
    std::array<double, 2> y{from.x.x + opts.branch * opts.delta0 * from.v_u.x,
                            from.x.y + opts.branch * opts.delta0 * from.v_u.y};
    std::vector<RawPoint> raw;
    raw.push_back({0.0, {y[0], y[1]}, 0.0});

    const double arm_radius = 0.05 * std::max(1.0, (from.x - to.x).norm());
    bool armed = false;
    double t = 0.0, t_stop = -1.0;
    const double chunk_base = 0.25 / lam_max;
    while (true) {
        Vec2 xv{y[0], y[1]};
        double dist_to = (xv - to.x).norm();
        double chunk = (armed && dist_to < 20.0 * opts.r_stop) ? 0.1 * chunk_base : chunk_base;
        if (!armed && (xv - from.x).norm() >= arm_radius) armed = true;
        if (armed && dist_to <= opts.r_stop) {
            double align = std::abs(dot((xv - to.x) * (1.0 / dist_to), to.v_s));
            if (align < 0.9)
                throw Error(ErrorCode::LostHyperbolicity,
                            "capture ball entered away from the stable direction");
            t_stop = t;
            break;
        }
        if (std::max(std::abs(xv.x), std::abs(xv.y)) > box)
            throw Error(ErrorCode::NoConnection, "trajectory left the bounding box");
        if (t > opts.t_max) throw Error(ErrorCode::NoConnection, "no capture before t_max");

        y = ode_integrate(field, t, y, t + chunk, oo);
        t += chunk;
        Vec2 xn{y[0], y[1]};
        raw.push_back({t, xn, raw.back().arc + (xn - raw.back().x).norm()});
    }

    SM_DEBUG("shoot: captured after t=%g, %zu raw points", t_stop, raw.size());

    // pass 2: accurate arclength s(t) via the augmented system, then tau_mid
    auto field3 = [&](double, const std::array<double, 3>& w, std::array<double, 3>& dw) {
        Vec2 f = hamiltonian_field(sys, {w[0], w[1]});
        dw[0] = f.x;
        dw[1] = f.y;
        dw[2] = f.norm();
    };
    const double dt_grid = opts.grid_dt > 0.0 ? opts.grid_dt : 0.04 / std::max(1.0, lam_max);
    const std::size_t n_nodes = static_cast<std::size_t>(std::ceil(t_stop / dt_grid)) + 1;
    const double dt = t_stop / static_cast<double>(n_nodes - 1);

    std::vector<double> svals(n_nodes), sdots(n_nodes);
    std::vector<Vec2> xvals(n_nodes);
    {
        std::array<double, 3> w{from.x.x + opts.branch * opts.delta0 * from.v_u.x,
                                from.x.y + opts.branch * opts.delta0 * from.v_u.y, 0.0};
        xvals[0] = {w[0], w[1]};
        svals[0] = 0.0;
        sdots[0] = hamiltonian_field(sys, xvals[0]).norm();
        for (std::size_t k = 1; k < n_nodes; ++k) {
            w = ode_integrate(field3, (k - 1) * dt, w, k * dt, oo);
            xvals[k] = {w[0], w[1]};
            svals[k] = w[2];
            sdots[k] = hamiltonian_field(sys, xvals[k]).norm();
        }
    }
    const double s_half = 0.5 * svals.back();
    std::size_t kmid = 0;
    while (kmid + 1 < n_nodes && svals[kmid + 1] < s_half) ++kmid;
    // cubic Hermite root of s(t) - s_half on [t_k, t_k+1]
    double tau_mid;
    {
        double a = kmid * dt, b = (kmid + 1) * dt;
        double tl = a, tr = b;
        auto sval = [&](double tt) {
            double s01 = (tt - a) / dt;
            double h00 = (1 + 2 * s01) * (1 - s01) * (1 - s01), h10 = s01 * (1 - s01) * (1 - s01);
            double h01 = s01 * s01 * (3 - 2 * s01), h11 = s01 * s01 * (s01 - 1);
            return h00 * svals[kmid] + dt * h10 * sdots[kmid] + h01 * svals[kmid + 1] +
                   dt * h11 * sdots[kmid + 1] - s_half;
        };
        for (int it = 0; it < 80; ++it) {
            double tm = 0.5 * (tl + tr);
            (sval(tl) * sval(tm) <= 0.0 ? tr : tl) = tm;
        }
        tau_mid = 0.5 * (tl + tr);
    }

    // pass 3: final grid, shifted so t = 0 is the arclength midpoint
    Orbit o;
    o.kind_ = OrbitKind::numeric;
    o.sys_ = sys;
    o.source_ = from;
    o.target_ = to;
    o.h_ = sys.energy(from.x);
    o.id_ = sys.name + (opts.branch > 0 ? "+shot" : "-shot");
    o.t_lo_ = -tau_mid;
    o.t_hi_ = t_stop - tau_mid;
    o.dt_ = dt;
    o.xs_.resize(n_nodes);
    o.vs_.resize(n_nodes);
    o.as_.resize(n_nodes);
    {
        std::array<double, 2> w{from.x.x + opts.branch * opts.delta0 * from.v_u.x,
                                from.x.y + opts.branch * opts.delta0 * from.v_u.y};
        for (std::size_t k = 0; k < n_nodes; ++k) {
            if (k > 0) w = ode_integrate(field, (k - 1) * dt, w, k * dt, oo);
            Vec2 x{w[0], w[1]};
            Vec2 v = hamiltonian_field(sys, x);
            o.xs_[k] = x;
            o.vs_[k] = v;
            o.as_[k] = sys.jac_field(x) * v;
        }
    }

    // oblique eigen-coefficients anchoring the exponential tails
    {
        Vec2 d_lo = o.xs_.front() - from.x;
        Vec2 c = solve2(columns(from.v_u, from.v_s), d_lo);
        o.tail_c_minus_ = c.x;
        Vec2 d_hi = o.xs_.back() - to.x;
        Vec2 c2 = solve2(columns(to.v_u, to.v_s), d_hi);
        o.tail_c_plus_ = c2.y;
    }
    return o;
}

OrbitPoint orbit_eval(const Orbit& orbit, double t) { return orbit.eval(t); }

}  // namespace sepmel
