#include "sepmel/fourier.hpp"

#include <cmath>

namespace sepmel {

std::vector<CVec2> fourier_coefficients(const std::function<Vec2(double)>& g, int N) {
    const int M = 2 * N + 2;
    std::vector<Vec2> samples(M);
    for (int k = 0; k < M; ++k) samples[k] = g(2.0 * M_PI * k / M);

    std::vector<CVec2> out(2 * N + 1);
    for (int j = -N; j <= N; ++j) {
        cd s1{}, s2{};
        for (int k = 0; k < M; ++k) {
            double ang = -2.0 * M_PI * j * k / M;
            cd e(std::cos(ang), std::sin(ang));
            s1 += samples[k].x * e;
            s2 += samples[k].y * e;
        }
        out[j + N] = {s1 / double(M), s2 / double(M)};
    }
    return out;
}

RealForm real_form(const std::vector<CVec2>& coeffs, double tol) {
    if (coeffs.size() % 2 == 0)
        throw Error(ErrorCode::InvalidConfig, "coefficient list must cover j = -N..N");
    int N = static_cast<int>(coeffs.size() / 2);

    auto worst = [&](CVec2 v) { return std::max(std::abs(v.x.imag()), std::abs(v.y.imag())); };

    RealForm rf;
    const CVec2& h0 = coeffs[N];
    if (worst(h0) > tol) throw Error(ErrorCode::RealityViolation, "g_hat_0 has imaginary part");
    rf.a0 = {h0.x.real(), h0.y.real()};
    for (int j = 1; j <= N; ++j) {
        CVec2 plus = coeffs[N + j], minus = coeffs[N - j];
        CVec2 aj = plus + minus;
        CVec2 bj = (plus - minus) * cd(0.0, 1.0);
        if (worst(aj) > tol || worst(bj) > tol)
            throw Error(ErrorCode::RealityViolation,
                        "harmonic " + std::to_string(j) + " violates g_hat_{-j} = conj(g_hat_j)");
        rf.a.push_back({aj.x.real(), aj.y.real()});
        rf.b.push_back({bj.x.real(), bj.y.real()});
    }
    return rf;
}

ExtendedDeriv extended_field(const PlanarSystem& sys, const ExtendedState& s) {
    int N = sys.g.harmonics();
    if ((int)s.u.size() != N || (int)s.v.size() != N)
        throw Error(ErrorCode::InvalidConfig, "rotor dimension does not match the field cutoff");

    ExtendedDeriv d;
    Vec2 f = hamiltonian_field(sys, s.x);
    Vec2 p{sys.g.a0().c1.eval(s.x.x, s.x.y), sys.g.a0().c2.eval(s.x.x, s.x.y)};
    f = f + p * s.eps;
    for (int j = 1; j <= N; ++j) {
        const auto& aj = sys.g.a(j);
        const auto& bj = sys.g.b(j);
        f.x += aj.c1.eval(s.x.x, s.x.y) * s.u[j - 1] + bj.c1.eval(s.x.x, s.x.y) * s.v[j - 1];
        f.y += aj.c2.eval(s.x.x, s.x.y) * s.u[j - 1] + bj.c2.eval(s.x.x, s.x.y) * s.v[j - 1];
    }
    d.x_dot = f;
    d.eps_dot = 0.0;
    d.u_dot.resize(N);
    d.v_dot.resize(N);
    for (int j = 1; j <= N; ++j) {
        d.u_dot[j - 1] = -j * sys.omega * s.v[j - 1];
        d.v_dot[j - 1] = j * sys.omega * s.u[j - 1];
    }
    return d;
}

std::vector<double> pack_extended(const ExtendedState& s) {
    std::vector<double> y;
    y.reserve(3 + 2 * s.u.size());
    y.push_back(s.x.x);
    y.push_back(s.x.y);
    y.push_back(s.eps);
    y.insert(y.end(), s.u.begin(), s.u.end());
    y.insert(y.end(), s.v.begin(), s.v.end());
    return y;
}

ExtendedState unpack_extended(const std::vector<double>& y, int N) {
    ExtendedState s;
    s.x = {y[0], y[1]};
    s.eps = y[2];
    s.u.assign(y.begin() + 3, y.begin() + 3 + N);
    s.v.assign(y.begin() + 3 + N, y.begin() + 3 + 2 * N);
    return s;
}

void extended_field_flat(const PlanarSystem& sys, const std::vector<double>& y,
                         std::vector<double>& dydt) {
    int N = sys.g.harmonics();
    ExtendedDeriv d = extended_field(sys, unpack_extended(y, N));
    dydt.resize(y.size());
    dydt[0] = d.x_dot.x;
    dydt[1] = d.x_dot.y;
    dydt[2] = 0.0;
    for (int j = 0; j < N; ++j) {
        dydt[3 + j] = d.u_dot[j];
        dydt[3 + N + j] = d.v_dot[j];
    }
}

}  // namespace sepmel
