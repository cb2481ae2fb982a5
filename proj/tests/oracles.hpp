#pragma once

// Test-side oracles, independent of the library's quadrature and series code:
// Romberg integration in long double plus the closed forms obtained from the
// table integrals
//   int sech(t) tanh(t) sin(w t) dt = pi w sech(pi w / 2)
//   int sech^2(t) tanh^2(t) dt     = 2/3
//   int sech^2(t) cos(a t) dt      = pi a / sinh(pi a / 2)
//   int sech^4(t) dt               = 4/3

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

using cld = std::complex<long double>;

/// Romberg on [a, b]; smooth integrands only. Levels ~ 2^18 max points.
inline cld romberg(const std::function<cld(long double)>& f, long double a, long double b,
                   int max_level = 18, long double tol = 1e-16L) {
    std::vector<std::vector<cld>> R(1);
    long double h = b - a;
    R[0].push_back(0.5L * h * (f(a) + f(b)));
    for (int k = 1; k <= max_level; ++k) {
        h *= 0.5L;
        cld sum = 0.0L;
        std::int64_t n = (std::int64_t)1 << k;
        for (std::int64_t i = 1; i < n; i += 2) sum += f(a + h * i);
        R.emplace_back();
        R[k].push_back(0.5L * R[k - 1][0] + h * sum);
        long double p4 = 4.0L;
        for (int j = 1; j <= k; ++j) {
            R[k].push_back(R[k][j - 1] + (R[k][j - 1] - R[k - 1][j - 1]) / (p4 - 1.0L));
            p4 *= 4.0L;
        }
        if (k > 4 && std::abs(R[k][k] - R[k - 1][k - 1]) < tol * (1.0L + std::abs(R[k][k])))
            return R[k][k];
    }
    return R.back().back();
}

/// Brute-force Melnikov coefficient for the duffing presets at doubled
/// precision: long double Romberg over a window deep in the exponential tail.
/// kind = 1 or 2, branch = +-1.
inline cld melnikov_coeff_brute(int kind, int branch, int j, long double beta, long double delta,
                                long double omega) {
    auto orbit_x2 = [&](long double t) -> long double {
        if (kind == 1) {
            long double sech = 1.0L / std::cosh(t);
            return -branch * std::sqrt(2.0L) * sech * std::tanh(t);
        }
        long double u = t / std::sqrt(2.0L);
        long double sech = 1.0L / std::cosh(u);
        return branch * sech * sech / std::sqrt(2.0L);
    };
    // DH . g_hat_j on the orbit; DH = (H1, H2), g_hat_j = (0, *), H2 = x2
    auto ghat2 = [&](long double x2) -> cld {
        if (j == 0) return cld(-delta * x2, 0.0L);
        if (j == 1 || j == -1) return cld(0.5L * beta, 0.0L);
        return cld(0.0L, 0.0L);
    };
    long double T = 60.0L;
    auto f = [&](long double t) -> cld {
        long double x2 = orbit_x2(t);
        cld e(std::cos(j * omega * t), std::sin(j * omega * t));
        return x2 * ghat2(x2) * e;
    };
    return romberg(f, -T, T, 18, 1e-18L);
}

// closed forms (duffing1 from the table integrals; duffing2 as printed)
inline long double d1_m0(long double delta) { return -4.0L / 3.0L * delta; }
inline long double d1_m1_abs(long double beta, long double omega) {
    return std::sqrt(2.0L) / 2.0L * (long double)M_PIl * omega * beta /
           std::cosh((long double)M_PIl * omega / 2.0L);
}
inline long double d2_m0(long double delta) { return -2.0L * std::sqrt(2.0L) / 3.0L * delta; }
inline long double d2_m1(long double beta, long double omega) {
    return std::sqrt(2.0L) / 2.0L * (long double)M_PIl * omega * beta /
           std::sinh((long double)M_PIl * omega / std::sqrt(2.0L));
}

/// Simple deterministic RNG for property tests.
struct Rng {
    std::uint64_t s;
    explicit Rng(std::uint64_t seed) : s(seed ? seed : 0x9e3779b97f4a7c15ull) {}
    std::uint64_t next() {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        return s;
    }
    double uniform(double a, double b) {
        return a + (b - a) * (double)(next() >> 11) / 9007199254740992.0;
    }
};

}  // namespace oracle
