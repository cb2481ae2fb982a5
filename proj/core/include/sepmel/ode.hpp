#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <type_traits>

#include "sepmel/errors.hpp"

namespace sepmel {

namespace detail {
inline double scalar_abs(double x) { return std::abs(x); }
inline double scalar_abs(long double x) { return static_cast<double>(std::abs(x)); }
inline double scalar_abs(const std::complex<double>& x) { return std::abs(x); }
inline double scalar_abs(const std::complex<long double>& x) {
    return static_cast<double>(std::abs(x));
}

template <class T>
struct real_of {
    using type = T;
};
template <class U>
struct real_of<std::complex<U>> {
    using type = U;
};
}  // namespace detail

struct OdeOptions {
    double rtol = 1e-12;
    double atol = 1e-14;
    double h_max = std::numeric_limits<double>::infinity();
    long max_steps = 4'000'000;
};

/// Dormand–Prince 5(4) adaptive integrator. State is any random-access
/// container of double or complex<double> with size() and operator[]
/// (std::array or std::vector). The endpoint is hit exactly, and the step
/// sequence depends only on (f, t0, y0, t1, opts), so repeated runs are
/// bit-identical.
///
/// f:   f(t, y, dydt)
/// obs: obs(t, y) after every accepted step (pass ode_no_observer to skip)
inline constexpr struct OdeNoObserver {
    template <class S>
    void operator()(double, const S&) const {}
} ode_no_observer{};

template <class State, class F, class Obs = OdeNoObserver>
State ode_integrate(F&& f, double t0, State y, double t1, const OdeOptions& opts = {},
                    Obs obs = {}) {
    // DP5(4)7M tableau
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    if (t1 == t0) return y;
    const double dir = (t1 > t0) ? 1.0 : -1.0;
    const std::size_t n = y.size();
    using R = typename detail::real_of<std::remove_cv_t<std::remove_reference_t<decltype(y[0])>>>::type;

    State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, ytmp = y, ynew = y;

    double t = t0;
    f(t, y, k1);

    // initial step: conservative fraction of the interval
    double h = dir * std::min({0.01 * std::abs(t1 - t0), opts.h_max, 0.1});
    if (h == 0.0) h = dir * 1e-6;

    long steps = 0;
    while (dir * (t1 - t) > 0.0) {
        if (++steps > opts.max_steps)
            throw Error(ErrorCode::StepFailure, "ODE step limit exceeded");
        if (std::abs(h) < 1e-14 * std::max(1.0, std::abs(t)))
            throw Error(ErrorCode::StepFailure, "ODE step size underflow");
        bool last = false;
        if (dir * (t + h - t1) >= 0.0) {
            h = t1 - t;
            last = true;
        }

        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + k1[i] * R(h * a21);
        f(t + c2 * h, ytmp, k2);
        for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + k1[i] * R(h * a31) + k2[i] * R(h * a32);
        f(t + c3 * h, ytmp, k3);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + k1[i] * R(h * a41) + k2[i] * R(h * a42) + k3[i] * R(h * a43);
        f(t + c4 * h, ytmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + k1[i] * R(h * a51) + k2[i] * R(h * a52) + k3[i] * R(h * a53) +
                      k4[i] * R(h * a54);
        f(t + c5 * h, ytmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            ytmp[i] = y[i] + k1[i] * R(h * a61) + k2[i] * R(h * a62) + k3[i] * R(h * a63) +
                      k4[i] * R(h * a64) + k5[i] * R(h * a65);
        f(t + h, ytmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            ynew[i] = y[i] + k1[i] * R(h * b1) + k3[i] * R(h * b3) + k4[i] * R(h * b4) +
                      k5[i] * R(h * b5) + k6[i] * R(h * b6);
        f(t + h, ynew, k7);

        double err = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double e = detail::scalar_abs(k1[i] * R(e1) + k3[i] * R(e3) + k4[i] * R(e4) +
                                          k5[i] * R(e5) + k6[i] * R(e6) + k7[i] * R(e7)) *
                       std::abs(h);
            double sc = opts.atol + opts.rtol * std::max(detail::scalar_abs(y[i]),
                                                         detail::scalar_abs(ynew[i]));
            err = std::max(err, e / sc);
        }

        if (err <= 1.0) {
            t += h;
            y = ynew;
            k1 = k7;  // FSAL
            obs(t, y);
            if (last && dir * (t1 - t) <= 0.0) break;
        }

        double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
        fac = std::min(5.0, std::max(0.2, fac));
        h *= fac;
        if (std::abs(h) > opts.h_max) h = dir * opts.h_max;
    }
    return y;
}

}  // namespace sepmel
