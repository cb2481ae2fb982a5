#pragma once

#include <complex>
#include <map>
#include <stdexcept>
#include <utility>

namespace sepmel {

/// Bivariate polynomial sum c_{ij} x1^i x2^j with exact partial derivatives.
/// Coefficient type is double or std::complex<double>; the term map is kept
/// sorted so iteration (and hence every evaluation order) is deterministic.
template <class Coef>
class Polynomial2 {
public:
    using term_map = std::map<std::pair<int, int>, Coef>;

    Polynomial2() = default;

    explicit Polynomial2(term_map terms) : terms_(std::move(terms)) {
        for (const auto& [e, c] : terms_) {
            if (e.first < 0 || e.second < 0)
                throw std::invalid_argument("Polynomial2: negative exponent");
        }
        prune();
    }

    static Polynomial2 constant(Coef c) {
        Polynomial2 p;
        p.terms_[{0, 0}] = c;
        p.prune();
        return p;
    }

    void add_term(int i, int j, Coef c) {
        if (i < 0 || j < 0) throw std::invalid_argument("Polynomial2: negative exponent");
        terms_[{i, j}] += c;
        if (terms_[{i, j}] == Coef{}) terms_.erase({i, j});
    }

    const term_map& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    template <class S>
    auto eval(S x1, S x2) const {
        using R = decltype(Coef{} * S{});
        R acc{};
        for (const auto& [e, c] : terms_)
            acc += R(c) * pow_i(x1, e.first) * pow_i(x2, e.second);
        return acc;
    }

    Polynomial2 d_x1() const {
        Polynomial2 p;
        for (const auto& [e, c] : terms_)
            if (e.first > 0) p.terms_[{e.first - 1, e.second}] = c * Coef(e.first);
        p.prune();
        return p;
    }

    Polynomial2 d_x2() const {
        Polynomial2 p;
        for (const auto& [e, c] : terms_)
            if (e.second > 0) p.terms_[{e.first, e.second - 1}] = c * Coef(e.second);
        p.prune();
        return p;
    }

    Polynomial2 operator+(const Polynomial2& o) const {
        Polynomial2 p = *this;
        for (const auto& [e, c] : o.terms_) {
            p.terms_[e] += c;
            if (p.terms_[e] == Coef{}) p.terms_.erase(e);
        }
        return p;
    }

    Polynomial2 operator*(Coef s) const {
        Polynomial2 p = *this;
        for (auto& [e, c] : p.terms_) c *= s;
        p.prune();
        return p;
    }

    double max_coeff_abs() const {
        double m = 0.0;
        for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
        return m;
    }

private:
    template <class S>
    static S pow_i(S x, int n) {
        S r(1);
        while (n-- > 0) r *= x;
        return r;
    }

    void prune() {
        for (auto it = terms_.begin(); it != terms_.end();)
            it = (it->second == Coef{}) ? terms_.erase(it) : std::next(it);
    }

    term_map terms_;
};

using RPoly2 = Polynomial2<double>;
using CPoly2 = Polynomial2<std::complex<double>>;

inline CPoly2 to_complex(const RPoly2& p) {
    CPoly2 q;
    for (const auto& [e, c] : p.terms()) q.add_term(e.first, e.second, {c, 0.0});
    return q;
}

/// Polynomial with every coefficient conjugated (for g_hat_{-j} from g_hat_j).
inline CPoly2 conj_coeffs(const CPoly2& p) {
    CPoly2 q;
    for (const auto& [e, c] : p.terms()) q.add_term(e.first, e.second, std::conj(c));
    return q;
}

/// Max |coefficient| distance between two complex polynomials.
inline double coeff_distance(const CPoly2& a, const CPoly2& b) {
    CPoly2 d = a + b * std::complex<double>(-1.0, 0.0);
    return d.max_coeff_abs();
}

}  // namespace sepmel
