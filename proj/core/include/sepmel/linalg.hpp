#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace sepmel {

using cd = std::complex<double>;

struct Vec2 {
    double x{0.0}, y{0.0};

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator-() const { return {-x, -y}; }
    double norm() const { return std::hypot(x, y); }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

/// Row-major 2x2 real matrix.
struct Mat2 {
    double a11{0}, a12{0}, a21{0}, a22{0};

    Vec2 operator*(Vec2 v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
    Mat2 operator*(const Mat2& o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
    Mat2 operator+(const Mat2& o) const { return {a11 + o.a11, a12 + o.a12, a21 + o.a21, a22 + o.a22}; }
    Mat2 operator*(double s) const { return {a11 * s, a12 * s, a21 * s, a22 * s}; }
    double det() const { return a11 * a22 - a12 * a21; }
    static Mat2 identity() { return {1, 0, 0, 1}; }
};

inline Mat2 inverse(const Mat2& m) {
    double d = m.det();
    return {m.a22 / d, -m.a12 / d, -m.a21 / d, m.a11 / d};
}

inline Vec2 solve2(const Mat2& m, Vec2 b) { return inverse(m) * b; }

inline Mat2 columns(Vec2 c1, Vec2 c2) { return {c1.x, c2.x, c1.y, c2.y}; }

struct CVec2 {
    cd x{}, y{};

    CVec2() = default;
    CVec2(cd a, cd b) : x(a), y(b) {}
    CVec2(Vec2 v) : x(v.x, 0.0), y(v.y, 0.0) {}
    CVec2 operator+(CVec2 o) const { return {x + o.x, y + o.y}; }
    CVec2 operator-(CVec2 o) const { return {x - o.x, y - o.y}; }
    CVec2 operator*(cd s) const { return {x * s, y * s}; }
    double norm() const { return std::sqrt(std::norm(x) + std::norm(y)); }
};

struct CMat2 {
    cd a11{}, a12{}, a21{}, a22{};

    CMat2() = default;
    CMat2(cd m11, cd m12, cd m21, cd m22) : a11(m11), a12(m12), a21(m21), a22(m22) {}
    CMat2(const Mat2& m) : a11(m.a11), a12(m.a12), a21(m.a21), a22(m.a22) {}

    CVec2 operator*(CVec2 v) const { return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y}; }
    CMat2 operator*(const CMat2& o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
    cd det() const { return a11 * a22 - a12 * a21; }
    static CMat2 identity() { return {1, 0, 0, 1}; }
};

inline CMat2 inverse(const CMat2& m) {
    cd d = m.det();
    return {m.a22 / d, -m.a12 / d, -m.a21 / d, m.a11 / d};
}

inline CMat2 ccolumns(CVec2 c1, CVec2 c2) { return {c1.x, c2.x, c1.y, c2.y}; }

/// Row-major 3x3 complex matrix; enough for the monodromy work.
struct CMat3 {
    std::array<std::array<cd, 3>, 3> m{};

    cd& operator()(int i, int j) { return m[i][j]; }
    const cd& operator()(int i, int j) const { return m[i][j]; }

    static CMat3 identity() {
        CMat3 r;
        for (int i = 0; i < 3; ++i) r.m[i][i] = 1.0;
        return r;
    }

    CMat3 operator*(const CMat3& o) const {
        CMat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                cd s{};
                for (int k = 0; k < 3; ++k) s += m[i][k] * o.m[k][j];
                r.m[i][j] = s;
            }
        return r;
    }

    CMat3 operator-(const CMat3& o) const {
        CMat3 r;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) r.m[i][j] = m[i][j] - o.m[i][j];
        return r;
    }

    double frobenius() const {
        double s = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) s += std::norm(m[i][j]);
        return std::sqrt(s);
    }
};

inline CMat3 inverse(const CMat3& a) {
    // adjugate over determinant
    auto c = [&](int i, int j) {
        int i1 = (i + 1) % 3, i2 = (i + 2) % 3, j1 = (j + 1) % 3, j2 = (j + 2) % 3;
        return a(i1, j1) * a(i2, j2) - a(i1, j2) * a(i2, j1);
    };
    cd det = a(0, 0) * c(0, 0) + a(0, 1) * c(0, 1) + a(0, 2) * c(0, 2);
    CMat3 r;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r(i, j) = c(j, i) / det;
    return r;
}

inline CMat3 block_upper(const CMat2& a, CVec2 b, cd corner) {
    CMat3 r;
    r(0, 0) = a.a11; r(0, 1) = a.a12; r(0, 2) = b.x;
    r(1, 0) = a.a21; r(1, 1) = a.a22; r(1, 2) = b.y;
    r(2, 0) = 0.0;   r(2, 1) = 0.0;   r(2, 2) = corner;
    return r;
}

inline double commutator_frobenius(const CMat3& a, const CMat3& b) {
    return (a * b - b * a).frobenius();
}

}  // namespace sepmel
