#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "oracles.hpp"
#include "sepmel/fourier.hpp"
#include "sepmel/ode.hpp"
#include "sepmel/system.hpp"

using namespace sepmel;

namespace {

RPoly2 random_poly(oracle::Rng& rng, int max_deg = 4) {
    RPoly2 p;
    int terms = 2 + (int)(rng.uniform(0, 4));
    for (int k = 0; k < terms; ++k)
        p.add_term((int)rng.uniform(0, max_deg + 1), (int)rng.uniform(0, max_deg + 1),
                   rng.uniform(-2.0, 2.0));
    return p;
}

FourierField random_field(oracle::Rng& rng, int N) {
    RPolyVec2 a0{random_poly(rng, 2), random_poly(rng, 2)};
    std::vector<RPolyVec2> a, b;
    for (int j = 0; j < N; ++j) {
        a.push_back({random_poly(rng, 2), random_poly(rng, 2)});
        b.push_back({random_poly(rng, 2), random_poly(rng, 2)});
    }
    return FourierField::from_real_form(a0, a, b);
}

}  // namespace

TEST_CASE("polynomial derivative matches central finite differences") {
    oracle::Rng rng(42);
    for (int trial = 0; trial < 50; ++trial) {
        RPoly2 p = random_poly(rng);
        RPoly2 dx = p.d_x1(), dy = p.d_x2();
        for (int k = 0; k < 5; ++k) {
            double x = rng.uniform(-1.5, 1.5), y = rng.uniform(-1.5, 1.5);
            const double h = 1e-5;
            double fd1 = (p.eval(x + h, y) - p.eval(x - h, y)) / (2 * h);
            double fd2 = (p.eval(x, y + h) - p.eval(x, y - h)) / (2 * h);
            double scale1 = std::max(1.0, std::abs(dx.eval(x, y)));
            double scale2 = std::max(1.0, std::abs(dy.eval(x, y)));
            CHECK(std::abs(dx.eval(x, y) - fd1) / scale1 <= 1e-6);
            CHECK(std::abs(dy.eval(x, y) - fd2) / scale2 <= 1e-6);
        }
    }
}

TEST_CASE("polynomial rejects negative exponents") {
    RPoly2 p;
    CHECK_THROWS(p.add_term(-1, 0, 1.0));
}

TEST_CASE("fourier field reconstruction is real") {
    oracle::Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        FourierField f = random_field(rng, 1 + trial % 3);
        for (int k = 0; k < 10; ++k) {
            Vec2 x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
            double th = rng.uniform(0, 2 * M_PI);
            cd sum1{}, sum2{};
            for (int j = -f.harmonics(); j <= f.harmonics(); ++j) {
                CVec2 g = f.coeff_hat_at(j, x);
                cd e(std::cos(j * th), std::sin(j * th));
                sum1 += g.x * e;
                sum2 += g.y * e;
            }
            CHECK(std::abs(sum1.imag()) <= 1e-12);
            CHECK(std::abs(sum2.imag()) <= 1e-12);
            // and the real part is the real-form evaluation
            Vec2 v = f.eval(x, th);
            CHECK(sum1.real() == doctest::Approx(v.x).epsilon(1e-12));
            CHECK(sum2.real() == doctest::Approx(v.y).epsilon(1e-12));
        }
    }
}

TEST_CASE("preset duffing1 expands to the expected Fourier data") {
    PlanarSystem sys = make_preset("duffing1", {1.0, 0.0, 1.0});
    CHECK(sys.g.harmonics() == 1);
    CVec2 g1 = sys.g.coeff_hat_at(1, {0.3, -0.2});
    CHECK(g1.x == cd{});
    CHECK(g1.y.real() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(g1.y.imag() == doctest::Approx(0.0));
    CVec2 gm1 = sys.g.coeff_hat_at(-1, {0.3, -0.2});
    CHECK(std::abs(gm1.y - std::conj(g1.y)) <= 1e-15);
    CVec2 g0 = sys.g.coeff_hat_at(0, {0.3, -0.2});
    CHECK(std::abs(g0.x) + std::abs(g0.y) <= 1e-15);  // delta = 0
}

TEST_CASE("parse_system handles documents and presets") {
    SUBCASE("preset with params") {
        PlanarSystem sys = parse_system(
            R"({"preset": "duffing1", "params": {"beta": 2.0, "delta": 0.5, "omega": 1.5}})");
        CHECK(sys.omega == 1.5);
        CHECK(sys.g.coeff_hat_at(1, {0, 0}).y.real() == doctest::Approx(1.0));
        CHECK(sys.g.coeff_hat_at(0, {0, 1}).y.real() == doctest::Approx(-0.5));
    }
    SUBCASE("empty perturbation means zero field") {
        PlanarSystem sys = parse_system(
            R"({"hamiltonian": [[0,2,0.5],[2,0,-0.5],[4,0,0.25]], "perturbation": [], "omega": 1.0})");
        CHECK(sys.g.harmonics() == 0);
        CHECK(sys.g.zero());
    }
    SUBCASE("negative omega is a schema error") {
        CHECK_THROWS_AS(parse_system(R"({"hamiltonian": [[0,2,0.5]], "omega": -1.0})"), Error);
        try {
            parse_system(R"({"hamiltonian": [[0,2,0.5]], "omega": -1.0})");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::SchemaViolation);
            CHECK(is_config_error(e.code()));
        }
    }
    SUBCASE("document equivalent to the preset") {
        PlanarSystem a = make_preset("duffing1", {1.0, 0.7, 1.3});
        PlanarSystem b = parse_system(R"({
            "hamiltonian": [[0,2,0.5],[2,0,-0.5],[4,0,0.25]],
            "perturbation": [
              {"component": 2, "harmonic": 1, "phase": "cos", "poly": [[0,0,1.0]]},
              {"component": 2, "harmonic": 0, "phase": "cos", "poly": [[0,1,-0.7]]}
            ],
            "omega": 1.3})");
        oracle::Rng rng(3);
        for (int k = 0; k < 10; ++k) {
            Vec2 x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
            double th = rng.uniform(0, 2 * M_PI), eps = rng.uniform(0, 0.2);
            Vec2 fa = perturbed_field(a, x, eps, th), fb = perturbed_field(b, x, eps, th);
            CHECK((fa - fb).norm() <= 1e-14);
        }
    }
    SUBCASE("malformed documents") {
        CHECK_THROWS_AS(parse_system("not json"), Error);
        CHECK_THROWS_AS(parse_system(R"({"omega": 1.0})"), Error);
        CHECK_THROWS_AS(parse_system(R"({"hamiltonian": [[0,-2,1.0]], "omega": 1.0})"), Error);
        CHECK_THROWS_AS(
            parse_system(
                R"({"hamiltonian": [[0,2,0.5]], "omega": 1.0, "perturbation": [{"component": 3, "harmonic": 1, "poly": []}]})"),
            Error);
        CHECK_THROWS_AS(make_preset("nosuch", {}), Error);
    }
}

TEST_CASE("from_complex enforces the reality condition") {
    CPolyVec2 plus, zero, minus_bad;
    plus.c2.add_term(0, 0, cd(0.0, 0.5));
    minus_bad.c2.add_term(0, 0, cd(0.0, 0.5));  // should be the conjugate
    CHECK_THROWS_AS(FourierField::from_complex({minus_bad, zero, plus}), Error);
    CPolyVec2 minus_good;
    minus_good.c2.add_term(0, 0, cd(0.0, -0.5));
    FourierField ok = FourierField::from_complex({minus_good, zero, plus});
    CHECK(ok.harmonics() == 1);
}

TEST_CASE("hamiltonian_field on the presets") {
    PlanarSystem d1 = make_preset("duffing1", {});
    CHECK(hamiltonian_field(d1, {0, 0}).norm() == 0.0);
    Vec2 f = hamiltonian_field(d1, {1, 1});
    CHECK(f.x == doctest::Approx(1.0));
    CHECK(f.y == doctest::Approx(0.0));
    PlanarSystem d2 = make_preset("duffing2", {});
    CHECK(hamiltonian_field(d2, {1, 0}).norm() <= 1e-15);
}

TEST_CASE("refine_saddle finds and classifies equilibria") {
    PlanarSystem d1 = make_preset("duffing1", {});
    Saddle s = refine_saddle(d1, {0.1, 0.1});
    CHECK(s.x.norm() <= 1e-12);
    CHECK(s.lambda == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(hamiltonian_field(d1, s.x).norm() <= 1e-12);
    // eigenvector residual of J D^2H
    Mat2 A = d1.jac_field(s.x);
    Vec2 r = A * s.v_u - s.v_u * s.lambda;
    CHECK(r.norm() <= 1e-10);
    CHECK(s.v_u.norm() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.v_s.norm() == doctest::Approx(1.0).epsilon(1e-14));

    PlanarSystem d2 = make_preset("duffing2", {});
    Saddle s2 = refine_saddle(d2, {0.9, 0.0});
    CHECK(s2.x.x == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(s2.x.y) <= 1e-12);
    CHECK(s2.lambda == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

    CHECK_THROWS_AS(refine_saddle(d2, {0.1, 0.0}), Error);  // origin is a center
    try {
        refine_saddle(d2, {0.1, 0.0});
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotASaddle);
    }
    // (1, 0) is a center of duffing1 as well
    CHECK_THROWS_AS(refine_saddle(d1, {1.0, 0.0}), Error);
}

TEST_CASE("fourier_coefficients is exact for trigonometric polynomials") {
    SUBCASE("single cosine") {
        double beta = 0.8;
        auto g = [&](double th) { return Vec2{0.0, beta * std::cos(th)}; };
        auto c = fourier_coefficients(g, 1);
        CHECK(std::abs(c[2].y - cd(beta / 2, 0)) <= 1e-15);
        CHECK(std::abs(c[0].y - cd(beta / 2, 0)) <= 1e-15);
        CHECK(std::abs(c[1].x) + std::abs(c[1].y) <= 1e-15);
    }
    SUBCASE("constant") {
        auto g = [](double) { return Vec2{0.3, -1.1}; };
        auto c = fourier_coefficients(g, 2);
        CHECK(std::abs(c[2].x - cd(0.3, 0)) <= 1e-15);
        for (int j : {-2, -1, 1, 2}) CHECK(std::abs(c[j + 2].x) + std::abs(c[j + 2].y) <= 1e-14);
    }
    SUBCASE("reality symmetry for random real data") {
        oracle::Rng rng(11);
        for (int trial = 0; trial < 10; ++trial) {
            int N = 1 + trial % 3;
            std::vector<double> ac(2 * N + 1), as(2 * N + 1), bc(2 * N + 1), bs(2 * N + 1);
            for (auto* v : {&ac, &as, &bc, &bs})
                for (auto& e : *v) e = rng.uniform(-1, 1);
            auto g = [&](double th) {
                Vec2 r{ac[0], bc[0]};
                for (int j = 1; j <= N; ++j) {
                    r.x += ac[j] * std::cos(j * th) + as[j] * std::sin(j * th);
                    r.y += bc[j] * std::cos(j * th) + bs[j] * std::sin(j * th);
                }
                return r;
            };
            auto c = fourier_coefficients(g, N);
            for (int j = 1; j <= N; ++j) {
                CHECK(std::abs(c[N - j].x - std::conj(c[N + j].x)) <= 1e-14);
                CHECK(std::abs(c[N - j].y - std::conj(c[N + j].y)) <= 1e-14);
            }
        }
    }
}

TEST_CASE("real_form inverts the complex coefficients") {
    SUBCASE("cosine pair") {
        std::vector<CVec2> c(3);
        c[0] = {cd(0, 0), cd(0.4, 0)};
        c[2] = {cd(0, 0), cd(0.4, 0)};
        RealForm rf = real_form(c);
        CHECK(rf.a[0].y == doctest::Approx(0.8));
        CHECK(std::abs(rf.b[0].y) <= 1e-15);
    }
    SUBCASE("pure sine pair") {
        std::vector<CVec2> c(3);
        c[2] = {cd(0, 0), cd(0, -0.45)};
        c[0] = {cd(0, 0), cd(0, 0.45)};
        RealForm rf = real_form(c);
        CHECK(std::abs(rf.a[0].y) <= 1e-15);
        CHECK(rf.b[0].y == doctest::Approx(0.9));
    }
    SUBCASE("all zero") {
        std::vector<CVec2> c(5);
        RealForm rf = real_form(c);
        CHECK(rf.a0.norm() == 0.0);
        for (auto& v : rf.a) CHECK(v.norm() == 0.0);
    }
    SUBCASE("reality violation detected") {
        std::vector<CVec2> c(3);
        c[2] = {cd(0, 0), cd(0.4, 0.2)};
        c[0] = {cd(0, 0), cd(0.4, 0.2)};  // not the conjugate
        CHECK_THROWS_AS(real_form(c), Error);
    }
}

TEST_CASE("extended field reduces to the Hamiltonian field on the zero slice") {
    PlanarSystem d1 = make_preset("duffing1", {1.0, 0.5, 1.0});
    oracle::Rng rng(5);
    for (int k = 0; k < 10; ++k) {
        ExtendedState s;
        s.x = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
        s.eps = 0.0;
        s.u = {0.0};
        s.v = {0.0};
        ExtendedDeriv d = extended_field(d1, s);
        Vec2 f = hamiltonian_field(d1, s.x);
        CHECK((d.x_dot - f).norm() <= 1e-15);
        CHECK(d.eps_dot == 0.0);
    }
}

TEST_CASE("extended field spec value at a concrete state") {
    PlanarSystem d1 = make_preset("duffing1", {1.0, 1.0, 1.0});
    ExtendedState s;
    s.x = {1.0, 0.0};
    s.eps = 0.1;
    s.u = {0.1};
    s.v = {0.0};
    ExtendedDeriv d = extended_field(d1, s);
    CHECK(d.x_dot.y == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(d.u_dot[0] == doctest::Approx(0.0));
    CHECK(d.v_dot[0] == doctest::Approx(0.1));
}

TEST_CASE("rotor invariant u^2 + v^2 is conserved over 100 periods") {
    PlanarSystem d1 = make_preset("duffing1", {1.0, 0.0, 1.0});
    ExtendedState s;
    s.x = {0.4, 0.1};
    s.eps = 0.1;
    s.u = {0.1};
    s.v = {0.0};
    std::vector<double> y = pack_extended(s);
    auto f = [&](double, const std::vector<double>& yy, std::vector<double>& dy) {
        extended_field_flat(d1, yy, dy);
    };
    OdeOptions oo;
    oo.rtol = 1e-13;
    oo.atol = 1e-16;
    double T = 100.0 * 2.0 * M_PI;
    y = ode_integrate(f, 0.0, y, T, oo);
    ExtendedState e = unpack_extended(y, 1);
    double inv = e.u[0] * e.u[0] + e.v[0] * e.v[0];
    CHECK(std::abs(inv - 0.01) <= 1e-10);
    CHECK(e.eps == 0.1);
}

TEST_CASE("roundtrip: field evaluation re-extracts its own coefficients") {
    oracle::Rng rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        FourierField f = random_field(rng, 2);
        Vec2 x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        auto g = [&](double th) { return f.eval(x, th); };
        auto c = fourier_coefficients(g, 2);
        for (int j = -2; j <= 2; ++j) {
            CVec2 expect = f.coeff_hat_at(j, x);
            CHECK(std::abs(c[j + 2].x - expect.x) <= 1e-12);
            CHECK(std::abs(c[j + 2].y - expect.y) <= 1e-12);
        }
    }
}

TEST_CASE("extended system restricted to the rotor manifold reproduces the forced system") {
    PlanarSystem d1 = make_preset("duffing1", {0.8, 0.4, 1.0});
    const double eps = 0.05;

    // extended flow from (u, v) = (eps, 0)
    ExtendedState s;
    s.x = {0.5, 0.2};
    s.eps = eps;
    s.u = {eps};
    s.v = {0.0};
    std::vector<double> y = pack_extended(s);
    auto fe = [&](double, const std::vector<double>& yy, std::vector<double>& dy) {
        extended_field_flat(d1, yy, dy);
    };
    OdeOptions oo;
    oo.rtol = 1e-12;
    oo.atol = 1e-14;
    y = ode_integrate(fe, 0.0, y, 10.0, oo);

    // direct nonautonomous flow of the forced system
    std::array<double, 2> z{0.5, 0.2};
    auto fd = [&](double t, const std::array<double, 2>& zz, std::array<double, 2>& dz) {
        Vec2 v = perturbed_field(d1, {zz[0], zz[1]}, eps, d1.omega * t);
        dz[0] = v.x;
        dz[1] = v.y;
    };
    z = ode_integrate(fd, 0.0, z, 10.0, oo);

    CHECK(std::abs(y[0] - z[0]) <= 1e-8);
    CHECK(std::abs(y[1] - z[1]) <= 1e-8);
}
