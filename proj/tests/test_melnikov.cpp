#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sepmel/melnikov.hpp"

using namespace sepmel;

// Frozen expectations (long-double brute quadrature + table integrals, see
// oracles.hpp). The printed constants of the source material's first example
// disagree with these; the quadrature oracle is the ground truth here.
//   duffing1: Mhat_0 = -(4/3) delta,  Mhat_1 = -i (sqrt2/2) pi w beta sech(pi w/2)
//   duffing2: Mhat_0 = -(2 sqrt2/3) delta,  Mhat_1 = (sqrt2/2) pi w beta csch(pi w/sqrt2)
static const double kD1M1 = 0.88532620854744482;    // |Mhat_1| duffing1, beta=omega=1
static const double kD2M1 = 0.4875773701706706;   // Mhat_1 duffing2, beta=omega=1
static const double kD2M0 = -0.9428090415820634;   // Mhat_0 duffing2, delta=1

TEST_CASE("oracle self-check: brute quadrature equals the table integrals") {
    using namespace oracle;
    // int sech^2 t tanh^2 t dt = 2/3
    cld i1 = romberg([](long double t) { return cld(std::pow(1.0L / std::cosh(t) * std::tanh(t), 2.0L), 0.0L); },
                     -40.0L, 40.0L);
    CHECK(std::abs((double)(i1.real() - 2.0L / 3.0L)) <= 1e-14);

    cld m1 = melnikov_coeff_brute(1, 1, 1, 1.0L, 0.0L, 1.0L);
    CHECK(std::abs((double)(m1.imag() + d1_m1_abs(1.0L, 1.0L))) <= 1e-13);
    CHECK(std::abs((double)m1.real()) <= 1e-13);
    CHECK((double)d1_m1_abs(1.0L, 1.0L) == doctest::Approx(kD1M1).epsilon(1e-14));

    cld m0 = melnikov_coeff_brute(1, 1, 0, 0.0L, 1.0L, 1.0L);
    CHECK(std::abs((double)(m0.real() - d1_m0(1.0L))) <= 1e-13);

    cld n1 = melnikov_coeff_brute(2, 1, 1, 1.0L, 0.0L, 1.0L);
    CHECK(std::abs((double)(n1.real() - d2_m1(1.0L, 1.0L))) <= 1e-13);
    CHECK((double)d2_m1(1.0L, 1.0L) == doctest::Approx(kD2M1).epsilon(1e-14));

    cld n0 = melnikov_coeff_brute(2, 1, 0, 0.0L, 1.0L, 1.0L);
    CHECK(std::abs((double)(n0.real() - d2_m0(1.0L))) <= 1e-13);
    CHECK((double)d2_m0(1.0L) == doctest::Approx(kD2M0).epsilon(1e-14));
}

TEST_CASE("melnikov coefficients match the oracle on both presets") {
    Orbit o1 = closed_form_orbit("duffing1");
    PlanarSystem d1b = make_preset("duffing1", {1.0, 0.0, 1.0});
    auto [m1, e1] = melnikov_coefficient(o1, d1b, 1, 1e-10);
    CHECK(std::abs(m1 - cd(0.0, -kD1M1)) <= 1e-9);
    CHECK(e1 <= 1e-10);

    PlanarSystem d1d = make_preset("duffing1", {0.0, 1.0, 1.0});
    auto [m0, e0] = melnikov_coefficient(o1, d1d, 0, 1e-10);
    CHECK(std::abs(m0 - cd(-4.0 / 3.0, 0.0)) <= 1e-9);

    Orbit o2 = closed_form_orbit("duffing2");
    PlanarSystem d2b = make_preset("duffing2", {1.0, 0.0, 1.0});
    auto [n1, en1] = melnikov_coefficient(o2, d2b, 1, 1e-10);
    CHECK(std::abs(n1 - cd(kD2M1, 0.0)) <= 1e-9);

    SUBCASE("out-of-range harmonic") {
        CHECK_THROWS_AS(melnikov_coefficient(o1, d1b, 3, 1e-10), Error);
    }
    SUBCASE("unreachable tolerance reports ToleranceNotMet") {
        try {
            melnikov_coefficient(o1, d1b, 1, 1e-18);
            CHECK(false);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ToleranceNotMet);
        }
    }
}

TEST_CASE("melnikov series assembles all coefficients") {
    Orbit o1 = closed_form_orbit("duffing1");
    PlanarSystem sys = make_preset("duffing1", {1.0, 1.0, 1.0});
    MelnikovSeries s = melnikov_series(o1, sys);
    CHECK(s.N == 1);
    CHECK(std::abs(s.coeff(0) - cd(-4.0 / 3.0, 0.0)) <= 1e-9);
    CHECK(std::abs(s.coeff(1) - cd(0.0, -kD1M1)) <= 1e-9);
    CHECK(std::abs(s.coeff(-1) - std::conj(s.coeff(1))) == 0.0);  // symmetrized exactly

    SUBCASE("zero perturbation gives the zero series") {
        PlanarSystem z = make_preset("duffing1", {0.0, 0.0, 1.0});
        MelnikovSeries zs = melnikov_series(o1, z);
        for (int j = -1; j <= 1; ++j) CHECK(std::abs(zs.coeff(j)) == 0.0);
    }
    SUBCASE("duffing2 pure damping keeps only the mean") {
        Orbit o2 = closed_form_orbit("duffing2");
        PlanarSystem d = make_preset("duffing2", {0.0, 1.0, 1.0});
        MelnikovSeries ds = melnikov_series(o2, d);
        CHECK(std::abs(ds.coeff(0) - cd(kD2M0, 0.0)) <= 1e-9);
        CHECK(std::abs(ds.coeff(1)) <= 1e-12);
    }
    SUBCASE("threaded evaluation matches serial bit for bit") {
        MelnikovOptions mo;
        mo.threads = 3;
        MelnikovSeries p = melnikov_series(o1, sys, mo);
        for (int j = -1; j <= 1; ++j) CHECK(p.coeff(j) == s.coeff(j));
    }
}

TEST_CASE("eval_melnikov reproduces the closed-form M(theta)") {
    Orbit o2 = closed_form_orbit("duffing2");
    PlanarSystem sys2 = make_preset("duffing2", {1.0, 1.0, 1.0});
    MelnikovSeries s2 = melnikov_series(o2, sys2);
    CHECK(eval_melnikov(s2, M_PI / 2) == doctest::Approx(kD2M0).epsilon(1e-8));

    Orbit o1 = closed_form_orbit("duffing1");
    PlanarSystem sys1 = make_preset("duffing1", {1.0, 1.0, 1.0});
    MelnikovSeries s1 = melnikov_series(o1, sys1);
    double maxv = -1e300;
    for (int i = 0; i < 4096; ++i) maxv = std::max(maxv, eval_melnikov(s1, 2 * M_PI * i / 4096));
    CHECK(maxv == doctest::Approx(-4.0 / 3.0 + std::sqrt(2.0) * M_PI / std::cosh(M_PI / 2))
                      .epsilon(1e-7));

    MelnikovSeries zero;
    zero.N = 1;
    zero.coeffs.assign(3, cd{});
    zero.err.assign(3, 0.0);
    CHECK(eval_melnikov(zero, 1.234) == 0.0);
}

TEST_CASE("certificates") {
    Orbit o1 = closed_form_orbit("duffing1");
    SUBCASE("forced duffing1 is certified nonintegrable with witness 1") {
        MelnikovSeries s = melnikov_series(o1, make_preset("duffing1", {1.0, 0.0, 1.0}));
        Certificate c = certify_nonintegrability(s);
        CHECK(c.verdict == Verdict::NonIntegrable);
        CHECK(c.witness == 1);
        CHECK(c.margin > 0.0);
        CHECK(c.witness_abs == doctest::Approx(kD1M1).epsilon(1e-8));
    }
    SUBCASE("pure damping is inconclusive") {
        MelnikovSeries s = melnikov_series(o1, make_preset("duffing1", {0.0, 1.0, 1.0}));
        Certificate c = certify_nonintegrability(s);
        CHECK(c.verdict == Verdict::Inconclusive);
        CHECK(c.margin <= 0.0);
    }
    SUBCASE("sub-tolerance coefficients are inconclusive") {
        MelnikovSeries s = melnikov_series(o1, make_preset("duffing1", {1e-12, 0.0, 1.0}));
        CHECK(certify_nonintegrability(s, 1e-8).verdict == Verdict::Inconclusive);
    }
}

TEST_CASE("simple zeros of the Melnikov function") {
    Orbit o1 = closed_form_orbit("duffing1");
    SUBCASE("pure forcing: two simple zeros at 0 and pi") {
        MelnikovSeries s = melnikov_series(o1, make_preset("duffing1", {1.0, 0.0, 1.0}));
        auto z = simple_zeros(s);
        REQUIRE(z.size() == 2);
        CHECK(z[0].theta == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(z[1].theta == doctest::Approx(M_PI).epsilon(1e-9));
        CHECK(z[0].simple);
        CHECK(z[1].simple);
        CHECK(std::abs(z[0].dM) == doctest::Approx(2 * kD1M1).epsilon(1e-7));
    }
    SUBCASE("below threshold: no zeros") {
        Orbit o2 = closed_form_orbit("duffing2");
        // |Mhat0| > 2 |Mhat1| for small beta
        MelnikovSeries s = melnikov_series(o2, make_preset("duffing2", {0.1, 1.0, 1.0}));
        CHECK(simple_zeros(s).empty());
    }
    SUBCASE("constant series violates the precondition") {
        MelnikovSeries s = melnikov_series(o1, make_preset("duffing1", {0.0, 1.0, 1.0}));
        CHECK_THROWS_AS(simple_zeros(s), Error);
    }
}

TEST_CASE("zero existence ratio and the threshold") {
    Orbit o2 = closed_form_orbit("duffing2");
    SUBCASE("matches the closed form") {
        double beta = 0.7, delta = 1.0, omega = 1.0;
        MelnikovSeries s = melnikov_series(o2, make_preset("duffing2", {beta, delta, omega}));
        double expect = (2.0 * delta / (3.0 * M_PI * omega * beta)) * std::sinh(M_PI * omega / std::sqrt(2.0));
        CHECK(zero_existence_ratio(s) == doctest::Approx(expect).epsilon(1e-8));
    }
    SUBCASE("no damping: ratio zero, zeros exist") {
        MelnikovSeries s = melnikov_series(o2, make_preset("duffing2", {1.0, 0.0, 1.0}));
        CHECK(zero_existence_ratio(s) == 0.0);
        CHECK(!simple_zeros(s).empty());
    }
    SUBCASE("no forcing: ratio infinite") {
        MelnikovSeries s = melnikov_series(o2, make_preset("duffing2", {0.0, 1.0, 1.0}));
        CHECK(std::isinf(zero_existence_ratio(s)));
    }
    SUBCASE("multi-harmonic series rejected") {
        MelnikovSeries s;
        s.N = 2;
        s.coeffs.assign(5, cd{});
        s.err.assign(5, 0.0);
        s.coeffs[2 + 0] = 1.0;
        s.coeffs[2 + 2] = 0.5;
        s.coeffs[2 - 2] = 0.5;
        CHECK_THROWS_AS(zero_existence_ratio(s), Error);
    }
    SUBCASE("threshold consistency: zeros exist iff ratio < 1") {
        for (double scale : {0.85, 0.95, 1.05, 1.15}) {
            double thresh = (2.0 / (3.0 * M_PI)) * std::sinh(M_PI / std::sqrt(2.0));
            MelnikovSeries s =
                melnikov_series(o2, make_preset("duffing2", {scale * thresh, 1.0, 1.0}));
            double ratio = zero_existence_ratio(s);
            bool zeros = !(ratio >= 1.0) ? !simple_zeros(s).empty() : [&] {
                try {
                    return !simple_zeros(s).empty();
                } catch (const Error&) {
                    return false;
                }
            }();
            CHECK(zeros == (ratio < 1.0));
        }
    }
}

TEST_CASE("reality of M(theta) for random polynomial systems") {
    oracle::Rng rng(97);
    for (int trial = 0; trial < 5; ++trial) {
        // random polynomial perturbation over the duffing1 separatrix
        PlanarSystem base = make_preset("duffing1", {});
        RPolyVec2 a0, a1, b1;
        auto rp = [&](RPoly2& p) {
            for (int k = 0; k < 3; ++k)
                p.add_term((int)rng.uniform(0, 3), (int)rng.uniform(0, 3), rng.uniform(-1, 1));
        };
        rp(a0.c1); rp(a0.c2); rp(a1.c1); rp(a1.c2); rp(b1.c1); rp(b1.c2);
        PlanarSystem sys(base.H, FourierField::from_real_form(a0, {a1}, {b1}), 1.0, "random");
        Orbit o = closed_form_orbit("duffing1");
        MelnikovSeries s = melnikov_series(o, sys, {1e-9, 1});
        double worst = 0.0;
        for (int i = 0; i < 256; ++i) {
            double th = 2 * M_PI * i / 256;
            cd val{};
            for (int j = -s.N; j <= s.N; ++j)
                val += s.coeff(j) * cd(std::cos(j * th), std::sin(j * th));
            worst = std::max(worst, std::abs(val.imag()));
        }
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("phase covariance under a time shift of the orbit") {
    const double tau = 0.37;
    Orbit o = closed_form_orbit("duffing1");
    Orbit shifted = o.shifted(tau);
    PlanarSystem sys = make_preset("duffing1", {1.0, 1.0, 1.0});
    MelnikovSeries a = melnikov_series(o, sys);
    MelnikovSeries b = melnikov_series(shifted, sys);
    for (int j = -1; j <= 1; ++j) {
        CHECK(std::abs(std::abs(b.coeff(j)) - std::abs(a.coeff(j))) <= 1e-10);
        // shifted orbit multiplies Mhat_j by e^{-i j w tau}
        cd expect = a.coeff(j) * std::exp(cd(0.0, -j * sys.omega * tau));
        CHECK(std::abs(b.coeff(j) - expect) <= 1e-9);
    }
}

TEST_CASE("linearity in the forcing amplitude") {
    Orbit o = closed_form_orbit("duffing1");
    MelnikovSeries a = melnikov_series(o, make_preset("duffing1", {1.0, 0.3, 1.0}));
    MelnikovSeries b = melnikov_series(o, make_preset("duffing1", {2.0, 0.3, 1.0}));
    CHECK(std::abs(b.coeff(1) - 2.0 * a.coeff(1)) <= 1e-12 * std::abs(b.coeff(1)));
}

TEST_CASE("quadrature agrees between closed-form and shot orbits") {
    PlanarSystem d1 = make_preset("duffing1", {1.0, 0.5, 1.0});
    Saddle s = refine_saddle(d1, {0.05, 0.0});
    Orbit shot = shoot_separatrix(d1, s, s);
    Orbit closed = closed_form_orbit("duffing1");
    auto [mc, ec] = melnikov_coefficient(closed, d1, 1, 1e-10);
    auto [ms, es] = melnikov_coefficient(shot, d1, 1, 1e-9);
    CHECK(std::abs(mc - ms) <= 1e-6);
}

TEST_CASE("series JSON roundtrip is exact") {
    Orbit o = closed_form_orbit("duffing2");
    MelnikovSeries s = melnikov_series(o, make_preset("duffing2", {1.0, 1.0, 1.0}));
    MelnikovSeries r = series_from_json(series_to_json(s));
    CHECK(r.N == s.N);
    CHECK(r.omega == s.omega);
    for (int j = -s.N; j <= s.N; ++j) {
        CHECK(r.coeff(j) == s.coeff(j));
        CHECK(r.coeff_err(j) == s.coeff_err(j));
    }
    for (double th : {0.0, 0.3, 2.2}) CHECK(eval_melnikov(r, th) == eval_melnikov(s, th));
}
