#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rmnc/equilibrium.hpp"
#include "rmnc/errors.hpp"

using namespace rmnc;

namespace {

std::vector<cplx> random_upper(std::uint64_t seed, int n) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(-4.0, 4.0), ue(-3.0, 1.0);
    std::vector<cplx> z;
    for (int i = 0; i < n; ++i) z.emplace_back(ux(rng), std::pow(10.0, ue(rng)));
    return z;
}

}  // namespace

TEST_CASE("critical cubic solution") {
    const auto s = stationary_cubic({0.75, 1.0});
    CHECK(s.regime == Regime::Critical);
    CHECK(std::abs(s.J - cplx(-0.75, 0.0)) < 1e-12);
    CHECK(std::abs(s.zeta - cplx(-0.5, 0.0)) < 1e-12);
    CHECK(s.lower_edge() == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(s.upper_edge() == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(density_cubic(s, 0.5) == doctest::Approx(2.0 / M_PI).epsilon(1e-12));
    CHECK(flux_rate(s) == 0.0);
    CHECK(!s.full_line());
}

TEST_CASE("subcritical cubic at a = 0") {
    const auto s = stationary_cubic({0.0, 1.0});
    CHECK(s.regime == Regime::Subcritical);
    CHECK(s.full_line());
    const cplx zeta = std::polar(std::cbrt(0.25), 2.0 * M_PI / 3.0);
    CHECK(std::abs(s.J - 0.75 * zeta) < 1e-13);
    CHECK(std::abs(s.J - (zeta - std::pow(zeta, 4))) < 1e-13);
    CHECK(s.J.imag() == doctest::Approx(0.40919).epsilon(1e-4));
    CHECK(flux_rate(s) == doctest::Approx(0.75 * std::cbrt(0.25) * std::sin(2 * M_PI / 3) / M_PI).epsilon(1e-13));
    CHECK(flux_rate(s) == doctest::Approx(0.13025).epsilon(1e-4));
    for (double x : {-1e3, 1e3})
        CHECK(x * x * density_cubic(s, x) == doctest::Approx(flux_rate(s)).epsilon(1e-2));
}

TEST_CASE("second expression for J agrees") {
    for (double beta : {1.0, 2.0, 4.0}) {
        for (double a : {-1.0, 0.0, 0.5}) {
            const auto s = stationary_cubic({a, beta});
            const cplx z = s.zeta;
            CHECK(std::abs(s.J - (a / beta * z * z + 0.75 * z - a * a / beta)) < 1e-12);
        }
    }
}

TEST_CASE("supercritical cubic at a = 3/2") {
    const auto s = stationary_cubic({1.5, 1.0});
    CHECK(s.regime == Regime::Supercritical);
    CHECK(s.J.imag() == 0.0);
    const double zeta = oracle::bisect([](double x) { return 4 * x * x * x - 6 * x - 1; }, -2.0, -1.0);
    const double gm = -zeta - std::sqrt(2.0 * (1.5 - zeta * zeta));
    const double gp = -zeta + std::sqrt(2.0 * (1.5 - zeta * zeta));
    CHECK(s.lower_edge() == doctest::Approx(gm).epsilon(1e-10));
    CHECK(s.upper_edge() == doctest::Approx(gp).epsilon(1e-10));
    CHECK(gm == doctest::Approx(0.465976).epsilon(1e-5));
    CHECK(gp == doctest::Approx(1.795826).epsilon(1e-6));
    // Vieta on (z - zeta)^2 (z - gm)(z - gp) = (z^2 - a)^2 - beta (z - J)
    CHECK(gm + gp == doctest::Approx(-2.0 * zeta).epsilon(1e-12));
    CHECK(gm * gp == doctest::Approx(3.0 * zeta * zeta - 3.0).epsilon(1e-12));
    CHECK(density_cubic(s, gm) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(density_cubic(s, gp) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(density_cubic(s, gm - 0.1) == 0.0);
    const double mass = oracle::simpson([&](double x) { return density_cubic(s, x); }, gm, gp, 200000);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(flux_rate(s) == 0.0);
}

TEST_CASE("supercritical G matches the quadrature transform") {
    const auto s = stationary_cubic({1.5, 1.0});
    const cplx z(3.0, 0.01);
    const cplx want = stieltjes_quadrature(density_spec(s), z);
    CHECK(std::abs(G_cubic(s, z) - want) < 1e-5 * std::abs(want));
}

TEST_CASE("G decays like -1/z") {
    for (double a : {-1.0, 0.0, 0.75, 1.5}) {
        const auto s = stationary_cubic({a, 1.0});
        const cplx iy(0.0, 1e6);
        CHECK(std::abs(G_cubic(s, iy) * iy + 1.0) < 1e-4);
    }
}

TEST_CASE("stationary identities on the parameter grid") {
    const auto pts = random_upper(5, 100);
    for (double beta : {1.0, 2.0, 4.0}) {
        for (double a : {-1.0, 0.0, 0.75, 1.5}) {
            const auto s = stationary_cubic({a, beta});
            for (const cplx z : pts) {
                const cplx G = G_cubic(s, z);
                const cplx lhs = beta / 4.0 * G * G + (z * z - a) * G + z - s.J;
                CHECK(std::abs(lhs) < 1e-10 * (1.0 + std::abs(z * z * G)));
                CHECK(std::abs(stationary_residual(s, z, G)) < 1e-10 * (1.0 + std::abs(z * z * G)));
                CHECK(G.imag() >= 0.0);
            }
        }
        for (double g : {critical_g(beta), critical_g(beta) / 2.0}) {
            const auto s = stationary_quartic({g, beta});
            for (const cplx z : pts) {
                const cplx G = G_quartic(s, z);
                const cplx lhs = beta / 4.0 * G * G + (2.0 * g * z * z * z + z / 2.0) * G + 2.0 * g * z * z - s.J;
                CHECK(std::abs(lhs) < 1e-10 * (1.0 + std::abs(z * z * z * G)));
                CHECK(G.imag() >= 0.0);
            }
        }
    }
}

TEST_CASE("imaginary J only in the subcritical cubic regime") {
    for (double beta : {1.0, 2.0, 4.0}) {
        for (double a : {-1.0, 0.0, 0.5, critical_a(beta), 1.5, 3.0}) {
            const auto s = stationary_cubic({a, beta});
            CHECK((std::abs(s.J.imag()) > 0.0) == (s.regime == Regime::Subcritical));
            CHECK((a < critical_a(beta)) == (s.regime == Regime::Subcritical));
        }
        for (double g : {critical_g(beta), critical_g(beta) / 2.0, 0.0, 0.1}) {
            CHECK(stationary_quartic({g, beta}).J.imag() == 0.0);
        }
    }
}

TEST_CASE("flux vanishes continuously at a*") {
    for (double beta : {1.0, 2.0}) {
        double prev = flux_rate(stationary_cubic({critical_a(beta) - 0.1, beta}));
        for (int k = 2; k <= 9; ++k) {
            const double f = flux_rate(stationary_cubic({critical_a(beta) - std::pow(10.0, -k), beta}));
            CHECK(f > 0.0);
            CHECK(f < prev);
            prev = f;
        }
        CHECK(prev < 1e-4);
    }
}

TEST_CASE("quartic solutions") {
    const auto c2 = stationary_quartic({-1.0 / 48.0, 2.0});
    CHECK(c2.regime == Regime::Critical);
    CHECK(c2.gamma_sq == doctest::Approx(8.0).epsilon(1e-13));
    CHECK(c2.upper_edge() == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-13));
    CHECK(c2.lower_edge() == doctest::Approx(-2.0 * std::sqrt(2.0)).epsilon(1e-13));

    CHECK(stationary_quartic({-1e-9, 1.0}).gamma_sq == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(stationary_quartic({0.0, 1.0}).gamma_sq == doctest::Approx(2.0).epsilon(1e-14));
    CHECK_THROWS_AS((void)stationary_quartic({-1.0 / 24.0 - 1e-6, 1.0}), DomainError);

    const auto c1 = stationary_quartic({-1.0 / 24.0, 1.0});
    CHECK(density_quartic(c1, 0.0) == doctest::Approx(4.0 / (3.0 * M_PI)).epsilon(1e-13));
    CHECK(density_quartic(c1, 2.0) == 0.0);
    CHECK(density_quartic(c1, -2.0) == 0.0);
    for (double x = 0.0; x < 2.0; x += 0.037) CHECK(density_quartic(c1, x) == density_quartic(c1, -x));

    // g = 0, beta = 2 is the semicircle on [-2, 2]
    const auto sc = stationary_quartic({0.0, 2.0});
    for (double x : {-1.9, -0.5, 0.0, 1.2})
        CHECK(density_quartic(sc, x) == doctest::Approx(oracle::semicircle_rho(x)).epsilon(1e-13));
    CHECK(std::abs(G_quartic(sc, cplx(0.3, 1.1)) - oracle::semicircle_G(cplx(0.3, 1.1))) < 1e-13);
}

TEST_CASE("normalization on the parameter grid") {
    for (double beta : {1.0, 2.0, 4.0}) {
        for (double a : {-1.0, 0.0, 0.75, 1.5}) {
            const auto s = stationary_cubic({a, beta});
            const double tol = s.full_line() ? 1e-4 : 1e-6;
            CHECK(density_mass(density_spec(s)) == doctest::Approx(1.0).epsilon(tol));
        }
        for (double g : {critical_g(beta), critical_g(beta) / 2.0}) {
            const auto s = stationary_quartic({g, beta});
            CHECK(density_mass(density_spec(s)) == doctest::Approx(1.0).epsilon(1e-6));
            const double gam = s.upper_edge();
            CHECK(oracle::simpson([&](double x) { return density_quartic(s, x); }, -gam, gam, 200000) ==
                  doctest::Approx(1.0).epsilon(1e-5));
        }
    }
}

TEST_CASE("densities are nonnegative") {
    for (double beta : {1.0, 2.0, 4.0}) {
        for (double a : {-1.0, 0.0, 0.75, 1.5}) {
            const auto s = stationary_cubic({a, beta});
            const double lo = s.full_line() ? -20.0 : s.lower_edge();
            const double hi = s.full_line() ? 20.0 : s.upper_edge();
            double worst = 0.0;
            for (int i = 0; i <= 10000; ++i) worst = std::min(worst, density_cubic(s, lo + (hi - lo) * i / 10000.0));
            CHECK(worst >= -1e-12);
        }
        for (double g : {critical_g(beta), critical_g(beta) / 2.0}) {
            const auto s = stationary_quartic({g, beta});
            double worst = 0.0;
            for (int i = 0; i <= 10000; ++i)
                worst = std::min(worst, density_quartic(s, s.lower_edge() + 2 * s.upper_edge() * i / 10000.0));
            CHECK(worst >= -1e-12);
        }
    }
}

TEST_CASE("critical density matches the supercritical limit") {
    // Just above a*, the supercritical path approaches the critical closed form.
    const auto crit = stationary_cubic({0.75, 1.0});
    const auto near = stationary_cubic({0.75 + 1e-9, 1.0});
    CHECK(near.regime == Regime::Supercritical);
    for (double x = -0.45; x < 1.5; x += 0.05)
        CHECK(std::abs(density_cubic(near, x) - density_cubic(crit, x)) < 1e-4);
    // The critical closed form against the generic expression Im sqrt(P(x)) / (beta pi / 2).
    for (double x = -0.45; x < 1.5; x += 0.05) {
        const double want = 2.0 / M_PI * std::pow(x + 0.5, 1.5) * std::sqrt(1.5 - x);
        CHECK(density_cubic(crit, x) == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("generic dispatch") {
    const auto s = stationary(Model{QuarticModel{-0.01, 1.0}});
    CHECK(s.family == Family::Quartic);
    CHECK(s.regime == Regime::Supercritical);
    CHECK(density(s, 0.1) == density_quartic(s, 0.1));
    CHECK(G_stationary(s, cplx(0, 1)) == G_quartic(s, cplx(0, 1)));
    CHECK(to_string(Family::Cubic).size() > 0);
    CHECK(to_string(Regime::Critical).size() > 0);
}
