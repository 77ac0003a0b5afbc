#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rmnc/equilibrium.hpp"
#include "rmnc/errors.hpp"
#include "rmnc/stieltjes.hpp"

using namespace rmnc;

namespace {

DensitySpec semicircle() { return DensitySpec::compact(oracle::semicircle_rho, -2.0, 2.0); }

}  // namespace

TEST_CASE("branch_sqrt examples") {
    CHECK(std::abs(branch_sqrt(4.0) - cplx(2.0, 0.0)) < 1e-15);
    CHECK(std::abs(branch_sqrt(-1.0) - cplx(0.0, 1.0)) < 1e-15);
    CHECK(std::abs(branch_sqrt(cplx(0.0, -2.0)) - cplx(-1.0, 1.0)) < 1e-15);
    CHECK(std::abs(std::sqrt(cplx(0.0, -2.0)) - cplx(1.0, -1.0)) < 1e-15);
}

TEST_CASE("branch_sqrt squares back and stays in the upper half-plane") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    for (int i = 0; i < 10000; ++i) {
        const cplx z(u(rng), u(rng));
        const cplx s = branch_sqrt(z);
        CHECK(std::abs(s * s - z) <= 1e-14 * std::abs(z) * 4);
        CHECK(s.imag() >= 0.0);
    }
}

TEST_CASE("quadrature transform examples") {
    const double eps = 1e-4;
    const auto box = DensitySpec::compact([=](double) { return 1.0 / (2 * eps); }, -eps, eps, 0.0, 0.0);
    CHECK(std::abs(stieltjes_quadrature(box, cplx(0, 1)) - cplx(0, 1)) < 1e-7);

    const cplx z(0.0, 2.0);
    CHECK(std::abs(stieltjes_quadrature(semicircle(), z) - oracle::semicircle_G(z)) < 1e-8);

    const auto crit = stationary_cubic({0.75, 1.0});
    const cplx w(1.0, 1.0);
    CHECK(std::abs(stieltjes_quadrature(density_spec(crit), w) - G_cubic(crit, w)) < 1e-6);

    CHECK_THROWS_AS((void)stieltjes_quadrature(semicircle(), cplx(0.0, 0.0)), DomainError);
}

TEST_CASE("round trip on 20 points across the grid") {
    std::vector<cplx> pts;
    for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0})
        for (double y : {0.1, 0.5, 1.0, 3.0}) pts.emplace_back(x, y);
    for (double beta : {1.0, 2.0}) {
        for (double a : {0.0, 1.5}) {
            const auto s = stationary_cubic({a, beta});
            const double tol = s.full_line() ? 1e-3 : 1e-5;
            for (const cplx z : pts) {
                const cplx want = G_cubic(s, z);
                CHECK(std::abs(stieltjes_quadrature(density_spec(s), z) - want) < tol * std::abs(want));
            }
        }
        const auto q = stationary_quartic({critical_g(beta), beta});
        for (const cplx z : pts) {
            const cplx want = G_quartic(q, z);
            CHECK(std::abs(stieltjes_quadrature(density_spec(q), z) - want) < 1e-5 * std::abs(want));
        }
    }
}

TEST_CASE("inversion") {
    const auto inv = invert_stieltjes(oracle::semicircle_G, 0.0);
    CHECK(inv.value == doctest::Approx(1.0 / M_PI).epsilon(1e-6));
    CHECK(inv.converged);
    CHECK(std::abs(invert_stieltjes(oracle::semicircle_G, 3.0).value) < 1e-8);

    const auto s = stationary_cubic({1.5, 1.0});
    const auto G = [&](cplx z) { return G_cubic(s, z); };
    const double lo = s.lower_edge(), hi = s.upper_edge();
    // The cubic extrapolation error scales like the product of the epsilons times the
    // fourth eps-derivative, bounded through the distance to the nearest edge.
    const std::vector<double> fine{0.02, 0.01, 0.005, 0.0025};
    for (int k = 1; k <= 50; ++k) {
        const double x = lo + (hi - lo) * k / 51.0;
        const double edge = std::min(x - lo, hi - x);
        if (edge > 0.2) {
            CHECK(invert_stieltjes(G, x).value == doctest::Approx(density_cubic(s, x)).epsilon(2e-5));
            CHECK(std::abs(invert_stieltjes(G, x, fine).value - density_cubic(s, x)) < 1e-6);
        }
    }
    CHECK(std::abs(invert_stieltjes(G, hi + 2.0).value) < 1e-8);
    CHECK(std::abs(invert_stieltjes(G, lo - 2.0).value) < 1e-8);
}

TEST_CASE("inversion of a smooth test density") {
    // rho(x) = (15/16)(1 - x^2)^2 on [-1, 1]
    const auto bump = DensitySpec::compact([](double x) { return std::abs(x) < 1 ? 15.0 / 16.0 * std::pow(1 - x * x, 2) : 0.0; },
                                           -1.0, 1.0, 2.0, 2.0);
    CHECK(density_mass(bump) == doctest::Approx(1.0).epsilon(1e-9));
    const auto G = [&](cplx z) { return stieltjes_quadrature(bump, z); };
    for (double x : {-0.6, -0.2, 0.0, 0.3, 0.7}) {
        const std::vector<double> eps{0.02, 0.01, 0.005, 0.0025};
        CHECK(invert_stieltjes(G, x, eps).value == doctest::Approx(bump.density(x)).epsilon(1e-4));
    }
}

TEST_CASE("principal values") {
    CHECK(std::abs(pv_integral(semicircle(), 0.0)) < 1e-10);
    // Hilbert transform of the semicircle: PV int rho / (x - lam) = -lam / 2 on the support
    for (double lam : {-1.5, -0.3, 1.0})
        CHECK(pv_integral(semicircle(), lam) == doctest::Approx(-lam / 2.0).epsilon(1e-8));
    for (double lam : {0.4, 1.1, 1.7}) CHECK(pv_integral(semicircle(), lam) == doctest::Approx(-pv_integral(semicircle(), -lam)).epsilon(1e-9));
    // -Re G(lam + i0) = lam / 2 as a second route
    CHECK(-oracle::semicircle_G(cplx(1.0, 1e-12)).real() == doctest::Approx(-pv_integral(semicircle(), 1.0)).epsilon(1e-9));
}

TEST_CASE("stationary flux identity through the principal value") {
    const auto s = stationary_cubic({0.0, 1.0});
    const auto d = density_spec(s);
    const double imj = s.J.imag();
    for (double lam : {-3.0, -2.0, -1.0, -0.5, 0.0, 0.3, 0.8, 1.5, 2.5, 4.0}) {
        const double lhs = 0.5 * pv_integral(d, lam) + lam * lam;
        CHECK(lhs == doctest::Approx(imj / (M_PI * density_cubic(s, lam))).epsilon(1e-3));
    }
}

TEST_CASE("Akhiezer check") {
    CHECK(akhiezer_check([](cplx z) { return -1.0 / z; }).pass());
    const auto half = akhiezer_check([](cplx z) { return -0.5 / z; });
    CHECK(!half.mass_ok);
    CHECK(!half.pass());
    const auto s = stationary_cubic({0.0, 1.0});
    CHECK(akhiezer_check([&](cplx z) { return G_cubic(s, z); }).pass());
    CHECK(!akhiezer_check([](cplx z) { return 1.0 / z; }).positivity_ok);
}

TEST_CASE("tail mass and heavy tailed specs") {
    CHECK(tail_mass(0.5, 100.0) == 0.01);
    // rho = (1/pi) / (1 + x^2), tail coefficient 1/pi
    const auto cauchy = DensitySpec::heavy_tailed([](double x) { return 1.0 / (M_PI * (1 + x * x)); }, 1.0 / M_PI);
    CHECK(cauchy.full_line());
    CHECK(density_mass(cauchy) == doctest::Approx(1.0).epsilon(1e-8));
    // G(z) = -1/(z + i) for z in H
    const cplx z(0.5, 0.7);
    CHECK(std::abs(stieltjes_quadrature(cauchy, z) - (-1.0 / (z + cplx(0, 1)))) < 1e-7);
    CHECK(integrate_density(cauchy, -1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(pv_integral(cauchy, 0.0) == doctest::Approx(0.0).epsilon(1e-9));
    // PV of the Cauchy density: Re of -1/(lam + i) = -lam / (1 + lam^2)
    CHECK(pv_integral(cauchy, 2.0) == doctest::Approx(-2.0 / 5.0).epsilon(1e-7));
    CHECK(integrate_against(semicircle(), [](double x) { return cplx(x * x); }).real() == doctest::Approx(1.0).epsilon(1e-10));
}
