#include <doctest.h>

#include <cmath>
#include <random>

#include "rmnc/dynamics.hpp"
#include "rmnc/equilibrium.hpp"

using namespace rmnc;

namespace {

std::vector<cplx> default_targets() {
    std::vector<cplx> t;
    for (double y : {0.5, 1.0})
        for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0}) t.emplace_back(x, y);
    return t;
}

cplx quadratic_residual(const StationarySolution& s, const CubicModel& m, cplx z, cplx G) {
    return m.beta / 4.0 * G * G + (z * z - m.a) * G + z - s.J;
}

}  // namespace

TEST_CASE("H and G conversions") {
    const CubicModel m{2.0, 1.0};
    CHECK(std::abs(h_from_g(0.0, std::sqrt(2.0), m)) < 1e-15);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    for (int i = 0; i < 100; ++i) {
        const cplx G(u(rng), u(rng)), z(u(rng), std::abs(u(rng)));
        // exact up to the rounding of adding and removing (2/beta)(z^2 - a)
        const cplx shift = 2.0 / m.beta * (z * z - m.a);
        CHECK(std::abs(g_from_h(h_from_g(G, z, m), z, m) - G) <= 4e-16 * (std::abs(G) + std::abs(shift)));
    }
}

TEST_CASE("stationary H is a square root of (4/beta^2) P") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> ux(-3.0, 3.0), uy(-3.0, 0.5);
    for (double beta : {1.0, 2.0}) {
        for (double a : {0.0, 1.5}) {
            const CubicModel m{a, beta};
            const auto s = stationary_cubic(m);
            for (int i = 0; i < 100; ++i) {
                const cplx z(ux(rng), std::pow(10.0, uy(rng)));
                const cplx H = h_from_g(G_cubic(s, z), z, m);
                const cplx P = (z * z - a) * (z * z - a) - beta * (z - s.J);
                CHECK(std::abs(H * H - 4.0 / (beta * beta) * P) < 1e-10 * (1.0 + std::abs(P)));
                // with the cut of branch_sqrt on the positive real axis of P, the
                // global-branch form is the analytic H only in the right half-plane
                if (z.real() > 0.0) {
                    CHECK(std::abs(H - 2.0 / beta * branch_sqrt(P)) < 1e-8 * (1.0 + std::abs(H)));
                }
            }
        }
    }
}

TEST_CASE("stationary start stays on the stationary branch") {
    const CubicModel m{0.0, 1.0};
    const auto s = stationary_cubic(m);
    const auto datum = stationary_datum(s);
    for (const cplx z0 : {cplx(0.5, 1.0), cplx(-1.0, 2.0), cplx(2.0, 0.5)}) {
        const auto ch = integrate_characteristic(z0, datum, m, 10.0, 1e-4);
        CHECK(ch.trajectory.size() > 1);
        double worst = 0.0;
        for (const auto& p : ch.trajectory) {
            const cplx G = g_from_h(-2.0 / m.beta * p.v, p.z, m);
            worst = std::max(worst, std::abs(quadratic_residual(s, m, p.z, G)));
            CHECK(p.z.imag() >= 1e-6);
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("delta start stays in the upper half-plane") {
    const CubicModel m{0.0, 1.0};
    const auto ch = integrate_characteristic(cplx(0.0, 2.0), delta_datum(), m, 1.0, 1e-3);
    CHECK(!ch.halted);
    CHECK(ch.trajectory.back().t == doctest::Approx(1.0));
    for (const auto& p : ch.trajectory) CHECK(p.z.imag() > 0.0);
    // the transported quantity is conserved
    const cplx inv0 = transported_invariant(ch.trajectory.front().z, g_from_h(-2.0 * ch.trajectory.front().v, ch.trajectory.front().z, m), m);
    for (const auto& p : ch.trajectory) {
        const cplx inv = transported_invariant(p.z, g_from_h(-2.0 * p.v, p.z, m), m);
        CHECK(std::abs(inv - inv0) < 1e-9);
    }
}

TEST_CASE("characteristic integrator is fourth order") {
    const CubicModel m{0.3, 1.0};
    const cplx z0(0.2, 1.5);
    const auto ref = integrate_characteristic(z0, delta_datum(), m, 1.0, 1e-4).trajectory.back().z;
    const auto c1 = integrate_characteristic(z0, delta_datum(), m, 1.0, 0.02).trajectory.back().z;
    const auto c2 = integrate_characteristic(z0, delta_datum(), m, 1.0, 0.01).trajectory.back().z;
    const double ratio = std::abs(c1 - ref) / std::abs(c2 - ref);
    CHECK(ratio > 12.0);
    CHECK(ratio < 20.0);
}

TEST_CASE("characteristic halts near the real axis") {
    // with a zero field the path starts at rest and falls onto the real axis
    const CubicModel m{0.0, 1.0};
    InitialDatum zero{[](cplx) { return cplx(0.0, 0.0); }, [](cplx) { return cplx(0.0, 0.0); }};
    const auto ch = integrate_characteristic(cplx(-3.0, 0.01), zero, m, 5.0, 1e-3, 1e-3);
    CHECK(ch.halted);
    CHECK(ch.halt_time < 5.0);
    CHECK(ch.halt_time == ch.trajectory.back().t);
    for (const auto& p : ch.trajectory) CHECK(p.z.imag() >= 1e-3);
}

TEST_CASE("evolution at T = 0 is the identity") {
    const CubicModel m{0.0, 1.0};
    const auto targets = default_targets();
    const auto f = evolve_G(delta_datum(), m, targets, 0.0);
    CHECK(f.all_converged());
    for (std::size_t k = 0; k < targets.size(); ++k) CHECK(std::abs(f.values[k] + 1.0 / targets[k]) < 1e-14);
}

TEST_CASE("stationary data are fixed points") {
    for (double a : {0.0, 1.5}) {
        const CubicModel m{a, 1.0};
        const auto s = stationary_cubic(m);
        const auto targets = default_targets();
        const std::vector<double> times{1.0, 5.0, 10.0};
        const auto fields = evolve_G_series(stationary_datum(s), m, targets, times);
        REQUIRE(fields.size() == times.size());
        for (const auto& f : fields) {
            CHECK(f.all_converged());
            for (std::size_t k = 0; k < targets.size(); ++k)
                CHECK(std::abs(f.values[k] - G_cubic(s, targets[k])) < 1e-6);
        }
    }
}

TEST_CASE("delta start relaxes to the stationary transform") {
    const CubicModel m{0.0, 1.0};
    const auto s = stationary_cubic(m);
    const auto targets = default_targets();
    std::vector<double> times;
    for (int t = 1; t <= 50; ++t) times.push_back(t);
    const auto fields = evolve_G_series(delta_datum(), m, targets, times);
    double last = INFINITY;
    double worst_increase = 0.0;
    for (const auto& f : fields) {
        CHECK(f.all_converged());
        double d = 0.0;
        for (std::size_t k = 0; k < targets.size(); ++k) {
            d = std::max(d, std::abs(f.values[k] - G_cubic(s, targets[k])));
            CHECK(f.values[k].imag() >= -1e-8);
        }
        if (f.time > 5.0) worst_increase = std::max(worst_increase, d - last);
        last = d;
    }
    CHECK(last < 1e-3);
    CHECK(worst_increase <= 1e-10);
}

TEST_CASE("mass is conserved along the evolution") {
    const CubicModel m{0.0, 1.0};
    const std::vector<cplx> far{cplx(0.0, 1e3)};
    const std::vector<double> times{0.5, 2.0, 10.0};
    for (const auto& f : evolve_G_series(delta_datum(), m, far, times)) {
        CHECK(f.all_converged());
        CHECK(std::abs(-cplx(0.0, 1e3) * f.values[0] - 1.0) < 1e-3);
    }
}

TEST_CASE("shooting is unique for different seeds") {
    const CubicModel m{0.0, 1.0};
    for (const cplx target : {cplx(0.0, 1.0), cplx(1.0, 0.5), cplx(-1.5, 0.8)}) {
        const auto r1 = shoot(delta_datum(), m, target, 0.3, target);
        const auto r2 = shoot(delta_datum(), m, target, 0.3, target + cplx(0.05, 0.05));
        REQUIRE(r1.converged);
        REQUIRE(r2.converged);
        CHECK(std::abs(r1.z0 - r2.z0) < 1e-8);
        const auto ch = integrate_characteristic(r1.z0, delta_datum(), m, 0.3, 0.3 / 200.0);
        CHECK(std::abs(ch.trajectory.back().z - target) < 1e-6);
    }
}

TEST_CASE("Burgers residual") {
    const CubicModel m{0.0, 1.0};
    const std::vector<cplx> centers{cplx(-1.0, 0.7), cplx(0.0, 1.0), cplx(1.0, 0.6), cplx(0.5, 2.0)};
    const auto pts = stencil_targets(centers, 1e-3);
    CHECK(pts.size() == 20);

    const auto s = stationary_cubic(m);
    const std::vector<double> st{1.0, 1.001};
    CHECK(residual_burgers(evolve_G_series(stationary_datum(s), m, pts, st), m) < 1e-8);

    // Forward difference in t: the error budget is dominated by (dt / 2) |G_tt|.
    const std::vector<double> t1{1.0, 1.001};
    const std::vector<double> t2{1.0, 1.002};
    const double r1 = residual_burgers(evolve_G_series(delta_datum(), m, pts, t1), m);
    const double r2 = residual_burgers(evolve_G_series(delta_datum(), m, pts, t2), m);
    CHECK(r1 < 5e-4);
    CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("flux density") {
    const CubicModel m0{0.0, 1.0};
    const auto s0 = stationary_cubic(m0);
    const auto d0 = density_spec(s0);
    for (double lam : {-5.0, -1.0, 0.0, 1.0, 5.0})
        CHECK(flux_density(d0, lam, m0) == doctest::Approx(flux_rate(s0)).epsilon(1e-3));
    CHECK(flux_density(d0, 0.0, m0) == doctest::Approx(0.13025).epsilon(1e-4));

    const CubicModel m1{1.5, 1.0};
    const auto s1 = stationary_cubic(m1);
    const auto d1 = density_spec(s1);
    for (double lam : {0.5, 1.0, 1.5, 2.0}) CHECK(std::abs(flux_density(d1, lam, m1)) < 2e-3);
    CHECK(flux_density(d1, -1.0, m1) == 0.0);
    CHECK(flux_density(d1, 3.0, m1) == 0.0);
}
