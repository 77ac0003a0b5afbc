#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rmnc/analysis.hpp"
#include "rmnc/equilibrium.hpp"
#include "rmnc/errors.hpp"

using namespace rmnc;

namespace {

// Rejection sampler for the semicircle on [-2, 2].
double sample_semicircle(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ux(-2.0, 2.0), uy(0.0, 1.0 / M_PI);
    for (;;) {
        const double x = ux(rng);
        if (uy(rng) <= oracle::semicircle_rho(x)) return x;
    }
}

Histogram random_histogram(std::mt19937_64& rng, std::size_t samples) {
    Histogram h(-3.0, 3.0, 30);
    std::normal_distribution<double> nd(0.0, std::uniform_real_distribution<double>(0.5, 2.0)(rng));
    for (std::size_t i = 0; i < samples; ++i) h.add(nd(rng));
    return h;
}

}  // namespace

TEST_CASE("histogram bookkeeping") {
    Histogram h(0.0, 1.0, 4);
    for (double x : {-1.0, 0.0, 0.1, 0.3, 0.99, 1.0, 2.0, 0.5}) h.add(x);
    CHECK(h.underflow() == 1);
    CHECK(h.overflow() == 2);
    CHECK(h.total() == 8);
    CHECK(h.count(0) == 2);
    CHECK(h.count(1) == 1);
    CHECK(h.count(2) == 1);
    CHECK(h.count(3) == 1);
    std::uint64_t sum = h.underflow() + h.overflow();
    double integral = 0.0;
    for (std::size_t i = 0; i < h.bins(); ++i) {
        sum += h.count(i);
        integral += h.density(i) * h.width();
    }
    CHECK(sum == h.total());
    CHECK(integral == doctest::Approx(5.0 / 8.0));
    CHECK(h.underflow_fraction() == doctest::Approx(1.0 / 8.0));
    CHECK(h.center(1) == doctest::Approx(0.375));

    Histogram g(0.0, 1.0, 4);
    g.add(0.6);
    h.merge(g);
    CHECK(h.total() == 9);
    CHECK(h.count(2) == 2);
    CHECK_THROWS_AS(h.merge(Histogram(0.0, 2.0, 4)), DomainError);

    Histogram r(0.0, 1.0, 4);
    r.set_counts(h.counts(), h.underflow(), h.overflow());
    CHECK(r.total() == h.total());
    CHECK(Histogram(0.0, 1.0, 4).density(0) == 0.0);
}

TEST_CASE("L1 distance examples") {
    const auto sc = DensitySpec::compact(oracle::semicircle_rho, -2.0, 2.0);
    // exact up to the Gauss rule on the two bins holding a square-root edge
    CHECK(l1_distance(Histogram(-6.0, 6.0, 400), sc) == doctest::Approx(1.0).epsilon(1e-5));

    const auto uniform = DensitySpec::compact([](double x) { return x >= 0.0 && x <= 1.0 ? 1.0 : 0.0; }, 0.0, 1.0, 0.0, 0.0);
    Histogram flat(0.0, 1.0, 10);
    for (std::size_t i = 0; i < 10; ++i)
        for (int k = 0; k < 7; ++k) flat.add(0.1 * (static_cast<double>(i) + 0.5));
    CHECK(l1_distance(flat, uniform) < 1e-12);

    std::mt19937_64 rng(1);
    Histogram h(-6.0, 6.0, 400);
    for (int i = 0; i < 1000000; ++i) h.add(sample_semicircle(rng));
    CHECK(l1_distance(h, sc) < 0.02);

    // mass outside the range counts against the histogram
    const auto cauchy = DensitySpec::heavy_tailed([](double x) { return 1.0 / (M_PI * (1 + x * x)); }, 1.0 / M_PI);
    Histogram empty_tail(-1.0, 1.0, 10);
    CHECK(l1_distance(empty_tail, cauchy) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("L1 distance between histograms is a metric") {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 20; ++t) {
        const auto a = random_histogram(rng, 2000);
        const auto b = random_histogram(rng, 2000);
        const auto c = random_histogram(rng, 2000);
        CHECK(l1_distance(a, a) == 0.0);
        CHECK(l1_distance(a, b) == doctest::Approx(l1_distance(b, a)).epsilon(1e-14));
        CHECK(l1_distance(a, c) <= l1_distance(a, b) + l1_distance(b, c) + 1e-12);
    }
    CHECK_THROWS_AS((void)l1_distance(Histogram(0, 1, 3), Histogram(0, 1, 4)), DomainError);
}

TEST_CASE("bin averages use Gauss points") {
    const auto sc = DensitySpec::compact(oracle::semicircle_rho, -2.0, 2.0);
    const double want = oracle::simpson(oracle::semicircle_rho, 1.5, 2.0, 200000) / 0.5;
    CHECK(bin_average(sc, 1.5, 2.5) == doctest::Approx(want / 2.0).epsilon(1e-4));
    CHECK(bin_average(sc, 0.0, 0.5) == doctest::Approx(oracle::simpson(oracle::semicircle_rho, 0.0, 0.5) / 0.5).epsilon(1e-9));
}

TEST_CASE("tail fit on synthetic heavy tails") {
    // 0.8 of the mass uniform on [-5, 5], 0.2 in C / x^2 tails beyond |x| = 5 with C = 0.5
    const double C = 0.5;
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Histogram h(-50.0, 50.0, 400);
    for (int i = 0; i < 400000; ++i) {
        if (u(rng) < 0.8) {
            h.add(-5.0 + 10.0 * u(rng));
        } else {
            const double x = 5.0 / (1.0 - u(rng));
            h.add(u(rng) < 0.5 ? x : -x);
        }
    }
    const auto fit = tail_fit(h);
    REQUIRE(fit.applicable);
    CHECK(fit.exponent == doctest::Approx(-2.0).epsilon(0.075));
    CHECK(fit.coefficient == doctest::Approx(C).epsilon(0.2));
    CHECK(fit.coefficient_fixed == doctest::Approx(C).epsilon(0.2));
    CHECK(fit.exponent_stderr > 0.0);
    CHECK(fit.bins_used > 10);

    Histogram compact(-10.0, 10.0, 100);
    for (int i = 0; i < 1000; ++i) compact.add(-2.0 + 4.0 * u(rng));
    CHECK(!tail_fit(compact).applicable);
}

TEST_CASE("edge exponents") {
    const auto sup = stationary_cubic({1.5, 1.0});
    const auto e1 = edge_exponent_fit(density_spec(sup), sup.upper_edge(), -1);
    CHECK(e1.exponent == doctest::Approx(0.5).epsilon(0.04));
    CHECK(e1.r_squared > 0.999);
    const auto e2 = edge_exponent_fit(density_spec(sup), sup.lower_edge(), +1);
    CHECK(e2.exponent == doctest::Approx(0.5).epsilon(0.04));

    const auto crit = stationary_cubic({0.75, 1.0});
    CHECK(edge_exponent_fit(density_spec(crit), crit.lower_edge(), +1).exponent == doctest::Approx(1.5).epsilon(0.02 / 1.5));
    CHECK(edge_exponent_fit(density_spec(crit), crit.upper_edge(), -1).exponent == doctest::Approx(0.5).epsilon(0.04));

    const auto q = stationary_quartic({-1.0 / 24.0, 1.0});
    CHECK(edge_exponent_fit(density_spec(q), q.lower_edge(), +1).exponent == doctest::Approx(1.5).epsilon(0.02 / 1.5));
    CHECK(edge_exponent_fit(density_spec(q), q.upper_edge(), -1).exponent == doctest::Approx(1.5).epsilon(0.02 / 1.5));
}

TEST_CASE("comparison JSON") {
    const std::string j = to_json(Comparison{"l1", 0.05, 0.1, true});
    CHECK(j.find("\"metric\"") != std::string::npos);
    CHECK(j.find("\"pass\":true") != std::string::npos);
}
