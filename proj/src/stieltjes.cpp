#include "rmnc/stieltjes.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rmnc/errors.hpp"

namespace rmnc {

namespace {

using boost::math::quadrature::gauss_kronrod;
constexpr unsigned kMaxDepth = 30;

// Running sum of adaptive Gauss-Kronrod pieces with a shared error budget.
template <class T>
class Accumulator {
public:
    explicit Accumulator(const QuadratureOptions& opt) : opt_(opt) {}

    template <class F>
    void add(F&& f, double a, double b) {
        if (!(b > a)) return;
        double err = 0.0;
        const T piece = gauss_kronrod<double, 31>::integrate(f, a, b, kMaxDepth, opt_.rel_tol, &err);
        sum_ += piece;
        err_ += err;
    }

    T finish(const char* what) const {
        const double scale = std::max(1.0, std::abs(sum_));
        if (!std::isfinite(std::abs(sum_)) || err_ > opt_.fail_tol * scale) {
            std::ostringstream os;
            os << what << ": quadrature tolerance not reached (error estimate " << err_ << ")";
            throw NumericalError(os.str(), err_);
        }
        return sum_;
    }

private:
    const QuadratureOptions& opt_;
    T sum_{};
    double err_ = 0.0;
};

// Integrate h(x) over [lo, hi] through x = lo + (hi - lo)(1 - cos(pi u)) / 2, which
// turns half-integer power singularities at either end into smooth integrands.
template <class T, class H>
void add_cosine_mapped(Accumulator<T>& acc, H&& h, double lo, double hi) {
    const double w = hi - lo;
    auto g = [&](double u) -> T {
        const double x = lo + 0.5 * w * (1.0 - std::cos(std::numbers::pi * u));
        const double jac = 0.5 * w * std::numbers::pi * std::sin(std::numbers::pi * u);
        if (jac == 0.0) return T{};
        return h(x) * jac;
    };
    acc.add(g, 0.0, 1.0);
}

// Integrate h over [L, X] and [-X, -L] using x = +-exp(u).
template <class T, class H>
void add_log_tails(Accumulator<T>& acc, H&& h, double core, double window) {
    if (!(window > core)) return;
    const double u0 = std::log(core);
    const double u1 = std::log(window);
    acc.add([&](double u) -> T { const double x = std::exp(u); return h(x) * x; }, u0, u1);
    acc.add([&](double u) -> T { const double x = std::exp(u); return h(-x) * x; }, u0, u1);
}

template <class T, class H>
void add_support(Accumulator<T>& acc, const DensitySpec& d, H&& h, const QuadratureOptions& opt) {
    if (d.full_line()) {
        const double core = std::min(opt.core, opt.window);
        acc.add(h, -core, core);
        add_log_tails(acc, h, core, opt.window);
        return;
    }
    for (const auto& iv : d.intervals) add_cosine_mapped(acc, h, iv.lo, iv.hi);
}

// int_{|x| > X} C / (x^2 (x - z)) dx over both tails: 2C sum_{m odd} z^m / ((m + 2) X^(m + 2)).
cplx tail_stieltjes(double c, double window, cplx z) {
    if (c == 0.0) return {};
    const cplx w = z / window;
    cplx term = w / (window * window);
    cplx sum{};
    for (int m = 1; m < 40; m += 2) {
        sum += term / static_cast<double>(m + 2);
        term *= w * w;
    }
    return 2.0 * c * sum;
}

}  // namespace

cplx branch_sqrt(cplx z) noexcept {
    const double im = z.imag();
    const cplx s = std::sqrt(cplx(z.real(), im == 0.0 ? 0.0 : im));
    return im < 0.0 ? -s : s;
}

DensitySpec DensitySpec::compact(std::function<double(double)> rho, double lo, double hi, double lo_exp,
                                 double hi_exp) {
    DensitySpec d;
    d.density = std::move(rho);
    d.intervals.push_back({lo, hi, lo_exp, hi_exp});
    return d;
}

DensitySpec DensitySpec::heavy_tailed(std::function<double(double)> rho, double tail_coefficient) {
    DensitySpec d;
    d.density = std::move(rho);
    d.tail_coefficient = tail_coefficient;
    return d;
}

double tail_mass(double tail_coefficient, double window) noexcept { return 2.0 * tail_coefficient / window; }

double density_mass(const DensitySpec& d, const QuadratureOptions& opt) {
    Accumulator<double> acc(opt);
    add_support(acc, d, [&](double x) { return d.density(x); }, opt);
    double m = acc.finish("density_mass");
    if (d.full_line()) m += tail_mass(d.tail_coefficient, opt.window);
    return m;
}

cplx integrate_against(const DensitySpec& d, const std::function<cplx(double)>& f, const QuadratureOptions& opt) {
    Accumulator<cplx> acc(opt);
    add_support(acc, d, [&](double x) { return d.density(x) * f(x); }, opt);
    return acc.finish("integrate_against");
}

double integrate_density(const DensitySpec& d, double lo, double hi, const QuadratureOptions& opt) {
    if (!(hi > lo)) return 0.0;
    Accumulator<double> acc(opt);
    auto rho = [&](double x) { return d.density(x); };
    if (d.full_line()) {
        // split where the log-scaled tails begin so each piece stays well resolved
        const double core = opt.core;
        const double a = std::max(lo, -core);
        const double b = std::min(hi, core);
        if (b > a) acc.add(rho, a, b);
        if (hi > core) {
            const double u0 = std::log(std::max(lo, core));
            acc.add([&](double u) { const double x = std::exp(u); return rho(x) * x; }, u0, std::log(hi));
        }
        if (lo < -core) {
            const double u0 = std::log(std::max(-hi, core));
            acc.add([&](double u) { const double x = std::exp(u); return rho(-x) * x; }, u0, std::log(-lo));
        }
        return acc.finish("integrate_density");
    }
    for (const auto& iv : d.intervals) {
        const double a = std::max(lo, iv.lo);
        const double b = std::min(hi, iv.hi);
        if (b <= a) continue;
        add_cosine_mapped(acc, rho, a, b);
    }
    return acc.finish("integrate_density");
}

cplx stieltjes_quadrature(const DensitySpec& d, cplx z, const QuadratureOptions& opt) {
    if (!(z.imag() > 0.0)) throw DomainError("stieltjes_quadrature: requires Im z > 0");
    Accumulator<cplx> acc(opt);
    add_support(acc, d, [&](double x) { return cplx(d.density(x)) / (x - z); }, opt);
    cplx g = acc.finish("stieltjes_quadrature");
    if (d.full_line()) g += tail_stieltjes(d.tail_coefficient, opt.window, z);
    return g;
}

InversionResult invert_stieltjes(const ComplexFunction& G, double x, std::span<const double> epsilons) {
    InversionResult out;
    const std::size_t n = epsilons.size();
    if (n == 0) return out;
    // Neville tableau for the polynomial extrapolation of Im G(x + i eps) / pi to eps = 0.
    std::vector<double> t(n);
    for (std::size_t k = 0; k < n; ++k) t[k] = G(cplx(x, epsilons[k])).imag() / std::numbers::pi;
    double previous = t[n - 1];
    for (std::size_t level = 1; level < n; ++level) {
        previous = t[n - 1];
        for (std::size_t k = n - 1; k >= level; --k) {
            const double e_hi = epsilons[k - level];
            const double e_lo = epsilons[k];
            t[k] = (e_hi * t[k] - e_lo * t[k - 1]) / (e_hi - e_lo);
        }
    }
    out.value = t[n - 1];
    out.error_estimate = std::abs(t[n - 1] - previous);
    out.converged = out.error_estimate <= 1e-4 * std::max(1.0, std::abs(out.value));
    return out;
}

double pv_integral(const DensitySpec& d, double lam, const QuadratureOptions& opt) {
    Accumulator<double> acc(opt);
    auto plain = [&](double x) { return d.density(x) / (x - lam); };

    if (d.full_line()) {
        const double X = opt.window;
        const double core = std::min(opt.core, X);
        if (!(std::abs(lam) < core)) throw DomainError("pv_integral: lam outside the linear core window");
        const double r = d.density(lam);
        auto sub = [&](double x) { return x == lam ? 0.0 : (d.density(x) - r) / (x - lam); };
        acc.add(sub, -core, lam);
        acc.add(sub, lam, core);
        add_log_tails(acc, sub, core, X);
        double v = acc.finish("pv_integral");
        v += r * std::log((X - lam) / (X + lam));
        v += tail_stieltjes(d.tail_coefficient, X, cplx(lam)).real();
        return v;
    }

    double log_term = 0.0;
    for (const auto& iv : d.intervals) {
        if (lam > iv.lo && lam < iv.hi) {
            const double r = d.density(lam);
            auto sub = [&](double x) { return x == lam ? 0.0 : (d.density(x) - r) / (x - lam); };
            add_cosine_mapped(acc, sub, iv.lo, lam);
            add_cosine_mapped(acc, sub, lam, iv.hi);
            log_term += r * std::log((iv.hi - lam) / (lam - iv.lo));
        } else {
            add_cosine_mapped(acc, plain, iv.lo, iv.hi);
        }
    }
    return acc.finish("pv_integral") + log_term;
}

AkhiezerReport akhiezer_check(const ComplexFunction& G) {
    AkhiezerReport rep;
    rep.heights = {1e2, 1e3, 1e4, 1e6};
    for (double y : rep.heights) {
        const cplx iy(0.0, y);
        rep.mass_deviation.push_back(std::abs(iy * G(iy) + 1.0));
    }
    bool monotone = true;
    for (std::size_t k = 1; k < rep.mass_deviation.size(); ++k) {
        if (rep.mass_deviation[k] > rep.mass_deviation[k - 1] + 1e-12) monotone = false;
    }
    rep.mass_ok = monotone && rep.mass_deviation.back() < 1e-4;

    rep.min_imag = std::numeric_limits<double>::infinity();
    for (double y : {1e-3, 1e-2, 0.1, 1.0, 10.0}) {
        for (int k = -20; k <= 20; ++k) {
            rep.min_imag = std::min(rep.min_imag, G(cplx(0.5 * k, y)).imag());
        }
    }
    rep.positivity_ok = rep.min_imag >= -1e-12;
    return rep;
}

}  // namespace rmnc
