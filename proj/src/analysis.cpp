#include "rmnc/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <json.hpp>

#include "rmnc/errors.hpp"

namespace rmnc {

Histogram::Histogram(double lo, double hi, std::size_t bins) : lo_(lo), hi_(hi), counts_(bins, 0) {
    if (!(hi > lo) || bins == 0) throw DomainError("Histogram: requires lo < hi and at least one bin");
    width_ = (hi - lo) / static_cast<double>(bins);
}

void Histogram::add(double x) noexcept {
    ++total_;
    if (!(x >= lo_)) {
        ++under_;
        return;
    }
    if (x >= hi_) {
        ++over_;
        return;
    }
    auto i = static_cast<std::size_t>((x - lo_) / width_);
    if (i >= counts_.size()) i = counts_.size() - 1;
    ++counts_[i];
}

void Histogram::merge(const Histogram& o) {
    if (o.counts_.size() != counts_.size() || o.lo_ != lo_ || o.hi_ != hi_) {
        throw DomainError("Histogram::merge: bin layouts differ");
    }
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += o.counts_[i];
    under_ += o.under_;
    over_ += o.over_;
    total_ += o.total_;
}

double Histogram::density(std::size_t i) const noexcept {
    if (total_ == 0) return 0.0;
    return static_cast<double>(counts_[i]) / (static_cast<double>(total_) * width_);
}

double Histogram::underflow_fraction() const noexcept {
    return total_ == 0 ? 0.0 : static_cast<double>(under_) / static_cast<double>(total_);
}

double Histogram::overflow_fraction() const noexcept {
    return total_ == 0 ? 0.0 : static_cast<double>(over_) / static_cast<double>(total_);
}

void Histogram::set_counts(std::vector<std::uint64_t> counts, std::uint64_t under, std::uint64_t over) {
    if (counts.size() != counts_.size()) throw DomainError("Histogram::set_counts: wrong number of bins");
    counts_ = std::move(counts);
    under_ = under;
    over_ = over;
    total_ = under + over;
    for (auto c : counts_) total_ += c;
}

namespace {

constexpr std::array<double, 5> kGaussNodes{-0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831,
                                            0.9061798459386640};
constexpr std::array<double, 5> kGaussWeights{0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                              0.4786286704993665, 0.2369268850561891};

double gauss5(const DensitySpec& rho, double lo, double hi) {
    const double c = 0.5 * (lo + hi);
    const double r = 0.5 * (hi - lo);
    double s = 0.0;
    for (std::size_t k = 0; k < 5; ++k) s += kGaussWeights[k] * rho.density(c + r * kGaussNodes[k]);
    return s * r;
}

double mass_between(const DensitySpec& rho, double lo, double hi) {
    if (rho.full_line()) {
        const QuadratureOptions opt;
        double m = 0.0;
        const double X = opt.window;
        const double a = std::max(lo, -X);
        const double b = std::min(hi, X);
        if (b > a) m += integrate_density(rho, a, b, opt);
        if (lo < -X) m += 0.5 * tail_mass(rho.tail_coefficient, X);
        if (hi > X) m += 0.5 * tail_mass(rho.tail_coefficient, X);
        return m;
    }
    return integrate_density(rho, lo, hi);
}

}  // namespace

double bin_average(const DensitySpec& rho, double lo, double hi) {
    std::vector<double> cuts{lo};
    for (const auto& iv : rho.intervals) {
        for (double e : {iv.lo, iv.hi}) {
            if (e > lo && e < hi) cuts.push_back(e);
        }
    }
    cuts.push_back(hi);
    std::sort(cuts.begin(), cuts.end());
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) s += gauss5(rho, cuts[k], cuts[k + 1]);
    return s / (hi - lo);
}

double l1_distance(const Histogram& h, const DensitySpec& rho) {
    double d = 0.0;
    for (std::size_t i = 0; i < h.bins(); ++i) {
        d += std::abs(h.density(i) - bin_average(rho, h.bin_lo(i), h.bin_hi(i))) * h.width();
    }
    const double inf = std::numeric_limits<double>::infinity();
    d += std::abs(h.underflow_fraction() - mass_between(rho, -inf, h.lo()));
    d += std::abs(h.overflow_fraction() - mass_between(rho, h.hi(), inf));
    return d;
}

double l1_distance(const Histogram& a, const Histogram& b) {
    if (a.bins() != b.bins() || a.lo() != b.lo() || a.hi() != b.hi()) {
        throw DomainError("l1_distance: histogram layouts differ");
    }
    double d = 0.0;
    for (std::size_t i = 0; i < a.bins(); ++i) d += std::abs(a.density(i) - b.density(i)) * a.width();
    d += std::abs(a.underflow_fraction() - b.underflow_fraction());
    d += std::abs(a.overflow_fraction() - b.overflow_fraction());
    return d;
}

TailFit tail_fit(const Histogram& h, double lower, std::uint64_t min_count) {
    TailFit fit;
    if (h.total() == 0) return fit;
    std::vector<double> xs, ys;
    std::uint64_t window_samples = 0;
    double upper = 0.0;
    for (std::size_t i = 0; i < h.bins(); ++i) {
        const double lo = std::abs(h.bin_lo(i));
        const double hi = std::abs(h.bin_hi(i));
        if (h.bin_lo(i) < 0.0 && h.bin_hi(i) > 0.0) continue;
        if (std::min(lo, hi) < lower) continue;
        upper = std::max(upper, std::max(lo, hi));
        window_samples += h.count(i);
        if (h.count(i) < min_count) continue;
        xs.push_back(std::log(std::abs(h.center(i))));
        ys.push_back(std::log(h.density(i)));
    }
    fit.samples_used = window_samples;
    fit.bins_used = xs.size();
    if (upper > lower && window_samples > 0) {
        const double window_mass = static_cast<double>(window_samples) / static_cast<double>(h.total());
        fit.coefficient_fixed = window_mass / (2.0 * (1.0 / lower - 1.0 / upper));
    }
    if (xs.size() < 3) return fit;
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
        syy += (ys[k] - my) * (ys[k] - my);
    }
    if (sxx <= 0.0) return fit;
    fit.exponent = sxy / sxx;
    fit.coefficient = std::exp(my - fit.exponent * mx);
    double sse = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double r = ys[k] - my - fit.exponent * (xs[k] - mx);
        sse += r * r;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    fit.exponent_stderr = std::sqrt(sse / std::max(1.0, n - 2.0) / sxx);
    fit.applicable = true;
    return fit;
}

EdgeFit edge_exponent_fit(const DensitySpec& rho, double edge, int side, double s_min, double s_max,
                          std::size_t points) {
    if (!(s_min > 0.0) || !(s_max > s_min) || points < 2 || (side != 1 && side != -1)) {
        throw DomainError("edge_exponent_fit: requires 0 < s_min < s_max, points >= 2, side = +-1");
    }
    std::vector<double> xs, ys;
    const double step = std::log(s_max / s_min) / static_cast<double>(points - 1);
    for (std::size_t k = 0; k < points; ++k) {
        const double s = s_min * std::exp(step * static_cast<double>(k));
        const double r = rho.density(edge + side * s);
        if (!(r > 0.0)) continue;
        xs.push_back(std::log(s));
        ys.push_back(std::log(r));
    }
    EdgeFit fit;
    fit.points = xs.size();
    if (xs.size() < 2) return fit;
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        mx += xs[k];
        my += ys[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
        syy += (ys[k] - my) * (ys[k] - my);
    }
    fit.exponent = sxy / sxx;
    double sse = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double r = ys[k] - my - fit.exponent * (xs[k] - mx);
        sse += r * r;
        fit.max_residual = std::max(fit.max_residual, std::abs(r));
    }
    fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    return fit;
}

std::string to_json(const Comparison& c) {
    nlohmann::ordered_json j;
    j["metric"] = c.metric;
    j["value"] = c.value;
    j["tolerance"] = c.tolerance;
    j["pass"] = c.pass;
    return j.dump();
}

}  // namespace rmnc
