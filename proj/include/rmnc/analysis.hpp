#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmnc/stieltjes.hpp"

namespace rmnc {

/// Uniform-bin histogram with underflow/overflow counters.
class Histogram {
public:
    Histogram() = default;
    Histogram(double lo, double hi, std::size_t bins);

    void add(double x) noexcept;
    /// Counter addition; throws DomainError when the layouts differ.
    void merge(const Histogram& other);

    [[nodiscard]] double lo() const noexcept { return lo_; }
    [[nodiscard]] double hi() const noexcept { return hi_; }
    [[nodiscard]] std::size_t bins() const noexcept { return counts_.size(); }
    [[nodiscard]] double width() const noexcept { return width_; }
    [[nodiscard]] double bin_lo(std::size_t i) const noexcept { return lo_ + width_ * static_cast<double>(i); }
    [[nodiscard]] double bin_hi(std::size_t i) const noexcept { return lo_ + width_ * static_cast<double>(i + 1); }
    [[nodiscard]] double center(std::size_t i) const noexcept { return lo_ + width_ * (static_cast<double>(i) + 0.5); }

    [[nodiscard]] const std::vector<std::uint64_t>& counts() const noexcept { return counts_; }
    [[nodiscard]] std::uint64_t count(std::size_t i) const noexcept { return counts_[i]; }
    [[nodiscard]] std::uint64_t underflow() const noexcept { return under_; }
    [[nodiscard]] std::uint64_t overflow() const noexcept { return over_; }
    [[nodiscard]] std::uint64_t total() const noexcept { return total_; }

    /// count / (total * width); 0 for an empty histogram.
    [[nodiscard]] double density(std::size_t i) const noexcept;
    [[nodiscard]] double underflow_fraction() const noexcept;
    [[nodiscard]] double overflow_fraction() const noexcept;

    /// Restores raw counters (e.g. from CSV); total is recomputed.
    void set_counts(std::vector<std::uint64_t> counts, std::uint64_t under, std::uint64_t over);

private:
    double lo_ = 0.0;
    double hi_ = 1.0;
    double width_ = 1.0;
    std::vector<std::uint64_t> counts_;
    std::uint64_t under_ = 0;
    std::uint64_t over_ = 0;
    std::uint64_t total_ = 0;
};

/// Mean of rho over [lo, hi] by 5-point Gauss-Legendre, split at support edges.
[[nodiscard]] double bin_average(const DensitySpec& rho, double lo, double hi);

/// sum_bins |h - mean rho| * width + |underflow fraction - mass of rho below lo|
/// + |overflow fraction - mass of rho above hi|.
[[nodiscard]] double l1_distance(const Histogram& h, const DensitySpec& rho);
/// The same distance between two histograms with identical layout.
[[nodiscard]] double l1_distance(const Histogram& a, const Histogram& b);

struct TailFit {
    bool applicable = false;
    double exponent = 0.0;
    double exponent_stderr = 0.0;
    double coefficient = 0.0;        // C in rho ~ C |x|^exponent
    double coefficient_fixed = 0.0;  // C assuming exponent -2, from the window mass
    double r_squared = 0.0;
    std::size_t bins_used = 0;
    std::uint64_t samples_used = 0;
};

/// Least-squares fit of log density against log|x| over lower <= |x| <= range edge
/// (both sides pooled). Bins with fewer than `min_count` samples are skipped.
[[nodiscard]] TailFit tail_fit(const Histogram& h, double lower = 5.0, std::uint64_t min_count = 10);

struct EdgeFit {
    double exponent = 0.0;
    double r_squared = 0.0;
    double max_residual = 0.0;
    std::size_t points = 0;
};

/// Log-log slope of rho(edge + side * s) for s in [s_min, s_max]; side is +1 or -1.
[[nodiscard]] EdgeFit edge_exponent_fit(const DensitySpec& rho, double edge, int side, double s_min = 1e-6,
                                        double s_max = 1e-2, std::size_t points = 41);

struct Comparison {
    std::string metric;
    double value = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

/// {"metric": ..., "value": ..., "tolerance": ..., "pass": ...}
[[nodiscard]] std::string to_json(const Comparison& c);

}  // namespace rmnc
