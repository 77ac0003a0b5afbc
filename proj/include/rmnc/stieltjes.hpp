#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

namespace rmnc {

using cplx = std::complex<double>;
using ComplexFunction = std::function<cplx(cplx)>;

/// sqrt(r e^{i theta}) := sqrt(r) e^{i theta / 2} with theta in [0, 2 pi).
///
/// Takes values in the closed upper half-plane; the cut lies along the positive real
/// axis. This is not the principal square root: branch_sqrt(-2i) = -1 + i.
[[nodiscard]] cplx branch_sqrt(cplx z) noexcept;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    // Exponent of the density at each edge, rho ~ |x - edge|^e. Half-integers are
    // handled by a cosine change of variables.
    double lo_exponent = 0.5;
    double hi_exponent = 0.5;
};

/// A probability density handed to the generic Stieltjes machinery.
///
/// Either supported on a finite union of intervals, or on the full line with
/// rho(x) ~ tail_coefficient / x^2 as |x| -> infinity.
struct DensitySpec {
    std::function<double(double)> density;
    std::vector<Interval> intervals;  // empty means full line
    double tail_coefficient = 0.0;

    [[nodiscard]] bool full_line() const noexcept { return intervals.empty(); }

    static DensitySpec compact(std::function<double(double)> rho, double lo, double hi, double lo_exp = 0.5,
                               double hi_exp = 0.5);
    static DensitySpec heavy_tailed(std::function<double(double)> rho, double tail_coefficient);
};

struct QuadratureOptions {
    double rel_tol = 1e-9;
    // Half-width of the integration window on the full line.
    double window = 1e4;
    // Inner region kept on a linear scale before switching to log spacing.
    double core = 20.0;
    // Failure threshold on the estimated error, relative to max(1, |result|).
    double fail_tol = 1e-6;
};

/// Full-line tail mass 2 C / X outside [-X, X] for rho ~ C / x^2.
[[nodiscard]] double tail_mass(double tail_coefficient, double window) noexcept;

[[nodiscard]] double density_mass(const DensitySpec& d, const QuadratureOptions& opt = {});

/// Integral of rho(x) f(x) over the support (window-truncated on the full line, no tail term).
[[nodiscard]] cplx integrate_against(const DensitySpec& d, const std::function<cplx(double)>& f,
                                     const QuadratureOptions& opt = {});

/// Integral of rho(x) over [lo, hi] restricted to the support.
[[nodiscard]] double integrate_density(const DensitySpec& d, double lo, double hi, const QuadratureOptions& opt = {});

/// G(z) = int rho(x) / (x - z) dx for Im z > 0. Throws NumericalError when the
/// quadrature misses its tolerance and DomainError for Im z <= 0.
[[nodiscard]] cplx stieltjes_quadrature(const DensitySpec& d, cplx z, const QuadratureOptions& opt = {});

struct InversionResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = false;
};

inline const std::vector<double> kDefaultEpsilons{0.1, 0.05, 0.025, 0.0125};

/// lim_{eps -> 0} Im G(x + i eps) / pi by Richardson (Neville) extrapolation in eps.
[[nodiscard]] InversionResult invert_stieltjes(const ComplexFunction& G, double x,
                                               std::span<const double> epsilons = kDefaultEpsilons);

/// Principal value of int rho(x) / (x - lam) dx.
[[nodiscard]] double pv_integral(const DensitySpec& d, double lam, const QuadratureOptions& opt = {});

struct AkhiezerReport {
    std::vector<double> heights;         // y values probed
    std::vector<double> mass_deviation;  // |i y G(i y) + 1|
    double min_imag = 0.0;               // min Im G over the test grid
    bool mass_ok = false;
    bool positivity_ok = false;
    [[nodiscard]] bool pass() const noexcept { return mass_ok && positivity_ok; }
};

/// Numerical version of the criterion characterising Stieltjes transforms of
/// probability measures: Im G >= 0 on H and G(iy) ~ -1/(iy).
[[nodiscard]] AkhiezerReport akhiezer_check(const ComplexFunction& G);

}  // namespace rmnc
