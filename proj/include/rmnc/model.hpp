#pragma once

#include <variant>

namespace rmnc {

/// Cubic family V_a(x) = x^3/3 - a x with Dyson index beta.
struct CubicModel {
    double a = 0.0;
    double beta = 1.0;
};

/// Quartic family U_g(x) = x^2/2 + g x^4 with Dyson index beta (g < 0 is non-confining).
struct QuarticModel {
    double g = 0.0;
    double beta = 1.0;
};

using Model = std::variant<CubicModel, QuarticModel>;

[[nodiscard]] double potential_cubic(double x, const CubicModel& m) noexcept;
/// -V_a'(x) = a - x^2.
[[nodiscard]] double drift_cubic(double x, const CubicModel& m) noexcept;

[[nodiscard]] double potential_quartic(double x, const QuarticModel& m) noexcept;
/// -(1/2) U_g'(x) = -(x/2 + 2 g x^3), the Langevin drift of the quartic family.
[[nodiscard]] double drift_quartic(double x, const QuarticModel& m) noexcept;

/// Phase-transition threshold a* = (3/4) beta^(2/3) of the cubic family.
[[nodiscard]] double critical_a(double beta) noexcept;
/// Smallest coupling g_c = -1/(24 beta) admitting a stationary probability density.
[[nodiscard]] double critical_g(double beta) noexcept;

[[nodiscard]] inline double critical_a(const CubicModel& m) noexcept { return critical_a(m.beta); }
[[nodiscard]] inline double critical_g(const QuarticModel& m) noexcept { return critical_g(m.beta); }

[[nodiscard]] double drift(double x, const Model& m) noexcept;
[[nodiscard]] double beta_of(const Model& m) noexcept;

/// Throws DomainError unless beta > 0 and the parameters are finite.
void validate(const Model& m);

}  // namespace rmnc
