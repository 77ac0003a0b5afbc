#pragma once

#include <array>
#include <complex>
#include <string_view>

#include "rmnc/model.hpp"

namespace rmnc {

using cplx = std::complex<double>;

enum class CubicClass {
    ThreeDistinctReal,
    RealWithDouble,
    TripleReal,
    OneRealTwoConjugate,
};

[[nodiscard]] std::string_view to_string(CubicClass c) noexcept;

/// Roots of c3 x^3 + c2 x^2 + c1 x + c0.
///
/// Ordering: real roots ascending first, then (for a conjugate pair) the root in
/// the upper half-plane followed by its conjugate.
///
/// `discriminant` is the standard cubic discriminant
///   18 c3 c2 c1 c0 - 4 c2^3 c0 + c2^2 c1^2 - 4 c3 c1^3 - 27 c3^2 c0^2,
/// positive for three distinct real roots and negative for a conjugate pair. When
/// roots are merged into a multiple root it is reported as exactly 0.
struct CubicRoots {
    std::array<cplx, 3> roots{};
    CubicClass classification = CubicClass::ThreeDistinctReal;
    double discriminant = 0.0;
};

/// Closed-form (Cardan / trigonometric) solution with one Newton polish per root.
/// Roots closer than 1e-7 (1 + |r|) are merged into a multiple root.
/// Throws DomainError if c3 == 0.
[[nodiscard]] CubicRoots solve_cubic(double c3, double c2, double c1, double c0);

/// Distinguished root of P'(z) = 4 z^3 - 4 a z - beta: the root in the open upper
/// half-plane when a < a*, the minimal real root when a >= a*.
[[nodiscard]] cplx zeta_cubic(const CubicModel& m);

/// Minimal real root -sqrt(X_+) of z (24 g^2 z^4 + 8 g z^2 + 1/2 - 4 beta g).
/// Requires g_c <= g < 0; throws DomainError otherwise.
[[nodiscard]] double xi_quartic(const QuarticModel& m);

/// Window around a* inside which the factored critical forms are used.
inline constexpr double kCriticalWindow = 1e-10;

}  // namespace rmnc
