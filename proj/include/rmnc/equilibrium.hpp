#pragma once

#include <string_view>

#include "rmnc/cubicsolve.hpp"
#include "rmnc/model.hpp"
#include "rmnc/stieltjes.hpp"

namespace rmnc {

enum class Family { Cubic, Quartic };
enum class Regime { Subcritical, Critical, Supercritical };

[[nodiscard]] std::string_view to_string(Family f) noexcept;
[[nodiscard]] std::string_view to_string(Regime r) noexcept;

/// Closed-form stationary solution of either family.
///
/// Cubic: P_a(z) = (z^2 - a)^2 - beta (z - J) = (z - zeta)^2 (z - gamma_minus)(z - gamma_plus).
/// The gammas are complex below a* and are the support edges at and above a*.
///
/// Quartic: support [-gamma, gamma] with gamma^2 = gamma_sq; the density prefactor is
/// 2 g x^2 + c with c = sqrt(1 + 24 beta g) / 6 + 1/3.
struct StationarySolution {
    Family family = Family::Cubic;
    Regime regime = Regime::Subcritical;
    cplx J{};
    cplx zeta{};  // zeta_a (cubic) or xi_g (quartic, 0 when g >= 0)
    cplx gamma_minus{};
    cplx gamma_plus{};
    double gamma_sq = 0.0;
    double c = 0.0;
    double beta = 1.0;
    double a = 0.0;
    double g = 0.0;

    [[nodiscard]] bool full_line() const noexcept {
        return family == Family::Cubic && regime == Regime::Subcritical;
    }
    /// Support edges; meaningless on the full line.
    [[nodiscard]] double lower_edge() const noexcept;
    [[nodiscard]] double upper_edge() const noexcept;
};

/// Threshold on |a - a*| below which the critical closed forms are used.
inline constexpr double kCriticalTolerance = 1e-12;

/// Throws NumericalError if the compact-support density does not integrate to 1
/// within 1e-4.
[[nodiscard]] StationarySolution stationary_cubic(const CubicModel& m);
/// Requires g >= g_c; throws DomainError below it.
[[nodiscard]] StationarySolution stationary_quartic(const QuarticModel& m);
[[nodiscard]] StationarySolution stationary(const Model& m);

/// G_a(z) for Im z >= 0.
[[nodiscard]] cplx G_cubic(const StationarySolution& sol, cplx z);
[[nodiscard]] double density_cubic(const StationarySolution& sol, double x);

[[nodiscard]] cplx G_quartic(const StationarySolution& sol, cplx z);
[[nodiscard]] double density_quartic(const StationarySolution& sol, double x);

[[nodiscard]] cplx G_stationary(const StationarySolution& sol, cplx z);
[[nodiscard]] double density(const StationarySolution& sol, double x);

/// Im(J) / pi: stationary probability flux per unit mass (also the x^-2 tail coefficient).
[[nodiscard]] double flux_rate(const StationarySolution& sol) noexcept;

/// Residual of the stationary quadratic satisfied by G at z.
[[nodiscard]] cplx stationary_residual(const StationarySolution& sol, cplx z, cplx G);

/// Density wrapped for the generic quadrature routines. The solution is copied.
[[nodiscard]] DensitySpec density_spec(const StationarySolution& sol);

}  // namespace rmnc
