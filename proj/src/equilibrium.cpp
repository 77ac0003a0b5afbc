#include "rmnc/equilibrium.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "rmnc/errors.hpp"

namespace rmnc {

namespace {

// (z - zeta) sqrt(z - gamma_minus) sqrt(z - gamma_plus): analytic in the upper
// half-plane for every regime, with the cut of the product on the support.
cplx cubic_root_factor(const StationarySolution& s, cplx z) {
    return (z - s.zeta) * std::sqrt(z - s.gamma_minus) * std::sqrt(z - s.gamma_plus);
}

// Picks the cancellation-free of the two algebraically equal forms
// (2/beta)(r - q) and -2 k / (r + q), where r^2 - q^2 = -beta k.
cplx stable_root(cplx r, cplx q, cplx k, double beta) {
    const cplx plus = r + q;
    const cplx minus = r - q;
    if (std::abs(plus) > std::abs(minus)) return -2.0 * k / plus;
    return (2.0 / beta) * minus;
}

void check_normalization(const StationarySolution& s) {
    const double mass = density_mass(density_spec(s));
    if (std::abs(mass - 1.0) > 1e-4) {
        std::ostringstream os;
        os << "stationary_cubic: density integrates to " << mass << " (a = " << s.a << ", beta = " << s.beta << ")";
        throw NumericalError(os.str(), std::abs(mass - 1.0));
    }
}

}  // namespace

std::string_view to_string(Family f) noexcept { return f == Family::Cubic ? "cubic" : "quartic"; }

std::string_view to_string(Regime r) noexcept {
    switch (r) {
        case Regime::Subcritical: return "subcritical";
        case Regime::Critical: return "critical";
        case Regime::Supercritical: return "supercritical";
    }
    return "unknown";
}

double StationarySolution::lower_edge() const noexcept {
    return family == Family::Cubic ? gamma_minus.real() : -std::sqrt(gamma_sq);
}

double StationarySolution::upper_edge() const noexcept {
    return family == Family::Cubic ? gamma_plus.real() : std::sqrt(gamma_sq);
}

StationarySolution stationary_cubic(const CubicModel& m) {
    validate(m);
    StationarySolution s;
    s.family = Family::Cubic;
    s.a = m.a;
    s.beta = m.beta;
    const double astar = critical_a(m.beta);

    if (std::abs(m.a - astar) < kCriticalTolerance) {
        const double b = std::cbrt(m.beta);
        s.regime = Regime::Critical;
        s.zeta = -0.5 * b;
        s.J = -0.75 * b;
        s.gamma_minus = -0.5 * b;
        s.gamma_plus = 1.5 * b;
        check_normalization(s);
        return s;
    }

    s.zeta = zeta_cubic(m);
    const cplx w = s.zeta * s.zeta - m.a;
    s.J = s.zeta - w * w / m.beta;
    const cplx spread = std::sqrt(-2.0 * w);
    s.gamma_minus = -s.zeta - spread;
    s.gamma_plus = -s.zeta + spread;

    if (m.a < astar) {
        s.regime = Regime::Subcritical;
        return s;
    }
    s.regime = Regime::Supercritical;
    s.zeta = s.zeta.real();
    s.J = s.J.real();
    s.gamma_minus = s.gamma_minus.real();
    s.gamma_plus = s.gamma_plus.real();
    check_normalization(s);
    return s;
}

StationarySolution stationary_quartic(const QuarticModel& m) {
    validate(m);
    const double gc = critical_g(m.beta);
    double disc = 1.0 + 24.0 * m.beta * m.g;
    if (disc < 0.0 && disc > -1e-12) disc = 0.0;
    if (disc < 0.0) {
        std::ostringstream os;
        os << "stationary_quartic: g = " << m.g << " < g_c = " << gc
           << "; the stationary function is not a probability density";
        throw DomainError(os.str());
    }
    StationarySolution s;
    s.family = Family::Quartic;
    s.g = m.g;
    s.beta = m.beta;
    s.regime = disc == 0.0 || std::abs(m.g - gc) < kCriticalTolerance ? Regime::Critical : Regime::Supercritical;
    const double r = std::sqrt(disc);
    // -(1/(6g))(1 - r) rewritten without the 0/0 at g = 0
    s.gamma_sq = 4.0 * m.beta / (1.0 + r);
    s.c = r / 6.0 + 1.0 / 3.0;
    s.J = -s.c * s.c * s.gamma_sq / m.beta;
    if (m.g < 0.0) s.zeta = xi_quartic(m);
    const double gamma = std::sqrt(s.gamma_sq);
    s.gamma_minus = -gamma;
    s.gamma_plus = gamma;
    return s;
}

StationarySolution stationary(const Model& m) {
    return std::visit(
        [](const auto& mm) -> StationarySolution {
            if constexpr (std::is_same_v<std::decay_t<decltype(mm)>, CubicModel>) {
                return stationary_cubic(mm);
            } else {
                return stationary_quartic(mm);
            }
        },
        m);
}

cplx G_cubic(const StationarySolution& s, cplx z) {
    const cplx q = z * z - s.a;
    return stable_root(cubic_root_factor(s, z), q, z - s.J, s.beta);
}

double density_cubic(const StationarySolution& s, double x) {
    const double pref = 2.0 / (s.beta * std::numbers::pi);
    switch (s.regime) {
        case Regime::Subcritical: {
            const cplx w = x * x - s.a;
            return pref * branch_sqrt(w * w - s.beta * (x - s.J)).imag();
        }
        case Regime::Critical: {
            const double b = std::cbrt(s.beta);
            if (x <= -0.5 * b || x >= 1.5 * b) return 0.0;
            return pref * std::pow(x + 0.5 * b, 1.5) * std::sqrt(1.5 * b - x);
        }
        case Regime::Supercritical: {
            const double lo = s.gamma_minus.real();
            const double hi = s.gamma_plus.real();
            if (x <= lo || x >= hi) return 0.0;
            return pref * (x - s.zeta.real()) * std::sqrt((x - lo) * (hi - x));
        }
    }
    return 0.0;
}

cplx G_quartic(const StationarySolution& s, cplx z) {
    const cplx z2 = z * z;
    const cplx q = 2.0 * s.g * z2 * z + 0.5 * z;
    const cplx r = (2.0 * s.g * z2 + s.c) * branch_sqrt(z2 - s.gamma_sq);
    return stable_root(r, q, 2.0 * s.g * z2 - s.J, s.beta);
}

double density_quartic(const StationarySolution& s, double x) {
    const double x2 = x * x;
    if (x2 >= s.gamma_sq) return 0.0;
    const double pref = 2.0 / (s.beta * std::numbers::pi);
    if (s.regime == Regime::Critical) {
        return std::pow(4.0 * s.beta - x2, 1.5) / (6.0 * std::numbers::pi * s.beta * s.beta);
    }
    return pref * (2.0 * s.g * x2 + s.c) * std::sqrt(s.gamma_sq - x2);
}

cplx G_stationary(const StationarySolution& s, cplx z) {
    return s.family == Family::Cubic ? G_cubic(s, z) : G_quartic(s, z);
}

double density(const StationarySolution& s, double x) {
    return s.family == Family::Cubic ? density_cubic(s, x) : density_quartic(s, x);
}

double flux_rate(const StationarySolution& s) noexcept {
    if (s.family != Family::Cubic || s.regime != Regime::Subcritical) return 0.0;
    return s.J.imag() / std::numbers::pi;
}

cplx stationary_residual(const StationarySolution& s, cplx z, cplx G) {
    if (s.family == Family::Cubic) return 0.25 * s.beta * G * G + (z * z - s.a) * G + z - s.J;
    const cplx z2 = z * z;
    return 0.25 * s.beta * G * G + (2.0 * s.g * z2 * z + 0.5 * z) * G + 2.0 * s.g * z2 - s.J;
}

DensitySpec density_spec(const StationarySolution& s) {
    auto rho = [s](double x) { return density(s, x); };
    if (s.full_line()) return DensitySpec::heavy_tailed(rho, flux_rate(s));
    const double lo_exp = s.regime == Regime::Critical ? 1.5 : 0.5;
    const double hi_exp = s.regime == Regime::Critical && s.family == Family::Quartic ? 1.5 : 0.5;
    return DensitySpec::compact(rho, s.lower_edge(), s.upper_edge(), lo_exp, hi_exp);
}

}  // namespace rmnc
