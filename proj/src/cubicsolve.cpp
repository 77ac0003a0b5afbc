#include "rmnc/cubicsolve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rmnc/errors.hpp"

namespace rmnc {

namespace {

constexpr double kMergeTol = 1e-7;

cplx horner(double c3, double c2, double c1, double c0, cplx x) { return ((c3 * x + c2) * x + c1) * x + c0; }

cplx horner_d(double c3, double c2, double c1, cplx x) { return (3.0 * c3 * x + 2.0 * c2) * x + c1; }

cplx polish(double c3, double c2, double c1, double c0, cplx x) {
    const cplx d = horner_d(c3, c2, c1, x);
    if (std::abs(d) == 0.0) return x;
    const cplx step = horner(c3, c2, c1, c0, x) / d;
    const cplx y = x - step;
    // Keep the polish only if it does not increase the residual (near multiple roots
    // the derivative is tiny and Newton can overshoot).
    return std::abs(horner(c3, c2, c1, c0, y)) <= std::abs(horner(c3, c2, c1, c0, x)) ? y : x;
}

bool close(double x, double y) { return std::abs(x - y) < kMergeTol * (1.0 + std::abs(x)); }

}  // namespace

std::string_view to_string(CubicClass c) noexcept {
    switch (c) {
        case CubicClass::ThreeDistinctReal: return "three-distinct-real";
        case CubicClass::RealWithDouble: return "real-with-double";
        case CubicClass::TripleReal: return "triple-real";
        case CubicClass::OneRealTwoConjugate: return "one-real-two-conjugate";
    }
    return "unknown";
}

CubicRoots solve_cubic(double c3, double c2, double c1, double c0) {
    if (c3 == 0.0) throw DomainError("solve_cubic: leading coefficient is zero");

    const double b = c2 / c3;
    const double c = c1 / c3;
    const double d = c0 / c3;
    // depressed cubic t^3 + p t + q, x = t - b/3
    const double shift = b / 3.0;
    const double p = c - b * b / 3.0;
    const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    const double half_q = 0.5 * q;
    const double third_p = p / 3.0;
    const double D = half_q * half_q + third_p * third_p * third_p;
    const double scale = std::max(half_q * half_q, std::abs(third_p * third_p * third_p));

    CubicRoots out;
    out.discriminant = 18.0 * c3 * c2 * c1 * c0 - 4.0 * c2 * c2 * c2 * c0 + c2 * c2 * c1 * c1 -
                       4.0 * c3 * c1 * c1 * c1 - 27.0 * c3 * c3 * c0 * c0;

    std::array<cplx, 3> r{};
    if (scale == 0.0 || std::abs(D) <= 1e-14 * scale) {
        if (scale == 0.0 || std::abs(p) <= 1e-14 * (1.0 + b * b)) {
            r = {cplx(-shift), cplx(-shift), cplx(-shift)};
        } else {
            const double simple = 3.0 * q / p;
            const double dbl = -1.5 * q / p;
            r = {cplx(simple - shift), cplx(dbl - shift), cplx(dbl - shift)};
        }
    } else if (D > 0.0) {
        const double sq = std::sqrt(D);
        const double u = std::cbrt(-half_q - std::copysign(sq, q));
        const double v = (u != 0.0) ? -third_p / u : 0.0;
        const double re = -0.5 * (u + v) - shift;
        const double im = 0.5 * std::numbers::sqrt3 * std::abs(u - v);
        r = {cplx(u + v - shift), cplx(re, im), cplx(re, -im)};
    } else {
        const double rho = 2.0 * std::sqrt(-third_p);
        const double arg = std::clamp(1.5 * q / p * std::sqrt(-1.0 / third_p), -1.0, 1.0);
        const double phi = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k) {
            r[k] = cplx(rho * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0) - shift);
        }
    }

    for (auto& x : r) x = polish(c3, c2, c1, c0, x);

    const bool complex_pair = std::abs(r[1].imag()) > kMergeTol * (1.0 + std::abs(r[1]));
    if (complex_pair) {
        const cplx upper(0.5 * (r[1].real() + r[2].real()), 0.5 * (std::abs(r[1].imag()) + std::abs(r[2].imag())));
        out.roots = {cplx(r[0].real()), upper, std::conj(upper)};
        out.classification = CubicClass::OneRealTwoConjugate;
        if (!(out.discriminant < 0.0)) out.discriminant = -std::abs(out.discriminant);
        return out;
    }

    std::array<double, 3> x{r[0].real(), r[1].real(), r[2].real()};
    std::sort(x.begin(), x.end());
    const bool m01 = close(x[0], x[1]);
    const bool m12 = close(x[1], x[2]);
    if (m01 && m12) {
        const double t = (x[0] + x[1] + x[2]) / 3.0;
        x = {t, t, t};
        out.classification = CubicClass::TripleReal;
        out.discriminant = 0.0;
    } else if (m01 || m12) {
        out.classification = CubicClass::RealWithDouble;
        out.discriminant = 0.0;
        if (m01) {
            x[0] = x[1] = 0.5 * (x[0] + x[1]);
        } else {
            x[1] = x[2] = 0.5 * (x[1] + x[2]);
        }
    } else {
        out.classification = CubicClass::ThreeDistinctReal;
        if (!(out.discriminant > 0.0)) out.discriminant = std::abs(out.discriminant);
    }
    out.roots = {cplx(x[0]), cplx(x[1]), cplx(x[2])};
    return out;
}

cplx zeta_cubic(const CubicModel& m) {
    const double beta = m.beta;
    const double astar = critical_a(beta);
    const double b13 = std::cbrt(beta);
    if (std::abs(m.a - astar) < kCriticalWindow * std::max(1.0, astar)) {
        // P'(z) = 4 (z + b/2)^2 (z - b) with b = beta^(1/3)
        return cplx(-0.5 * b13);
    }
    if (m.a < astar) {
        const double ratio = m.a / astar;
        const double s = std::sqrt(1.0 - ratio * ratio * ratio);
        const cplx j(-0.5, 0.5 * std::numbers::sqrt3);
        // Signed real cube root on the second term: for a < 0 the radicand is negative.
        return 0.5 * b13 * (std::cbrt(1.0 + s) * j + std::cbrt(1.0 - s) * j * j);
    }
    return solve_cubic(4.0, 0.0, -4.0 * m.a, -beta).roots[0];
}

double xi_quartic(const QuarticModel& m) {
    const double g = m.g;
    const double gc = critical_g(m.beta);
    if (!(g < 0.0)) {
        std::ostringstream os;
        os << "xi_quartic: requires g < 0, got g = " << g;
        throw DomainError(os.str());
    }
    double disc = 1.0 + 24.0 * m.beta * g;
    if (disc < 0.0) {
        if (disc > -1e-12) {
            disc = 0.0;
        } else {
            std::ostringstream os;
            os << "xi_quartic: g = " << g << " is below g_c = " << gc;
            throw DomainError(os.str());
        }
    }
    const double x_plus = -(1.0 / (6.0 * g)) * (1.0 + 0.5 * std::sqrt(disc));
    return -std::sqrt(x_plus);
}

}  // namespace rmnc
