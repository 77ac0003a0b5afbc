#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

// Independent reference routines used only by the tests: plain bisection, synthetic
// division and composite Simpson, with no code shared with the library.
namespace oracle {

using cplx = std::complex<double>;

inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
    double flo = f(lo);
    for (int i = 0; i < iters; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

inline double cubic_value(double c3, double c2, double c1, double c0, double x) {
    return ((c3 * x + c2) * x + c1) * x + c0;
}

// Roots of a cubic: real roots by scanning for sign changes and bisecting (plus a
// local-extremum check for double roots), the rest from the deflated quadratic.
inline std::vector<cplx> cubic_roots(double c3, double c2, double c1, double c0) {
    const double b = c2 / c3, c = c1 / c3, d = c0 / c3;
    const double bound = 1.0 + std::max({std::abs(b), std::abs(c), std::abs(d)});
    auto p = [&](double x) { return ((x + b) * x + c) * x + d; };
    double r = 0.0;
    bool found = false;
    const int n = 20000;
    double prev = p(-bound);
    for (int i = 1; i <= n && !found; ++i) {
        const double x = -bound + 2.0 * bound * i / n;
        const double v = p(x);
        if (v == 0.0) {
            r = x;
            found = true;
        } else if ((v < 0) != (prev < 0)) {
            r = bisect(p, x - 2.0 * bound / n, x);
            found = true;
        }
        prev = v;
    }
    // Deflate: x^3 + b x^2 + c x + d = (x - r)(x^2 + e x + f).
    const double e = b + r;
    const double f = c + r * e;
    const cplx disc = std::sqrt(cplx(e * e - 4.0 * f, 0.0));
    std::vector<cplx> roots{cplx(r, 0.0), (-e + disc) / 2.0, (-e - disc) / 2.0};
    return roots;
}

inline double simpson(const std::function<double(double)>& f, double lo, double hi, int n = 20000) {
    if (n % 2) ++n;
    const double h = (hi - lo) / n;
    double s = f(lo) + f(hi);
    for (int i = 1; i < n; ++i) s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

// Stieltjes transform of the semicircle on [-2, 2].
inline cplx semicircle_G(cplx z) {
    cplx s = std::sqrt(z * z - 4.0);
    if ((s / z).real() < 0) s = -s;
    return (-z + s) / 2.0;
}

inline double semicircle_rho(double x) { return std::abs(x) < 2.0 ? std::sqrt(4.0 - x * x) / (2.0 * M_PI) : 0.0; }

}  // namespace oracle
