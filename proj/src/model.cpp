#include "rmnc/model.hpp"

#include <cmath>
#include <string>

#include "rmnc/errors.hpp"

namespace rmnc {

double potential_cubic(double x, const CubicModel& m) noexcept { return x * x * x / 3.0 - m.a * x; }

double drift_cubic(double x, const CubicModel& m) noexcept { return m.a - x * x; }

double potential_quartic(double x, const QuarticModel& m) noexcept {
    const double x2 = x * x;
    return 0.5 * x2 + m.g * x2 * x2;
}

double drift_quartic(double x, const QuarticModel& m) noexcept { return -(0.5 * x + 2.0 * m.g * x * x * x); }

double critical_a(double beta) noexcept { return 0.75 * std::cbrt(beta * beta); }

double critical_g(double beta) noexcept { return -1.0 / (24.0 * beta); }

double drift(double x, const Model& m) noexcept {
    if (const auto* c = std::get_if<CubicModel>(&m)) return drift_cubic(x, *c);
    return drift_quartic(x, std::get<QuarticModel>(m));
}

double beta_of(const Model& m) noexcept {
    return std::visit([](const auto& v) { return v.beta; }, m);
}

void validate(const Model& m) {
    const double beta = beta_of(m);
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw DomainError("beta must be a finite positive number, got " + std::to_string(beta));
    }
    if (const auto* c = std::get_if<CubicModel>(&m); c && !std::isfinite(c->a)) {
        throw DomainError("cubic parameter a must be finite");
    }
    if (const auto* q = std::get_if<QuarticModel>(&m); q && !std::isfinite(q->g)) {
        throw DomainError("quartic coupling g must be finite");
    }
}

}  // namespace rmnc
