#pragma once

#include <span>
#include <vector>

#include "rmnc/equilibrium.hpp"
#include "rmnc/model.hpp"
#include "rmnc/stieltjes.hpp"

namespace rmnc {

/// H = G + (2/beta)(z^2 - a).
[[nodiscard]] cplx h_from_g(cplx G, cplx z, const CubicModel& m) noexcept;
[[nodiscard]] cplx g_from_h(cplx H, cplx z, const CubicModel& m) noexcept;

/// Initial Stieltjes transform together with its derivative. An empty derivative
/// is replaced by a central difference.
struct InitialDatum {
    ComplexFunction G;
    ComplexFunction dG;
};

/// G0(z) = -1/z: all eigenvalues at the origin.
[[nodiscard]] InitialDatum delta_datum();
/// G0 = G_a of a cubic stationary solution.
[[nodiscard]] InitialDatum stationary_datum(const StationarySolution& sol);

struct CharacteristicSample {
    double t = 0.0;
    cplx z{};
    cplx v{};  // z'(t); the transported field is H = -(2/beta) v
};

struct Characteristic {
    cplx z0{};
    std::vector<CharacteristicSample> trajectory;
    bool halted = false;  // Im z dropped below the floor before T
    double halt_time = 0.0;
};

/// RK4 for z'' = 2 z (z^2 - a) - beta/2 with z(0) = z0, z'(0) = -(beta/2) H(z0, 0).
/// Every step is recorded. Integration stops before a step that would take Im z
/// below im_floor, so every recorded point stays above the floor.
[[nodiscard]] Characteristic integrate_characteristic(cplx z0, const InitialDatum& G0, const CubicModel& m, double T,
                                                      double dt, double im_floor = 1e-6);

/// Conserved quantity (beta/4) G^2 + (z^2 - a) G + z along characteristics.
[[nodiscard]] cplx transported_invariant(cplx z, cplx G, const CubicModel& m) noexcept;

struct EvolveOptions {
    double anchor_spacing = 0.5;  // maximal length of a shooting chunk
    double dt = 5e-3;             // RK4 step cap (shrunk further where |z| is large)
    int max_newton = 50;
    double newton_tol = 1e-12;
    unsigned jobs = 1;
};

struct GridField {
    std::vector<cplx> points;
    std::vector<cplx> values;
    std::vector<cplx> origins;  // shooting solution z0 for every point
    std::vector<bool> converged;
    double time = 0.0;

    [[nodiscard]] bool all_converged() const noexcept;
};

/// G(omega, T) for every target by shooting characteristics back to t = 0.
///
/// Shooting is split into chunks of at most `anchor_spacing` (multiple shooting) and
/// continued in T from 0; the value is taken from the root of the transported
/// quadratic closest to g_from_h(-(2/beta) z'(T)). Unconverged targets are flagged
/// and keep their last iterate.
[[nodiscard]] GridField evolve_G(const InitialDatum& G0, const CubicModel& m, std::span<const cplx> targets, double T,
                                 const EvolveOptions& opt = {});

/// Snapshots at every requested time (ascending), sharing one continuation path.
[[nodiscard]] std::vector<GridField> evolve_G_series(const InitialDatum& G0, const CubicModel& m,
                                                     std::span<const cplx> targets, std::span<const double> times,
                                                     const EvolveOptions& opt = {});

struct ShootResult {
    cplx z0{};
    int iterations = 0;
    bool converged = false;
};

/// Plain single shooting z0 -> z(T; z0) = target by Newton from `seed`, secant steps
/// when the Jacobian is singular.
[[nodiscard]] ShootResult shoot(const InitialDatum& G0, const CubicModel& m, cplx target, double T, cplx seed,
                                const EvolveOptions& opt = {});

/// Five points per center: z, z + h, z - h, z + i h, z - i h.
[[nodiscard]] std::vector<cplx> stencil_targets(std::span<const cplx> centers, double h);

/// Max over stencil centers and consecutive snapshots of
/// |(G(t1) - G(t0)) / (t1 - t0) - d/dz[(beta/4) G^2 + (z^2 - a) G + z](t0)|.
/// Points must come from stencil_targets.
[[nodiscard]] double residual_burgers(std::span<const GridField> fields, const CubicModel& m);

/// j(lam) = rho(lam) ((beta/2) PV int rho(x) / (x - lam) dx + lam^2 - a).
[[nodiscard]] double flux_density(const DensitySpec& rho, double lam, const CubicModel& m,
                                  const QuadratureOptions& opt = {});

}  // namespace rmnc
