#include "rmnc/dynamics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <thread>

#include "rmnc/errors.hpp"

namespace rmnc {

namespace {

using Mat2 = Eigen::Matrix2cd;

constexpr double kInverseMatch = 4.0;

cplx force(cplx z, const CubicModel& m) { return 2.0 * z * (z * z - m.a) - 0.5 * m.beta; }
cplx force_prime(cplx z, const CubicModel& m) { return 6.0 * z * z - 2.0 * m.a; }

cplx derivative(const InitialDatum& d, cplx z) {
    if (d.dG) return d.dG(z);
    double h = 1e-5 * std::max(1.0, std::abs(z));
    if (z.imag() > 0.0) h = std::min(h, 0.25 * z.imag());
    return (d.G(z + h) - d.G(z - h)) / (2.0 * h);
}

cplx initial_velocity(const InitialDatum& d, cplx z, const CubicModel& m) {
    return -0.5 * m.beta * d.G(z) - (z * z - m.a);
}

cplx initial_velocity_prime(const InitialDatum& d, cplx z, const CubicModel& m) {
    return -0.5 * m.beta * derivative(d, z) - 2.0 * z;
}

double step_cap(cplx z, double dt) { return std::min(dt, 0.05 / std::max(1.0, std::abs(z))); }

struct Flow {
    cplx z{};
    cplx v{};
    Mat2 M = Mat2::Identity();
    bool ok = true;
};

// RK4 for (z, v) over a time span tau, optionally with the variational matrix.
Flow flow(cplx z, cplx v, double tau, const CubicModel& m, double dt, bool variational) {
    Flow out;
    out.z = z;
    out.v = v;
    double t = 0.0;
    Mat2 M = Mat2::Identity();
    auto A = [&](cplx y) {
        Mat2 a;
        a << 0.0, 1.0, force_prime(y, m), 0.0;
        return a;
    };
    while (t < tau) {
        const double h = std::min(step_cap(z, dt), tau - t);
        const cplx k1z = v, k1v = force(z, m);
        const cplx z2 = z + 0.5 * h * k1z, v2 = v + 0.5 * h * k1v;
        const cplx k2z = v2, k2v = force(z2, m);
        const cplx z3 = z + 0.5 * h * k2z, v3 = v + 0.5 * h * k2v;
        const cplx k3z = v3, k3v = force(z3, m);
        const cplx z4 = z + h * k3z, v4 = v + h * k3v;
        const cplx k4z = v4, k4v = force(z4, m);
        if (variational) {
            const Mat2 K1 = A(z) * M;
            const Mat2 K2 = A(z2) * (M + 0.5 * h * K1);
            const Mat2 K3 = A(z3) * (M + 0.5 * h * K2);
            const Mat2 K4 = A(z4) * (M + h * K3);
            M += (h / 6.0) * (K1 + 2.0 * K2 + 2.0 * K3 + K4);
        }
        z += (h / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
        v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        t += h;
        if (!std::isfinite(std::abs(z)) || !std::isfinite(std::abs(v)) || std::abs(z) > 1e8) {
            out.ok = false;
            return out;
        }
    }
    out.z = z;
    out.v = v;
    out.M = M;
    return out;
}

// Multiple-shooting unknowns: z0, then (z_k, v_k) at interior anchors k = 1..K-1.
struct ShootingPath {
    double T = 0.0;
    int K = 1;
    Eigen::VectorXcd x;  // size 2K - 1

    [[nodiscard]] double chunk() const { return T / K; }
};

struct Evaluation {
    Eigen::VectorXcd r;
    Eigen::MatrixXcd jac;
    cplx z_end{};
    cplx v_end{};
    bool ok = true;
};

Evaluation evaluate(const ShootingPath& p, const InitialDatum& d, const CubicModel& m, cplx target, double dt,
                    bool want_jacobian) {
    const int n = 2 * p.K - 1;
    Evaluation e;
    e.r.resize(n);
    if (want_jacobian) e.jac = Eigen::MatrixXcd::Zero(n, n);
    const double tau = p.chunk();
    for (int k = 0; k < p.K; ++k) {
        cplx z, v;
        if (k == 0) {
            z = p.x[0];
            v = initial_velocity(d, z, m);
        } else {
            z = p.x[2 * k - 1];
            v = p.x[2 * k];
        }
        if (!std::isfinite(std::abs(v))) {
            e.ok = false;
            return e;
        }
        const Flow f = flow(z, v, tau, m, dt, want_jacobian);
        if (!f.ok) {
            e.ok = false;
            return e;
        }
        const bool last = k == p.K - 1;
        const int row = 2 * k;
        // Far from the origin the endpoint is matched in 1/z, where the flow near a
        // pole of the trajectory is close to linear.
        const bool inverse = last && std::abs(target) > kInverseMatch;
        const double scale = std::norm(target);
        if (last) {
            e.r[row] = inverse ? scale * (1.0 / f.z - 1.0 / target) : f.z - target;
            e.z_end = f.z;
            e.v_end = f.v;
        } else {
            e.r[row] = f.z - p.x[2 * k + 1];
            e.r[row + 1] = f.v - p.x[2 * k + 2];
        }
        if (!want_jacobian) continue;
        const int rows = last ? 1 : 2;
        const cplx chain = inverse ? -scale / (f.z * f.z) : cplx(1.0);
        if (k == 0) {
            const cplx dv = initial_velocity_prime(d, z, m);
            for (int i = 0; i < rows; ++i) e.jac(row + i, 0) = chain * (f.M(i, 0) + f.M(i, 1) * dv);
        } else {
            for (int i = 0; i < rows; ++i) {
                e.jac(row + i, 2 * k - 1) = chain * f.M(i, 0);
                e.jac(row + i, 2 * k) = chain * f.M(i, 1);
            }
        }
        if (!last) {
            e.jac(row, 2 * k + 1) = -1.0;
            e.jac(row + 1, 2 * k + 2) = -1.0;
        }
    }
    return e;
}

double residual_norm(const Eigen::VectorXcd& r) { return r.cwiseAbs().maxCoeff(); }

// Damped Newton on the multiple-shooting system; updates p in place.
bool newton(ShootingPath& p, const InitialDatum& d, const CubicModel& m, cplx target, const EvolveOptions& opt,
            cplx* v_end) {
    const double tol = opt.newton_tol * std::max(1.0, std::abs(target));
    Evaluation e = evaluate(p, d, m, target, opt.dt, true);
    if (!e.ok) return false;
    double norm = residual_norm(e.r);
    for (int it = 0; it < opt.max_newton; ++it) {
        if (norm <= tol) {
            *v_end = e.v_end;
            return true;
        }
        const Eigen::VectorXcd step = e.jac.partialPivLu().solve(-e.r);
        if (!step.allFinite()) return false;
        double lambda = 1.0;
        bool accepted = false;
        for (int half = 0; half < 12; ++half, lambda *= 0.5) {
            ShootingPath trial = p;
            trial.x += lambda * step;
            Evaluation et = evaluate(trial, d, m, target, opt.dt, true);
            if (!et.ok) continue;
            const double nt = residual_norm(et.r);
            if (nt < norm || nt <= tol) {
                p = std::move(trial);
                e = std::move(et);
                norm = nt;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (norm <= 1e3 * tol) {
                *v_end = e.v_end;
                return true;
            }
            return false;
        }
    }
    if (norm <= tol) {
        *v_end = e.v_end;
        return true;
    }
    return false;
}

// State (z, v) at time s along a converged path, integrating from the nearest anchor.
std::pair<cplx, cplx> state_at(const ShootingPath& p, const InitialDatum& d, const CubicModel& m, double s,
                               double dt) {
    const double tau = p.chunk();
    int k = p.K == 0 || tau <= 0.0 ? 0 : std::min(p.K - 1, static_cast<int>(std::floor(s / tau)));
    k = std::max(k, 0);
    cplx z, v;
    if (k == 0) {
        z = p.x[0];
        v = initial_velocity(d, z, m);
    } else {
        z = p.x[2 * k - 1];
        v = p.x[2 * k];
    }
    const double rest = s - k * tau;
    if (rest <= 0.0) return {z, v};
    const Flow f = flow(z, v, rest, m, dt, false);
    return {f.z, f.v};
}

ShootingPath rescale(const ShootingPath& old, double T_new, const InitialDatum& d, const CubicModel& m,
                     const EvolveOptions& opt) {
    ShootingPath p;
    p.T = T_new;
    p.K = std::max(1, static_cast<int>(std::ceil(T_new / opt.anchor_spacing - 1e-9)));
    p.x.resize(2 * p.K - 1);
    p.x[0] = old.x[0];
    for (int k = 1; k < p.K; ++k) {
        const double frac = static_cast<double>(k) / p.K;
        const auto [z, v] = state_at(old, d, m, frac * old.T, opt.dt);
        p.x[2 * k - 1] = z;
        p.x[2 * k] = v;
    }
    return p;
}

cplx select_root(cplx target, cplx J0, cplx direct, const CubicModel& m) {
    const cplx q = target * target - m.a;
    cplx s = std::sqrt(q * q - m.beta * (target - J0));
    if ((std::conj(q) * s).real() < 0.0) s = -s;
    const cplx big = (2.0 / m.beta) * (-q - s);
    const cplx qs = q + s;
    const cplx small = std::abs(qs) > 0.0 ? -2.0 * (target - J0) / qs : big;
    return std::abs(big - direct) < std::abs(small - direct) ? big : small;
}

struct TargetTrack {
    std::vector<cplx> values;
    std::vector<cplx> origins;
    std::vector<bool> converged;
};

TargetTrack track_target(const InitialDatum& d, const CubicModel& m, cplx target, std::span<const double> times,
                         const EvolveOptions& opt) {
    TargetTrack out;
    const double beta = m.beta;
    ShootingPath path;
    path.T = 0.0;
    path.K = 1;
    path.x = Eigen::VectorXcd::Constant(1, target);
    cplx v_end = initial_velocity(d, target, m);

    const double speed = std::max(1.0, std::abs(v_end));
    double delta = std::min(opt.anchor_spacing, 0.1 * std::max(1.0, std::abs(target)) / speed);
    const double delta_max = 2.0 * opt.anchor_spacing;
    bool failed = false;

    for (double t_rec : times) {
        while (!failed && path.T < t_rec) {
            const double T_new = std::min(path.T + delta, t_rec);
            ShootingPath trial;
            if (path.T == 0.0) {
                trial.T = T_new;
                trial.K = std::max(1, static_cast<int>(std::ceil(T_new / opt.anchor_spacing - 1e-9)));
                trial.x.resize(2 * trial.K - 1);
                // backward Euler step in 1/z, exact for z' = -z^2
                auto back = [&](double s) { return 1.0 / (1.0 / target + s * v_end / (target * target)); };
                trial.x[0] = back(T_new);
                for (int k = 1; k < trial.K; ++k) {
                    const double frac = static_cast<double>(k) / trial.K;
                    trial.x[2 * k - 1] = back((1.0 - frac) * T_new);
                    trial.x[2 * k] = v_end;
                }
            } else {
                trial = rescale(path, T_new, d, m, opt);
            }
            cplx v_new;
            if (newton(trial, d, m, target, opt, &v_new)) {
                path = std::move(trial);
                v_end = v_new;
                delta = std::min(delta * 1.5, delta_max);
            } else {
                delta *= 0.5;
                if (delta < 1e-7) failed = true;
            }
        }
        const cplx z0 = path.x[0];
        out.origins.push_back(z0);
        if (t_rec == 0.0) {
            out.values.push_back(d.G(target));
            out.converged.push_back(true);
            continue;
        }
        const cplx J0 = transported_invariant(z0, d.G(z0), m);
        const cplx direct = g_from_h(-(2.0 / beta) * v_end, target, m);
        out.values.push_back(select_root(target, J0, direct, m));
        out.converged.push_back(!failed && z0.imag() > 0.0);
    }
    return out;
}

}  // namespace

cplx h_from_g(cplx G, cplx z, const CubicModel& m) noexcept { return G + (2.0 / m.beta) * (z * z - m.a); }
cplx g_from_h(cplx H, cplx z, const CubicModel& m) noexcept { return H - (2.0 / m.beta) * (z * z - m.a); }

cplx transported_invariant(cplx z, cplx G, const CubicModel& m) noexcept {
    return 0.25 * m.beta * G * G + (z * z - m.a) * G + z;
}

InitialDatum delta_datum() {
    return {[](cplx z) { return -1.0 / z; }, [](cplx z) { return 1.0 / (z * z); }};
}

InitialDatum stationary_datum(const StationarySolution& sol) {
    if (sol.family != Family::Cubic) throw DomainError("stationary_datum: cubic solution required");
    auto G = [sol](cplx z) { return G_cubic(sol, z); };
    auto dG = [sol](cplx z) {
        const cplx g = G_cubic(sol, z);
        return -(2.0 * z * g + 1.0) / (0.5 * sol.beta * g + z * z - sol.a);
    };
    return {G, dG};
}

Characteristic integrate_characteristic(cplx z0, const InitialDatum& G0, const CubicModel& m, double T, double dt,
                                        double im_floor) {
    if (!(z0.imag() > 0.0)) throw DomainError("integrate_characteristic: requires Im z0 > 0");
    if (!(dt > 0.0) || T < 0.0) throw DomainError("integrate_characteristic: requires dt > 0 and T >= 0");
    Characteristic c;
    c.z0 = z0;
    cplx z = z0;
    cplx v = initial_velocity(G0, z0, m);
    double t = 0.0;
    c.trajectory.push_back({t, z, v});
    const auto n = static_cast<long>(std::ceil(T / dt - 1e-9));
    for (long i = 0; i < n; ++i) {
        const double h = std::min(dt, T - t);
        const Flow f = flow(z, v, h, m, h, false);
        if (!f.ok) {
            c.halted = true;
            c.halt_time = t;
            break;
        }
        if (f.z.imag() < im_floor) {
            c.halted = true;
            c.halt_time = t;
            break;
        }
        z = f.z;
        v = f.v;
        t = (i + 1 == n) ? T : t + h;
        c.trajectory.push_back({t, z, v});
    }
    return c;
}

bool GridField::all_converged() const noexcept {
    return std::all_of(converged.begin(), converged.end(), [](bool b) { return b; });
}

std::vector<GridField> evolve_G_series(const InitialDatum& G0, const CubicModel& m, std::span<const cplx> targets,
                                       std::span<const double> times, const EvolveOptions& opt) {
    validate(m);
    for (const cplx& w : targets) {
        if (!(w.imag() > 0.0)) throw DomainError("evolve_G: targets must lie in the upper half-plane");
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < 0.0 || (i > 0 && times[i] < times[i - 1])) {
            throw DomainError("evolve_G: times must be non-negative and ascending");
        }
    }
    std::vector<TargetTrack> tracks(targets.size());
    const unsigned jobs = std::max(1u, std::min<unsigned>(opt.jobs, static_cast<unsigned>(targets.size())));
    auto work = [&](unsigned worker) {
        for (std::size_t i = worker; i < targets.size(); i += jobs) {
            tracks[i] = track_target(G0, m, targets[i], times, opt);
        }
    };
    if (jobs == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < jobs; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }
    std::vector<GridField> out(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        GridField& f = out[k];
        f.time = times[k];
        f.points.assign(targets.begin(), targets.end());
        for (const auto& tr : tracks) {
            f.values.push_back(tr.values[k]);
            f.origins.push_back(tr.origins[k]);
            f.converged.push_back(tr.converged[k]);
        }
    }
    return out;
}

GridField evolve_G(const InitialDatum& G0, const CubicModel& m, std::span<const cplx> targets, double T,
                   const EvolveOptions& opt) {
    const double times[] = {T};
    return evolve_G_series(G0, m, targets, times, opt).front();
}

ShootResult shoot(const InitialDatum& G0, const CubicModel& m, cplx target, double T, cplx seed,
                  const EvolveOptions& opt) {
    ShootResult res;
    cplx z0 = seed;
    cplx prev_z0{};
    cplx prev_r{};
    bool have_prev = false;
    const double tol = opt.newton_tol * std::max(1.0, std::abs(target));
    for (int it = 0; it < opt.max_newton; ++it) {
        res.iterations = it + 1;
        const Flow f = flow(z0, initial_velocity(G0, z0, m), T, m, opt.dt, true);
        if (!f.ok) break;
        const cplx r = f.z - target;
        if (std::abs(r) <= tol) {
            res.z0 = z0;
            res.converged = true;
            return res;
        }
        cplx slope = f.M(0, 0) + f.M(0, 1) * initial_velocity_prime(G0, z0, m);
        if (std::abs(slope) < 1e-300 && have_prev && prev_z0 != z0) slope = (r - prev_r) / (z0 - prev_z0);
        if (std::abs(slope) < 1e-300) break;
        prev_z0 = z0;
        prev_r = r;
        have_prev = true;
        z0 -= r / slope;
    }
    res.z0 = z0;
    return res;
}

std::vector<cplx> stencil_targets(std::span<const cplx> centers, double h) {
    std::vector<cplx> out;
    out.reserve(5 * centers.size());
    const cplx ih(0.0, h);
    for (const cplx& c : centers) {
        out.push_back(c);
        out.push_back(c + h);
        out.push_back(c - h);
        out.push_back(c + ih);
        out.push_back(c - ih);
    }
    return out;
}

double residual_burgers(std::span<const GridField> fields, const CubicModel& m) {
    double worst = 0.0;
    auto flux = [&](cplx z, cplx G) { return 0.25 * m.beta * G * G + (z * z - m.a) * G + z; };
    for (std::size_t k = 0; k + 1 < fields.size(); ++k) {
        const GridField& f0 = fields[k];
        const GridField& f1 = fields[k + 1];
        const double dt = f1.time - f0.time;
        if (!(dt > 0.0)) throw DomainError("residual_burgers: snapshot times must increase");
        if (f0.points.size() % 5 != 0 || f1.points.size() != f0.points.size()) {
            throw DomainError("residual_burgers: points must be stencil groups of five");
        }
        for (std::size_t g = 0; g < f0.points.size(); g += 5) {
            const cplx* z = &f0.points[g];
            const cplx* G = &f0.values[g];
            const double h = std::abs(z[1] - z[0]);
            const cplx dx = (flux(z[1], G[1]) - flux(z[2], G[2])) / (2.0 * h);
            const cplx dy = (flux(z[3], G[3]) - flux(z[4], G[4])) / cplx(0.0, 2.0 * h);
            const cplx dz = 0.5 * (dx + dy);
            const cplx dGdt = (f1.values[g] - G[0]) / dt;
            worst = std::max(worst, std::abs(dGdt - dz));
        }
    }
    return worst;
}

double flux_density(const DensitySpec& rho, double lam, const CubicModel& m, const QuadratureOptions& opt) {
    const double r = rho.density(lam);
    if (r == 0.0) return 0.0;
    return r * (0.5 * m.beta * pv_integral(rho, lam, opt) + lam * lam - m.a);
}

}  // namespace rmnc
