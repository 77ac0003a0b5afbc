#include "rmnc/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <thread>

#include <Eigen/Dense>

#include "rmnc/equilibrium.hpp"
#include "rmnc/errors.hpp"

namespace rmnc {

namespace {

constexpr int kMaxHalvings = 10;
constexpr double kSubstepFraction = 0.1;
constexpr long kMaxSubsteps = 100000;

bool is_cubic(const SimConfig& cfg) noexcept { return std::holds_alternative<CubicModel>(cfg.model); }

double restart_value(SimState& s, const SimConfig& cfg) {
    if (is_cubic(cfg)) return cfg.cutoff;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return u(s.rng) * 1e-12 * cfg.cutoff;
}

std::size_t count_below(const std::vector<double>& sorted, double level) {
    return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), level) - sorted.begin());
}

bool ordered(const std::vector<double>& v, const SimConfig& cfg) {
    bool have = false;
    double prev = 0.0;
    for (double x : v) {
        if (is_exploded(x, cfg)) continue;
        if (have && !(x > prev)) return false;
        prev = x;
        have = true;
    }
    return true;
}

// Moves a drift-dominated coordinate through [0, h] in pieces that change it by at
// most a tenth of max(|x|, 1); the Brownian increment is spread in proportion.
template <class Drift>
double substep(double x, double h, double noise, Drift&& drift, const SimConfig& cfg, std::uint64_t& count) {
    double remaining = h;
    long iter = 0;
    while (remaining > 0.0 && iter < kMaxSubsteps) {
        const double d = drift(x);
        double s = remaining;
        if (d != 0.0) s = std::min(remaining, kSubstepFraction * std::max(std::abs(x), 1.0) / std::abs(d));
        x += d * s + noise * (s / h);
        remaining -= s;
        ++iter;
        if (is_exploded(x, cfg) || !std::isfinite(x)) break;
    }
    if (iter > 1) count += static_cast<std::uint64_t>(iter - 1);
    return x;
}

// The pairwise repulsion is taken implicitly: the new positions minimise
// sum (z - y)^2 / (2h) - coef * sum log(z[j] - z[i]), a strictly convex barrier
// problem whose minimiser is strictly ordered. Returns false if Newton stalls.
bool implicit_repulsion(std::vector<double>& z, const std::vector<double>& y, double h, double coef) {
    const std::size_t n = z.size();
    if (n < 2 || coef == 0.0) {
        z = y;
        return true;
    }
    auto objective = [&](const std::vector<double>& v) {
        double f = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            f += (v[k] - y[k]) * (v[k] - y[k]) / (2.0 * h);
            for (std::size_t j = k + 1; j < n; ++j) f -= coef * std::log(v[j] - v[k]);
        }
        return f;
    };
    const auto dim = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd H(dim, dim);
    Eigen::VectorXd g(dim);
    std::vector<double> trial(n);
    double f = objective(z);
    for (int it = 0; it < 100; ++it) {
        H.setZero();
        for (std::size_t k = 0; k < n; ++k) {
            const auto ik = static_cast<Eigen::Index>(k);
            g(ik) = (z[k] - y[k]) / h;
            H(ik, ik) += 1.0 / h;
        }
        for (std::size_t k = 0; k < n; ++k) {
            const auto ik = static_cast<Eigen::Index>(k);
            for (std::size_t j = k + 1; j < n; ++j) {
                const auto ij = static_cast<Eigen::Index>(j);
                const double inv = 1.0 / (z[j] - z[k]);
                const double w = coef * inv * inv;
                g(ik) += coef * inv;
                g(ij) -= coef * inv;
                H(ik, ik) += w;
                H(ij, ij) += w;
                H(ik, ij) -= w;
                H(ij, ik) -= w;
            }
        }
        const Eigen::VectorXd p = -H.llt().solve(g);
        const double slope = g.dot(p);
        // Close to the minimiser the objective no longer resolves the decrease.
        const bool tiny = -slope <= 1e-10 * (1.0 + std::abs(f));
        bool small = true;
        for (std::size_t k = 0; k < n && small; ++k) {
            small = std::abs(p(static_cast<Eigen::Index>(k))) <= 1e-13 * std::max(1.0, std::abs(z[k]));
        }
        if (small) return true;
        double alpha = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
            bool ok = true;
            for (std::size_t k = 0; k < n; ++k) trial[k] = z[k] + alpha * p(static_cast<Eigen::Index>(k));
            for (std::size_t k = 0; k + 1 < n && ok; ++k) ok = trial[k + 1] > trial[k];
            if (!ok) continue;
            const double ft = objective(trial);
            if (tiny || ft <= f + 1e-4 * alpha * slope) {
                z.swap(trial);
                f = ft;
                moved = true;
                break;
            }
        }
        if (!moved) return false;
    }
    return false;
}

std::vector<double> propose(const std::vector<double>& lam, const SimConfig& cfg, double h,
                            const std::vector<double>& W, double sigma, std::uint64_t& substeps) {
    const std::size_t n = lam.size();
    const double coef = beta_of(cfg.model) / (2.0 * cfg.N);
    std::vector<double> out(lam);
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = lam[i];
        if (is_exploded(x, cfg)) continue;
        const double base = drift(x, cfg.model);
        const double noise = sigma * W[i];
        if (std::abs(base) * h <= kSubstepFraction * std::max(std::abs(x), 1.0)) {
            out[i] = x + base * h + noise;
        } else {
            out[i] = substep(x, h, noise, [&](double v) { return drift(v, cfg.model); }, cfg, substeps);
        }
        if (!is_exploded(out[i], cfg) && std::isfinite(out[i])) keep.push_back(i);
    }
    std::vector<double> z(keep.size()), y(keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        z[k] = lam[keep[k]];
        y[k] = out[keep[k]];
    }
    if (!implicit_repulsion(z, y, h, coef)) return out;
    for (std::size_t k = 0; k < keep.size(); ++k) out[keep[k]] = z[k];
    return out;
}

void advance(SimState& s, const SimConfig& cfg, double h, const std::vector<double>& W, double sigma, int depth) {
    std::vector<double> prop = propose(s.lambdas, cfg, h, W, sigma, s.substeps);
    if (ordered(prop, cfg)) {
        s.lambdas = std::move(prop);
        return;
    }
    if (depth >= kMaxHalvings) {
        std::sort(prop.begin(), prop.end());
        s.lambdas = std::move(prop);
        ++s.forced_sorts;
        return;
    }
    ++s.retries;
    // Brownian bridge: split each increment over [0, h] into two halves.
    std::normal_distribution<double> nd;
    const double spread = std::sqrt(0.25 * h);
    std::vector<double> W1(W.size()), W2(W.size());
    for (std::size_t i = 0; i < W.size(); ++i) {
        W1[i] = 0.5 * W[i] + spread * nd(s.rng);
        W2[i] = W[i] - W1[i];
    }
    advance(s, cfg, 0.5 * h, W1, sigma, depth + 1);
    advance(s, cfg, 0.5 * h, W2, sigma, depth + 1);
}

void insert_strict(std::vector<double>& v, double x) {
    auto it = std::lower_bound(v.begin(), v.end(), x);
    while (it != v.end() && !(*it > x)) {
        x = std::nextafter(x, std::numeric_limits<double>::infinity());
        it = std::lower_bound(v.begin(), v.end(), x);
    }
    if (it != v.begin() && !(*(it - 1) < x)) x = std::nextafter(*(it - 1), std::numeric_limits<double>::infinity());
    v.insert(it, x);
}

std::vector<double> support_edges(const SimConfig& cfg) {
    try {
        const StationarySolution sol = stationary(cfg.model);
        if (sol.full_line()) return {};
        return {sol.lower_edge(), sol.upper_edge()};
    } catch (const std::exception&) {
        return {};
    }
}

void common_warnings(const SimConfig& cfg, std::vector<std::string>& w) {
    if (beta_of(cfg.model) < 1.0) {
        w.push_back("beta < 1: eigenvalue collisions are possible and the ordering fallback may trigger");
    }
    for (double e : support_edges(cfg)) {
        if (cfg.cutoff < 10.0 * std::abs(e)) {
            w.push_back("cutoff is not much larger than the stationary support edges");
            break;
        }
    }
}

void final_warnings(const SimState& s, const SimConfig& cfg, std::uint64_t quartic_restarts,
                    std::vector<std::string>& w) {
    if (s.forced_sorts > 0) {
        const double frac = static_cast<double>(s.forced_sorts) / static_cast<double>(std::max<std::uint64_t>(1, s.steps));
        std::ostringstream os;
        os << "ordering fallback: forced sort used in " << s.forced_sorts << " of " << s.steps << " steps (fraction "
           << frac << (frac >= 1e-4 ? ", above the 1e-4 budget)" : ")");
        w.push_back(os.str());
    }
    if (quartic_restarts > 0) {
        std::ostringstream os;
        os << quartic_restarts << " quartic restarts placed at 0 with a jitter below " << 1e-12 * cfg.cutoff;
        w.push_back(os.str());
    }
}

struct Recorder {
    const SimConfig& cfg;
    SimResult& res;
    std::vector<std::int64_t> window;
    std::uint64_t restarts = 0;
    std::uint64_t quartic_restarts = 0;
    double next_alive = 0.0;
    double t_first = -1.0;

    Recorder(const SimConfig& c, SimResult& r) : cfg(c), res(r), window(c.flux_levels.size(), 0) {}

    std::vector<std::size_t> below(const std::vector<double>& lam) const {
        std::vector<std::size_t> nb(cfg.flux_levels.size());
        for (std::size_t k = 0; k < nb.size(); ++k) nb[k] = count_below(lam, cfg.flux_levels[k]);
        return nb;
    }

    void start(const SimState& s) {
        if (cfg.mode == Mode::Kill) {
            res.alive.push_back({0.0, s.alive});
            next_alive = cfg.alive_interval;
        }
        if (cfg.track_every > 0) {
            res.trajectory.times.push_back(0.0);
            res.trajectory.paths.push_back(s.lambdas);
        }
    }

    void step(SimState& s, std::size_t k, const std::vector<std::size_t>& nb_before, const ExplosionOutcome& ex) {
        const std::vector<std::size_t> nb_after = below(s.lambdas);
        const bool sampling = s.time > cfg.burn_in;
        if (!is_cubic(cfg) && cfg.mode == Mode::Restart) quartic_restarts += ex.events;
        for (std::size_t l = 0; l < nb_after.size(); ++l) {
            const auto delta = static_cast<std::int64_t>(nb_after[l]) - static_cast<std::int64_t>(nb_before[l]);
            s.crossings[l] += delta;
            if (sampling) window[l] += delta + ex.compensation[l];
        }
        if (sampling) {
            if (t_first < 0.0) t_first = s.time - cfg.dt;
            if (cfg.mode == Mode::Restart) restarts += ex.events;
            for (double x : s.lambdas) res.histogram.add(x);
        }
        if (cfg.mode == Mode::Kill && s.time >= next_alive - 1e-9 * cfg.dt) {
            res.alive.push_back({s.time, s.alive});
            next_alive += cfg.alive_interval;
        }
        if (cfg.track_every > 0 && k % cfg.track_every == 0) {
            res.trajectory.times.push_back(s.time);
            res.trajectory.paths.push_back(s.lambdas);
        }
    }

    void finish(const SimState& s) {
        const double t_lo = t_first < 0.0 ? cfg.burn_in : t_first;
        const double t_hi = s.time;
        for (std::size_t l = 0; l < window.size(); ++l) {
            FluxRecord f;
            f.level = cfg.flux_levels[l];
            f.t_lo = t_lo;
            f.t_hi = t_hi;
            f.signed_crossings = window[l];
            f.rate = t_hi > t_lo ? static_cast<double>(window[l]) / (t_hi - t_lo) : 0.0;
            f.restarts_counted = restarts;
            res.flux.push_back(f);
        }
        final_warnings(s, cfg, quartic_restarts, res.warnings);
    }
};

long step_count(const SimConfig& cfg) { return std::lround(cfg.t_end / cfg.dt); }

void jacobi(Eigen::MatrixXd& A, Eigen::MatrixXd& V, int max_sweeps, int& sweeps) {
    const Eigen::Index n = A.rows();
    for (sweeps = 0; sweeps <= max_sweeps; ++sweeps) {
        double off = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
        const double norm = A.squaredNorm();
        if (off <= 1e-30 * norm || off == 0.0) return;
        if (sweeps == max_sweeps) break;
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (apq == 0.0) continue;
                if (std::abs(apq) <= 1e-18 * (std::abs(A(p, p)) + std::abs(A(q, q)))) {
                    A(p, q) = A(q, p) = 0.0;
                    continue;
                }
                const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                A(p, p) -= t * apq;
                A(q, q) += t * apq;
                A(p, q) = A(q, p) = 0.0;
                for (Eigen::Index r = 0; r < n; ++r) {
                    if (r == p || r == q) continue;
                    const double arp = A(r, p);
                    const double arq = A(r, q);
                    A(r, p) = A(p, r) = c * arp - s * arq;
                    A(r, q) = A(q, r) = s * arp + c * arq;
                }
                for (Eigen::Index r = 0; r < n; ++r) {
                    const double vrp = V(r, p);
                    const double vrq = V(r, q);
                    V(r, p) = c * vrp - s * vrq;
                    V(r, q) = s * vrp + c * vrq;
                }
            }
        }
    }
    std::ostringstream os;
    os << "sym_eigen: Jacobi did not converge in " << max_sweeps << " sweeps";
    throw NumericalError(os.str(), 0.0);
}

SymEigen sorted_pairs(const Eigen::MatrixXd& A, const Eigen::MatrixXd& V, int sweeps) {
    const Eigen::Index n = A.rows();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return A(a, a) < A(b, b); });
    SymEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        out.values[k] = A(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(k)]);
        out.vectors.col(k) = V.col(idx[static_cast<std::size_t>(k)]);
    }
    out.sweeps = sweeps;
    return out;
}

}  // namespace

std::string_view to_string(Mode m) noexcept { return m == Mode::Restart ? "restart" : "kill"; }
std::string_view to_string(Engine e) noexcept { return e == Engine::EigenSde ? "eigen-sde" : "matrix"; }

bool is_exploded(double x, const SimConfig& cfg) noexcept {
    if (!std::isfinite(x)) return true;
    return is_cubic(cfg) ? x < -cfg.cutoff : std::abs(x) > cfg.cutoff;
}

void validate(const SimConfig& cfg) {
    validate(cfg.model);
    auto fail = [](const std::string& msg) { throw DomainError("simulation config: " + msg); };
    if (cfg.N < 1) fail("N must be at least 1");
    if (!(cfg.dt > 0.0)) fail("dt must be positive");
    if (!(cfg.t_end > 0.0)) fail("t_end must be positive");
    if (!(cfg.burn_in >= 0.0) || !(cfg.burn_in < cfg.t_end)) fail("burn_in must satisfy 0 <= burn_in < t_end");
    if (!(cfg.cutoff > 0.0)) fail("cutoff must be positive");
    if (!(cfg.noise_scale >= 0.0)) fail("noise_scale must be non-negative");
    if (!(cfg.histogram.hi > cfg.histogram.lo) || cfg.histogram.bins == 0) fail("invalid histogram layout");
    if (!(cfg.alive_interval > 0.0)) fail("alive_interval must be positive");
    if (!cfg.initial.empty()) {
        if (cfg.initial.size() != static_cast<std::size_t>(cfg.N)) fail("initial condition must have N entries");
        for (std::size_t i = 0; i < cfg.initial.size(); ++i) {
            if (is_exploded(cfg.initial[i], cfg)) fail("initial eigenvalue beyond the cutoff");
            if (i > 0 && !(cfg.initial[i] > cfg.initial[i - 1])) fail("initial eigenvalues must be strictly increasing");
        }
    }
    if (cfg.engine == Engine::Matrix) {
        if (beta_of(cfg.model) != 1.0) fail("the matrix engine realizes beta = 1 only");
        if (cfg.mode == Mode::Kill) fail("kill mode is available with the eigen-sde engine only");
    }
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t replica) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(replica), static_cast<std::uint32_t>(replica >> 32)};
    return std::mt19937_64(seq);
}

SimState initial_state(const SimConfig& cfg) {
    SimState s;
    if (cfg.initial.empty()) {
        s.lambdas.resize(static_cast<std::size_t>(cfg.N));
        for (int i = 0; i < cfg.N; ++i) s.lambdas[static_cast<std::size_t>(i)] = (i - 0.5 * (cfg.N - 1)) * 1e-8;
    } else {
        s.lambdas = cfg.initial;
    }
    s.crossings.assign(cfg.flux_levels.size(), 0);
    s.alive = s.lambdas.size();
    s.rng = make_rng(cfg.seed, cfg.stream);
    return s;
}

void step_eigen_sde(SimState& s, const SimConfig& cfg) {
    std::normal_distribution<double> nd;
    const double sqdt = std::sqrt(cfg.dt);
    std::vector<double> W(s.lambdas.size());
    for (double& w : W) w = sqdt * nd(s.rng);
    const double sigma = cfg.noise_scale / std::sqrt(static_cast<double>(cfg.N));
    advance(s, cfg, cfg.dt, W, sigma, 0);
    ++s.steps;
    s.time += cfg.dt;
}

ExplosionOutcome handle_explosions(SimState& s, const SimConfig& cfg) {
    ExplosionOutcome out;
    out.compensation.assign(cfg.flux_levels.size(), 0);
    std::vector<double> keep;
    std::vector<double> gone;
    keep.reserve(s.lambdas.size());
    for (double x : s.lambdas) (is_exploded(x, cfg) ? gone : keep).push_back(x);
    if (gone.empty()) return out;
    std::sort(keep.begin(), keep.end());
    for (double old : gone) {
        ++out.events;
        ++s.explosions;
        bool placed = false;
        double fresh = 0.0;
        if (cfg.mode == Mode::Kill) {
            --s.alive;
        } else {
            fresh = restart_value(s, cfg);
            insert_strict(keep, fresh);
            placed = true;
        }
        for (std::size_t l = 0; l < cfg.flux_levels.size(); ++l) {
            const double level = cfg.flux_levels[l];
            const int was_below = old < level ? 1 : 0;
            const int now_below = placed && fresh < level ? 1 : 0;
            out.compensation[l] += was_below - now_below;
        }
    }
    for (std::size_t l = 0; l < out.compensation.size(); ++l) s.crossings[l] += out.compensation[l];
    s.lambdas = std::move(keep);
    return out;
}

SimResult run_eigen_sde(const SimConfig& cfg) {
    validate(cfg);
    SimResult res;
    res.histogram = Histogram(cfg.histogram.lo, cfg.histogram.hi, cfg.histogram.bins);
    common_warnings(cfg, res.warnings);
    SimState s = initial_state(cfg);
    Recorder rec(cfg, res);
    rec.start(s);
    const long n = step_count(cfg);
    for (long k = 1; k <= n; ++k) {
        const auto nb = rec.below(s.lambdas);
        step_eigen_sde(s, cfg);
        s.time = static_cast<double>(k) * cfg.dt;
        const ExplosionOutcome ex = handle_explosions(s, cfg);
        // handle_explosions already added the compensation to s.crossings
        rec.step(s, static_cast<std::size_t>(k), nb, ex);
    }
    rec.finish(s);
    res.state = std::move(s);
    return res;
}

Eigen::MatrixXd hermitian_bm_increment(int n, double dt, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    const double sd_diag = std::sqrt(dt);
    const double sd_off = std::sqrt(0.5 * dt);
    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i) {
        B(i, i) = sd_diag * nd(rng);
        for (int j = i + 1; j < n; ++j) B(i, j) = B(j, i) = sd_off * nd(rng);
    }
    return B;
}

SymEigen sym_eigen(const Eigen::MatrixXd& A, int max_sweeps) {
    return sym_eigen(A, Eigen::MatrixXd::Identity(A.rows(), A.cols()), max_sweeps);
}

SymEigen sym_eigen(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q, int max_sweeps) {
    if (A.rows() != A.cols() || Q.rows() != A.rows() || Q.cols() != A.cols()) {
        throw DomainError("sym_eigen: square matrices of equal size required");
    }
    Eigen::MatrixXd B = Q.transpose() * A * Q;
    B = 0.5 * (B + B.transpose()).eval();
    Eigen::MatrixXd V = Q;
    int sweeps = 0;
    jacobi(B, V, max_sweeps, sweeps);
    return sorted_pairs(B, V, sweeps);
}

SimResult run_matrix_langevin(const SimConfig& cfg) {
    SimConfig c = cfg;
    c.engine = Engine::Matrix;
    validate(c);
    SimResult res;
    res.histogram = Histogram(c.histogram.lo, c.histogram.hi, c.histogram.bins);
    common_warnings(c, res.warnings);
    SimState s = initial_state(c);
    const int n = c.N;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    if (!c.initial.empty()) {
        for (int i = 0; i < n; ++i) H(i, i) = c.initial[static_cast<std::size_t>(i)];
    }
    SymEigen eig = sym_eigen(H);
    s.lambdas.assign(eig.values.data(), eig.values.data() + n);
    Eigen::MatrixXd Q = eig.vectors;
    const double sigma = c.noise_scale / std::sqrt(static_cast<double>(n));
    Recorder rec(c, res);
    rec.start(s);
    const long steps = step_count(c);
    Eigen::VectorXd lam(n);
    for (long k = 1; k <= steps; ++k) {
        const auto nb = rec.below(s.lambdas);
        ExplosionOutcome ex;
        ex.compensation.assign(c.flux_levels.size(), 0);
        for (int i = 0; i < n; ++i) {
            const double x0 = s.lambdas[static_cast<std::size_t>(i)];
            auto v = [&](double y) { return drift(y, c.model); };
            double x = substep(x0, c.dt, 0.0, v, c, s.substeps);
            if (is_exploded(x, c)) {
                const double fresh = restart_value(s, c);
                ++ex.events;
                ++s.explosions;
                for (std::size_t l = 0; l < c.flux_levels.size(); ++l) {
                    const double level = c.flux_levels[l];
                    ex.compensation[l] += (x < level ? 1 : 0) - (fresh < level ? 1 : 0);
                }
                x = fresh;
            }
            lam[i] = x;
        }
        for (std::size_t l = 0; l < ex.compensation.size(); ++l) s.crossings[l] += ex.compensation[l];
        H = Q * lam.asDiagonal() * Q.transpose();
        H += sigma * hermitian_bm_increment(n, c.dt, s.rng);
        H = 0.5 * (H + H.transpose()).eval();
        if (k % 256 == 0) {
            // keep the warm-start basis orthonormal
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(Q);
            Eigen::MatrixXd Qo = qr.householderQ();
            for (int j = 0; j < n; ++j) {
                if (Qo.col(j).dot(Q.col(j)) < 0.0) Qo.col(j) *= -1.0;
            }
            Q = Qo;
        }
        eig = sym_eigen(H, Q);
        Q = eig.vectors;
        s.lambdas.assign(eig.values.data(), eig.values.data() + n);
        ++s.steps;
        s.time = static_cast<double>(k) * c.dt;
        rec.step(s, static_cast<std::size_t>(k), nb, ex);
    }
    rec.finish(s);
    res.state = std::move(s);
    return res;
}

SimResult run_simulation(const SimConfig& cfg) {
    return cfg.engine == Engine::Matrix ? run_matrix_langevin(cfg) : run_eigen_sde(cfg);
}

SimResult run_replicas(const SimConfig& cfg, std::size_t replicas, unsigned jobs) {
    validate(cfg);
    if (replicas == 0) throw DomainError("run_replicas: at least one replica required");
    std::vector<SimResult> parts(replicas);
    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(replicas)));
    auto work = [&](unsigned w) {
        for (std::size_t r = w; r < replicas; r += workers) {
            SimConfig c = cfg;
            c.stream = cfg.stream + r;
            parts[r] = run_simulation(c);
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    SimResult out = std::move(parts[0]);
    out.replicas = replicas;
    if (replicas > 1) {
        for (auto& w : out.warnings) w = "replica 0: " + w;
    }
    for (std::size_t r = 1; r < replicas; ++r) {
        const SimResult& p = parts[r];
        out.histogram.merge(p.histogram);
        for (std::size_t l = 0; l < out.flux.size(); ++l) {
            out.flux[l].signed_crossings += p.flux[l].signed_crossings;
            out.flux[l].restarts_counted += p.flux[l].restarts_counted;
        }
        for (std::size_t k = 0; k < out.alive.size() && k < p.alive.size(); ++k) out.alive[k].alive += p.alive[k].alive;
        out.state.explosions += p.state.explosions;
        for (const auto& w : p.warnings) out.warnings.push_back("replica " + std::to_string(r) + ": " + w);
    }
    for (auto& f : out.flux) {
        const double span = f.t_hi - f.t_lo;
        f.rate = span > 0.0 ? static_cast<double>(f.signed_crossings) / (static_cast<double>(replicas) * span) : 0.0;
    }
    return out;
}

}  // namespace rmnc
