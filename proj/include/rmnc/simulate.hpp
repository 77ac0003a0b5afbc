#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rmnc/analysis.hpp"
#include "rmnc/model.hpp"

namespace rmnc {

enum class Mode { Restart, Kill };
enum class Engine { EigenSde, Matrix };

[[nodiscard]] std::string_view to_string(Mode m) noexcept;
[[nodiscard]] std::string_view to_string(Engine e) noexcept;

struct HistogramSpec {
    double lo = -6.0;
    double hi = 6.0;
    std::size_t bins = 400;
};

struct SimConfig {
    int N = 50;
    Model model = CubicModel{};
    double dt = 1e-3;
    double t_end = 100.0;
    double burn_in = 10.0;
    double cutoff = 1e3;
    std::uint64_t seed = 1;
    // Random stream index; replicas of one configuration differ only here.
    std::uint64_t stream = 0;
    Mode mode = Mode::Restart;
    Engine engine = Engine::EigenSde;
    std::vector<double> flux_levels{0.0};
    HistogramSpec histogram;
    // Multiplies every Brownian increment; 0 gives the deterministic gradient flow.
    double noise_scale = 1.0;
    // Starting eigenvalues; empty means all at 0 with a 1e-8 spread.
    std::vector<double> initial;
    // Record the eigenvalue vector every this many steps (0 disables).
    std::size_t track_every = 0;
    // Kill mode: record the number of survivors every this much time.
    double alive_interval = 0.1;
};

/// Throws DomainError on an inconsistent configuration.
void validate(const SimConfig& cfg);

struct SimState {
    std::vector<double> lambdas;  // strictly increasing
    double time = 0.0;
    std::uint64_t explosions = 0;
    std::vector<std::int64_t> crossings;  // per flux level, right-to-left positive
    std::size_t alive = 0;
    std::mt19937_64 rng;
    std::uint64_t steps = 0;
    std::uint64_t retries = 0;       // halvings triggered by an ordering violation
    std::uint64_t forced_sorts = 0;  // steps that fell back to sorting
    std::uint64_t substeps = 0;      // extra per-particle drift sub-steps
};

[[nodiscard]] SimState initial_state(const SimConfig& cfg);

/// One Euler-Maruyama step of the eigenvalue system; exploded particles are left
/// beyond the cutoff for handle_explosions.
void step_eigen_sde(SimState& s, const SimConfig& cfg);

/// Per-level change in the crossing counters produced by relocating exploded
/// particles, cancelling the jump so that only motion is counted.
struct ExplosionOutcome {
    std::size_t events = 0;
    std::vector<std::int64_t> compensation;
};

[[nodiscard]] bool is_exploded(double x, const SimConfig& cfg) noexcept;

/// Restart (cubic: at +cutoff, quartic: at 0 with a tiny jitter) or removal (kill
/// mode) of every exploded particle. Updates explosions, alive and crossings.
ExplosionOutcome handle_explosions(SimState& s, const SimConfig& cfg);

struct FluxRecord {
    double level = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::int64_t signed_crossings = 0;
    double rate = 0.0;
    std::uint64_t restarts_counted = 0;
};

struct AlivePoint {
    double t = 0.0;
    std::size_t alive = 0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> paths;  // sorted eigenvalues at each time
};

struct SimResult {
    Histogram histogram;
    std::vector<FluxRecord> flux;
    SimState state;
    std::vector<AlivePoint> alive;
    Trajectory trajectory;
    std::vector<std::string> warnings;
    std::size_t replicas = 1;
};

[[nodiscard]] SimResult run_eigen_sde(const SimConfig& cfg);
[[nodiscard]] SimResult run_matrix_langevin(const SimConfig& cfg);
[[nodiscard]] SimResult run_simulation(const SimConfig& cfg);

/// Independent replicas with seeds derived from (seed, index), run on `jobs`
/// threads and merged by counter addition in index order. Flux rates are per
/// replica (summed crossings over replicas times window).
[[nodiscard]] SimResult run_replicas(const SimConfig& cfg, std::size_t replicas, unsigned jobs);

/// RNG seeded from (seed, replica).
[[nodiscard]] std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t replica = 0);

/// Symmetric increment of a real Brownian matrix: off-diagonal variance dt/2,
/// diagonal variance dt. Upper triangle drawn row by row.
[[nodiscard]] Eigen::MatrixXd hermitian_bm_increment(int n, double dt, std::mt19937_64& rng);

struct SymEigen {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // columns, orthonormal
    int sweeps = 0;
};

/// Cyclic Jacobi; throws NumericalError after max_sweeps.
[[nodiscard]] SymEigen sym_eigen(const Eigen::MatrixXd& A, int max_sweeps = 100);
/// Jacobi on Q^T A Q starting from an approximate eigenbasis Q.
[[nodiscard]] SymEigen sym_eigen(const Eigen::MatrixXd& A, const Eigen::MatrixXd& Q, int max_sweeps = 100);

}  // namespace rmnc
