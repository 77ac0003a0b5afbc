#include "rmnc/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rmnc/acceptance.hpp"
#include "rmnc/analysis.hpp"
#include "rmnc/dynamics.hpp"
#include "rmnc/equilibrium.hpp"
#include "rmnc/errors.hpp"
#include "rmnc/io.hpp"
#include "rmnc/model.hpp"
#include "rmnc/simulate.hpp"

#ifndef RMNC_VERSION
#define RMNC_VERSION "unknown"
#endif

namespace rmnc {

std::string version_string() { return std::string("rmnc ") + RMNC_VERSION; }

namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

struct ModelArgs {
    std::string family = "cubic";
    double a = 0.0;
    double g = 0.0;
    double beta = 1.0;
};

struct DensityArgs {
    ModelArgs model;
    double x_min = -4.0;
    double x_max = 4.0;
    int points = 801;
    std::string out = "rmnc_out/density";
    bool svg = false;
};

struct SimulateArgs {
    ModelArgs model;
    int n = 50;
    double dt = 1e-3;
    double t_end = 100.0;
    double burn_in = 10.0;
    double cutoff = 1e3;
    std::uint64_t seed = 1;
    std::string mode = "restart";
    std::string engine = "eigen-sde";
    std::string levels = "0";
    double hist_lo = -6.0;
    double hist_hi = 6.0;
    std::size_t bins = 400;
    std::size_t replicas = 1;
    unsigned jobs = 1;
    bool track_paths = false;
    std::size_t track_every = 10;
    double noise_scale = 1.0;
    double alive_interval = 0.1;
    std::string init_file;
    std::string out = "rmnc_out/simulate";
    bool svg = false;
};

struct EvolveArgs {
    ModelArgs model;
    std::string init = "delta";
    std::string init_file;
    double t = 50.0;
    int snapshots = 50;
    std::string targets = "default";
    double dt = 5e-3;
    double anchor = 0.5;
    unsigned jobs = 1;
    std::string out = "rmnc_out/evolve";
    bool svg = false;
};

struct VerifyArgs {
    bool full = false;
    bool quick = false;
    std::uint64_t seed = 1;
    std::string only;
    unsigned jobs = 1;
    double perturb_a_star = 0.0;
    std::string out = "rmnc_out/verify";
};

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

Model make_model(const ModelArgs& m) {
    Model out;
    if (m.family == "cubic") {
        out = CubicModel{m.a, m.beta};
    } else if (m.family == "quartic") {
        out = QuarticModel{m.g, m.beta};
    } else {
        throw DomainError("unknown family '" + m.family + "' (expected cubic or quartic)");
    }
    validate(out);
    return out;
}

ojson model_json(const ModelArgs& m) {
    ojson j;
    j["family"] = m.family;
    if (m.family == "cubic") {
        j["a"] = m.a;
    } else {
        j["g"] = m.g;
    }
    j["beta"] = m.beta;
    return j;
}

ojson cplx_json(cplx z) { return ojson{{"re", z.real()}, {"im", z.imag()}}; }

std::vector<double> parse_list(const std::string& s, const char* what) {
    if (s.empty()) return {};
    try {
        return parse_numbers(s);
    } catch (const DomainError&) {
        throw DomainError(std::string("invalid ") + what + " list '" + s + "'");
    }
}

void add_model_options(CLI::App* sub, ModelArgs& m) {
    sub->add_option("--family", m.family, "cubic or quartic")->capture_default_str();
    sub->add_option("--a", m.a, "cubic parameter a")->capture_default_str();
    sub->add_option("--g", m.g, "quartic coupling g")->capture_default_str();
    sub->add_option("--beta", m.beta, "Dyson index")->capture_default_str();
}

struct Manifest {
    ojson j;
    fs::path dir;
    std::vector<std::string> outputs;
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

    Manifest(const std::string& command, const ojson& config, const std::vector<std::string>& argv, fs::path d)
        : dir(std::move(d)) {
        j["command"] = command;
        j["arguments"] = argv;
        j["config"] = config;
        j["version"] = version_string();
        j["started"] = utc_now();
    }

    void write(const std::string& name, const std::string& content) {
        write_file(dir / name, content);
        outputs.push_back((dir / name).string());
    }

    void finish() {
        j["outputs"] = outputs;
        j["finished"] = utc_now();
        j["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const fs::path p = dir / "manifest.json";
        j["outputs"].push_back(p.string());
        write_file(p, j.dump(2) + "\n");
    }
};

int cmd_density(const DensityArgs& a, const std::vector<std::string>& argv, bool dry, std::ostream& out) {
    const Model model = make_model(a.model);
    if (a.points < 2 || !(a.x_max > a.x_min)) throw DomainError("density: need points >= 2 and x-max > x-min");
    ojson cfg = model_json(a.model);
    cfg["x-min"] = a.x_min;
    cfg["x-max"] = a.x_max;
    cfg["points"] = a.points;
    cfg["out"] = a.out;
    cfg["svg"] = a.svg;
    if (dry) {
        out << cfg.dump(2) << "\n";
        return kExitOk;
    }
    const StationarySolution sol = stationary(model);
    std::vector<double> xs, rho;
    for (int k = 0; k < a.points; ++k) {
        const double x = a.x_min + (a.x_max - a.x_min) * k / (a.points - 1);
        xs.push_back(x);
        rho.push_back(density(sol, x));
    }
    ojson s;
    s["family"] = std::string(to_string(sol.family));
    s["regime"] = std::string(to_string(sol.regime));
    s["beta"] = sol.beta;
    if (sol.family == Family::Cubic) {
        s["a"] = sol.a;
        s["a_star"] = critical_a(sol.beta);
    } else {
        s["g"] = sol.g;
        s["g_c"] = critical_g(sol.beta);
    }
    s["J"] = cplx_json(sol.J);
    s["zeta"] = cplx_json(sol.zeta);
    if (sol.full_line()) {
        s["support"] = nullptr;
        s["gamma_minus"] = cplx_json(sol.gamma_minus);
        s["gamma_plus"] = cplx_json(sol.gamma_plus);
    } else {
        s["support"] = {sol.lower_edge(), sol.upper_edge()};
    }
    s["flux_rate"] = flux_rate(sol);
    s["tail_coefficient"] = sol.full_line() ? flux_rate(sol) : 0.0;

    Manifest man("density", cfg, argv, a.out);
    const std::string csv = density_csv(xs, rho);
    man.write("density.csv", csv);
    man.write("solution.json", s.dump(2) + "\n");
    if (a.svg) {
        PlotSpec p{"stationary density (" + std::string(to_string(sol.regime)) + ")", "x", "rho(x)"};
        man.write("density.svg", render_svg(p, {{"rho", xs, rho, false}}));
    }
    man.finish();
    out << "regime " << to_string(sol.regime) << ", flux rate " << fmt(flux_rate(sol)) << "\n";
    return kExitOk;
}

std::uint64_t env_seed() {
    const char* env = std::getenv("RMNC_SEED");
    if (!env) return 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') throw DomainError(std::string("RMNC_SEED is not an integer: '") + env + "'");
    return v;
}

int cmd_simulate(SimulateArgs a, const std::vector<std::string>& argv, bool dry, bool seed_flag, std::ostream& out) {
    if (!seed_flag && std::getenv("RMNC_SEED")) a.seed = env_seed();
    SimConfig c;
    c.N = a.n;
    c.model = make_model(a.model);
    c.dt = a.dt;
    c.t_end = a.t_end;
    c.burn_in = a.burn_in;
    c.cutoff = a.cutoff;
    c.seed = a.seed;
    if (a.mode == "restart") {
        c.mode = Mode::Restart;
    } else if (a.mode == "kill") {
        c.mode = Mode::Kill;
    } else {
        throw DomainError("unknown mode '" + a.mode + "' (expected restart or kill)");
    }
    if (a.engine == "eigen-sde") {
        c.engine = Engine::EigenSde;
    } else if (a.engine == "matrix") {
        c.engine = Engine::Matrix;
    } else {
        throw DomainError("unknown engine '" + a.engine + "' (expected eigen-sde or matrix)");
    }
    c.flux_levels = parse_list(a.levels, "levels");
    c.histogram = {a.hist_lo, a.hist_hi, a.bins};
    c.noise_scale = a.noise_scale;
    c.track_every = a.track_paths ? a.track_every : 0;
    c.alive_interval = a.alive_interval;
    if (!a.init_file.empty()) c.initial = parse_numbers(read_file(a.init_file));
    validate(c);
    if (a.replicas == 0) throw DomainError("replicas must be >= 1");

    ojson cfg = model_json(a.model);
    cfg["n"] = a.n;
    cfg["dt"] = a.dt;
    cfg["t-end"] = a.t_end;
    cfg["burn-in"] = a.burn_in;
    cfg["cutoff"] = a.cutoff;
    cfg["seed"] = a.seed;
    cfg["mode"] = a.mode;
    cfg["engine"] = a.engine;
    cfg["levels"] = c.flux_levels;
    cfg["hist-lo"] = a.hist_lo;
    cfg["hist-hi"] = a.hist_hi;
    cfg["bins"] = a.bins;
    cfg["replicas"] = a.replicas;
    cfg["jobs"] = a.jobs;
    cfg["track-paths"] = a.track_paths;
    cfg["track-every"] = a.track_every;
    cfg["noise-scale"] = a.noise_scale;
    cfg["alive-interval"] = a.alive_interval;
    cfg["init-file"] = a.init_file;
    cfg["out"] = a.out;
    cfg["svg"] = a.svg;
    if (dry) {
        out << cfg.dump(2) << "\n";
        return kExitOk;
    }

    const SimResult res = run_replicas(c, a.replicas, a.jobs);
    Manifest man("simulate", cfg, argv, a.out);
    if (!a.init_file.empty()) man.j["inputs"] = {a.init_file};
    man.j["seed"] = a.seed;
    const std::string hist = histogram_csv(res.histogram);
    man.write("histogram.csv", hist);
    man.write("flux.csv", flux_csv(res.flux));
    if (c.mode == Mode::Kill) man.write("alive.csv", alive_csv(res.alive));
    if (a.track_paths) man.write("trajectory.csv", trajectory_csv(res.trajectory));

    ojson stats;
    stats["steps"] = res.state.steps;
    stats["explosions"] = res.state.explosions;
    stats["retries"] = res.state.retries;
    stats["forced_sorts"] = res.state.forced_sorts;
    stats["substeps"] = res.state.substeps;
    stats["samples"] = res.histogram.total();
    stats["underflow"] = res.histogram.underflow();
    stats["overflow"] = res.histogram.overflow();
    man.j["statistics"] = stats;
    ojson flux = ojson::array();
    for (const auto& f : res.flux) {
        flux.push_back({{"level", f.level},
                        {"t_lo", f.t_lo},
                        {"t_hi", f.t_hi},
                        {"signed_crossings", f.signed_crossings},
                        {"rate", f.rate},
                        {"restarts_counted", f.restarts_counted}});
    }
    man.j["flux"] = flux;
    if (c.mode == Mode::Kill) {
        ojson alive = ojson::array();
        for (const auto& p : res.alive) alive.push_back({p.t, p.alive});
        man.j["alive"] = alive;
    }
    std::optional<StationarySolution> sol;
    try {
        sol = stationary(c.model);
    } catch (const DomainError& e) {
        man.j["comparison"] = nullptr;
        man.j["comparison_note"] = e.what();
    }
    if (sol) {
        Comparison cmp{"l1_distance", l1_distance(res.histogram, density_spec(*sol)), 0.1, false};
        cmp.pass = cmp.value < cmp.tolerance;
        man.j["comparison"] = ojson::parse(to_json(cmp));
        man.j["expected_flux_rate"] = c.N * flux_rate(*sol);
        out << "l1 distance to the stationary density " << fmt(cmp.value) << "\n";
    }
    man.j["warnings"] = res.warnings;
    for (const auto& w : res.warnings) out << "warning: " << w << "\n";

    if (a.svg) {
        std::vector<double> hx, hy;
        for (std::size_t i = 0; i < res.histogram.bins(); ++i) {
            hx.push_back(res.histogram.center(i));
            hy.push_back(res.histogram.density(i));
        }
        std::vector<PlotSeries> series{{"histogram", hx, hy, true}};
        if (sol) {
            std::vector<double> xs, rho;
            for (std::size_t i = 0; i < res.histogram.bins(); ++i) {
                xs.push_back(res.histogram.center(i));
                rho.push_back(density(*sol, xs.back()));
            }
            man.write("density.csv", density_csv(xs, rho));
            series.push_back({"stationary density", xs, rho, false});
        }
        man.write("histogram.svg", render_svg({"eigenvalue histogram", "x", "density"}, series));
        if (a.track_paths && !res.trajectory.times.empty()) {
            std::vector<PlotSeries> paths;
            std::size_t width = 0;
            for (const auto& p : res.trajectory.paths) width = std::max(width, p.size());
            for (std::size_t k = 0; k < width; ++k) {
                PlotSeries s{"lambda_" + std::to_string(k + 1), {}, {}, true};
                for (std::size_t r = 0; r < res.trajectory.times.size(); ++r) {
                    if (k < res.trajectory.paths[r].size()) {
                        s.x.push_back(res.trajectory.times[r]);
                        s.y.push_back(res.trajectory.paths[r][k]);
                    }
                }
                paths.push_back(std::move(s));
            }
            man.write("trajectory.svg", render_svg({"eigenvalue paths", "t", "lambda"}, paths));
        }
    }
    man.finish();
    for (const auto& f : res.flux) out << "level " << fmt(f.level) << ": rate " << fmt(f.rate) << "\n";
    return kExitOk;
}

std::vector<cplx> parse_targets(const std::string& s) {
    std::vector<cplx> out;
    if (s == "default") {
        for (double y : {0.5, 1.5}) {
            for (double x : {-2.0, -1.0, 0.0, 1.0, 2.0}) out.emplace_back(x, y);
        }
        return out;
    }
    std::stringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw DomainError("target '" + item + "' is not of the form re:im");
        const auto v = parse_numbers(item.substr(0, colon) + " " + item.substr(colon + 1));
        if (v.size() != 2 || !(v[1] > 0.0)) throw DomainError("target '" + item + "' must have im > 0");
        out.emplace_back(v[0], v[1]);
    }
    if (out.empty()) throw DomainError("no targets given");
    return out;
}

int cmd_evolve(const EvolveArgs& a, const std::vector<std::string>& argv, bool dry, std::ostream& out) {
    if (a.model.family != "cubic") throw DomainError("evolve supports the cubic family only");
    const auto model = std::get<CubicModel>(make_model(a.model));
    if (!(a.t >= 0.0) || a.snapshots < 1) throw DomainError("evolve: need t >= 0 and snapshots >= 1");
    const auto targets = parse_targets(a.targets);
    InitialDatum datum;
    std::vector<double> atoms;
    if (a.init == "delta") {
        datum = delta_datum();
    } else if (a.init == "stationary") {
        datum = stationary_datum(stationary_cubic(model));
    } else if (a.init == "file") {
        if (a.init_file.empty()) throw DomainError("--init file requires --init-file");
        atoms = parse_numbers(read_file(a.init_file));
        if (atoms.empty()) throw DomainError("init file holds no numbers");
        const double w = 1.0 / static_cast<double>(atoms.size());
        datum.G = [atoms, w](cplx z) {
            cplx s = 0.0;
            for (double x : atoms) s += 1.0 / (x - z);
            return w * s;
        };
        datum.dG = [atoms, w](cplx z) {
            cplx s = 0.0;
            for (double x : atoms) s += 1.0 / ((x - z) * (x - z));
            return w * s;
        };
    } else {
        throw DomainError("unknown init '" + a.init + "' (expected delta, file or stationary)");
    }

    ojson cfg = model_json(a.model);
    cfg["init"] = a.init;
    cfg["init-file"] = a.init_file;
    cfg["t"] = a.t;
    cfg["snapshots"] = a.snapshots;
    cfg["targets"] = a.targets;
    cfg["dt"] = a.dt;
    cfg["anchor"] = a.anchor;
    cfg["jobs"] = a.jobs;
    cfg["out"] = a.out;
    cfg["svg"] = a.svg;
    if (dry) {
        out << cfg.dump(2) << "\n";
        return kExitOk;
    }

    GridField start;
    start.points = targets;
    for (cplx z : targets) {
        start.values.push_back(datum.G(z));
        start.origins.push_back(z);
        start.converged.push_back(true);
    }
    std::vector<GridField> fields{start};
    if (a.t > 0.0) {
        std::vector<double> times;
        for (int k = 1; k <= a.snapshots; ++k) times.push_back(a.t * k / a.snapshots);
        EvolveOptions opt;
        opt.dt = a.dt;
        opt.anchor_spacing = a.anchor;
        opt.jobs = a.jobs;
        auto later = evolve_G_series(datum, model, targets, times, opt);
        fields.insert(fields.end(), later.begin(), later.end());
    }
    const auto sol = stationary_cubic(model);
    std::vector<double> ts, dist;
    bool converged = true;
    for (const auto& f : fields) {
        double d = 0.0;
        for (std::size_t k = 0; k < f.points.size(); ++k) d = std::max(d, std::abs(f.values[k] - G_cubic(sol, f.points[k])));
        ts.push_back(f.time);
        dist.push_back(d);
        converged = converged && f.all_converged();
    }

    Manifest man("evolve", cfg, argv, a.out);
    if (!a.init_file.empty()) man.j["inputs"] = {a.init_file};
    man.write("field.csv", field_csv(fields));
    const std::string series = series_csv(ts, dist, "sup_distance");
    man.write("distance.csv", series);
    if (a.svg) {
        man.write("distance.svg", render_svg({"distance to the stationary transform", "t", "sup |G - G_a|", false, true},
                                             {{"sup distance", ts, dist, false}}));
    }
    man.j["final_distance"] = dist.back();
    man.j["all_converged"] = converged;
    if (!converged) man.j["warnings"] = {"some shooting targets did not converge"};
    man.finish();
    out << "sup distance to G_a at t=" << fmt(ts.back()) << ": " << fmt(dist.back()) << "\n";
    if (!converged) out << "warning: some shooting targets did not converge\n";
    return kExitOk;
}

int cmd_verify(const VerifyArgs& a, const std::vector<std::string>& argv, bool dry, bool seed_flag, std::ostream& out) {
    if (a.full && a.quick) throw DomainError("--full and --quick are exclusive");
    AcceptanceScale sc;
    sc.full = a.full;
    sc.seed = (!seed_flag && std::getenv("RMNC_SEED")) ? env_seed() : a.seed;
    sc.jobs = a.jobs;
    sc.critical_a_offset = a.perturb_a_star;
    std::vector<int> ids;
    for (double v : parse_list(a.only, "criterion")) {
        if (v != std::floor(v) || v < 1 || v > kCriterionCount) throw DomainError("no acceptance criterion " + fmt(v));
        ids.push_back(static_cast<int>(v));
    }
    ojson cfg;
    cfg["scale"] = sc.full ? "full" : "quick";
    cfg["seed"] = sc.seed;
    cfg["only"] = ids;
    cfg["jobs"] = a.jobs;
    cfg["perturb-a-star"] = a.perturb_a_star;
    cfg["out"] = a.out;
    if (dry) {
        out << cfg.dump(2) << "\n";
        return kExitOk;
    }
    const auto results = run_acceptance(sc, ids, [&](const CriterionResult& r) { out << summary_line(r) << std::endl; });
    ojson verdicts = ojson::array();
    bool all = true;
    for (const auto& r : results) {
        verdicts.push_back(ojson::parse(to_json(r)));
        all = all && r.pass;
    }
    Manifest man("verify", cfg, argv, a.out);
    man.j["seed"] = sc.seed;
    man.write("verify.json", verdicts.dump(2) + "\n");
    man.j["pass"] = all;
    man.finish();
    out << (all ? "all criteria passed" : "some criteria failed") << "\n";
    return all ? kExitOk : kExitVerifyFailed;
}

// JSON config values become flags placed before the user's flags, so that the
// last occurrence (the user's) wins.
std::vector<std::string> config_flags(const nlohmann::json& j, const CLI::App* sub) {
    if (!j.is_object()) throw DomainError("config file must hold a JSON object");
    std::vector<std::string> out;
    for (const auto& [key, value] : j.items()) {
        if (key == "config") continue;
        const std::string flag = "--" + key;
        const CLI::Option* opt = sub->get_option_no_throw(flag);
        if (!opt) throw DomainError("unknown config key '" + key + "' for " + sub->get_name());
        if (value.is_boolean()) {
            if (value.get<bool>()) out.push_back(flag);
            continue;
        }
        std::string text;
        if (value.is_array()) {
            for (const auto& v : value) {
                if (!text.empty()) text += ',';
                text += v.is_string() ? v.get<std::string>() : v.dump();
            }
        } else if (value.is_string()) {
            text = value.get<std::string>();
        } else if (value.is_number()) {
            text = value.is_number_float() ? fmt(value.get<double>()) : value.dump();
        } else {
            throw DomainError("config key '" + key + "' has an unsupported value");
        }
        out.push_back(flag);
        out.push_back(text);
    }
    return out;
}

std::optional<std::string> find_config(const std::vector<std::string>& args) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    return std::nullopt;
}

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
    return std::any_of(args.begin(), args.end(),
                       [&](const std::string& s) { return s == flag || s.rfind(flag + "=", 0) == 0; });
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Random matrices in non-confining potentials: stationary densities, Burgers evolution, simulation."};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.set_version_flag("--version", version_string());
    std::string config_path;
    bool dry = false;

    DensityArgs da;
    auto* density_cmd = app.add_subcommand("density", "stationary density and solution summary");
    add_model_options(density_cmd, da.model);
    density_cmd->add_option("--x-min", da.x_min)->capture_default_str();
    density_cmd->add_option("--x-max", da.x_max)->capture_default_str();
    density_cmd->add_option("--points", da.points)->capture_default_str();
    density_cmd->add_option("--out", da.out, "output directory")->capture_default_str();
    density_cmd->add_flag("--svg", da.svg, "also write density.svg");

    SimulateArgs sa;
    auto* sim_cmd = app.add_subcommand("simulate", "finite-N eigenvalue or matrix simulation");
    add_model_options(sim_cmd, sa.model);
    sim_cmd->add_option("--n", sa.n, "number of eigenvalues")->capture_default_str();
    sim_cmd->add_option("--dt", sa.dt)->capture_default_str();
    sim_cmd->add_option("--t-end", sa.t_end)->capture_default_str();
    sim_cmd->add_option("--burn-in", sa.burn_in)->capture_default_str();
    sim_cmd->add_option("--cutoff", sa.cutoff, "explosion cutoff")->capture_default_str();
    sim_cmd->add_option("--seed", sa.seed)->capture_default_str();
    sim_cmd->add_option("--mode", sa.mode, "restart or kill")->capture_default_str();
    sim_cmd->add_option("--engine", sa.engine, "eigen-sde or matrix")->capture_default_str();
    sim_cmd->add_option("--levels", sa.levels, "comma-separated flux levels")->capture_default_str();
    sim_cmd->add_option("--hist-lo", sa.hist_lo)->capture_default_str();
    sim_cmd->add_option("--hist-hi", sa.hist_hi)->capture_default_str();
    sim_cmd->add_option("--bins", sa.bins)->capture_default_str();
    sim_cmd->add_option("--replicas", sa.replicas)->capture_default_str();
    sim_cmd->add_option("--jobs", sa.jobs)->capture_default_str();
    sim_cmd->add_flag("--track-paths", sa.track_paths, "write trajectory.csv");
    sim_cmd->add_option("--track-every", sa.track_every, "steps between trajectory rows")->capture_default_str();
    sim_cmd->add_option("--noise-scale", sa.noise_scale)->capture_default_str();
    sim_cmd->add_option("--alive-interval", sa.alive_interval)->capture_default_str();
    sim_cmd->add_option("--init-file", sa.init_file, "initial eigenvalues");
    sim_cmd->add_option("--out", sa.out, "output directory")->capture_default_str();
    sim_cmd->add_flag("--svg", sa.svg, "also write SVG plots");

    EvolveArgs ea;
    auto* evolve_cmd = app.add_subcommand("evolve", "Burgers evolution of the Stieltjes transform");
    add_model_options(evolve_cmd, ea.model);
    evolve_cmd->add_option("--init", ea.init, "delta, file or stationary")->capture_default_str();
    evolve_cmd->add_option("--init-file", ea.init_file, "atoms of the initial empirical measure");
    evolve_cmd->add_option("--t", ea.t, "final time")->capture_default_str();
    evolve_cmd->add_option("--snapshots", ea.snapshots)->capture_default_str();
    evolve_cmd->add_option("--targets", ea.targets, "default or re:im,re:im,...")->capture_default_str();
    evolve_cmd->add_option("--dt", ea.dt, "RK4 step cap")->capture_default_str();
    evolve_cmd->add_option("--anchor", ea.anchor, "multiple-shooting chunk length")->capture_default_str();
    evolve_cmd->add_option("--jobs", ea.jobs)->capture_default_str();
    evolve_cmd->add_option("--out", ea.out, "output directory")->capture_default_str();
    evolve_cmd->add_flag("--svg", ea.svg, "also write distance.svg");

    VerifyArgs va;
    auto* verify_cmd = app.add_subcommand("verify", "run the acceptance criteria");
    verify_cmd->add_flag("--full", va.full, "stated protocol (long simulations)");
    verify_cmd->add_flag("--quick", va.quick, "shortened simulations (default)");
    verify_cmd->add_option("--seed", va.seed)->capture_default_str();
    verify_cmd->add_option("--only", va.only, "comma-separated criterion numbers");
    verify_cmd->add_option("--jobs", va.jobs)->capture_default_str();
    verify_cmd->add_option("--perturb-a-star", va.perturb_a_star, "mutation check: offset added to a*");
    verify_cmd->add_option("--out", va.out, "output directory")->capture_default_str();

    for (auto* sub : {density_cmd, sim_cmd, evolve_cmd, verify_cmd}) {
        sub->add_option("--config", config_path, "JSON file with option values");
        sub->add_flag("--dry-run", dry, "print the resolved configuration and write nothing");
    }

    std::vector<std::string> full = args;
    try {
        if (!args.empty()) {
            if (const auto path = find_config(args)) {
                const CLI::App* sub = app.get_subcommand_no_throw(args[0]);
                if (!sub) throw DomainError("--config must follow a subcommand");
                nlohmann::json j;
                try {
                    j = nlohmann::json::parse(read_file(*path));
                } catch (const nlohmann::json::exception& e) {
                    throw DomainError("config " + *path + ": " + e.what());
                }
                const auto extra = config_flags(j, sub);
                full.insert(full.begin() + 1, extra.begin(), extra.end());
            }
        }
        std::vector<std::string> reversed(full.rbegin(), full.rend());
        app.parse(std::move(reversed));
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << version_string() << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomain;
    }

    const bool seed_flag = has_flag(args, "--seed");
    try {
        if (density_cmd->parsed()) return cmd_density(da, args, dry, out);
        if (sim_cmd->parsed()) return cmd_simulate(sa, args, dry, seed_flag, out);
        if (evolve_cmd->parsed()) return cmd_evolve(ea, args, dry, out);
        if (verify_cmd->parsed()) return cmd_verify(va, args, dry, seed_flag, out);
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInternal;
}

}  // namespace rmnc
