#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "openturb/acceptance.hpp"
#include "openturb/analysis.hpp"
#include "openturb/config.hpp"
#include "openturb/csv.hpp"
#include "openturb/fpe.hpp"
#include "openturb/oracles.hpp"
#include "openturb/sde.hpp"
#include "openturb/version.hpp"

namespace fs = std::filesystem;
using namespace openturb;

namespace {

constexpr int kExitRunFailure = 1;
constexpr int kExitBadConfig = 2;

// Command-line overrides layered on top of the config file before
// validation, so violated invariants are reported exactly as if the value
// had been written in the file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> n_traj;
    std::optional<double> dt;
    std::optional<double> t_final;
    std::optional<double> gamma;
    std::optional<double> epsilon;
    std::optional<bool> damped;
    std::optional<std::string> integrator;
    std::optional<std::uint64_t> snapshot_every;
    std::optional<std::string> out;

    void apply(KeyValueConfig& kv) const {
        if (seed) kv.set("seed", std::to_string(*seed));
        if (n_traj) kv.set("n_traj", std::to_string(*n_traj));
        if (dt) kv.set("dt", format_full(*dt));
        if (t_final) kv.set("t_final", format_full(*t_final));
        if (gamma) kv.set("gamma", format_full(*gamma));
        if (epsilon) {
            // --epsilon selects the direct noise specification outright
            kv.erase("lambda");
            kv.erase("alpha");
            kv.erase("k");
            kv.erase("T");
            kv.set("epsilon", format_full(*epsilon));
        }
        if (damped) kv.set("damped", *damped ? "1" : "0");
        if (integrator) kv.set("integrator", *integrator);
        if (snapshot_every)
            kv.set("snapshot_every", std::to_string(*snapshot_every));
        if (out) kv.set("out_dir", *out);
    }
};

void add_override_flags(CLI::App& cmd, Overrides& ov) {
    cmd.add_option("--seed", ov.seed, "RNG master seed");
    cmd.add_option("--n-traj", ov.n_traj, "trajectory count");
    cmd.add_option("--dt", ov.dt, "integrator step bound");
    cmd.add_option("--t-final", ov.t_final, "end time");
    cmd.add_option("--gamma", ov.gamma, "friction rate");
    cmd.add_option("--epsilon", ov.epsilon,
                   "direct noise strength (replaces lambda/alpha or k/T)");
    cmd.add_flag(
        "--damped,!--undamped",
        [&ov](std::int64_t count) { ov.damped = count > 0; },
        "force the damped (or undamped) model");
    cmd.add_option("--integrator", ov.integrator, "exact_ou | euler_maruyama");
    cmd.add_option("--snapshot-every", ov.snapshot_every,
                   "FPE steps between grid snapshots (0: final only)");
    cmd.add_option("--out", ov.out, "output directory");
}

ExperimentConfig load_config(const std::string& path, const Overrides& ov) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::runtime_error& e) {
        throw std::invalid_argument(e.what());
    }
    KeyValueConfig kv = KeyValueConfig::parse(text);
    ov.apply(kv);
    return ExperimentConfig::from_kv(kv);
}

fs::path prepare_out_dir(const ExperimentConfig& cfg) {
    fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    return dir;
}

void write_manifest(const ExperimentConfig& cfg, const fs::path& dir,
                    std::string_view subcommand,
                    const std::vector<std::string>& notes = {}) {
    std::string text = manifest_text(cfg, subcommand);
    for (const auto& n : notes) text += "# note: " + n + "\n";
    write_text_file(dir / "manifest.txt", text);
}

int run_simulate(const ExperimentConfig& cfg) {
    const fs::path dir = prepare_out_dir(cfg);
    const EnsembleConfig ec = cfg.ensemble_config();
    const EnsembleMoments series = simulate_ensemble(
        ec, cfg.params, cfg.init, cfg.damped_effective());
    write_text_file(dir / "moments.csv", moments_csv(series));
    const OracleTable table = tabulate_oracle(
        series.times, cfg.damped_effective(), cfg.params, cfg.init);
    write_text_file(dir / "oracle.csv", oracle_table_csv(table));
    write_manifest(cfg, dir, "simulate");
    std::cout << "wrote " << (dir / "moments.csv").string() << " ("
              << series.times.size() << " samples, N = "
              << series.n_trajectories << ")\n"
              << "wrote " << (dir / "oracle.csv").string() << "\n"
              << "wrote " << (dir / "manifest.txt").string() << "\n";
    return 0;
}

int run_oracle_table(const ExperimentConfig& cfg) {
    const fs::path dir = prepare_out_dir(cfg);
    const std::vector<double> times = cfg.resolved_sample_times();
    const OracleTable table =
        tabulate_oracle(times, cfg.damped_effective(), cfg.params, cfg.init);
    write_text_file(dir / "oracle.csv", oracle_table_csv(table));
    write_manifest(cfg, dir, "oracle-table");
    std::cout << "wrote " << (dir / "oracle.csv").string() << " ("
              << times.size() << " rows)\n"
              << "wrote " << (dir / "manifest.txt").string() << "\n";
    return 0;
}

std::string snapshot_stem(std::size_t step) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%06zu", step);
    return buf;
}

int run_fpe(ExperimentConfig cfg) {
    const fs::path dir = prepare_out_dir(cfg);

    // A point-mass initial condition cannot be represented on the grid;
    // widen it to a narrow Gaussian tied to the resolution.
    std::vector<std::string> notes;
    if (cfg.init.x0_sq == 0.0) {
        const double s = 3.0 * cfg.fpe_geom.dx();
        cfg.init.x0_sq = s * s;
        notes.push_back("x0_sq = 0 regularised to (3 dx)^2 = " +
                        format_full(cfg.init.x0_sq));
    }
    if (cfg.init.p0_sq == 0.0) {
        const double s = 3.0 * cfg.fpe_geom.dp();
        cfg.init.p0_sq = s * s;
        notes.push_back("p0_sq = 0 regularised to (3 dp)^2 = " +
                        format_full(cfg.init.p0_sq));
    }

    const bool damped = cfg.damped_effective();
    const double cap =
        fpe_stability_limits(cfg.fpe_geom, cfg.params, damped).max_allowed();
    double dt = cfg.fpe_dt;
    if (dt <= 0.0) {
        auto n = static_cast<std::size_t>(std::ceil(cfg.t_final / cap - 1e-12));
        if (n == 0) n = 1;
        while (cfg.t_final / static_cast<double>(n) > cap) ++n;
        dt = cfg.t_final / static_cast<double>(n);
    } else if (dt > cap) {
        throw std::invalid_argument(
            "fpe_dt = " + format_full(dt) +
            " exceeds the stability ceiling " + format_full(cap));
    }
    const auto n_steps =
        static_cast<std::size_t>(std::llround(std::ceil(cfg.t_final / dt - 1e-9)));

    PhaseSpaceGrid grid = gaussian_wigner(cfg.init, cfg.fpe_geom);

    EnsembleMoments rows;  // grid moments; standard errors are zero
    rows.n_trajectories = 0;
    auto record = [&](double t) {
        const GridMoments gm = grid_moments(grid);
        rows.times.push_back(t);
        rows.x2.push_back(gm.x2);
        rows.x2_se.push_back(0.0);
        rows.p2.push_back(gm.p2);
        rows.p2_se.push_back(0.0);
        rows.xp.push_back(gm.xp);
        rows.xp_se.push_back(0.0);
    };
    auto snapshot = [&](std::size_t step) {
        const std::string stem = snapshot_stem(step);
        write_text_file(dir / (stem + ".csv"), grid_csv(grid));
        write_grid_binary(dir / (stem + ".otfp"), grid);
    };

    record(0.0);
    if (cfg.snapshot_every > 0) snapshot(0);
    std::size_t done = 0;
    FpeRunStats stats{};
    while (done < n_steps) {
        std::size_t chunk = cfg.snapshot_every > 0
                                ? std::min<std::size_t>(cfg.snapshot_every,
                                                        n_steps - done)
                                : n_steps - done;
        const FpeRunStats s =
            evolve_fpe(grid, cfg.params, dt, chunk, damped, cfg.splitting);
        stats.mass_deficit = s.mass_deficit;
        stats.min_w = done == 0 ? s.min_w : std::min(stats.min_w, s.min_w);
        done += chunk;
        record(static_cast<double>(done) * dt);
        if (cfg.snapshot_every > 0 && done < n_steps) snapshot(done);
    }
    snapshot(n_steps);
    write_text_file(dir / "fpe_moments.csv", moments_csv(rows));
    write_manifest(cfg, dir, "fpe", notes);

    std::cout << "evolved " << n_steps << " steps of dt = " << format_full(dt)
              << " (" << (damped ? "damped" : "undamped") << ")\n"
              << "mass deficit " << format_full(stats.mass_deficit)
              << ", min W " << format_full(stats.min_w) << "\n"
              << "wrote " << (dir / "fpe_moments.csv").string() << ", "
              << (dir / (snapshot_stem(n_steps) + ".{csv,otfp}")).string()
              << "\n";
    return 0;
}

bool starts_with(const std::string& text, std::string_view prefix) {
    return text.rfind(prefix, 0) == 0;
}

int run_analyze(const ExperimentConfig& cfg, const std::string& csv_path) {
    std::string text;
    try {
        text = read_text_file(csv_path);
    } catch (const std::runtime_error& e) {
        throw std::invalid_argument(e.what());
    }

    EnsembleMoments series;
    if (starts_with(text, "t,p2_exact,x2_exact")) {
        const OracleTable table = parse_oracle_table_csv(text);
        series.times = table.times;
        series.p2 = table.p2;
        series.x2 = table.x2;
        series.x2_se.assign(series.times.size(), 0.0);
        series.p2_se.assign(series.times.size(), 0.0);
        series.xp.assign(series.times.size(), 0.0);
        series.xp_se.assign(series.times.size(), 0.0);
        series.n_trajectories = 0;
    } else {
        series = parse_moments_csv(text);
    }
    if (series.times.empty())
        throw std::invalid_argument("no samples in " + csv_path);

    std::vector<std::pair<double, double>> windows = cfg.windows;
    if (windows.empty())
        windows.emplace_back(series.times.front(), series.times.back());

    const fs::path dir = prepare_out_dir(cfg);
    std::vector<RegimeReport> reports;
    reports.reserve(windows.size());
    for (const auto& [a, b] : windows) {
        const RegimeReport r =
            classify_regime(series, cfg.params, cfg.init, a, b);
        std::cout << "window [" << format_full(a) << ", " << format_full(b)
                  << "]: " << to_string(r.classification) << " (exponent "
                  << r.exponent << " +/- " << r.exponent_se << ")"
                  << (r.equilibrium ? ", equilibrium" : "")
                  << ", crossover t = " << r.crossover_time << "\n";
        reports.push_back(r);
    }
    write_text_file(dir / "regimes.csv", regime_csv(reports));

    const DeviationReport dev = compare_to_oracle(
        series, cfg.damped_effective(), cfg.params, cfg.init);
    write_text_file(dir / "deviation.csv", deviation_csv(dev));
    std::cout << "oracle deviation: max |z| = " << dev.max_abs_z << ", "
              << 100.0 * dev.fraction_within_3 << "% within 3 SE\n";

    const auto energy = energy_rate_series(series, cfg.params);
    write_text_file(dir / "energy.csv", energy_csv(energy));

    write_manifest(cfg, dir, "analyze");
    std::cout << "wrote " << (dir / "regimes.csv").string() << ", "
              << (dir / "deviation.csv").string() << ", "
              << (dir / "energy.csv").string() << "\n";
    return 0;
}

int run_check(const std::string& config_path, const Overrides& ov) {
    if (!config_path.empty()) {
        const ExperimentConfig cfg = load_config(config_path, ov);
        const fs::path dir = prepare_out_dir(cfg);
        write_manifest(cfg, dir, "check");
    }
    const auto results = run_acceptance(std::cout);
    return all_passed(results) ? 0 : kExitRunFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"openturb " + std::string(kVersion) +
                 " - decoherence-driven diffusion toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string csv_path;
    Overrides ov;

    CLI::App* sim = app.add_subcommand(
        "simulate", "integrate an SDE ensemble and write moment CSVs");
    sim->add_option("config", config_path, "key = value config file")
        ->required();
    add_override_flags(*sim, ov);

    CLI::App* fpe = app.add_subcommand(
        "fpe", "evolve the phase-space density and write grid snapshots");
    fpe->add_option("config", config_path, "key = value config file")
        ->required();
    add_override_flags(*fpe, ov);

    CLI::App* oracle = app.add_subcommand(
        "oracle-table", "tabulate the closed-form moments");
    oracle->add_option("config", config_path, "key = value config file")
        ->required();
    add_override_flags(*oracle, ov);

    CLI::App* analyze = app.add_subcommand(
        "analyze", "classify regimes and check budgets on an existing CSV");
    analyze->add_option("config", config_path, "key = value config file")
        ->required();
    analyze->add_option("csv", csv_path, "moments or oracle-table CSV")
        ->required();
    add_override_flags(*analyze, ov);

    CLI::App* check = app.add_subcommand(
        "check", "run the full acceptance suite (exit 0 iff all pass)");
    check->add_option("config", config_path,
                      "optional config; validated and recorded only");
    add_override_flags(*check, ov);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(load_config(config_path, ov));
        if (fpe->parsed()) return run_fpe(load_config(config_path, ov));
        if (oracle->parsed())
            return run_oracle_table(load_config(config_path, ov));
        if (analyze->parsed())
            return run_analyze(load_config(config_path, ov), csv_path);
        if (check->parsed()) return run_check(config_path, ov);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitBadConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRunFailure;
    }
    return kExitBadConfig;
}
