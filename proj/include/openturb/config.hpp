#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "openturb/fpe.hpp"
#include "openturb/params.hpp"
#include "openturb/sde.hpp"

namespace openturb {

// Flat key = value configuration text; '#' starts a comment, blank lines are
// ignored, keys may appear at most once.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::string_view text);

    void set(const std::string& key, const std::string& value);
    void erase(const std::string& key);
    std::optional<std::string> get(const std::string& key) const;
    const std::vector<std::pair<std::string, std::string>>& entries() const {
        return entries_;
    }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

enum class NoiseSpec {
    Direct,   // epsilon given explicitly
    Grw,      // epsilon = hbar^2 lambda alpha / (2 m^2)
    Thermal,  // epsilon = 2 gamma k T / m
};

// Fully resolved experiment description shared by every subcommand.
struct ExperimentConfig {
    PhysicalParams params;  // epsilon already resolved from the noise spec
    InitialState init;
    NoiseSpec noise_spec = NoiseSpec::Direct;
    GrwParams grw;          // meaningful when noise_spec == Grw
    ThermalParams thermal;  // meaningful when noise_spec == Thermal

    std::uint64_t n_traj = 10000;
    double dt = 0.0;  // 0: defaults to a tenth of the smallest sample gap
    double t_final = 1.0;
    std::uint64_t n_samples = 50;       // used when sample_times is empty
    std::vector<double> sample_times;   // explicit grid overrides n_samples
    std::uint64_t seed = 1;
    Integrator integrator = Integrator::ExactOU;
    std::optional<bool> damped;  // unset: damped iff gamma > 0

    GridGeometry fpe_geom;
    double fpe_dt = 0.0;  // 0: auto from the stability ceilings
    std::uint64_t snapshot_every = 0;  // steps between snapshots; 0 = final only
    Splitting splitting = Splitting::Lie;

    std::vector<std::pair<double, double>> windows;  // analysis fit windows
    std::string out_dir = "out";

    // Throws std::invalid_argument naming the offending key on any violation.
    static ExperimentConfig from_kv(const KeyValueConfig& kv);
    static ExperimentConfig from_text(std::string_view text);

    // Canonical resolved form; parsing it again reproduces this config.
    KeyValueConfig to_kv() const;

    bool damped_effective() const { return damped.value_or(params.gamma > 0.0); }
    double effective_dt() const;
    std::vector<double> resolved_sample_times() const;
    EnsembleConfig ensemble_config() const;
};

std::uint64_t fnv1a64(std::string_view data);

// Canonical config text plus provenance comments (derived epsilon, config
// hash, tool/version, subcommand). Itself a valid config: rerunning the tool
// on a manifest reproduces the run byte for byte.
std::string manifest_text(const ExperimentConfig& cfg,
                          std::string_view subcommand);

}  // namespace openturb
