#include "openturb/config.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include "openturb/csv.hpp"
#include "openturb/version.hpp"

namespace openturb {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad(const std::string& msg) {
    throw std::invalid_argument(msg);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        bad("config key '" + key + "': not a number: '" + value + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        if (!value.empty() && value[0] == '-') throw std::invalid_argument("");
        const auto v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument("");
        return v;
    } catch (...) {
        bad("config key '" + key + "': not a non-negative integer: '" + value +
            "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "1" || value == "true" || value == "yes") return true;
    if (value == "0" || value == "false" || value == "no") return false;
    bad("config key '" + key + "': expected 0/1/true/false, got '" + value +
        "'");
}

std::vector<double> parse_list(const std::string& key,
                               const std::string& value) {
    std::vector<double> out;
    std::string cur;
    std::istringstream in(value);
    while (std::getline(in, cur, ','))
        out.push_back(parse_double(key, trim(cur)));
    if (out.empty()) bad("config key '" + key + "': empty list");
    return out;
}

const std::set<std::string> kKnownKeys = {
    "mass", "epsilon", "gamma", "hbar", "lambda", "alpha", "k", "T",
    "x0_sq", "p0_sq",
    "n_traj", "dt", "t_final", "n_samples", "sample_times", "seed",
    "integrator", "damped",
    "fpe_x_min", "fpe_x_max", "fpe_p_min", "fpe_p_max", "fpe_nx", "fpe_np",
    "fpe_dt", "snapshot_every", "splitting",
    "windows", "out_dir",
};

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::string_view text) {
    KeyValueConfig kv;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            bad("config line " + std::to_string(line_no) +
                ": expected key = value, got '" + stripped + "'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            bad("config line " + std::to_string(line_no) + ": empty key");
        if (kv.get(key))
            bad("config line " + std::to_string(line_no) + ": duplicate key '" +
                key + "'");
        kv.set(key, value);
    }
    return kv;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
    for (auto& kvp : entries_) {
        if (kvp.first == key) {
            kvp.second = value;
            return;
        }
    }
    entries_.emplace_back(key, value);
}

void KeyValueConfig::erase(const std::string& key) {
    std::erase_if(entries_, [&](const auto& kvp) { return kvp.first == key; });
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
    for (const auto& kvp : entries_)
        if (kvp.first == key) return kvp.second;
    return std::nullopt;
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValueConfig& kv) {
    for (const auto& [key, value] : kv.entries())
        if (!kKnownKeys.count(key)) bad("unknown config key '" + key + "'");

    ExperimentConfig cfg;
    auto num = [&](const char* key, double fallback) {
        const auto v = kv.get(key);
        return v ? parse_double(key, *v) : fallback;
    };
    auto integer = [&](const char* key, std::uint64_t fallback) {
        const auto v = kv.get(key);
        return v ? parse_u64(key, *v) : fallback;
    };

    cfg.params.mass = num("mass", 1.0);
    cfg.params.hbar = num("hbar", 1.0);
    cfg.params.gamma = num("gamma", 0.0);

    const bool has_eps = kv.get("epsilon").has_value();
    const bool has_lambda = kv.get("lambda").has_value();
    const bool has_alpha = kv.get("alpha").has_value();
    const bool has_T = kv.get("T").has_value();
    const bool has_k = kv.get("k").has_value();
    const int n_specs = (has_eps ? 1 : 0) + ((has_lambda || has_alpha) ? 1 : 0) +
                        (has_T ? 1 : 0);
    if (n_specs != 1)
        bad("exactly one noise specification required: epsilon, lambda+alpha, "
            "or T (+k)");
    if ((has_lambda || has_alpha) && !(has_lambda && has_alpha))
        bad("lambda and alpha must be given together");
    if (has_k && !has_T) bad("config key 'k' requires 'T'");

    if (has_eps) {
        cfg.noise_spec = NoiseSpec::Direct;
        cfg.params.epsilon = num("epsilon", 0.0);
    } else if (has_lambda) {
        cfg.noise_spec = NoiseSpec::Grw;
        cfg.grw.lambda = num("lambda", 0.0);
        cfg.grw.alpha = num("alpha", 0.0);
        cfg.params.epsilon =
            epsilon_from_grw(cfg.grw, cfg.params.hbar, cfg.params.mass);
    } else {
        cfg.noise_spec = NoiseSpec::Thermal;
        if (!kv.get("gamma"))
            bad("thermal noise (key 'T') requires the damping key 'gamma'");
        cfg.thermal.k = num("k", 1.0);
        cfg.thermal.T = num("T", 0.0);
        cfg.params.epsilon = epsilon_from_thermal(cfg.thermal, cfg.params.gamma,
                                                  cfg.params.mass);
    }

    cfg.init.x0_sq = num("x0_sq", 0.0);
    cfg.init.p0_sq = num("p0_sq", 0.0);

    cfg.n_traj = integer("n_traj", cfg.n_traj);
    cfg.dt = num("dt", 0.0);
    cfg.t_final = num("t_final", cfg.t_final);
    cfg.n_samples = integer("n_samples", cfg.n_samples);
    if (const auto v = kv.get("sample_times"))
        cfg.sample_times = parse_list("sample_times", *v);
    cfg.seed = integer("seed", cfg.seed);

    if (const auto v = kv.get("integrator")) {
        if (*v == "exact_ou")
            cfg.integrator = Integrator::ExactOU;
        else if (*v == "euler_maruyama")
            cfg.integrator = Integrator::EulerMaruyama;
        else
            bad("config key 'integrator': expected exact_ou or euler_maruyama, "
                "got '" + *v + "'");
    }
    if (const auto v = kv.get("damped")) cfg.damped = parse_bool("damped", *v);

    cfg.fpe_geom.x_min = num("fpe_x_min", cfg.fpe_geom.x_min);
    cfg.fpe_geom.x_max = num("fpe_x_max", cfg.fpe_geom.x_max);
    cfg.fpe_geom.p_min = num("fpe_p_min", cfg.fpe_geom.p_min);
    cfg.fpe_geom.p_max = num("fpe_p_max", cfg.fpe_geom.p_max);
    cfg.fpe_geom.nx = integer("fpe_nx", cfg.fpe_geom.nx);
    cfg.fpe_geom.np = integer("fpe_np", cfg.fpe_geom.np);
    cfg.fpe_dt = num("fpe_dt", 0.0);
    cfg.snapshot_every = integer("snapshot_every", 0);
    if (const auto v = kv.get("splitting")) {
        if (*v == "lie")
            cfg.splitting = Splitting::Lie;
        else if (*v == "strang")
            cfg.splitting = Splitting::Strang;
        else
            bad("config key 'splitting': expected lie or strang, got '" + *v +
                "'");
    }

    if (const auto v = kv.get("windows")) {
        std::istringstream in(*v);
        std::string item;
        while (std::getline(in, item, ',')) {
            const auto colon = item.find(':');
            if (colon == std::string::npos)
                bad("config key 'windows': expected start:end pairs, got '" +
                    item + "'");
            const double a = parse_double("windows", trim(item.substr(0, colon)));
            const double b = parse_double("windows", trim(item.substr(colon + 1)));
            if (!(a > 0.0 && b > a))
                bad("config key 'windows': need 0 < start < end");
            cfg.windows.emplace_back(a, b);
        }
        if (cfg.windows.empty()) bad("config key 'windows': empty list");
    }
    if (const auto v = kv.get("out_dir")) cfg.out_dir = *v;

    // Cross-field validation, wrapped so every violation is the same
    // exception type the CLI maps to the config error exit code.
    try {
        cfg.params.validate();
        cfg.init.validate();
        cfg.fpe_geom.validate();
    } catch (const std::domain_error& e) {
        bad(e.what());
    }
    if (!(std::isfinite(cfg.t_final) && cfg.t_final > 0.0))
        bad("config key 't_final': must be positive");
    if (cfg.n_traj < 2) bad("config key 'n_traj': must be >= 2");
    if (cfg.sample_times.empty() && cfg.n_samples == 0)
        bad("config key 'n_samples': must be >= 1");
    if (!(cfg.dt >= 0.0) || !std::isfinite(cfg.dt))
        bad("config key 'dt': must be >= 0");
    if (!(cfg.fpe_dt >= 0.0) || !std::isfinite(cfg.fpe_dt))
        bad("config key 'fpe_dt': must be >= 0");
    if (!cfg.sample_times.empty()) {
        double prev = -1.0;
        for (double t : cfg.sample_times) {
            if (!(std::isfinite(t) && t >= 0.0 && t > prev))
                bad("config key 'sample_times': must be non-negative and "
                    "strictly increasing");
            prev = t;
        }
        if (cfg.sample_times.back() > cfg.t_final * (1.0 + 1e-12))
            bad("config key 'sample_times': last sample exceeds t_final");
    }

    // Fail now, not at run time, if the requested step cannot satisfy the
    // sampling constraint.
    try {
        cfg.ensemble_config().validate();
    } catch (const std::domain_error& e) {
        bad(e.what());
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::from_text(std::string_view text) {
    return from_kv(KeyValueConfig::parse(text));
}

std::vector<double> ExperimentConfig::resolved_sample_times() const {
    if (!sample_times.empty()) return sample_times;
    std::vector<double> out(n_samples);
    for (std::uint64_t k = 1; k <= n_samples; ++k)
        out[k - 1] = t_final * static_cast<double>(k) /
                     static_cast<double>(n_samples);
    return out;
}

double ExperimentConfig::effective_dt() const {
    if (dt > 0.0) return dt;
    // Default 1e-3 * min(1/gamma, 1), further capped by the smallest sample
    // gap so the schedule constraint always holds.
    double h = 1e-3 * (params.gamma > 0.0 ? std::min(1.0 / params.gamma, 1.0)
                                          : 1.0);
    const auto samples = resolved_sample_times();
    double gap = samples.front() > 0.0 ? samples.front()
                                       : std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < samples.size(); ++i)
        gap = std::min(gap, samples[i] - samples[i - 1]);
    if (std::isfinite(gap)) h = std::min(h, gap);
    return h;
}

EnsembleConfig ExperimentConfig::ensemble_config() const {
    EnsembleConfig ec;
    ec.n_trajectories = n_traj;
    ec.dt = effective_dt();
    ec.t_final = t_final;
    ec.sample_times = resolved_sample_times();
    ec.seed = seed;
    ec.integrator = integrator;
    return ec;
}

KeyValueConfig ExperimentConfig::to_kv() const {
    KeyValueConfig kv;
    auto putd = [&](const char* key, double v) { kv.set(key, format_full(v)); };
    auto puti = [&](const char* key, std::uint64_t v) {
        kv.set(key, std::to_string(v));
    };
    putd("mass", params.mass);
    putd("hbar", params.hbar);
    switch (noise_spec) {
        case NoiseSpec::Direct:
            putd("epsilon", params.epsilon);
            break;
        case NoiseSpec::Grw:
            putd("lambda", grw.lambda);
            putd("alpha", grw.alpha);
            break;
        case NoiseSpec::Thermal:
            putd("k", thermal.k);
            putd("T", thermal.T);
            break;
    }
    putd("gamma", params.gamma);
    putd("x0_sq", init.x0_sq);
    putd("p0_sq", init.p0_sq);
    puti("n_traj", n_traj);
    putd("dt", dt);
    putd("t_final", t_final);
    if (!sample_times.empty()) {
        std::string list;
        for (std::size_t i = 0; i < sample_times.size(); ++i) {
            if (i) list += ',';
            list += format_full(sample_times[i]);
        }
        kv.set("sample_times", list);
    } else {
        puti("n_samples", n_samples);
    }
    puti("seed", seed);
    kv.set("integrator", integrator == Integrator::ExactOU ? "exact_ou"
                                                           : "euler_maruyama");
    if (damped) kv.set("damped", *damped ? "1" : "0");
    putd("fpe_x_min", fpe_geom.x_min);
    putd("fpe_x_max", fpe_geom.x_max);
    putd("fpe_p_min", fpe_geom.p_min);
    putd("fpe_p_max", fpe_geom.p_max);
    puti("fpe_nx", fpe_geom.nx);
    puti("fpe_np", fpe_geom.np);
    putd("fpe_dt", fpe_dt);
    puti("snapshot_every", snapshot_every);
    kv.set("splitting", splitting == Splitting::Lie ? "lie" : "strang");
    if (!windows.empty()) {
        std::string list;
        for (std::size_t i = 0; i < windows.size(); ++i) {
            if (i) list += ',';
            list += format_full(windows[i].first) + ':' +
                    format_full(windows[i].second);
        }
        kv.set("windows", list);
    }
    kv.set("out_dir", out_dir);
    return kv;
}

std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string manifest_text(const ExperimentConfig& cfg,
                          std::string_view subcommand) {
    const KeyValueConfig kv = cfg.to_kv();  // keep alive across the loop
    std::string body;
    for (const auto& [key, value] : kv.entries())
        body += key + " = " + value + "\n";

    char hash[20];
    std::snprintf(hash, sizeof hash, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(body)));

    std::string out;
    out += "# openturb " + std::string(kVersion) + " manifest\n";
    out += "# subcommand: " + std::string(subcommand) + "\n";
    out += "# config_hash: " + std::string(hash) + "\n";
    if (cfg.noise_spec != NoiseSpec::Direct)
        out += "# derived epsilon = " + format_full(cfg.params.epsilon) + "\n";
    out += "# effective damping: " +
           std::string(cfg.damped_effective() ? "on" : "off") + "\n";
    out += body;
    return out;
}

}  // namespace openturb
