#include "openturb/sde.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "openturb/parallel.hpp"
#include "openturb/rng.hpp"

namespace openturb {

ParticleState step_undamped(ParticleState s, double dt, double noise,
                            const PhysicalParams& params) {
    const double m2eps = params.mass * params.mass * params.epsilon;
    const double sigma = std::sqrt(m2eps * dt);
    s.x += s.p * (dt / params.mass);
    s.p += sigma * noise;
    s.t += dt;
    return s;
}

ParticleState step_damped(ParticleState s, double dt, double noise,
                          const PhysicalParams& params, Integrator integrator) {
    const double m2eps = params.mass * params.mass * params.epsilon;
    const double g = params.gamma;
    s.x += s.p * (dt / params.mass);
    if (integrator == Integrator::ExactOU && g > 0.0) {
        const double decay = std::exp(-g * dt);
        const double sigma =
            std::sqrt(m2eps * (-std::expm1(-2.0 * g * dt)) / (2.0 * g));
        s.p = s.p * decay + sigma * noise;
    } else {
        const double gdt = g * dt;
        const double sigma = std::sqrt(m2eps * dt);
        s.p += -gdt * s.p + sigma * noise;
    }
    s.t += dt;
    return s;
}

void EnsembleConfig::validate() const {
    if (n_trajectories < 2)
        throw std::domain_error(
            "n_trajectories must be >= 2 (standard errors undefined otherwise)");
    if (!(std::isfinite(dt) && dt > 0.0))
        throw std::domain_error("dt must be positive and finite");
    if (!(std::isfinite(t_final) && t_final > 0.0))
        throw std::domain_error("t_final must be positive and finite");
    if (sample_times.empty())
        throw std::domain_error("sample_times must be non-empty");
    double prev = 0.0;
    bool first = true;
    for (double t : sample_times) {
        if (!(std::isfinite(t) && t >= 0.0))
            throw std::domain_error("sample times must be >= 0 and finite");
        if (!first && t <= prev)
            throw std::domain_error("sample times must be strictly increasing");
        // dt may not straddle a sample gap, otherwise two nominally equal
        // step sizes would differ between neighbouring intervals.
        const double gap = first ? t : t - prev;
        if (gap > 0.0 && dt > gap * (1.0 + 1e-9))
            throw std::domain_error(
                "dt must not exceed the smallest sample spacing");
        prev = t;
        first = false;
    }
    if (sample_times.back() > t_final * (1.0 + 1e-12))
        throw std::domain_error("sample times must lie in [0, t_final]");
}

namespace {

// Flattened integration schedule: per-step sizes plus, after each step, the
// index of the sample slot to record (or -1).
struct StepPlan {
    std::vector<double> step_sizes;
    std::vector<int> record_after;
    bool record_at_start = false;
};

StepPlan build_plan(const EnsembleConfig& cfg) {
    StepPlan plan;
    double prev = 0.0;
    for (std::size_t k = 0; k < cfg.sample_times.size(); ++k) {
        const double target = cfg.sample_times[k];
        if (k == 0 && target == 0.0) {
            plan.record_at_start = true;
            continue;
        }
        const double span = target - prev;
        const auto n_sub = static_cast<std::size_t>(
            std::max(1.0, std::ceil(span / cfg.dt - 1e-9)));
        const double h = span / static_cast<double>(n_sub);
        for (std::size_t s = 0; s < n_sub; ++s) {
            plan.step_sizes.push_back(h);
            plan.record_after.push_back(s + 1 == n_sub ? static_cast<int>(k)
                                                       : -1);
        }
        prev = target;
    }
    return plan;
}

struct StepFactors {
    double drift_x;  // h / m
    double decay;    // momentum multiplier
    double gdt;      // gamma * h (EulerMaruyama drift)
    double sigma;    // noise amplitude
};

constexpr std::size_t kBlock = 1024;

struct BlockSums {
    std::vector<double> x2, p2, xp;    // running sums per sample slot
    std::vector<double> x4, p4, xp2;   // sums of squares for the SE
};

}  // namespace

EnsembleMoments simulate_ensemble(const EnsembleConfig& cfg,
                                  const PhysicalParams& params,
                                  const InitialState& init, bool damped,
                                  unsigned workers) {
    cfg.validate();
    params.validate();
    init.validate();
    if (damped && cfg.integrator == Integrator::EulerMaruyama &&
        cfg.dt * params.gamma > 0.1)
        throw std::runtime_error(
            "Euler-Maruyama unstable: dt * gamma > 0.1; reduce dt or use the "
            "exact integrator");

    const StepPlan plan = build_plan(cfg);
    const std::size_t n_steps = plan.step_sizes.size();
    const std::size_t n_samples = cfg.sample_times.size();

    // Pre-resolve per-step update factors; identical arithmetic to
    // step_undamped / step_damped so single-step and ensemble paths agree.
    const double m2eps = params.mass * params.mass * params.epsilon;
    const double g = damped ? params.gamma : 0.0;
    const bool exact = !damped || cfg.integrator == Integrator::ExactOU;
    std::vector<StepFactors> factors(n_steps);
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double h = plan.step_sizes[k];
        StepFactors f{};
        f.drift_x = h / params.mass;
        if (exact && g > 0.0) {
            f.decay = std::exp(-g * h);
            f.sigma = std::sqrt(m2eps * (-std::expm1(-2.0 * g * h)) / (2.0 * g));
            f.gdt = 0.0;
        } else {
            f.decay = 1.0;
            f.gdt = g * h;
            f.sigma = std::sqrt(m2eps * h);
        }
        factors[k] = f;
    }

    const double x0_amp = std::sqrt(init.x0_sq);
    const double p0_amp = std::sqrt(init.p0_sq);
    const std::size_t n_blocks = (cfg.n_trajectories + kBlock - 1) / kBlock;
    std::vector<BlockSums> blocks(n_blocks);

    auto run_block = [&](std::size_t b) {
        BlockSums sums;
        sums.x2.assign(n_samples, 0.0);
        sums.p2.assign(n_samples, 0.0);
        sums.xp.assign(n_samples, 0.0);
        sums.x4.assign(n_samples, 0.0);
        sums.p4.assign(n_samples, 0.0);
        sums.xp2.assign(n_samples, 0.0);
        const std::uint64_t lo = b * kBlock;
        const std::uint64_t hi =
            std::min<std::uint64_t>(lo + kBlock, cfg.n_trajectories);
        for (std::uint64_t traj = lo; traj < hi; ++traj) {
            NormalStream noise(cfg.seed, traj);
            double x = x0_amp * noise.next();
            double p = p0_amp * noise.next();
            auto record = [&](std::size_t slot) {
                const double xx = x * x, pp = p * p, xph = x * p;
                sums.x2[slot] += xx;
                sums.p2[slot] += pp;
                sums.xp[slot] += xph;
                sums.x4[slot] += xx * xx;
                sums.p4[slot] += pp * pp;
                sums.xp2[slot] += xph * xph;
            };
            if (plan.record_at_start) record(0);
            for (std::size_t k = 0; k < n_steps; ++k) {
                const StepFactors& f = factors[k];
                const double n = noise.next();
                x += p * f.drift_x;
                if (exact)
                    p = p * f.decay + f.sigma * n;
                else
                    p += -f.gdt * p + f.sigma * n;
                if (plan.record_after[k] >= 0)
                    record(static_cast<std::size_t>(plan.record_after[k]));
            }
        }
        blocks[b] = std::move(sums);
    };

    if (workers == 0) workers = thread_budget();
    {
        ThreadPool pool(workers);
        pool.run(n_blocks, run_block);
    }

    // Merge in block order: summation order is independent of scheduling.
    EnsembleMoments out;
    out.times = cfg.sample_times;
    out.n_trajectories = cfg.n_trajectories;
    out.x2.assign(n_samples, 0.0);
    out.p2.assign(n_samples, 0.0);
    out.xp.assign(n_samples, 0.0);
    out.x2_se.assign(n_samples, 0.0);
    out.p2_se.assign(n_samples, 0.0);
    out.xp_se.assign(n_samples, 0.0);
    std::vector<double> x4(n_samples, 0.0), p4(n_samples, 0.0),
        xp2(n_samples, 0.0);
    for (const BlockSums& b : blocks) {
        for (std::size_t s = 0; s < n_samples; ++s) {
            out.x2[s] += b.x2[s];
            out.p2[s] += b.p2[s];
            out.xp[s] += b.xp[s];
            x4[s] += b.x4[s];
            p4[s] += b.p4[s];
            xp2[s] += b.xp2[s];
        }
    }
    const auto n = static_cast<double>(cfg.n_trajectories);
    auto finalize = [&](std::vector<double>& mean, std::vector<double>& se,
                        const std::vector<double>& sq) {
        for (std::size_t s = 0; s < n_samples; ++s) {
            const double m = mean[s] / n;
            double var = 0.0;
            if (cfg.n_trajectories > 1)
                var = std::max(0.0, (sq[s] - n * m * m) / (n - 1.0));
            mean[s] = m;
            se[s] = std::sqrt(var / n);
        }
    };
    finalize(out.x2, out.x2_se, x4);
    finalize(out.p2, out.p2_se, p4);
    finalize(out.xp, out.xp_se, xp2);
    return out;
}

}  // namespace openturb
