#pragma once

#include <cstdint>
#include <vector>

#include "openturb/params.hpp"

namespace openturb {

enum class Integrator {
    ExactOU,        // exact one-step OU update, no timestep restriction
    EulerMaruyama,  // explicit scheme, rejected when dt * gamma > 0.1
};

struct ParticleState {
    double x = 0.0;
    double p = 0.0;
    double t = 0.0;
};

// One Ito step of the undamped model:
//   x' = x + (p/m) dt   (pre-step momentum)
//   p' = p + sqrt(m^2 eps dt) * noise
ParticleState step_undamped(ParticleState s, double dt, double noise,
                            const PhysicalParams& params);

// One Ito step of the damped model. ExactOU uses the exact OU transition
//   p' = p e^{-gamma dt} + sqrt(m^2 eps (1 - e^{-2 gamma dt}) / (2 gamma)) * noise
// while EulerMaruyama uses p' = p - gamma p dt + sqrt(m^2 eps dt) * noise.
// Position always advances with the pre-step momentum; gamma -> 0 reduces
// continuously to the undamped step.
ParticleState step_damped(ParticleState s, double dt, double noise,
                          const PhysicalParams& params, Integrator integrator);

struct EnsembleConfig {
    std::uint64_t n_trajectories = 0;  // >= 2 so standard errors exist
    double dt = 0.0;                   // upper bound on the internal step
    double t_final = 0.0;
    std::vector<double> sample_times;  // strictly increasing, in [0, t_final]
    std::uint64_t seed = 0;
    Integrator integrator = Integrator::ExactOU;

    void validate() const;
};

// Ensemble second moments with standard errors (sample variance of the
// squared quantity across trajectories, divided by N).
struct EnsembleMoments {
    std::vector<double> times;
    std::vector<double> x2, x2_se;
    std::vector<double> p2, p2_se;
    std::vector<double> xp, xp_se;
    std::uint64_t n_trajectories = 0;
};

// Integrate n_trajectories independent trajectories and accumulate moments
// at the requested sample times. Trajectories are processed in fixed blocks
// of 1024 with per-block partial sums merged in block order, so the result
// is bit-identical for any worker count. workers = 0 means thread_budget().
EnsembleMoments simulate_ensemble(const EnsembleConfig& cfg,
                                  const PhysicalParams& params,
                                  const InitialState& init, bool damped,
                                  unsigned workers = 0);

}  // namespace openturb
