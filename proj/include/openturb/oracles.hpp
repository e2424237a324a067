#pragma once

#include "openturb/params.hpp"

namespace openturb {

// Closed-form second moments of the phase-space distribution at time t.
struct Moments {
    double x2 = 0.0;
    double p2 = 0.0;
    double xp = 0.0;
};

// Undamped model:
//   <p^2> = <p0^2> + m^2 eps t
//   <x^2> = <x0^2> + <p0^2> t^2 / m^2 + eps t^3 / 3
//   <xp>  = <p0^2> t / m + m eps t^2 / 2
Moments moments_undamped(double t, const PhysicalParams& params,
                         const InitialState& init);

// Damped model (gamma = 0 reduces exactly to the undamped forms):
//   <p^2> = <p0^2> e^{-2 gamma t} + (m^2 eps / 2 gamma)(1 - e^{-2 gamma t})
//   <x^2> = <x0^2> + (<p0^2>/m^2 gamma^2)(1 - e^{-gamma t})^2
//           + (eps / 2 gamma^3) * B(gamma t)
// with the bracket B(a) = 2a - 3 + 4 e^{-a} - e^{-2a}.
Moments moments_damped(double t, const PhysicalParams& params,
                       const InitialState& init);

// B(a) above, evaluated without catastrophic cancellation for any a >= 0.
// B ~ 2a^3/3 as a -> 0 and ~ 2a - 3 as a -> infinity.
double ou_x2_bracket(double a);

// Small-gamma-t limit of the damped model; coincides with moments_undamped
// for every input (used as the turbulent-regime reference).
Moments short_time_asymptotics(double t, const PhysicalParams& params,
                               const InitialState& init);

// d<p^2>/dt at t = 0 for the damped model: m^2 eps - 2 gamma <p0^2>.
// Positive below the critical damping, negative above, zero exactly at it.
double p2_rate_at_zero(const PhysicalParams& params, const InitialState& init);

// gamma_c = m^2 eps / (2 <p0^2>); requires <p0^2> > 0.
double critical_damping(const PhysicalParams& params, double p0_sq);

// Kolmogorov-type closure constants: c2 = (1 + c1) / 2, so 2 c2 - c1 = 1
// identically and the stationary momentum variance c2 m^2 eps / gamma
// matches the damped oracle's t -> infinity limit when c2 = 1/2.
struct KolmogorovClosure {
    double c1 = 0.0;
    double c2 = 0.5;

    double stationary_p2(const PhysicalParams& params) const;
};

KolmogorovClosure kolmogorov_closure(double c1);

// Energy budget at one instant: injection m^2 eps, dissipation 2 gamma <p^2>,
// residual = observed d<p^2>/dt - (injection - dissipation).
struct EnergyBudget {
    double injection = 0.0;
    double dissipation = 0.0;
    double net = 0.0;
    double observed_rate = 0.0;
    double residual = 0.0;
};

EnergyBudget energy_budget(double p2, double observed_rate,
                           const PhysicalParams& params);

}  // namespace openturb
