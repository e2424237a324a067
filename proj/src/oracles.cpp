#include "openturb/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace openturb {

namespace {

void require_time(double t) {
    if (!(std::isfinite(t) && t >= 0.0))
        throw std::domain_error("time must be >= 0 and finite");
}

}  // namespace

Moments moments_undamped(double t, const PhysicalParams& params,
                         const InitialState& init) {
    params.validate();
    init.validate();
    require_time(t);
    const double m2 = params.mass * params.mass;
    Moments mom;
    mom.p2 = init.p0_sq + m2 * params.epsilon * t;
    mom.x2 = init.x0_sq + init.p0_sq * t * t / m2 +
             params.epsilon * t * t * t / 3.0;
    mom.xp = init.p0_sq * t / params.mass +
             params.mass * params.epsilon * t * t / 2.0;
    return mom;
}

double ou_x2_bracket(double a) {
    if (!(std::isfinite(a) && a >= 0.0))
        throw std::domain_error("bracket argument must be >= 0 and finite");
    if (a < 0.04) {
        // Taylor series through a^12; the direct form below loses all
        // significance for small a (B ~ 2a^3/3 against O(1) terms).
        const double c[] = {2.0 / 3.0,        -1.0 / 2.0,     7.0 / 30.0,
                            -1.0 / 12.0,      31.0 / 1260.0,  -1.0 / 160.0,
                            127.0 / 90720.0,  -17.0 / 60480.0, 73.0 / 1425600.0,
                            -31.0 / 3628800.0};
        double acc = 0.0;
        for (int i = 9; i >= 0; --i) acc = c[i] + a * acc;
        return a * a * a * acc;
    }
    // 2a - 3 + 4e^-a - e^-2a rewritten via E = expm1(-a):
    // B = 2(a + E) - E^2, which stays accurate down to the switchover.
    const double e = std::expm1(-a);
    return 2.0 * (a + e) - e * e;
}

Moments moments_damped(double t, const PhysicalParams& params,
                       const InitialState& init) {
    params.validate();
    init.validate();
    require_time(t);
    const double g = params.gamma;
    if (g == 0.0) return moments_undamped(t, params, init);

    const double m2 = params.mass * params.mass;
    const double a = g * t;
    Moments mom;

    const double decay2 = std::exp(-2.0 * a);
    mom.p2 = init.p0_sq * decay2 +
             m2 * params.epsilon / (2.0 * g) * (-std::expm1(-2.0 * a));

    const double u = -std::expm1(-a);  // 1 - e^{-gamma t}
    mom.x2 = init.x0_sq + init.p0_sq / (m2 * g * g) * u * u +
             params.epsilon / (2.0 * g * g * g) * ou_x2_bracket(a);

    // <xp> = (m/2) d<x^2>/dt =
    //   p0^2/(m g) e^{-a}(1-e^{-a}) + m eps/(2 g^2) (1-e^{-a})^2
    const double decay = std::exp(-a);
    mom.xp = init.p0_sq / (params.mass * g) * decay * u +
             params.mass * params.epsilon / (2.0 * g * g) * u * u;
    return mom;
}

Moments short_time_asymptotics(double t, const PhysicalParams& params,
                                const InitialState& init) {
    return moments_undamped(t, params, init);
}

double p2_rate_at_zero(const PhysicalParams& params, const InitialState& init) {
    params.validate();
    init.validate();
    return params.mass * params.mass * params.epsilon -
           2.0 * params.gamma * init.p0_sq;
}

double critical_damping(const PhysicalParams& params, double p0_sq) {
    params.validate();
    if (!(std::isfinite(p0_sq) && p0_sq > 0.0))
        throw std::domain_error("critical damping needs p0_sq > 0");
    return params.mass * params.mass * params.epsilon / (2.0 * p0_sq);
}

double KolmogorovClosure::stationary_p2(const PhysicalParams& params) const {
    params.validate();
    if (params.gamma <= 0.0)
        throw std::domain_error("stationary momentum variance needs gamma > 0");
    return c2 * params.mass * params.mass * params.epsilon / params.gamma;
}

KolmogorovClosure kolmogorov_closure(double c1) {
    if (!std::isfinite(c1))
        throw std::domain_error("c1 must be finite");
    return KolmogorovClosure{c1, (1.0 + c1) / 2.0};
}

EnergyBudget energy_budget(double p2, double observed_rate,
                           const PhysicalParams& params) {
    params.validate();
    if (!std::isfinite(p2) || p2 < 0.0)
        throw std::domain_error("p2 must be >= 0 and finite");
    EnergyBudget b;
    b.injection = params.mass * params.mass * params.epsilon;
    b.dissipation = 2.0 * params.gamma * p2;
    b.net = b.injection - b.dissipation;
    b.observed_rate = observed_rate;
    b.residual = observed_rate - b.net;
    return b;
}

}  // namespace openturb
