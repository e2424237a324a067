#pragma once

namespace openturb {

// Model constants shared by every solver. `epsilon` is the single effective
// noise strength [momentum^2 / (mass^2 * time)]; the GRW and thermal
// parameter families below are just two ways of producing it.
struct PhysicalParams {
    double mass = 1.0;
    double epsilon = 0.0;  // momentum diffusion rate / m^2
    double gamma = 0.0;    // friction rate, 0 for the undamped model
    double hbar = 1.0;

    void validate() const;  // throws std::domain_error on violation
};

// Spontaneous-localization (GRW) noise: collapse frequency lambda and
// inverse localization area alpha.
struct GrwParams {
    double lambda = 0.0;
    double alpha = 0.0;

    void validate() const;
};

// Thermal-bath noise: Boltzmann constant k and temperature T; needs the
// friction rate gamma to fix the fluctuation-dissipation balance.
struct ThermalParams {
    double k = 1.0;
    double T = 0.0;

    void validate() const;
};

// Second moments of the zero-mean Gaussian initial ensemble; <x0 p0> = 0.
struct InitialState {
    double x0_sq = 0.0;
    double p0_sq = 0.0;

    void validate() const;
};

// epsilon = hbar^2 lambda alpha / (2 m^2)
double epsilon_from_grw(const GrwParams& grw, double hbar, double mass);

// epsilon = 2 gamma k T / m
double epsilon_from_thermal(const ThermalParams& th, double gamma, double mass);

// Decay rate lambda * (1 - exp(-alpha s^2 / 4)) of an off-diagonal
// density-matrix element at spatial separation s.
double grw_localization_rate(double separation, const GrwParams& grw);

// Relative error |exact - quadratic| / exact of replacing
// 1 - exp(-u), u = alpha s^2 / 4, by its small-u limit u.
// Tends to 0 as s -> 0 and is monotone increasing in s.
double quadratic_expansion_error(double separation, const GrwParams& grw);

}  // namespace openturb
