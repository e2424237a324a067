#pragma once

#include <span>
#include <string>
#include <vector>

#include "openturb/oracles.hpp"
#include "openturb/sde.hpp"

namespace openturb {

enum class Regime {
    Turbulent,      // <x^2> ~ t^3
    Ballistic,      // <x^2> ~ t^2
    Brownian,       // <x^2> ~ t
    Equilibrium,    // <p^2> pinned at the stationary value
    Indeterminate,
};

std::string to_string(Regime r);

struct ExponentFit {
    double exponent = 0.0;
    double se = 0.0;       // standard error from the fit residuals
    std::size_t n_points = 0;
};

// Least-squares slope of log(value - baseline) against log(t) over the
// window [t_start, t_end]. Any in-window point with value <= baseline is an
// error (named by time), as is a window holding fewer than 5 points.
ExponentFit fit_growth_exponent(std::span<const double> times,
                                std::span<const double> values,
                                double t_start, double t_end,
                                double baseline = 0.0);

struct RegimeReport {
    double t_start = 0.0;
    double t_end = 0.0;
    double exponent = 0.0;
    double exponent_se = 0.0;
    Regime classification = Regime::Indeterminate;
    bool equilibrium = false;    // <p^2> within 1% of m^2 eps / (2 gamma)
    double crossover_time = 0.0; // 1/gamma; +inf for gamma = 0
};

// Fit the <x^2> growth exponent in the window (baseline <x0^2>) and bin it:
// [2.7, 3.3] -> Turbulent, [1.8, 2.2] -> Ballistic, [0.8, 1.2] -> Brownian.
// exponent_se > 0.2 always yields Indeterminate; outside every band the
// report falls back to Equilibrium when the momentum variance is pinned,
// otherwise Indeterminate.
RegimeReport classify_regime(const EnsembleMoments& series,
                             const PhysicalParams& params,
                             const InitialState& init, double t_start,
                             double t_end);

struct DeviationReport {
    std::vector<double> times;
    std::vector<double> x2_z;  // (estimate - oracle) / standard error
    std::vector<double> p2_z;
    double max_abs_z = 0.0;
    double fraction_within_3 = 0.0;
    bool pass = false;  // at least 99% of z-scores within |z| <= 3
};

// z-scores of an ensemble series against the closed-form moments.
DeviationReport compare_to_oracle(const EnsembleMoments& series, bool damped,
                                  const PhysicalParams& params,
                                  const InitialState& init);

// Same, against a tabulated reference; the time grids must match exactly.
struct OracleTable {
    std::vector<double> times;
    std::vector<double> p2;
    std::vector<double> x2;
};

DeviationReport compare_to_table(const EnsembleMoments& series,
                                 const OracleTable& table);

OracleTable tabulate_oracle(std::span<const double> times, bool damped,
                            const PhysicalParams& params,
                            const InitialState& init);

struct EnergyBudgetPoint {
    double t = 0.0;
    EnergyBudget budget;
    double residual_se = 0.0;
};

// Finite-difference d<p^2>/dt (central inside, one-sided at the ends)
// checked against injection - dissipation at every sample time.
std::vector<EnergyBudgetPoint> energy_rate_series(const EnsembleMoments& series,
                                                  const PhysicalParams& params);

}  // namespace openturb
