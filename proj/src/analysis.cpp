#include "openturb/analysis.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace openturb {

std::string to_string(Regime r) {
    switch (r) {
        case Regime::Turbulent: return "turbulent";
        case Regime::Ballistic: return "ballistic";
        case Regime::Brownian: return "brownian";
        case Regime::Equilibrium: return "equilibrium";
        case Regime::Indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

ExponentFit fit_growth_exponent(std::span<const double> times,
                                std::span<const double> values,
                                double t_start, double t_end, double baseline) {
    if (times.size() != values.size())
        throw std::invalid_argument("times and values must have equal length");
    if (!(t_start > 0.0 && t_end > t_start))
        throw std::invalid_argument("need 0 < t_start < t_end");

    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        if (t < t_start || t > t_end) continue;
        const double v = values[i] - baseline;
        if (!(v > 0.0))
            throw std::runtime_error(
                "growth-exponent fit: non-positive value - baseline at t = " +
                std::to_string(t));
        lx.push_back(std::log(t));
        ly.push_back(std::log(v));
    }
    const std::size_t n = lx.size();
    if (n < 5)
        throw std::runtime_error(
            "growth-exponent fit needs at least 5 points in the window, got " +
            std::to_string(n));

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx == 0.0)
        throw std::runtime_error("growth-exponent fit needs distinct times");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - (intercept + slope * lx[i]);
        ss_res += r * r;
    }
    ExponentFit fit;
    fit.exponent = slope;
    fit.n_points = n;
    fit.se = n > 2 ? std::sqrt(ss_res / (static_cast<double>(n) - 2.0) / sxx)
                   : 0.0;
    return fit;
}

RegimeReport classify_regime(const EnsembleMoments& series,
                             const PhysicalParams& params,
                             const InitialState& init, double t_start,
                             double t_end) {
    params.validate();
    init.validate();
    const ExponentFit fit = fit_growth_exponent(series.times, series.x2,
                                                t_start, t_end, init.x0_sq);
    RegimeReport rep;
    rep.t_start = t_start;
    rep.t_end = t_end;
    rep.exponent = fit.exponent;
    rep.exponent_se = fit.se;
    rep.crossover_time = params.gamma > 0.0
                             ? 1.0 / params.gamma
                             : std::numeric_limits<double>::infinity();

    if (params.gamma > 0.0 && params.epsilon > 0.0) {
        const double stationary = params.mass * params.mass * params.epsilon /
                                  (2.0 * params.gamma);
        bool pinned = false;
        for (std::size_t i = 0; i < series.times.size(); ++i) {
            const double t = series.times[i];
            if (t < t_start || t > t_end) continue;
            const bool close =
                std::abs(series.p2[i] - stationary) < 0.01 * stationary;
            if (!close) {
                pinned = false;
                break;
            }
            pinned = true;
        }
        rep.equilibrium = pinned;
    }

    const double e = fit.exponent;
    if (fit.se > 0.2)
        rep.classification = Regime::Indeterminate;
    else if (e >= 2.7 && e <= 3.3)
        rep.classification = Regime::Turbulent;
    else if (e >= 1.8 && e <= 2.2)
        rep.classification = Regime::Ballistic;
    else if (e >= 0.8 && e <= 1.2)
        rep.classification = Regime::Brownian;
    else if (rep.equilibrium)
        rep.classification = Regime::Equilibrium;
    else
        rep.classification = Regime::Indeterminate;
    return rep;
}

namespace {

double z_score(double est, double se, double oracle) {
    if (se > 0.0) return (est - oracle) / se;
    const double scale = std::max(1.0, std::abs(oracle));
    return std::abs(est - oracle) <= 1e-12 * scale
               ? 0.0
               : std::numeric_limits<double>::infinity();
}

DeviationReport deviation_from(const EnsembleMoments& series,
                               const OracleTable& table) {
    DeviationReport rep;
    rep.times = series.times;
    const std::size_t n = series.times.size();
    rep.x2_z.resize(n);
    rep.p2_z.resize(n);
    std::size_t within = 0;
    for (std::size_t i = 0; i < n; ++i) {
        rep.x2_z[i] = z_score(series.x2[i], series.x2_se[i], table.x2[i]);
        rep.p2_z[i] = z_score(series.p2[i], series.p2_se[i], table.p2[i]);
        for (double z : {rep.x2_z[i], rep.p2_z[i]}) {
            rep.max_abs_z = std::max(rep.max_abs_z, std::abs(z));
            if (std::abs(z) <= 3.0) ++within;
        }
    }
    rep.fraction_within_3 =
        n == 0 ? 1.0 : static_cast<double>(within) / (2.0 * static_cast<double>(n));
    rep.pass = rep.fraction_within_3 >= 0.99;
    return rep;
}

}  // namespace

OracleTable tabulate_oracle(std::span<const double> times, bool damped,
                            const PhysicalParams& params,
                            const InitialState& init) {
    OracleTable table;
    table.times.assign(times.begin(), times.end());
    table.p2.reserve(times.size());
    table.x2.reserve(times.size());
    for (double t : times) {
        const Moments m = damped ? moments_damped(t, params, init)
                                 : moments_undamped(t, params, init);
        table.p2.push_back(m.p2);
        table.x2.push_back(m.x2);
    }
    return table;
}

DeviationReport compare_to_oracle(const EnsembleMoments& series, bool damped,
                                  const PhysicalParams& params,
                                  const InitialState& init) {
    return deviation_from(series,
                          tabulate_oracle(series.times, damped, params, init));
}

DeviationReport compare_to_table(const EnsembleMoments& series,
                                 const OracleTable& table) {
    if (series.times.size() != table.times.size())
        throw std::invalid_argument(
            "time grids differ: series has " +
            std::to_string(series.times.size()) + " samples, table has " +
            std::to_string(table.times.size()));
    for (std::size_t i = 0; i < table.times.size(); ++i)
        if (series.times[i] != table.times[i])
            throw std::invalid_argument("time grids differ at sample " +
                                        std::to_string(i));
    return deviation_from(series, table);
}

std::vector<EnergyBudgetPoint> energy_rate_series(const EnsembleMoments& series,
                                                  const PhysicalParams& params) {
    params.validate();
    const std::size_t n = series.times.size();
    if (n < 3)
        throw std::invalid_argument("energy rate needs at least 3 samples");
    std::vector<EnergyBudgetPoint> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i == 0 ? 0 : i - 1;
        const std::size_t hi = i + 1 == n ? i : i + 1;
        const double dt = series.times[hi] - series.times[lo];
        const double rate = (series.p2[hi] - series.p2[lo]) / dt;
        const double rate_se =
            std::sqrt(series.p2_se[hi] * series.p2_se[hi] +
                      series.p2_se[lo] * series.p2_se[lo]) /
            dt;
        out[i].t = series.times[i];
        out[i].budget = energy_budget(std::max(0.0, series.p2[i]), rate, params);
        const double diss_se = 2.0 * params.gamma * series.p2_se[i];
        out[i].residual_se = std::sqrt(rate_se * rate_se + diss_se * diss_se);
    }
    return out;
}

}  // namespace openturb
