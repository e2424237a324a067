#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "openturb/analysis.hpp"
#include "openturb/oracles.hpp"

using namespace openturb;

namespace {

// Builds a noise-free EnsembleMoments record from explicit series.
EnsembleMoments make_series(std::vector<double> t, std::vector<double> x2,
                            std::vector<double> p2) {
    EnsembleMoments m;
    const std::size_t n = t.size();
    m.times = std::move(t);
    m.x2 = std::move(x2);
    m.p2 = std::move(p2);
    m.xp.assign(n, 0.0);
    m.x2_se.assign(n, 0.0);
    m.p2_se.assign(n, 0.0);
    m.xp_se.assign(n, 0.0);
    m.n_trajectories = 1;
    return m;
}

std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

}  // namespace

TEST_CASE("growth exponent: exact power laws are recovered to rounding") {
    const auto ts = linspace(0.1, 1.0, 20);
    std::vector<double> cubic(ts.size()), quadratic(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        cubic[i] = ts[i] * ts[i] * ts[i] / 3.0;
        quadratic[i] = 7.5 * ts[i] * ts[i];
    }
    const auto f3 = fit_growth_exponent(ts, cubic, 0.1, 1.0, 0.0);
    CHECK(f3.exponent == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(f3.se <= 1e-10);
    CHECK(f3.n_points == 20);

    const auto f2 = fit_growth_exponent(ts, quadratic, 0.1, 1.0, 0.0);
    CHECK(f2.exponent == doctest::Approx(2.0).epsilon(1e-12));

    // Baseline subtraction: an x0^2 offset must not contaminate the slope.
    std::vector<double> shifted(cubic);
    for (auto& v : shifted) v += 4.25;
    const auto fb = fit_growth_exponent(ts, shifted, 0.1, 1.0, 4.25);
    CHECK(fb.exponent == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("growth exponent: invariant under value rescaling") {
    const auto ts = linspace(0.2, 2.0, 15);
    std::vector<double> v(ts.size()), w(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        v[i] = std::pow(ts[i], 2.37) * (1.0 + 0.01 * std::sin(3.0 * ts[i]));
        w[i] = 1.0e6 * v[i];
    }
    const auto fv = fit_growth_exponent(ts, v, 0.2, 2.0, 0.0);
    const auto fw = fit_growth_exponent(ts, w, 0.2, 2.0, 0.0);
    CHECK(fv.exponent == doctest::Approx(fw.exponent).epsilon(1e-12));
    CHECK(fv.se == doctest::Approx(fw.se).epsilon(1e-9));
}

TEST_CASE("growth exponent: damped long-time window is near-linear") {
    // gamma=1, m=1, eps=2, zero init: x2(t) = B(t), the damped bracket.
    const PhysicalParams params{1.0, 2.0, 1.0, 1.0};
    const InitialState init{0.0, 0.0};
    std::vector<double> ts(91), x2(91);
    for (int i = 0; i < 91; ++i) {
        ts[i] = 10.0 + i;
        x2[i] = moments_damped(ts[i], params, init).x2;
    }
    const auto fit = fit_growth_exponent(ts, x2, 10.0, 100.0, init.x0_sq);
    CHECK(fit.exponent == doctest::Approx(1.0491688300085877).epsilon(1e-9));
    CHECK(fit.se == doctest::Approx(0.0017976396954094).epsilon(1e-6));
    CHECK(fit.exponent > 0.95);
    CHECK(fit.exponent < 1.05);
    CHECK(fit.n_points == 91);
}

TEST_CASE("growth exponent: rejects bad input") {
    const auto ts = linspace(0.1, 1.0, 10);
    std::vector<double> good(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) good[i] = ts[i];

    // Fewer than five in-window points.
    try {
        fit_growth_exponent(ts, good, 0.1, 0.35, 0.0);
        CHECK(false);
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("at least 5 points") != std::string::npos);
    }

    // Baseline at or above a sample value: the offending time is named.
    std::vector<double> bad(good);
    bad[2] = 0.03;  // t = 0.3, below baseline 0.05
    try {
        fit_growth_exponent(ts, bad, 0.1, 1.0, 0.05);
        CHECK(false);
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()).find("0.300000") != std::string::npos);
    }

    // Malformed window.
    CHECK_THROWS_AS(fit_growth_exponent(ts, good, 1.0, 0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(fit_growth_exponent(ts, good, -0.5, 1.0, 0.0), std::invalid_argument);

    // Mismatched array lengths.
    const std::vector<double> short_vals(ts.size() - 1, 1.0);
    CHECK_THROWS_AS(fit_growth_exponent(ts, short_vals, 0.1, 1.0, 0.0),
                    std::invalid_argument);

    // Coincident times have no defined slope.
    const std::vector<double> same_t(6, 0.5), ones(6, 1.0);
    CHECK_THROWS_AS(fit_growth_exponent(same_t, ones, 0.1, 1.0, 0.0),
                    std::runtime_error);
}

TEST_CASE("classification: turbulent, ballistic, brownian bands") {
    const PhysicalParams und{1.0, 1.0, 0.0, 1.0};

    // Zero initial spread: cubic growth => turbulent; no crossover time.
    {
        const InitialState init{0.0, 0.0};
        std::vector<double> ts = linspace(0.05, 0.5, 12), x2(12), p2(12);
        for (std::size_t i = 0; i < 12; ++i) {
            const auto m = moments_undamped(ts[i], und, init);
            x2[i] = m.x2;
            p2[i] = m.p2;
        }
        const auto rep = classify_regime(make_series(ts, x2, p2), und, init, 0.05, 0.5);
        CHECK(rep.classification == Regime::Turbulent);
        CHECK(rep.exponent == doctest::Approx(3.0).epsilon(1e-6));
        CHECK(std::isinf(rep.crossover_time));
        CHECK_FALSE(rep.equilibrium);
    }

    // Large initial momentum spread: quadratic dominates early => ballistic.
    {
        const InitialState init{0.0, 100.0};
        std::vector<double> ts = linspace(0.01, 0.1, 10), x2(10), p2(10);
        for (std::size_t i = 0; i < 10; ++i) {
            const auto m = moments_undamped(ts[i], und, init);
            x2[i] = m.x2;
            p2[i] = m.p2;
        }
        const auto rep = classify_regime(make_series(ts, x2, p2), und, init, 0.01, 0.1);
        CHECK(rep.classification == Regime::Ballistic);
        CHECK(rep.exponent == doctest::Approx(2.0001310011521474).epsilon(1e-9));
    }

    // Damped late time: linear growth with pinned momentum => brownian.
    {
        const PhysicalParams damped{1.0, 2.0, 1.0, 1.0};
        const InitialState init{0.0, 0.0};
        std::vector<double> ts = linspace(10.0, 100.0, 91), x2(91), p2(91);
        for (std::size_t i = 0; i < 91; ++i) {
            const auto m = moments_damped(ts[i], damped, init);
            x2[i] = m.x2;
            p2[i] = m.p2;
        }
        const auto rep =
            classify_regime(make_series(ts, x2, p2), damped, init, 10.0, 100.0);
        CHECK(rep.classification == Regime::Brownian);
        CHECK(rep.equilibrium);
        CHECK(rep.crossover_time == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(rep.t_start == 10.0);
        CHECK(rep.t_end == 100.0);
    }
}

TEST_CASE("classification: indeterminate when the fit is too noisy") {
    const PhysicalParams params{1.0, 1.0, 0.0, 1.0};
    const InitialState init{0.0, 0.0};
    std::vector<double> ts = linspace(1.0, 2.0, 8), x2(8), p2(8, 1.0);
    for (std::size_t i = 0; i < 8; ++i) {
        const double v = ts[i] * ts[i] * ts[i] / 3.0;
        x2[i] = (i % 2 == 0) ? v * std::exp(1.0) : v * std::exp(-1.0);
    }
    const auto rep = classify_regime(make_series(ts, x2, p2), params, init, 1.0, 2.0);
    CHECK(rep.exponent_se > 0.2);
    CHECK(rep.classification == Regime::Indeterminate);
}

TEST_CASE("classification: off-band exponent falls back on equilibrium check") {
    const PhysicalParams params{1.0, 2.0, 1.0, 1.0};
    const InitialState init{0.0, 0.0};
    const double stat = kolmogorov_closure(0.0).stationary_p2(params);
    REQUIRE(stat == 1.0);
    std::vector<double> ts = linspace(5.0, 10.0, 12), x2(12);
    std::vector<double> p2(12, stat);
    for (std::size_t i = 0; i < 12; ++i) x2[i] = std::sqrt(ts[i]);  // exponent 1/2

    const auto rep = classify_regime(make_series(ts, x2, p2), params, init, 5.0, 10.0);
    CHECK(rep.exponent == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(rep.classification == Regime::Equilibrium);
    CHECK(rep.equilibrium);

    // Same series with drifting p2: no band matches and nothing is pinned.
    std::vector<double> p2_drift(12);
    for (std::size_t i = 0; i < 12; ++i) p2_drift[i] = stat * (1.0 + 0.05 * i);
    const auto rep2 =
        classify_regime(make_series(ts, x2, p2_drift), params, init, 5.0, 10.0);
    CHECK(rep2.classification == Regime::Indeterminate);
    CHECK_FALSE(rep2.equilibrium);
}

TEST_CASE("regime names") {
    CHECK(to_string(Regime::Turbulent) == "turbulent");
    CHECK(to_string(Regime::Ballistic) == "ballistic");
    CHECK(to_string(Regime::Brownian) == "brownian");
    CHECK(to_string(Regime::Equilibrium) == "equilibrium");
    CHECK(to_string(Regime::Indeterminate) == "indeterminate");
}

TEST_CASE("deviation report: oracle tabulation compared against itself") {
    const PhysicalParams params{1.3, 0.9, 0.7, 1.0};
    const InitialState init{0.4, 1.7};
    const auto ts = linspace(0.1, 2.0, 25);
    const auto table = tabulate_oracle(ts, true, params, init);
    REQUIRE(table.times.size() == 25);
    for (std::size_t i = 0; i < 25; ++i) {
        const auto m = moments_damped(table.times[i], params, init);
        CHECK(table.x2[i] == m.x2);
        CHECK(table.p2[i] == m.p2);
    }

    const auto series = make_series(table.times, table.x2, table.p2);
    const auto rep = compare_to_oracle(series, true, params, init);
    CHECK(rep.max_abs_z == 0.0);
    CHECK(rep.fraction_within_3 == 1.0);
    CHECK(rep.pass);

    // Undamped tabulation must use the undamped oracle.
    const auto und = tabulate_oracle(ts, false, params, init);
    for (std::size_t i = 0; i < 25; ++i)
        CHECK(und.p2[i] == moments_undamped(ts[i], params, init).p2);

    // A shifted estimate with finite se produces the exact z-score.
    auto biased = series;
    for (auto& se : biased.x2_se) se = 1e-3;
    for (auto& se : biased.p2_se) se = 1e-3;
    biased.x2[3] += 3.5e-3;
    const auto rep2 = compare_to_oracle(biased, true, params, init);
    CHECK(rep2.max_abs_z == doctest::Approx(3.5).epsilon(1e-9));
    CHECK(rep2.x2_z[3] == doctest::Approx(3.5).epsilon(1e-9));
    CHECK_FALSE(rep2.pass);
    CHECK(rep2.fraction_within_3 == doctest::Approx(49.0 / 50.0).epsilon(1e-12));
}

TEST_CASE("deviation report: zero-se estimates use an exactness tolerance") {
    const PhysicalParams params{1.0, 2.0, 1.0, 1.0};
    const InitialState init{0.0, 0.5};
    const auto ts = linspace(0.5, 3.0, 11);
    const auto table = tabulate_oracle(ts, true, params, init);
    auto series = make_series(table.times, table.x2, table.p2);

    // A relative perturbation below 1e-12 still counts as exact.
    series.x2[0] += 1e-13 * series.x2[0];
    CHECK(compare_to_oracle(series, true, params, init).max_abs_z == 0.0);

    // Anything larger with se = 0 is an infinite z-score.
    series.x2[0] = table.x2[0] * (1.0 + 1e-9);
    const auto rep = compare_to_oracle(series, true, params, init);
    CHECK(std::isinf(rep.max_abs_z));
    CHECK_FALSE(rep.pass);

    // A mismatched oracle blows up the same way.
    const PhysicalParams wrong{1.1, 2.0, 1.0, 1.0};
    const auto exact = make_series(table.times, table.x2, table.p2);
    CHECK(std::isinf(compare_to_oracle(exact, true, wrong, init).max_abs_z));
}

TEST_CASE("compare_to_table demands an identical time grid") {
    const PhysicalParams params{1.0, 1.0, 0.5, 1.0};
    const InitialState init{0.1, 0.2};
    const auto ts = linspace(0.1, 1.0, 10);
    const auto table = tabulate_oracle(ts, true, params, init);
    const auto series = make_series(table.times, table.x2, table.p2);
    CHECK(compare_to_table(series, table).pass);

    auto offgrid = series;
    offgrid.times[4] += 1e-9;
    CHECK_THROWS_AS(compare_to_table(offgrid, table), std::invalid_argument);

    auto truncated = table;
    truncated.times.pop_back();
    truncated.x2.pop_back();
    truncated.p2.pop_back();
    CHECK_THROWS_AS(compare_to_table(series, truncated), std::invalid_argument);
}

TEST_CASE("energy rate series: finite differences of the damped oracle") {
    // gamma=1, m=1, eps=2, zero init: p2(t) = 1 - exp(-2t), residual -> 0.
    const PhysicalParams params{1.0, 2.0, 1.0, 1.0};
    const InitialState init{0.0, 0.0};
    std::vector<double> ts(5), p2(5);
    for (int i = 0; i < 5; ++i) {
        ts[i] = 0.5 + 0.005 * i;
        p2[i] = moments_damped(ts[i], params, init).p2;
    }
    const auto series = make_series(ts, std::vector<double>(5, 1.0), p2);
    const auto pts = energy_rate_series(series, params);
    REQUIRE(pts.size() == 5);

    CHECK(pts[2].t == ts[2]);
    CHECK(pts[2].budget.injection == 2.0);
    CHECK(pts[2].budget.dissipation == doctest::Approx(2.0 * p2[2]).epsilon(1e-15));
    CHECK(pts[2].budget.observed_rate ==
          doctest::Approx(0.721201900237595).epsilon(1e-12));
    CHECK(pts[2].budget.residual ==
          doctest::Approx(1.2019891438402399e-5).epsilon(1e-6));

    // Central differences are O(h^2) accurate inside, O(h) at the ends.
    for (int i = 1; i <= 3; ++i) CHECK(std::abs(pts[i].budget.residual) < 1e-4);
    CHECK(std::abs(pts[0].budget.residual) ==
          doctest::Approx(3.6665623590842755e-3).epsilon(1e-6));
    CHECK(std::abs(pts[4].budget.residual) ==
          doctest::Approx(3.5463581558840267e-3).epsilon(1e-6));

    // Error propagation with a constant p2 standard error.
    const PhysicalParams half{1.0, 2.0, 0.5, 1.0};
    auto noisy = series;
    noisy.p2_se.assign(5, 0.1);
    const auto npts = energy_rate_series(noisy, half);
    CHECK(npts[2].residual_se == doctest::Approx(14.142489172702236).epsilon(1e-12));

    // Too few samples for any difference stencil.
    const auto tiny = make_series({0.1, 0.2}, {1.0, 1.0}, {1.0, 1.0});
    CHECK_THROWS_AS(energy_rate_series(tiny, params), std::invalid_argument);
}
