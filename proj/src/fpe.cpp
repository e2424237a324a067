#include "openturb/fpe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "openturb/parallel.hpp"

namespace openturb {

void GridGeometry::validate() const {
    if (!(std::isfinite(x_min) && std::isfinite(x_max) && x_min < x_max))
        throw std::domain_error("grid needs x_min < x_max, finite");
    if (!(std::isfinite(p_min) && std::isfinite(p_max) && p_min < p_max))
        throw std::domain_error("grid needs p_min < p_max, finite");
    if (nx < 4 || np < 4)
        throw std::domain_error("grid needs nx >= 4 and np >= 4");
}

double PhaseSpaceGrid::mass() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s * geom.dx() * geom.dp();
}

GridMoments grid_moments(const PhaseSpaceGrid& grid) {
    const std::size_t nx = grid.geom.nx, np = grid.geom.np;
    double sx2 = 0.0, sp2 = 0.0, sxp = 0.0, sw = 0.0;
    for (std::size_t i = 0; i < nx; ++i) {
        const double x = grid.x_center(i);
        double row_w = 0.0, row_p2 = 0.0, row_p = 0.0;
        for (std::size_t j = 0; j < np; ++j) {
            const double v = grid.at(i, j);
            const double p = grid.p_center(j);
            row_w += v;
            row_p += v * p;
            row_p2 += v * p * p;
        }
        sw += row_w;
        sx2 += x * x * row_w;
        sp2 += row_p2;
        sxp += x * row_p;
    }
    const double cell = grid.geom.dx() * grid.geom.dp();
    GridMoments mom;
    mom.x2 = sx2 * cell;
    mom.p2 = sp2 * cell;
    mom.xp = sxp * cell;
    mom.norm = sw * cell;
    return mom;
}

namespace {

// Gaussian tail mass outside [lo, hi] for variance var.
double tail_mass(double lo, double hi, double var) {
    const double s = std::sqrt(2.0 * var);
    return 0.5 * (std::erfc(hi / s) + std::erfc(-lo / s));
}

}  // namespace

PhaseSpaceGrid gaussian_wigner(const InitialState& init,
                               const GridGeometry& geom) {
    init.validate();
    geom.validate();
    if (!(init.x0_sq > 0.0 && init.p0_sq > 0.0))
        throw std::domain_error(
            "gaussian_wigner needs strictly positive x0_sq and p0_sq");
    const double off_grid = tail_mass(geom.x_min, geom.x_max, init.x0_sq) +
                            tail_mass(geom.p_min, geom.p_max, init.p0_sq);
    if (off_grid > 1e-6)
        throw std::domain_error(
            "grid too small: off-grid Gaussian mass " + std::to_string(off_grid) +
            " exceeds 1e-6");

    PhaseSpaceGrid grid(geom);
    const double norm =
        1.0 / (2.0 * std::numbers::pi * std::sqrt(init.x0_sq * init.p0_sq));
    for (std::size_t i = 0; i < geom.nx; ++i) {
        const double x = grid.x_center(i);
        const double gx = norm * std::exp(-x * x / (2.0 * init.x0_sq));
        for (std::size_t j = 0; j < geom.np; ++j) {
            const double p = grid.p_center(j);
            grid.at(i, j) = gx * std::exp(-p * p / (2.0 * init.p0_sq));
        }
    }
    const double m = grid.mass();
    for (double& v : grid.values) v /= m;
    grid.mass_deficit = 0.0;
    return grid;
}

double FpeStability::max_allowed() const {
    return std::min({dt_advection, dt_drift, dt_diffusion});
}

FpeStability fpe_stability_limits(const GridGeometry& geom,
                                  const PhysicalParams& params, bool damped) {
    geom.validate();
    params.validate();
    constexpr double inf = std::numeric_limits<double>::infinity();
    FpeStability lim{inf, inf, inf};

    const double pabs = std::max(std::abs(geom.p_min), std::abs(geom.p_max));
    const double vmax = pabs / params.mass;
    if (vmax > 0.0) lim.dt_advection = 0.9 * geom.dx() / vmax;

    if (damped && params.gamma > 0.0 && pabs > 0.0)
        lim.dt_drift = 0.9 * geom.dp() / (params.gamma * pabs);

    const double diff = params.epsilon * params.mass * params.mass / 2.0;
    if (diff > 0.0) lim.dt_diffusion = 0.45 * geom.dp() * geom.dp() / diff;

    return lim;
}

namespace {

// van Leer limited difference: phi(theta) * du with theta = du_up / du,
// written in the division-safe harmonic form.
inline double limited_diff(double du_up, double du) {
    const double prod = du_up * du;
    return prod > 0.0 ? 2.0 * prod / (du_up + du) : 0.0;
}

// Second-order TVD upwind flux at one face: cells uLL | uL | face | uR | uRR,
// courant = |v| dt / dh.
inline double tvd_flux(double v, double courant, double uLL, double uL,
                       double uR, double uRR) {
    const double du = uR - uL;
    if (v >= 0.0)
        return v * uL + 0.5 * v * (1.0 - courant) * limited_diff(uL - uLL, du);
    return v * uR + 0.5 * (-v) * (1.0 - courant) * limited_diff(uRR - uR, du);
}

struct Workspace {
    std::vector<double> flux;  // (nx + 1) * np face fluxes for x-advection
};

// x-advection: per-column velocity v_j = p_j / m, constant along x.
void advect_x(PhaseSpaceGrid& grid, const std::vector<double>& vel, double dt,
              ThreadPool& pool, Workspace& ws) {
    const std::size_t nx = grid.geom.nx, np = grid.geom.np;
    const double dx = grid.geom.dx();
    ws.flux.assign((nx + 1) * np, 0.0);
    std::vector<double>& flux = ws.flux;
    const std::vector<double>& w = grid.values;

    pool.run(nx + 1, [&](std::size_t f) {
        double* F = flux.data() + f * np;
        const double* uL = f >= 1 ? w.data() + (f - 1) * np : nullptr;
        const double* uLL = f >= 2 ? w.data() + (f - 2) * np : nullptr;
        const double* uR = f < nx ? w.data() + f * np : nullptr;
        const double* uRR = f + 1 < nx ? w.data() + (f + 1) * np : nullptr;
        for (std::size_t j = 0; j < np; ++j) {
            const double v = vel[j];
            F[j] = tvd_flux(v, std::abs(v) * dt / dx, uLL ? uLL[j] : 0.0,
                            uL ? uL[j] : 0.0, uR ? uR[j] : 0.0,
                            uRR ? uRR[j] : 0.0);
        }
    });

    pool.run(nx, [&](std::size_t i) {
        double* row = grid.values.data() + i * np;
        const double* Fl = flux.data() + i * np;
        const double* Fr = flux.data() + (i + 1) * np;
        const double r = dt / dx;
        for (std::size_t j = 0; j < np; ++j) row[j] -= r * (Fr[j] - Fl[j]);
    });
}

// p-drift: velocity -gamma p evaluated at cell faces, varies along the row.
void advect_p(PhaseSpaceGrid& grid, double gamma, double dt, ThreadPool& pool) {
    const std::size_t nx = grid.geom.nx, np = grid.geom.np;
    const double dp = grid.geom.dp();
    const double p0 = grid.geom.p_min;
    pool.run(nx, [&](std::size_t i) {
        thread_local std::vector<double> flux;
        flux.assign(np + 1, 0.0);
        double* row = grid.values.data() + i * np;
        for (std::size_t f = 0; f <= np; ++f) {
            const double v = -gamma * (p0 + static_cast<double>(f) * dp);
            flux[f] = tvd_flux(v, std::abs(v) * dt / dp,
                               f >= 2 ? row[f - 2] : 0.0,
                               f >= 1 ? row[f - 1] : 0.0,
                               f < np ? row[f] : 0.0,
                               f + 1 < np ? row[f + 1] : 0.0);
        }
        const double r = dt / dp;
        for (std::size_t j = 0; j < np; ++j)
            row[j] -= r * (flux[j + 1] - flux[j]);
    });
}

// Momentum diffusion, explicit central differences with zero ghosts.
void diffuse_p(PhaseSpaceGrid& grid, double diff, double dt, ThreadPool& pool) {
    const std::size_t nx = grid.geom.nx, np = grid.geom.np;
    const double nu = diff * dt / (grid.geom.dp() * grid.geom.dp());
    pool.run(nx, [&](std::size_t i) {
        double* row = grid.values.data() + i * np;
        double prev = 0.0;  // ghost
        for (std::size_t j = 0; j < np; ++j) {
            const double cur = row[j];
            const double next = j + 1 < np ? row[j + 1] : 0.0;
            row[j] = cur + nu * (prev - 2.0 * cur + next);
            prev = cur;
        }
    });
}

}  // namespace

FpeRunStats evolve_fpe(PhaseSpaceGrid& grid, const PhysicalParams& params,
                       double dt, std::size_t n_steps, bool damped,
                       Splitting splitting, unsigned workers) {
    grid.geom.validate();
    params.validate();
    if (!(std::isfinite(dt) && dt > 0.0))
        throw std::domain_error("dt must be positive and finite");

    const FpeStability lim = fpe_stability_limits(grid.geom, params, damped);
    if (dt > lim.dt_advection)
        throw std::runtime_error("CFL violation (advection): dt " +
                                 std::to_string(dt) + " > " +
                                 std::to_string(lim.dt_advection));
    if (dt > lim.dt_drift)
        throw std::runtime_error("CFL violation (drift): dt " +
                                 std::to_string(dt) + " > " +
                                 std::to_string(lim.dt_drift));
    if (dt > lim.dt_diffusion)
        throw std::runtime_error("CFL violation (diffusion): dt " +
                                 std::to_string(dt) + " > " +
                                 std::to_string(lim.dt_diffusion));

    if (workers == 0) workers = thread_budget();
    ThreadPool pool(workers);
    Workspace ws;

    const std::size_t nx = grid.geom.nx, np = grid.geom.np;
    std::vector<double> vel(np);
    for (std::size_t j = 0; j < np; ++j)
        vel[j] = grid.p_center(j) / params.mass;
    const double diff = params.epsilon * params.mass * params.mass / 2.0;
    const bool do_drift = damped && params.gamma > 0.0;
    const bool do_diff = diff > 0.0;
    const double cell = grid.geom.dx() * grid.geom.dp();

    FpeRunStats stats;
    for (std::size_t step = 0; step < n_steps; ++step) {
        if (splitting == Splitting::Lie) {
            advect_x(grid, vel, dt, pool, ws);
            if (do_drift) advect_p(grid, params.gamma, dt, pool);
            if (do_diff) diffuse_p(grid, diff, dt, pool);
        } else {
            advect_x(grid, vel, 0.5 * dt, pool, ws);
            if (do_drift) advect_p(grid, params.gamma, 0.5 * dt, pool);
            if (do_diff) diffuse_p(grid, diff, dt, pool);
            if (do_drift) advect_p(grid, params.gamma, 0.5 * dt, pool);
            advect_x(grid, vel, 0.5 * dt, pool, ws);
        }

        double sum = 0.0, low = grid.values[0];
        for (std::size_t c = 0; c < nx * np; ++c) {
            sum += grid.values[c];
            low = std::min(low, grid.values[c]);
        }
        grid.mass_deficit = 1.0 - sum * cell;
        stats.mass_deficit = grid.mass_deficit;
        stats.min_w = step == 0 ? low : std::min(stats.min_w, low);
        if (std::abs(grid.mass_deficit) > 1e-3)
            throw std::runtime_error(
                "mass deficit " + std::to_string(grid.mass_deficit) +
                " exceeds 1e-3 at step " + std::to_string(step + 1) +
                ": domain too small for this evolution");
        if (low < -1e-12)
            throw std::runtime_error("positivity violated: min W = " +
                                     std::to_string(low) + " at step " +
                                     std::to_string(step + 1));
    }
    return stats;
}

}  // namespace openturb
