#pragma once

#include <cstddef>
#include <vector>

#include "openturb/params.hpp"

namespace openturb {

struct GridGeometry {
    double x_min = -10.0, x_max = 10.0;
    double p_min = -10.0, p_max = 10.0;
    std::size_t nx = 256, np = 256;

    void validate() const;
    double dx() const { return (x_max - x_min) / static_cast<double>(nx); }
    double dp() const { return (p_max - p_min) / static_cast<double>(np); }
};

// Cell-centred phase-space density, row-major values[ix * np + ip].
// mass_deficit tracks 1 - sum(W) dx dp and is refreshed after every
// evolution step (densities start normalised to one).
struct PhaseSpaceGrid {
    GridGeometry geom;
    std::vector<double> values;
    double mass_deficit = 0.0;

    explicit PhaseSpaceGrid(const GridGeometry& g)
        : geom(g), values(g.nx * g.np, 0.0) {
        geom.validate();
    }

    double& at(std::size_t ix, std::size_t ip) {
        return values[ix * geom.np + ip];
    }
    double at(std::size_t ix, std::size_t ip) const {
        return values[ix * geom.np + ip];
    }
    double x_center(std::size_t ix) const {
        return geom.x_min + (static_cast<double>(ix) + 0.5) * geom.dx();
    }
    double p_center(std::size_t ip) const {
        return geom.p_min + (static_cast<double>(ip) + 0.5) * geom.dp();
    }
    double mass() const;  // integral of W over the grid
};

// Midpoint-rule quadratures of x^2 W, p^2 W, x p W and W (unnormalised).
struct GridMoments {
    double x2 = 0.0;
    double p2 = 0.0;
    double xp = 0.0;
    double norm = 0.0;
};

GridMoments grid_moments(const PhaseSpaceGrid& grid);

// Product-Gaussian initial condition with variances (x0_sq, p0_sq),
// W = exp(-x^2/2<x0^2> - p^2/2<p0^2>) / (2 pi sqrt(<x0^2><p0^2>)),
// renormalised to unit mass on the grid. Rejects grids whose analytic
// off-grid tail mass exceeds 1e-6 (domain too small).
PhaseSpaceGrid gaussian_wigner(const InitialState& init, const GridGeometry& geom);

enum class Splitting {
    Lie,     // advection, drift, diffusion: one full step each
    Strang,  // symmetrised half-steps around the diffusion step
};

// Per-mechanism timestep ceilings (safety factors included):
//   advection  0.9  dx / (|p|_max / m)
//   drift      0.9  dp / (gamma |p|_max)     (damped only)
//   diffusion  0.45 dp^2 / (eps m^2 / 2)     (eps > 0 only)
// Inactive mechanisms report infinity.
struct FpeStability {
    double dt_advection;
    double dt_drift;
    double dt_diffusion;

    double max_allowed() const;
};

FpeStability fpe_stability_limits(const GridGeometry& geom,
                                  const PhysicalParams& params, bool damped);

struct FpeRunStats {
    double mass_deficit = 0.0;  // grid.mass_deficit after the last step
    double min_w = 0.0;         // lowest cell value seen during the run
};

// Advance the density in place by n_steps of size dt with operator
// splitting: van Leer flux-limited upwind finite-volume advection in x (and
// in p for the damping drift) plus explicit central differencing for the
// momentum diffusion. Boundaries are open (zero-valued ghost cells); mass
// leaving the grid accumulates in grid.mass_deficit. Throws when dt violates
// a stability ceiling (naming it), when |mass_deficit| exceeds 1e-3, or when
// a cell drops below -1e-12.
FpeRunStats evolve_fpe(PhaseSpaceGrid& grid, const PhysicalParams& params,
                       double dt, std::size_t n_steps, bool damped,
                       Splitting splitting = Splitting::Lie,
                       unsigned workers = 0);

}  // namespace openturb
