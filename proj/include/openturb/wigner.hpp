#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "openturb/fpe.hpp"

namespace openturb {

// Position-space density matrix rho(x_i, x_j) on a uniform grid of n points.
struct DensityMatrixGrid {
    double x_min = 0.0;
    double dx = 0.0;
    std::size_t n = 0;
    std::vector<std::complex<double>> rho;  // row-major, n * n

    std::complex<double>& at(std::size_t i, std::size_t j) {
        return rho[i * n + j];
    }
    const std::complex<double>& at(std::size_t i, std::size_t j) const {
        return rho[i * n + j];
    }
    double x(std::size_t i) const { return x_min + static_cast<double>(i) * dx; }

    double hermiticity_error() const;  // max |rho_ij - conj(rho_ji)|
    double trace() const;              // sum_i rho_ii dx (real part)

    // Hermitian within 1e-8 and unit trace within 1e-8, else throws.
    void validate() const;
};

// Pure Gaussian wavepacket psi ~ exp(-x^2 / (4 sigma_sq)) exp(i p0 x / hbar),
// rho = psi psi^*; trace-normalised on the grid.
DensityMatrixGrid gaussian_pure_state(double sigma_sq, double x_min,
                                      double x_max, std::size_t n,
                                      double p0 = 0.0, double hbar = 1.0);

// Analytic Wigner function of that state:
// W(x, p) = (1 / (pi hbar)) exp(-x^2 / (2 sigma_sq))
//                           exp(-2 sigma_sq (p - p0)^2 / hbar^2)
double gaussian_wigner_exact(double x, double p, double sigma_sq, double p0,
                             double hbar);

struct WignerResult {
    PhaseSpaceGrid grid;        // nx = np = n, p spacing pi hbar / (n dx)
    double max_imag = 0.0;      // largest |Im W| before discarding
    double norm_error = 0.0;    // |integral W - trace rho|
};

// Discrete Wigner transform
//   W(x_i, p) = (1 / (2 pi hbar)) sum_j 2 dx e^{-i p 2 dx j / hbar}
//               rho(x_i + j dx, x_i - j dx)
// over the symmetric offsets that stay on the grid. The momentum grid is
// chosen so the phases are exact roots of unity.
WignerResult wigner_from_density(const DensityMatrixGrid& dm, double hbar);

}  // namespace openturb
