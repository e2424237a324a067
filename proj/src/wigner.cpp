#include "openturb/wigner.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "openturb/parallel.hpp"

namespace openturb {

double DensityMatrixGrid::hermiticity_error() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            worst = std::max(worst, std::abs(at(i, j) - std::conj(at(j, i))));
    return worst;
}

double DensityMatrixGrid::trace() const {
    double tr = 0.0;
    for (std::size_t i = 0; i < n; ++i) tr += at(i, i).real();
    return tr * dx;
}

void DensityMatrixGrid::validate() const {
    if (n < 2 || rho.size() != n * n)
        throw std::domain_error("density matrix needs n >= 2 and n*n entries");
    if (!(std::isfinite(dx) && dx > 0.0))
        throw std::domain_error("density matrix needs dx > 0");
    const double herm = hermiticity_error();
    if (herm > 1e-8)
        throw std::domain_error("density matrix not Hermitian: max deviation " +
                                std::to_string(herm));
    const double tr = trace();
    if (std::abs(tr - 1.0) > 1e-8)
        throw std::domain_error("density matrix trace " + std::to_string(tr) +
                                " is not 1 within 1e-8");
}

DensityMatrixGrid gaussian_pure_state(double sigma_sq, double x_min,
                                      double x_max, std::size_t n, double p0,
                                      double hbar) {
    if (!(sigma_sq > 0.0 && std::isfinite(sigma_sq)))
        throw std::domain_error("sigma_sq must be positive");
    if (!(x_min < x_max) || n < 2)
        throw std::domain_error("need x_min < x_max and n >= 2");
    if (!(hbar > 0.0)) throw std::domain_error("hbar must be positive");

    DensityMatrixGrid dm;
    dm.n = n;
    dm.dx = (x_max - x_min) / static_cast<double>(n);
    dm.x_min = x_min + 0.5 * dm.dx;  // cell-centred, matches the FPE grids
    dm.rho.resize(n * n);

    std::vector<std::complex<double>> psi(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = dm.x(i);
        const double mag = std::exp(-x * x / (4.0 * sigma_sq));
        psi[i] = std::polar(mag, p0 * x / hbar);
    }
    double norm = 0.0;
    for (const auto& a : psi) norm += std::norm(a);
    norm *= dm.dx;
    const double scale = 1.0 / std::sqrt(norm);
    for (auto& a : psi) a *= scale;

    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            dm.at(i, j) = psi[i] * std::conj(psi[j]);
    return dm;
}

double gaussian_wigner_exact(double x, double p, double sigma_sq, double p0,
                             double hbar) {
    const double dp = p - p0;
    return std::exp(-x * x / (2.0 * sigma_sq) -
                    2.0 * sigma_sq * dp * dp / (hbar * hbar)) /
           (std::numbers::pi * hbar);
}

WignerResult wigner_from_density(const DensityMatrixGrid& dm, double hbar) {
    dm.validate();
    if (!(hbar > 0.0 && std::isfinite(hbar)))
        throw std::domain_error("hbar must be positive and finite");
    const std::size_t n = dm.n;
    const double dx = dm.dx;
    const double dp = std::numbers::pi * hbar / (static_cast<double>(n) * dx);

    GridGeometry geom;
    geom.nx = n;
    geom.np = n;
    geom.x_min = dm.x_min - 0.5 * dx;
    geom.x_max = geom.x_min + static_cast<double>(n) * dx;
    // momentum centres at (m - n/2) dp for m = 0..n-1
    const double half = static_cast<double>(n) / 2.0;
    geom.p_min = (-half - 0.5) * dp;
    geom.p_max = geom.p_min + static_cast<double>(n) * dp;

    WignerResult res{PhaseSpaceGrid(geom), 0.0, 0.0};

    // Phase table: with dp dx2 / hbar = 2 pi / n the kernel collapses to
    // integer powers of the n-th root of unity.
    const auto ni = static_cast<long long>(n);
    std::vector<std::complex<double>> root(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double ang =
            -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
        root[k] = std::polar(1.0, ang);
    }

    std::vector<double> row_imag(n, 0.0);
    ThreadPool pool(thread_budget());
    pool.run(n, [&](std::size_t i) {
        const auto ii = static_cast<long long>(i);
        const long long jmax = std::min(ii, ni - 1 - ii);
        double worst_imag = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            const long long mm = static_cast<long long>(m) - ni / 2;
            std::complex<double> acc = dm.at(i, i);  // j = 0 term
            for (long long j = 1; j <= jmax; ++j) {
                const std::complex<double> pair =
                    dm.at(i + j, i - j) * root[static_cast<std::size_t>(
                                              (((mm * j) % ni) + ni) % ni)] +
                    dm.at(i - j, i + j) * root[static_cast<std::size_t>(
                                               (((-mm * j) % ni) + ni) % ni)];
                acc += pair;
            }
            const std::complex<double> w = acc * (dx / (std::numbers::pi * hbar));
            res.grid.at(i, m) = w.real();
            worst_imag = std::max(worst_imag, std::abs(w.imag()));
        }
        row_imag[i] = worst_imag;
    });
    for (double v : row_imag) res.max_imag = std::max(res.max_imag, v);

    res.norm_error = std::abs(res.grid.mass() - dm.trace());
    return res;
}

}  // namespace openturb
