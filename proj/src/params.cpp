#include "openturb/params.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace openturb {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::domain_error(what);
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

void PhysicalParams::validate() const {
    require(finite(mass) && mass > 0.0, "mass must be positive and finite");
    require(finite(epsilon) && epsilon >= 0.0, "epsilon must be >= 0 and finite");
    require(finite(gamma) && gamma >= 0.0, "gamma must be >= 0 and finite");
    require(finite(hbar) && hbar > 0.0, "hbar must be positive and finite");
}

void GrwParams::validate() const {
    require(finite(lambda) && lambda > 0.0, "lambda must be positive and finite");
    require(finite(alpha) && alpha > 0.0, "alpha must be positive and finite");
}

void ThermalParams::validate() const {
    require(finite(k) && k > 0.0, "k must be positive and finite");
    require(finite(T) && T >= 0.0, "T must be >= 0 and finite");
}

void InitialState::validate() const {
    require(finite(x0_sq) && x0_sq >= 0.0, "x0_sq must be >= 0 and finite");
    require(finite(p0_sq) && p0_sq >= 0.0, "p0_sq must be >= 0 and finite");
}

double epsilon_from_grw(const GrwParams& grw, double hbar, double mass) {
    grw.validate();
    require(finite(hbar) && hbar > 0.0, "hbar must be positive and finite");
    require(finite(mass) && mass > 0.0, "mass must be positive and finite");
    return hbar * hbar * grw.lambda * grw.alpha / (2.0 * mass * mass);
}

double epsilon_from_thermal(const ThermalParams& th, double gamma, double mass) {
    th.validate();
    require(finite(gamma) && gamma >= 0.0, "gamma must be >= 0 and finite");
    require(finite(mass) && mass > 0.0, "mass must be positive and finite");
    return 2.0 * gamma * th.k * th.T / mass;
}

double grw_localization_rate(double separation, const GrwParams& grw) {
    grw.validate();
    require(finite(separation), "separation must be finite");
    const double u = grw.alpha * separation * separation / 4.0;
    return grw.lambda * (-std::expm1(-u));
}

double quadratic_expansion_error(double separation, const GrwParams& grw) {
    grw.validate();
    require(finite(separation), "separation must be finite");
    const double u = grw.alpha * separation * separation / 4.0;
    if (u == 0.0) return 0.0;
    if (u < 1e-3) {
        // (u - (1 - e^-u)) / (1 - e^-u) = u/2 + u^2/12 - u^4/720 + u^6/30240 + ...
        const double u2 = u * u;
        return u * (0.5 + u / 12.0 + u2 * u / (-720.0) + u2 * u2 * u / 30240.0);
    }
    const double exact = -std::expm1(-u);
    return (u - exact) / exact;
}

}  // namespace openturb
