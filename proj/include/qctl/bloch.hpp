#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "qctl/errors.hpp"

namespace qctl {

// Numerical slack for state-validity checks. Set so that accumulated
// integration error does not trigger spurious rejections.
inline constexpr double kStateTol = 1e-12;

// Physical constants of the controlled qubit: transition frequency omega,
// control coupling kappa, decay rate gamma. All strictly positive.
struct PhysParams {
    double omega;
    double kappa;
    double gamma;

    PhysParams(double omega_, double kappa_, double gamma_)
        : omega(omega_), kappa(kappa_), gamma(gamma_) {
        if (!(omega > 0.0) || !std::isfinite(omega))
            throw std::invalid_argument("PhysParams: omega must be finite and > 0");
        if (!(kappa > 0.0) || !std::isfinite(kappa))
            throw std::invalid_argument("PhysParams: kappa must be finite and > 0");
        if (!(gamma > 0.0) || !std::isfinite(gamma))
            throw std::invalid_argument("PhysParams: gamma must be finite and > 0");
        if (!std::isfinite(gamma / omega))
            throw std::invalid_argument("PhysParams: gamma/omega must be finite");
    }

    // gamma/omega, the dimensionless decoherence-to-rotation ratio.
    double ratio() const noexcept { return gamma / omega; }
};

// Bloch vector of a qubit state, |r| <= 1.
struct BlochState {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm2() const noexcept { return x * x + y * y + z * z; }
    double norm() const noexcept { return std::sqrt(norm2()); }
    bool valid(double tol = kStateTol) const noexcept { return norm() <= 1.0 + tol; }
};

// Cylindrical image of a Bloch vector with the axis along Ox:
//   r_y = R cos(theta), r_z = R sin(theta).
// Canonical form has R >= 0; theta is kept unwrapped (in R, not mod 2*pi).
struct CylState {
    double r_x = 0.0;
    double R = 0.0;
    double theta = 0.0;

    double radial2() const noexcept { return r_x * r_x + R * R; }
    double radial() const noexcept { return std::sqrt(radial2()); }
    bool valid(double tol = kStateTol) const noexcept { return radial2() <= 1.0 + 2.0 * tol; }

    // Applies the reflection (R, theta) -> (-R, theta + pi) if R < 0. The
    // reflection leaves the Bloch image fixed.
    CylState canonical() const noexcept {
        if (R < 0.0) return {r_x, -R, theta + M_PI};
        return *this;
    }
};

// 2x2 Hermitian unit-trace matrix stored as the real diagonal pair plus the
// complex upper off-diagonal entry rho01 = re01 + i*im01.
struct DensityMatrix {
    double rho00 = 0.5;
    double rho11 = 0.5;
    double re01 = 0.0;
    double im01 = 0.0;

    double trace() const noexcept { return rho00 + rho11; }

    // Smaller eigenvalue; must be >= -tol for a physical state.
    double min_eigenvalue() const noexcept {
        const double d = rho00 - rho11;
        const double s = std::sqrt(d * d + 4.0 * (re01 * re01 + im01 * im01));
        return 0.5 * (trace() - s);
    }

    void validate(double tol = kStateTol) const {
        if (std::abs(trace() - 1.0) > tol)
            throw std::invalid_argument("DensityMatrix: trace != 1 (got " +
                                        std::to_string(trace()) + ")");
        if (min_eigenvalue() < -tol)
            throw std::invalid_argument("DensityMatrix: negative eigenvalue beyond tolerance");
    }
};

// r_i = tr(rho sigma_i). Throws on an invalid density matrix.
inline BlochState density_to_bloch(const DensityMatrix& rho, double tol = kStateTol) {
    rho.validate(tol);
    return {2.0 * rho.re01, -2.0 * rho.im01, rho.rho00 - rho.rho11};
}

inline DensityMatrix bloch_to_density(const BlochState& r) {
    return {0.5 * (1.0 + r.z), 0.5 * (1.0 - r.z), 0.5 * r.x, -0.5 * r.y};
}

// R = sqrt(r_y^2 + r_z^2), theta = atan2(r_z, r_y); theta := 0 at R = 0
// (any value maps to the same Bloch vector there).
inline CylState bloch_to_cyl(const BlochState& r) noexcept {
    const double R = std::hypot(r.y, r.z);
    const double theta = (R == 0.0) ? 0.0 : std::atan2(r.z, r.y);
    return {r.x, R, theta};
}

inline BlochState cyl_to_bloch(const CylState& c) noexcept {
    return {c.r_x, c.R * std::cos(c.theta), c.R * std::sin(c.theta)};
}

// Purity P = (1 + |r|^2) / 2 in [1/2, 1].
inline double purity(const BlochState& r) noexcept { return 0.5 * (1.0 + r.norm2()); }

// Bloch radius mu = sqrt(2P - 1) for a purity level P in [1/2, 1].
inline double mu_of_purity(double P) {
    if (!(P >= 0.5 && P <= 1.0))
        throw std::invalid_argument("mu_of_purity: purity must lie in [1/2, 1], got " +
                                    std::to_string(P));
    return std::sqrt(2.0 * P - 1.0);
}

}  // namespace qctl
