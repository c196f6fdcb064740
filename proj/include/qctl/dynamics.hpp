#pragma once

#include <array>
#include <cmath>

#include "qctl/bloch.hpp"
#include "qctl/errors.hpp"

namespace qctl {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

// Controlled Bloch equation rdot = omega*f0(r) + kappa*f1(r)*u:
//   f0(r) = [[0,-1,0],[1,0,0],[0,0,0]] r - (g/w) diag(1/2,1/2,1) r + (g/w)(0,0,1)^T
//   f1(r) = [[0,0,0],[0,0,-1],[0,1,0]] r
inline Vec3 rhs_3d(const BlochState& r, double u, const PhysParams& p) noexcept {
    const double g = p.gamma;
    return {
        -p.omega * r.y - 0.5 * g * r.x,
        p.omega * r.x - 0.5 * g * r.y - p.kappa * u * r.z,
        g * (1.0 - r.z) + p.kappa * u * r.y,
    };
}

// Auxiliary planar system where theta acts as the control:
//   (rx_dot, R_dot) = [[-g/2, -w cos(th)], [w cos(th), -(g/2)(1+sin^2 th)]] (r_x, R)
//                     + (0, g sin(th)).
inline Vec2 rhs_aux(const CylState& s, const PhysParams& p) noexcept {
    const double c = std::cos(s.theta);
    const double sn = std::sin(s.theta);
    const double g = p.gamma;
    return {
        -0.5 * g * s.r_x - p.omega * c * s.R,
        p.omega * c * s.r_x - 0.5 * g * (1.0 + sn * sn) * s.R + g * sn,
    };
}

// Bracket term shared by the theta-equation and the u <-> v substitution:
//   (g/4w) sin(2 th) + (1/R)(r_x sin(th) - (g/w) cos(th)).
// Well defined only for R != 0.
inline double control_bracket(const CylState& s, const PhysParams& p) {
    if (s.R == 0.0)
        throw DegenerateSubstitution("control substitution is degenerate at R = 0");
    const double c = std::cos(s.theta);
    const double sn = std::sin(s.theta);
    const double go = p.ratio();
    return 0.25 * go * std::sin(2.0 * s.theta) + (s.r_x * sn - go * c) / s.R;
}

// theta_dot = kappa*u - omega * bracket(s). Requires R != 0.
inline double rhs_cyl_theta(const CylState& s, double u, const PhysParams& p) {
    return p.kappa * u - p.omega * control_bracket(s, p);
}

// Control substitutions of the auxiliary problem, mutually inverse for R != 0:
//   v = (kappa/omega) u - bracket(s);   u = (omega/kappa) (v + bracket(s)).
inline double u_from_v_pointwise(double v, const CylState& s, const PhysParams& p) {
    return (p.omega / p.kappa) * (v + control_bracket(s, p));
}

inline double v_from_u_pointwise(double u, const CylState& s, const PhysParams& p) {
    return (p.kappa / p.omega) * u - control_bracket(s, p);
}

// Exact rotation of (r_y, r_z) by dtheta about the Ox axis; |r| is preserved.
inline BlochState apply_impulse(const BlochState& r, double dtheta) noexcept {
    const double c = std::cos(dtheta);
    const double s = std::sin(dtheta);
    return {r.x, c * r.y - s * r.z, s * r.y + c * r.z};
}

}  // namespace qctl
