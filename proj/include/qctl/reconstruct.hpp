#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "qctl/dynamics.hpp"
#include "qctl/errors.hpp"
#include "qctl/integrate.hpp"
#include "qctl/schedule.hpp"

namespace qctl {

namespace detail {

// Monotone view of a cylindrical trajectory: duplicate-time rows are resolved
// to the right limit at t = 0, the left limit at t = T. Interior duplicates
// (control jumps) are rejected; the reconstruction needs smooth theta inside.
struct SmoothSamples {
    std::vector<double> t;
    std::vector<CylState> y;
};

inline SmoothSamples smooth_view(const CylTrajectory& traj) {
    if (traj.t.size() < 2) throw ReconstructionError("trajectory has too few samples");
    const double T = traj.t.back();
    SmoothSamples out;
    for (std::size_t i = 0; i < traj.t.size(); ++i) {
        if (!out.t.empty() && traj.t[i] == out.t.back()) {
            const bool at_start = traj.t[i] <= 0.0;
            const bool at_end = traj.t[i] >= T;
            if (!at_start && !at_end)
                throw ReconstructionError("control jump at interior time t = " +
                                          std::to_string(traj.t[i]) +
                                          "; reconstruction requires smooth theta on (0, T)");
            if (at_start) out.y.back() = traj.y[i];  // keep the right limit
            // at_end: keep the left limit, drop this row
            continue;
        }
        out.t.push_back(traj.t[i]);
        out.y.push_back(traj.y[i]);
    }
    return out;
}

// Three-point finite-difference slope on a nonuniform grid.
inline double fd_slope(const std::vector<double>& t, const std::vector<double>& v,
                       std::size_t i) {
    const std::size_t n = t.size();
    if (i == 0) return (v[1] - v[0]) / (t[1] - t[0]);
    if (i == n - 1) return (v[n - 1] - v[n - 2]) / (t[n - 1] - t[n - 2]);
    const double hl = t[i] - t[i - 1];
    const double hr = t[i + 1] - t[i];
    const double dl = (v[i] - v[i - 1]) / hl;
    const double dr = (v[i + 1] - v[i]) / hr;
    return (dl * hr + dr * hl) / (hl + hr);
}

}  // namespace detail

struct ReconstructOptions {
    double impulse_tol = 1e-15;      // impulses below this magnitude are omitted
    double endpoint_radius_tol = 1e-9;  // R below this at an endpoint uses the limit formula
    double removability_tol = 1e-6;  // allowed mismatch in the endpoint boundary relations
};

// Smooth part of the reconstructed control at one sample:
//   kappa u = theta_dot + omega [ (g/4w) sin 2theta + (1/R)(r_x sin theta - (g/w) cos theta) ].
// At an endpoint with R = 0 the 1/R term is evaluated by its removable-
// singularity limit, which exists when cos theta = w r_x / R_dot and
// sin theta = g / R_dot hold there.
inline double reconstruct_u_at(const CylState& s, double theta_dot, const PhysParams& p,
                               const ReconstructOptions& opts = {}) {
    if (std::abs(s.R) > opts.endpoint_radius_tol)
        return (theta_dot + p.omega * control_bracket(s, p)) / p.kappa;

    const Vec2 v = rhs_aux(s, p);
    const double Rdot = v[1];
    const double go = p.ratio();
    const double sn = std::sin(s.theta), cs = std::cos(s.theta);
    if (std::abs(Rdot) < 1e-12 ||
        std::abs(sn * Rdot - p.gamma) > opts.removability_tol * std::max(1.0, std::abs(Rdot)) ||
        std::abs(cs * Rdot - p.omega * s.r_x) >
            opts.removability_tol * std::max(1.0, std::abs(Rdot)))
        throw ReconstructionError("non-removable 1/R singularity at an endpoint with R = 0");
    // L'Hopital on (r_x sin theta - (g/w) cos theta) / R.
    const double num_dot = v[0] * sn + theta_dot * (s.r_x * cs + go * sn);
    const double bracket = 0.25 * go * std::sin(2.0 * s.theta) + num_dot / Rdot;
    return (theta_dot + p.omega * bracket) / p.kappa;
}

// Recovers the original control u(t) from an auxiliary-problem trajectory:
// two endpoint impulses (theta(0+) - theta0 at t = 0, theta1 - theta(T-) at
// t = T, zero-magnitude ones omitted) plus the smooth part above sampled on
// the trajectory grid. theta_dot is supplied by the caller; pass the exact
// derivative of the integrated control when it is known.
inline ControlSchedule reconstruct_u(const CylTrajectory& traj,
                                     const std::function<double(double)>& theta_dot,
                                     double theta0, double theta1, const PhysParams& params,
                                     const ReconstructOptions& opts = {}) {
    const detail::SmoothSamples s = detail::smooth_view(traj);
    const std::size_t n = s.t.size();
    const double T = s.t.back();

    for (std::size_t i = 0; i < n; ++i) {
        const bool interior = s.t[i] > 0.0 && s.t[i] < T;
        if (interior && s.y[i].R <= 0.0)
            throw ReconstructionError("R = 0 at interior time t = " + std::to_string(s.t[i]) +
                                      "; forbidden on reconstructible trajectories");
    }

    std::vector<double> us(n);
    for (std::size_t i = 0; i < n; ++i) us[i] = reconstruct_u_at(s.y[i], theta_dot(s.t[i]), params, opts);

    ControlSchedule u;
    u.horizon = T;
    const double jump0 = s.y.front().theta - theta0;
    const double jumpT = theta1 - s.y.back().theta;
    if (std::abs(jump0) > opts.impulse_tol) u.impulses.push_back({0.0, jump0});
    if (std::abs(jumpT) > opts.impulse_tol) u.impulses.push_back({T, jumpT});
    u.pieces.push_back(Piece::samples(s.t, us));
    return u;
}

// Finite-difference fallback: theta_dot estimated from the trajectory's own
// theta samples (exact for piecewise-constant controls).
inline ControlSchedule reconstruct_u(const CylTrajectory& traj, double theta0, double theta1,
                                     const PhysParams& params,
                                     const ReconstructOptions& opts = {}) {
    const detail::SmoothSamples s = detail::smooth_view(traj);
    std::vector<double> th(s.t.size());
    for (std::size_t i = 0; i < th.size(); ++i) th[i] = s.y[i].theta;
    auto deriv = [&](double t) {
        const auto it = std::lower_bound(s.t.begin(), s.t.end(), t);
        std::size_t i = static_cast<std::size_t>(it - s.t.begin());
        if (i >= s.t.size()) i = s.t.size() - 1;
        return detail::fd_slope(s.t, th, i);
    };
    return reconstruct_u(traj, deriv, theta0, theta1, params, opts);
}

}  // namespace qctl
