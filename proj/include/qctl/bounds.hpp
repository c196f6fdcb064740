#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include "qctl/bloch.hpp"
#include "qctl/errors.hpp"
#include "qctl/schedule.hpp"

namespace qctl {

// sgn with the tie convention sgn(0) := +1, so outputs stay deterministic.
inline int sign_or_plus(double x) noexcept { return x < 0.0 ? -1 : +1; }

// Optimal purity-transfer motion: r_x == 0, theta == sigma*pi/2,
// R(t) = mu0 e^{-gamma t} + sigma (1 - e^{-gamma t}), reaching mu1 at
// T = (1/gamma) ln((1 - sigma mu0)/(1 - sigma mu1)).
struct PurityMotion {
    double T;
    int sigma;
    double mu0;
    double mu1;
    double gamma;

    double theta() const noexcept { return sigma * 0.5 * M_PI; }

    double R_of_t(double t) const noexcept {
        const double e = std::exp(-gamma * t);
        return mu0 * e + sigma * (1.0 - e);
    }

    // The motion as a constant-theta control schedule for the auxiliary system.
    ControlSchedule theta_schedule() const { return ControlSchedule::constant(T, theta()); }
};

inline PurityMotion purity_transfer_time(double mu0, double mu1, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("purity_transfer_time: gamma must be > 0");
    if (!(mu0 >= 0.0 && mu0 <= 1.0))
        throw std::invalid_argument("purity_transfer_time: mu0 outside [0, 1]");
    if (!(mu1 >= 0.0 && mu1 <= 1.0))
        throw std::invalid_argument("purity_transfer_time: mu1 outside [0, 1]");
    if (mu1 >= 1.0)
        throw NoFiniteTime("no control reaches purity level mu = 1 in finite time");
    const int sigma = sign_or_plus(mu1 - mu0);
    const double T = std::log((1.0 - sigma * mu0) / (1.0 - sigma * mu1)) / gamma;
    return {T, sigma, mu0, mu1, gamma};
}

// Two-point minimal-time estimates. When the upper bound exists it is
// constructed additively, so upper - lower == pi/omega + e/gamma exactly.
struct TimeBounds {
    double lower = 0.0;
    std::optional<double> upper;
    int sigma = +1;
    bool feasible_upper = false;  // mu1 <= 1 - (pi/2)(gamma/omega)
    bool reachable = false;       // mu1 < 1

    double gap() const noexcept { return upper ? *upper - lower : 0.0; }
};

inline double upper_bound_gap(const PhysParams& p) noexcept {
    return std::numbers::pi / p.omega + std::numbers::e / p.gamma;
}

inline double feasibility_cap(const PhysParams& p) noexcept {
    return 1.0 - 0.5 * std::numbers::pi * p.ratio();
}

inline TimeBounds two_point_bounds_mu(double mu0, double mu1, const PhysParams& params) {
    if (!(mu0 >= 0.0 && mu0 <= 1.0 + kStateTol) || !(mu1 >= 0.0 && mu1 <= 1.0 + kStateTol))
        throw std::invalid_argument("two_point_bounds: radii must lie in [0, 1]");
    mu0 = std::min(mu0, 1.0);
    mu1 = std::min(mu1, 1.0);

    TimeBounds tb;
    tb.sigma = sign_or_plus(mu1 - mu0);
    tb.reachable = mu1 < 1.0;
    tb.feasible_upper = mu1 <= feasibility_cap(params);

    if (mu1 >= 1.0) {
        if (mu0 < 1.0)
            throw NoFiniteTime("no control drives a mixed state to purity 1 in finite time");
        // Pure-to-pure: both logarithm arguments coincide, the lower bound is 0.
        tb.lower = 0.0;
        return tb;
    }
    tb.lower = (mu0 == mu1)
                   ? 0.0
                   : std::log((1.0 - tb.sigma * mu0) / (1.0 - tb.sigma * mu1)) / params.gamma;
    if (tb.feasible_upper) tb.upper = tb.lower + upper_bound_gap(params);
    return tb;
}

inline TimeBounds two_point_bounds(const BlochState& r0, const BlochState& r1,
                                   const PhysParams& params) {
    return two_point_bounds_mu(r0.norm(), r1.norm(), params);
}

// One row of the purity-to-purity bound surface.
struct Figure1Row {
    double P0;
    double P1;
    double lower;
    double upper;                      // exact: lower + pi/omega + e/gamma
    double upper_neglect_pi_over_omega;  // lower + e/gamma
};

// Grid of lower/upper estimates over purity pairs P0, P1 in [1/2, P_max],
// where P_max is set by the upper-bound feasibility cap.
inline std::vector<Figure1Row> figure1_grid(double gamma, double omega, int n) {
    if (n < 2) throw std::invalid_argument("figure1_grid: need n >= 2");
    const PhysParams params(omega, 1.0, gamma);
    const double mu_max = std::max(0.0, feasibility_cap(params));
    const double P_max = 0.5 * (1.0 + mu_max * mu_max);
    std::vector<Figure1Row> rows;
    rows.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        const double P0 = 0.5 + (P_max - 0.5) * i / (n - 1);
        for (int j = 0; j < n; ++j) {
            const double P1 = 0.5 + (P_max - 0.5) * j / (n - 1);
            const TimeBounds tb = two_point_bounds_mu(mu_of_purity(P0), mu_of_purity(P1), params);
            rows.push_back({P0, P1, tb.lower, tb.lower + upper_bound_gap(params),
                            tb.lower + std::numbers::e / gamma});
        }
    }
    return rows;
}

}  // namespace qctl
