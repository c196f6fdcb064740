#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <type_traits>
#include <vector>

#include "qctl/bloch.hpp"
#include "qctl/dynamics.hpp"
#include "qctl/errors.hpp"
#include "qctl/schedule.hpp"

namespace qctl {

struct IntegrateOptions {
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    double max_dt = std::numeric_limits<double>::infinity();
    std::size_t max_steps = 20'000'000;
    bool record_steps = true;         // keep every accepted step in the trajectory
    std::vector<double> record_at;    // additional exact sample times
    double state_slack = 1e-10;       // allowed overshoot of |r|^2 beyond 1
};

namespace detail {

// Dormand-Prince 5(4) embedded pair with FSAL. Integrates y over [t0, t1],
// invoking sink(t, y) after every accepted step; the final accepted step
// lands exactly on t1. A sink returning bool may request an early stop by
// returning true. Returns the worst accepted local error estimate.
template <std::size_t N, typename RHS, typename Sink>
double rk45_segment(RHS&& rhs, double t0, double t1, std::array<double, N>& y,
                    const IntegrateOptions& opts, std::size_t& steps_left, Sink&& sink) {
    using State = std::array<double, N>;
    if (!(t1 > t0)) return 0.0;

    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                            e4 = 125.0 / 192 - 393.0 / 640,
                            e5 = -2187.0 / 6784 + 92097.0 / 339200,
                            e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;

    double t = t0;
    double h = std::min(opts.max_dt, t1 - t0);
    double worst = 0.0;
    State k1 = rhs(t, y);  // invariant: k1 == rhs(t, y)

    while (true) {
        const double remaining = t1 - t;
        if (remaining <= 1e-14 * std::max(1.0, std::abs(t1))) break;
        if (steps_left == 0) throw IntegrationError("integration step budget exhausted");
        --steps_left;
        h = std::min(h, remaining);
        if (h < 1e-14 * std::max(1.0, std::abs(t)))
            throw IntegrationError("step size underflow at t = " + std::to_string(t));
        const bool last = h >= remaining * (1.0 - 1e-12);

        State w, k2, k3, k4, k5, k6, k7, ynew;
        for (std::size_t i = 0; i < N; ++i) w[i] = y[i] + h * a21 * k1[i];
        k2 = rhs(t + c2 * h, w);
        for (std::size_t i = 0; i < N; ++i) w[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        k3 = rhs(t + c3 * h, w);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        k4 = rhs(t + c4 * h, w);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        k5 = rhs(t + c5 * h, w);
        for (std::size_t i = 0; i < N; ++i)
            w[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
        k6 = rhs(t + h, w);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
        k7 = rhs(t + h, ynew);

        double err = 0.0;
        for (std::size_t i = 0; i < N; ++i) {
            const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] +
                                  e6 * k6[i] + e7 * k7[i]);
            const double sc =
                opts.abs_tol + opts.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            err += (e / sc) * (e / sc);
        }
        err = std::sqrt(err / static_cast<double>(N));

        if (err <= 1.0) {
            t = last ? t1 : t + h;
            y = ynew;
            k1 = k7;
            worst = std::max(worst, err);
            if constexpr (std::is_invocable_r_v<bool, Sink, double, const State&>) {
                if (sink(t, y)) break;
            } else {
                sink(t, y);
            }
        }
        const double fac = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(fac, 0.2, 5.0);
        h = std::min(h, opts.max_dt);
    }
    return worst * opts.rel_tol;
}

inline std::vector<double> merge_breakpoints(const ControlSchedule& sched,
                                             const IntegrateOptions& opts) {
    std::vector<double> bp{0.0, sched.horizon};
    for (const Piece& p : sched.pieces) {
        bp.push_back(p.t0);
        bp.push_back(p.t1);
    }
    for (const Impulse& im : sched.impulses) bp.push_back(im.t);
    for (double t : opts.record_at)
        if (t >= 0.0 && t <= sched.horizon) bp.push_back(t);
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-15; }),
             bp.end());
    return bp;
}

inline const Piece* active_piece(const ControlSchedule& sched, double tmid) {
    for (const Piece& p : sched.pieces)
        if (tmid >= p.t0 && tmid <= p.t1) return &p;
    return nullptr;
}

}  // namespace detail

// Sampled trajectory of the auxiliary planar system. Each sample carries the
// control angle in effect; control jumps appear as duplicated rows holding the
// left/right limits.
struct CylTrajectory {
    std::vector<double> t;
    std::vector<CylState> y;
    double tol_achieved = 0.0;

    double duration() const { return t.empty() ? 0.0 : t.back(); }
    const CylState& final_state() const { return y.back(); }
};

// Sampled trajectory of the 3D Bloch system; duplicated rows at impulses hold
// the pre/post rotation states.
struct BlochTrajectory {
    std::vector<double> t;
    std::vector<BlochState> y;
    double tol_achieved = 0.0;

    double duration() const { return t.empty() ? 0.0 : t.back(); }
    const BlochState& final_state() const { return y.back(); }
};

// Integrates the auxiliary system under a theta schedule from (r_x0, R0).
// The theta field of the start state is ignored; the control comes from the
// schedule pieces. Theta jumps leave (r_x, R) fixed.
inline CylTrajectory integrate_aux(const ControlSchedule& theta_sched, const CylState& start,
                                   const PhysParams& params, const IntegrateOptions& opts = {}) {
    theta_sched.validate();
    CylTrajectory out;
    std::array<double, 2> y{start.r_x, start.R};
    std::size_t steps_left = opts.max_steps;
    const std::vector<double> bp = detail::merge_breakpoints(theta_sched, opts);

    auto push = [&](double t, double theta) {
        out.t.push_back(t);
        out.y.push_back({y[0], y[1], theta});
        if (y[0] * y[0] + y[1] * y[1] > 1.0 + opts.state_slack)
            throw IntegrationError("state left the unit disk beyond slack at t = " +
                                   std::to_string(t));
    };

    const double tmid_first = bp.size() > 1 ? 0.5 * (bp[0] + bp[1]) : 0.0;
    const Piece* first_piece = detail::active_piece(theta_sched, tmid_first);
    const double theta_start = first_piece ? first_piece->eval(0.0) : 0.0;
    {
        double jump0 = 0.0;
        for (const Impulse& im : theta_sched.impulses)
            if (im.t <= 1e-15) jump0 += im.dtheta;
        if (jump0 != 0.0) push(0.0, theta_start - jump0);
    }
    push(0.0, theta_start);

    for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
        const double ta = bp[k], tb = bp[k + 1];
        if (!(tb > ta)) continue;
        const Piece* piece = detail::active_piece(theta_sched, 0.5 * (ta + tb));
        auto rhs = [&](double t, const std::array<double, 2>& s) -> std::array<double, 2> {
            const double th = piece ? piece->eval(t) : 0.0;
            return rhs_aux({s[0], s[1], th}, params);
        };
        const double seg_err = detail::rk45_segment<2>(
            rhs, ta, tb, y, opts, steps_left,
            [&](double t, const std::array<double, 2>&) {
                if (opts.record_steps || t == tb) push(t, piece ? piece->eval(t) : 0.0);
            });
        out.tol_achieved = std::max(out.tol_achieved, seg_err);

        const double th_left = piece ? piece->eval(tb) : 0.0;
        if (k + 2 < bp.size()) {
            const Piece* next = detail::active_piece(theta_sched, 0.5 * (tb + bp[k + 2]));
            const double th_right = next ? next->eval(tb) : 0.0;
            if (th_right != th_left) push(tb, th_right);
        } else {
            double jumpT = 0.0;
            for (const Impulse& im : theta_sched.impulses)
                if (im.t > 1e-15 && im.t >= theta_sched.horizon - 1e-15) jumpT += im.dtheta;
            if (jumpT != 0.0) push(tb, th_left + jumpT);
        }
    }
    return out;
}

// Integrates the 3D Bloch system under a u schedule from r0. Impulses are
// exact rotations about Ox applied between smooth arcs.
inline BlochTrajectory integrate_bloch(const ControlSchedule& u_sched, const BlochState& r0,
                                       const PhysParams& params,
                                       const IntegrateOptions& opts = {}) {
    u_sched.validate();
    BlochTrajectory out;
    std::array<double, 3> y{r0.x, r0.y, r0.z};
    std::size_t steps_left = opts.max_steps;
    const std::vector<double> bp = detail::merge_breakpoints(u_sched, opts);

    auto push = [&](double t) {
        out.t.push_back(t);
        out.y.push_back({y[0], y[1], y[2]});
        if (y[0] * y[0] + y[1] * y[1] + y[2] * y[2] > 1.0 + opts.state_slack)
            throw IntegrationError("state left the Bloch ball beyond slack at t = " +
                                   std::to_string(t));
    };
    auto rotate = [&](double dtheta) {
        const BlochState r = apply_impulse({y[0], y[1], y[2]}, dtheta);
        y = {r.x, r.y, r.z};
    };

    // Impulses at t = 0: record the pre-rotation state, then rotate.
    for (const Impulse& im : u_sched.impulses)
        if (im.t <= 1e-15 && im.dtheta != 0.0) {
            push(0.0);
            rotate(im.dtheta);
        }
    push(0.0);

    for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
        const double ta = bp[k], tb = bp[k + 1];
        if (!(tb > ta)) continue;
        const Piece* piece = detail::active_piece(u_sched, 0.5 * (ta + tb));
        auto rhs = [&](double t, const std::array<double, 3>& s) -> std::array<double, 3> {
            const double u = piece ? piece->eval(t) : 0.0;
            return rhs_3d({s[0], s[1], s[2]}, u, params);
        };
        const double seg_err = detail::rk45_segment<3>(
            rhs, ta, tb, y, opts, steps_left,
            [&](double t, const std::array<double, 3>&) {
                if (opts.record_steps || t == tb) push(t);
            });
        out.tol_achieved = std::max(out.tol_achieved, seg_err);

        // Interior impulses coincide with breakpoints by construction.
        if (tb < u_sched.horizon - 1e-15) {
            for (const Impulse& im : u_sched.impulses)
                if (std::abs(im.t - tb) <= 1e-15 && im.dtheta != 0.0) {
                    rotate(im.dtheta);
                    push(tb);
                }
        }
    }

    // Terminal impulses rotate the final state in zero time; the pre-rotation
    // row is the last segment sample.
    if (u_sched.horizon > 1e-15) {
        for (const Impulse& im : u_sched.impulses)
            if (im.t > 1e-15 && im.t >= u_sched.horizon - 1e-15 && im.dtheta != 0.0) {
                rotate(im.dtheta);
                push(u_sched.horizon);
            }
    }
    return out;
}

}  // namespace qctl
