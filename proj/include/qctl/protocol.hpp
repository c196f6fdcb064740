#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "qctl/bloch.hpp"
#include "qctl/bounds.hpp"
#include "qctl/errors.hpp"
#include "qctl/integrate.hpp"
#include "qctl/reconstruct.hpp"
#include "qctl/schedule.hpp"

namespace qctl {

// Three-phase almost-optimal transfer plan: a rotation arc that zeroes r_x,
// a radial purity leg along r_x == 0, and a rotation arc onto the target.
struct ProtocolPlan {
    double tau0 = 0.0;
    double tau_half = 0.0;
    double tau1 = 0.0;
    double total = 0.0;  // tau0 + tau_half + tau1, exactly
    std::array<double, 3> theta_pieces{0.0, 0.0, 0.0};
    double tildeR0 = 0.0;  // |r0| e^{-gamma tau0 / 2}
    double tildeR1 = 0.0;  // |r1| e^{+gamma tau1 / 2}
    int tilde_sigma = +1;
    std::vector<Impulse> v_impulses_raw;  // jumps as constructed, unreduced
    std::vector<Impulse> v_impulses;      // reduced to (-pi, pi], zeros omitted
};

struct Synthesis {
    ProtocolPlan plan;
    ControlSchedule theta;
    ControlSchedule v;
    std::optional<ControlSchedule> u;  // absent when the 1/R reconstruction is singular
    std::string u_note;
};

struct SynthesisOptions {
    bool build_u = true;
    std::size_t u_samples_per_phase = 400;
    IntegrateOptions integrate{};
};

namespace detail {

// arctan(r_x / R) with the conventions: sign(r_x) * pi/2 at R = 0, and 0 at
// the origin (the origin has no angular content).
inline double axis_angle(double r_x, double R) noexcept {
    if (r_x == 0.0) return 0.0;
    return std::atan2(r_x, R);
}

inline int sgn0(double x) noexcept { return (x > 0.0) - (x < 0.0); }

}  // namespace detail

inline Synthesis synthesize(const BlochState& r0, const BlochState& r1, double theta0,
                            double theta1, const PhysParams& params,
                            const SynthesisOptions& opts = {}) {
    const double mu0 = r0.norm();
    const double mu1 = r1.norm();
    if (mu1 >= 1.0 && mu0 < 1.0)
        throw NoFiniteTime("protocol: target purity 1 is unreachable in finite time");
    if (mu1 > feasibility_cap(params))
        throw InfeasibleTarget("protocol: |r1| > 1 - (pi/2)(gamma/omega), upper bound not "
                               "guaranteed; no plan synthesized");

    const CylState c0 = bloch_to_cyl(r0);
    const CylState c1 = bloch_to_cyl(r1);

    ProtocolPlan plan;
    const double a0 = detail::axis_angle(c0.r_x, c0.R);
    const double a1 = detail::axis_angle(c1.r_x, c1.R);
    plan.tau0 = std::abs(a0) / params.omega;
    plan.tau1 = std::abs(a1) / params.omega;
    plan.tildeR0 = mu0 * std::exp(-0.5 * params.gamma * plan.tau0);
    plan.tildeR1 = mu1 * std::exp(+0.5 * params.gamma * plan.tau1);
    plan.tilde_sigma = sign_or_plus(plan.tildeR1 - plan.tildeR0);
    plan.tau_half = (plan.tildeR0 == plan.tildeR1)
                        ? 0.0
                        : std::log((1.0 - plan.tilde_sigma * plan.tildeR0) /
                                   (1.0 - plan.tilde_sigma * plan.tildeR1)) /
                              params.gamma;
    plan.total = plan.tau0 + plan.tau_half + plan.tau1;
    plan.theta_pieces = {0.5 * M_PI * (1.0 - detail::sgn0(a0)),
                         plan.tilde_sigma * 0.5 * M_PI,
                         0.5 * M_PI * (1.0 + detail::sgn0(a1))};

    // Active phases in time order.
    struct Phase {
        double t0, t1, theta;
    };
    std::vector<Phase> phases;
    double tcur = 0.0;
    const std::array<double, 3> durations{plan.tau0, plan.tau_half, plan.tau1};
    for (int i = 0; i < 3; ++i) {
        if (durations[i] > 0.0) {
            phases.push_back({tcur, tcur + durations[i], plan.theta_pieces[i]});
            tcur += durations[i];
        }
    }

    Synthesis out;
    out.theta.horizon = plan.total;
    for (const Phase& ph : phases) out.theta.pieces.push_back(Piece::constant(ph.t0, ph.t1, ph.theta));

    // Jumps of theta: into the first phase, between phases, and onto theta1.
    std::vector<Impulse> raw;
    if (phases.empty()) {
        raw.push_back({0.0, theta1 - theta0});
    } else {
        raw.push_back({0.0, phases.front().theta - theta0});
        for (std::size_t i = 0; i + 1 < phases.size(); ++i)
            raw.push_back({phases[i].t1, phases[i + 1].theta - phases[i].theta});
        raw.push_back({plan.total, theta1 - phases.back().theta});
    }
    plan.v_impulses_raw = raw;
    // Reduce mod 2*pi to (-pi, pi], merge same-time jumps, drop zeros.
    for (const Impulse& im : raw) {
        const double red = wrap_angle(im.dtheta);
        if (std::abs(red) <= 1e-15) continue;
        if (!plan.v_impulses.empty() && std::abs(plan.v_impulses.back().t - im.t) <= 1e-15) {
            plan.v_impulses.back().dtheta = wrap_angle(plan.v_impulses.back().dtheta + red);
            if (std::abs(plan.v_impulses.back().dtheta) <= 1e-15) plan.v_impulses.pop_back();
        } else {
            plan.v_impulses.push_back({im.t, red});
        }
    }

    out.v.horizon = plan.total;
    out.v.impulses = plan.v_impulses;
    if (plan.total > 0.0) out.v.pieces.push_back(Piece::constant(0.0, plan.total, 0.0));
    out.theta.impulses = plan.v_impulses;

    if (opts.build_u) {
        try {
            ControlSchedule u;
            u.horizon = plan.total;
            u.impulses = plan.v_impulses;
            CylState s = c0;
            for (const Phase& ph : phases) {
                ControlSchedule leg = ControlSchedule::constant(ph.t1 - ph.t0, ph.theta);
                IntegrateOptions iopts = opts.integrate;
                iopts.max_dt = std::max((ph.t1 - ph.t0) / static_cast<double>(opts.u_samples_per_phase),
                                        1e-12);
                const CylTrajectory leg_traj = integrate_aux(leg, s, params, iopts);
                ControlSchedule leg_u = reconstruct_u(
                    leg_traj, [](double) { return 0.0; }, ph.theta, ph.theta, params);
                Piece piece = leg_u.pieces.front();
                for (double& t : piece.ts) t += ph.t0;
                piece.t0 += ph.t0;
                piece.t1 = ph.t1;
                u.pieces.push_back(std::move(piece));
                const CylState end = leg_traj.final_state();
                s = {end.r_x, end.R, ph.theta};
            }
            out.u = std::move(u);
        } catch (const ReconstructionError& e) {
            out.u.reset();
            out.u_note = e.what();
        }
    }

    out.plan = plan;
    return out;
}

// Endpoint angles default to the cylindrical images of the Bloch endpoints.
inline Synthesis synthesize(const BlochState& r0, const BlochState& r1, const PhysParams& params,
                            const SynthesisOptions& opts = {}) {
    return synthesize(r0, r1, bloch_to_cyl(r0).theta, bloch_to_cyl(r1).theta, params, opts);
}

// Simulation report for a synthesized plan.
struct ProtocolReport {
    double endpoint_err_aux = 0.0;
    std::optional<double> endpoint_err_3d;
    double elapsed = 0.0;
    TimeBounds bounds;
    bool within_bounds = false;
    bool passed = false;
};

inline ProtocolReport validate(const Synthesis& synth, const BlochState& r0, const BlochState& r1,
                               const PhysParams& params, double tol = 1e-6,
                               const IntegrateOptions& iopts = {}) {
    ProtocolReport rep;
    const CylState c0 = bloch_to_cyl(r0);
    const CylState c1 = bloch_to_cyl(r1);

    const CylTrajectory aux = integrate_aux(synth.theta, c0, params, iopts);
    const CylState aux_end = aux.final_state();
    rep.endpoint_err_aux = std::hypot(aux_end.r_x - c1.r_x, aux_end.R - c1.R);
    rep.elapsed = aux.duration();

    if (synth.u) {
        const BlochTrajectory tr = integrate_bloch(*synth.u, r0, params, iopts);
        const BlochState e = tr.final_state();
        rep.endpoint_err_3d = std::sqrt((e.x - r1.x) * (e.x - r1.x) + (e.y - r1.y) * (e.y - r1.y) +
                                        (e.z - r1.z) * (e.z - r1.z));
    }

    rep.bounds = two_point_bounds(r0, r1, params);
    rep.within_bounds = synth.plan.total >= rep.bounds.lower - 1e-9 &&
                        (!rep.bounds.upper || synth.plan.total <= *rep.bounds.upper + 1e-9);
    rep.passed = rep.endpoint_err_aux <= tol &&
                 (!rep.endpoint_err_3d || *rep.endpoint_err_3d <= tol) && rep.within_bounds;
    return rep;
}

}  // namespace qctl
