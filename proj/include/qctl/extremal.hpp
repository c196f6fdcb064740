#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "qctl/bloch.hpp"
#include "qctl/bounds.hpp"
#include "qctl/dynamics.hpp"
#include "qctl/errors.hpp"
#include "qctl/integrate.hpp"

namespace qctl {

// Phase point of the auxiliary problem together with its covector.
struct ExtremalState {
    double r_x = 0.0;
    double R = 0.0;
    double p = 0.0;
    double q = 0.0;
};

// Tangent vector (xi, eta) of the admissible-velocity boundary at angle theta,
// in per-omega units: xi = R sin(th), eta = (g/w) cos(th)(1 - R sin(th)) - r_x sin(th).
struct TangentPair {
    double xi;
    double eta;
};

inline TangentPair tangent_pair(const CylState& s, const PhysParams& p) noexcept {
    const double sn = std::sin(s.theta), cs = std::cos(s.theta);
    return {s.R * sn, p.ratio() * cs * (1.0 - s.R * sn) - s.r_x * sn};
}

namespace detail {

// H(theta) = K + A cos(th) + B sin(th) + C sin^2(th), a degree-2 trigonometric
// polynomial; its coefficients carry the whole covector dependence.
struct HamCoeffs {
    double K, A, B, C;

    static HamCoeffs make(const ExtremalState& s, const PhysParams& prm) noexcept {
        return {-0.5 * prm.gamma * (s.p * s.r_x + s.q * s.R),
                prm.omega * (s.q * s.r_x - s.p * s.R), prm.gamma * s.q,
                -0.5 * prm.gamma * s.q * s.R};
    }
    double eval(double c, double sn) const noexcept { return K + A * c + B * sn + C * sn * sn; }
    double deriv(double c, double sn) const noexcept {
        return -A * sn + B * c + 2.0 * C * sn * c;
    }
    double second(double c, double sn) const noexcept {
        return -A * c - B * sn + 2.0 * C * (c * c - sn * sn);
    }
};

inline constexpr int kThetaGrid = 256;

struct ThetaTable {
    std::array<double, kThetaGrid> cs, sn;
    ThetaTable() {
        for (int k = 0; k < kThetaGrid; ++k) {
            const double th = 2.0 * M_PI * k / kThetaGrid;
            cs[k] = std::cos(th);
            sn[k] = std::sin(th);
        }
    }
};

inline const ThetaTable& theta_table() {
    static const ThetaTable t;
    return t;
}

}  // namespace detail

// Pontryagin function H = p * rx_dot + q * R_dot of the auxiliary system.
inline double hamiltonian(const ExtremalState& s, double theta, const PhysParams& prm) noexcept {
    const Vec2 v = rhs_aux({s.r_x, s.R, theta}, prm);
    return s.p * v[0] + s.q * v[1];
}

// Unique pointwise maximizer of H over theta in [0, 2*pi), defined whenever
// R^2 + q^2 != 0. Grid scan isolates the maximum (H is a degree-2 trig
// polynomial, so 256 points cannot miss it), then a safeguarded Newton push
// on dH/dtheta reaches |dH/dtheta| <= 1e-12.
inline double theta_max(const ExtremalState& s, const PhysParams& prm) {
    if (s.p == 0.0 && s.q == 0.0)
        throw DegenerateCovector("theta_max: covector (p, q) must be nontrivial");
    if (s.R == 0.0 && s.q == 0.0)
        throw DegenerateCovector("theta_max: H has no unique maximizer at R = q = 0");

    const detail::HamCoeffs hc = detail::HamCoeffs::make(s, prm);
    const detail::ThetaTable& tab = detail::theta_table();
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < detail::kThetaGrid; ++k) {
        const double v = hc.eval(tab.cs[k], tab.sn[k]);
        if (v > best_val) {
            best_val = v;
            best = k;
        }
    }
    const double spacing = 2.0 * M_PI / detail::kThetaGrid;
    double lo = (best - 1) * spacing, hi = (best + 1) * spacing;

    // Golden-section shrink, then Newton polish.
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = hc.eval(std::cos(x1), std::sin(x1));
    double f2 = hc.eval(std::cos(x2), std::sin(x2));
    for (int it = 0; it < 40; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = hc.eval(std::cos(x2), std::sin(x2));
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = hc.eval(std::cos(x1), std::sin(x1));
        }
    }
    double th = 0.5 * (lo + hi);
    for (int it = 0; it < 8; ++it) {
        const double c = std::cos(th), sn = std::sin(th);
        const double d1 = hc.deriv(c, sn);
        const double d2 = hc.second(c, sn);
        if (std::abs(d1) <= 1e-13 || d2 >= 0.0 || std::abs(d2) < 1e-300) break;
        th -= d1 / d2;
    }
    th = std::fmod(th, 2.0 * M_PI);
    if (th < 0.0) th += 2.0 * M_PI;
    return th;
}

// Curvature-style invariant of the admissible-velocity boundary,
// xi'_theta * eta - xi * eta'_theta, returned both in closed form,
// (g/w) R (1 - R sin^3(th)), and by central finite differences.
struct Curvature {
    double closed_form;
    double finite_diff;
};

inline Curvature curvature(const CylState& s, const PhysParams& prm, double h = 1e-5) noexcept {
    const double sn = std::sin(s.theta);
    const double closed = prm.ratio() * s.R * (1.0 - s.R * sn * sn * sn);
    const TangentPair tp = tangent_pair(s, prm);
    const TangentPair tp_p = tangent_pair({s.r_x, s.R, s.theta + h}, prm);
    const TangentPair tp_m = tangent_pair({s.r_x, s.R, s.theta - h}, prm);
    const double dxi = (tp_p.xi - tp_m.xi) / (2.0 * h);
    const double deta = (tp_p.eta - tp_m.eta) / (2.0 * h);
    return {closed, dxi * tp.eta - tp.xi * deta};
}

// PMP flow: phase part from the auxiliary system at theta = theta_M, covector
// part from pdot = -dH/dr_x, qdot = -dH/dR evaluated at theta_M:
//   pdot / w = (g/2w) p - q cos(th),  qdot / w = p cos(th) + (g/2w)(1 + sin^2(th)) q.
inline std::array<double, 4> extremal_rhs_at(const ExtremalState& s, double theta,
                                             const PhysParams& prm) noexcept {
    const Vec2 v = rhs_aux({s.r_x, s.R, theta}, prm);
    const double c = std::cos(theta), sn = std::sin(theta);
    return {v[0], v[1], 0.5 * prm.gamma * s.p - prm.omega * s.q * c,
            prm.omega * s.p * c + 0.5 * prm.gamma * (1.0 + sn * sn) * s.q};
}

inline std::array<double, 4> extremal_rhs(const ExtremalState& s, const PhysParams& prm) {
    return extremal_rhs_at(s, theta_max(s, prm), prm);
}

struct ExtremalTrajectory {
    std::vector<double> t;
    std::vector<ExtremalState> y;
    std::vector<double> theta;  // theta_M along the flow
    double tol_achieved = 0.0;

    double duration() const { return t.empty() ? 0.0 : t.back(); }
    const ExtremalState& final_state() const { return y.back(); }
};

inline ExtremalTrajectory integrate_extremal(const ExtremalState& s0, double T,
                                             const PhysParams& prm,
                                             const IntegrateOptions& opts = {},
                                             std::size_t* eval_count = nullptr) {
    ExtremalTrajectory out;
    std::array<double, 4> y{s0.r_x, s0.R, s0.p, s0.q};
    std::size_t steps_left = opts.max_steps;
    auto rhs = [&](double, const std::array<double, 4>& v) -> std::array<double, 4> {
        if (eval_count) ++*eval_count;
        const ExtremalState es{v[0], v[1], v[2], v[3]};
        return extremal_rhs(es, prm);
    };
    auto push = [&](double t) {
        const ExtremalState es{y[0], y[1], y[2], y[3]};
        out.t.push_back(t);
        out.y.push_back(es);
        out.theta.push_back(theta_max(es, prm));
    };
    push(0.0);
    if (T > 0.0) {
        out.tol_achieved = detail::rk45_segment<4>(
            rhs, 0.0, T, y, opts, steps_left,
            [&](double t, const std::array<double, 4>&) {
                if (opts.record_steps || t == T) push(t);
            });
    }
    return out;
}

// Number of sign changes of R(t) over the open interval (0, T), detected on
// the sampled values; |R| below tol is treated as exactly zero and skipped.
inline int count_R_zeros(const std::vector<double>& t, const std::vector<double>& R,
                         double tol = 1e-14) {
    if (t.size() < 3) return 0;
    const double T = t.back();
    int crossings = 0;
    int last_sign = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (!(t[i] > 0.0 && t[i] < T)) continue;
        if (std::abs(R[i]) <= tol) continue;
        const int s = R[i] > 0.0 ? +1 : -1;
        if (last_sign != 0 && s != last_sign) ++crossings;
        last_sign = s;
    }
    return crossings;
}

inline int count_R_zeros(const ExtremalTrajectory& traj, double tol = 1e-14) {
    std::vector<double> R(traj.y.size());
    for (std::size_t i = 0; i < R.size(); ++i) R[i] = traj.y[i].R;
    return count_R_zeros(traj.t, R, tol);
}

inline int count_R_zeros(const CylTrajectory& traj, double tol = 1e-14) {
    std::vector<double> R(traj.y.size());
    for (std::size_t i = 0; i < R.size(); ++i) R[i] = traj.y[i].R;
    return count_R_zeros(traj.t, R, tol);
}

// ---------------------------------------------------------------------------
// Shooting: one-parameter search over the initial covector direction phi0
// (|(p, q)| = 1 by homogeneity of the maximum principle) plus the arrival
// time. Coarse scan with fixed-step integration and nearest-approach
// recording, then local refinement.
// ---------------------------------------------------------------------------

struct ShootConfig {
    int n_scan = 720;
    int scan_steps = 1000;
    double endpoint_tol = 1e-8;
    double time_cap = 0.0;  // 0: derived from the two-point bounds
    int refine_candidates = 16;
    int max_iters = 60;
    // Bounded per-call budget: angles that graze the degenerate set R = q = 0
    // stall the step controller and must fail fast, not hang the scan.
    IntegrateOptions integrate{1e-10, 1e-13, std::numeric_limits<double>::infinity(), 2'000'000};
};

struct ShootResult {
    bool found = false;
    double T_star = 0.0;
    double phi0 = 0.0;
    double residual = std::numeric_limits<double>::infinity();
    std::size_t n_evals = 0;
    ExtremalTrajectory trajectory;
};

// Goal of a shooting run: a phase point or a purity level.
struct PointGoal {
    double r_x;
    double R;  // canonical, R >= 0
};
struct PurityGoal {
    double mu1;
};

namespace detail {

template <typename RHS>
inline void rk4_fixed4(RHS&& rhs, std::array<double, 4>& y, double dt) {
    const auto k1 = rhs(y);
    std::array<double, 4> w;
    for (int i = 0; i < 4; ++i) w[i] = y[i] + 0.5 * dt * k1[i];
    const auto k2 = rhs(w);
    for (int i = 0; i < 4; ++i) w[i] = y[i] + 0.5 * dt * k2[i];
    const auto k3 = rhs(w);
    for (int i = 0; i < 4; ++i) w[i] = y[i] + dt * k3[i];
    const auto k4 = rhs(w);
    for (int i = 0; i < 4; ++i)
        y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

inline double default_time_cap(double mu0, double mu1, const PhysParams& prm) {
    const TimeBounds tb = two_point_bounds_mu(std::min(mu0, 1.0), std::min(mu1, 1.0), prm);
    const double base = tb.upper ? *tb.upper : tb.lower + upper_bound_gap(prm);
    return 1.05 * base + 0.1 / prm.gamma;
}

}  // namespace detail

// Endpoint map of the extremal flow; integrates adaptively to time T.
inline ExtremalState extremal_endpoint(const CylState& start, double phi0, double T,
                                       const PhysParams& prm, const IntegrateOptions& opts,
                                       std::size_t* evals) {
    std::array<double, 4> y{start.r_x, start.R, std::cos(phi0), std::sin(phi0)};
    std::size_t steps_left = opts.max_steps;
    auto rhs = [&](double, const std::array<double, 4>& v) -> std::array<double, 4> {
        if (evals) ++*evals;
        return extremal_rhs({v[0], v[1], v[2], v[3]}, prm);
    };
    if (T > 0.0)
        detail::rk45_segment<4>(rhs, 0.0, T, y, opts, steps_left,
                                [](double, const std::array<double, 4>&) {});
    return {y[0], y[1], y[2], y[3]};
}

inline ShootResult shoot(const CylState& start, const PointGoal& goal, const PhysParams& prm,
                         const ShootConfig& cfg = {}) {
    ShootResult res;
    const double mu0 = std::hypot(start.r_x, start.R);
    const double mu1 = std::hypot(goal.r_x, goal.R);
    if (!(mu1 < 1.0) && mu1 > mu0)
        throw NoFiniteTime("shoot: target on the unit circle is unreachable");
    const double cap = cfg.time_cap > 0.0 ? cfg.time_cap : detail::default_time_cap(mu0, mu1, prm);

    const double d0 = std::min(std::hypot(start.r_x - goal.r_x, start.R - goal.R),
                               std::hypot(start.r_x - goal.r_x, start.R + goal.R));
    if (d0 <= cfg.endpoint_tol) {
        res.found = true;
        res.T_star = 0.0;
        res.residual = d0;
        res.trajectory.t = {0.0};
        res.trajectory.y = {{start.r_x, start.R, 0.0, 1.0}};
        res.trajectory.theta = {0.0};
        return res;
    }

    // Per angle, record every local minimum in time of the approach distance
    // for both the goal and its reflected image. Keeping early-time minima in
    // the pool matters: the minimal-time extremal typically rides a transverse-
    // unstable arc, so at scan resolution it only approaches the goal to
    // O(grid spacing x sensitivity) while slow stable extremals pass much
    // closer. Ranking by distance alone would lock onto the slow ones.
    struct Candidate {
        double phi, t, dist;
        int branch;  // +1: goal as given, -1: reflected image (r_x, -R)
    };
    std::vector<Candidate> pool;
    const double dt = cap / cfg.scan_steps;

    auto sweep = [&](double phi, double t_end, int branch_filter, Candidate& best,
                     std::vector<Candidate>* minima) {
        std::array<double, 4> y{start.r_x, start.R, std::cos(phi), std::sin(phi)};
        auto rhs = [&](const std::array<double, 4>& v) -> std::array<double, 4> {
            ++res.n_evals;
            return extremal_rhs({v[0], v[1], v[2], v[3]}, prm);
        };
        const int nsteps = static_cast<int>(std::ceil(t_end / dt));
        double dp_prev2 = -1.0, dp_prev = -1.0, dm_prev2 = -1.0, dm_prev = -1.0;
        best = {phi, 0.0, std::numeric_limits<double>::infinity(), +1};
        try {
            for (int s = 0; s <= nsteps; ++s) {
                const double dplus = std::hypot(y[0] - goal.r_x, y[1] - goal.R);
                const double dminus = std::hypot(y[0] - goal.r_x, y[1] + goal.R);
                if (branch_filter >= 0 && dplus < best.dist) best = {phi, s * dt, dplus, +1};
                if (branch_filter <= 0 && dminus < best.dist) best = {phi, s * dt, dminus, -1};
                if (minima && s >= 2) {
                    if (dp_prev <= dp_prev2 && dp_prev <= dplus)
                        minima->push_back({phi, (s - 1) * dt, dp_prev, +1});
                    if (dm_prev <= dm_prev2 && dm_prev <= dminus)
                        minima->push_back({phi, (s - 1) * dt, dm_prev, -1});
                }
                dp_prev2 = dp_prev;
                dp_prev = dplus;
                dm_prev2 = dm_prev;
                dm_prev = dminus;
                if (s < nsteps) detail::rk4_fixed4(rhs, y, dt);
            }
            if (minima) {
                minima->push_back({phi, nsteps * dt, dp_prev, +1});
                minima->push_back({phi, nsteps * dt, dm_prev, -1});
            }
        } catch (const DegenerateCovector&) {
            // isolated covector angles can hit R = q = 0 exactly; skip them
        } catch (const IntegrationError&) {
        }
    };

    for (int k = 0; k < cfg.n_scan; ++k) {
        Candidate unused;
        sweep(2.0 * M_PI * k / cfg.n_scan, cap, 0, unused, &pool);
    }
    if (pool.empty()) return res;

    // Cluster the pool on (branch, phi, t) buckets, keep the closest
    // representative of each cluster, then select the closest clusters plus
    // the earliest reasonably-close ones.
    std::sort(pool.begin(), pool.end(),
              [](const Candidate& a, const Candidate& b) { return a.dist < b.dist; });
    std::vector<Candidate> clusters;
    const double phi_bucket = 16.0 * M_PI / cfg.n_scan;
    const double t_bucket = 0.04 * cap;
    for (const Candidate& c : pool) {
        bool taken = false;
        for (const Candidate& rep : clusters)
            if (rep.branch == c.branch && std::abs(rep.phi - c.phi) < phi_bucket &&
                std::abs(rep.t - c.t) < t_bucket) {
                taken = true;
                break;
            }
        if (!taken) clusters.push_back(c);
    }
    std::vector<Candidate> cands;
    const int half = std::max(1, cfg.refine_candidates / 2);
    for (int i = 0; i < static_cast<int>(clusters.size()) && i < half; ++i)
        cands.push_back(clusters[i]);
    const double d_gate = std::max(8.0 * clusters.front().dist, 0.15);
    std::vector<Candidate> early;
    for (const Candidate& c : clusters)
        if (c.dist <= d_gate) early.push_back(c);
    std::sort(early.begin(), early.end(),
              [](const Candidate& a, const Candidate& b) { return a.t < b.t; });
    for (const Candidate& c : early) {
        if (static_cast<int>(cands.size()) >= cfg.refine_candidates) break;
        cands.push_back(c);
    }

    double bestT = std::numeric_limits<double>::infinity();
    double bestPhi = 0.0;
    double bestRes = std::numeric_limits<double>::infinity();
    for (Candidate c : cands) {
        res.residual = std::min(res.residual, c.dist);
        if (std::isfinite(bestT) && c.t > bestT + dt) continue;  // cannot beat the incumbent

        // Hierarchical angle zoom: re-scan successively narrower phi windows
        // around the candidate so transverse-unstable arcs are resolved before
        // Newton takes over. The time window excludes later, slower passes.
        double span = 2.0 * M_PI / cfg.n_scan;
        const double t_end = std::min(cap, 3.0 * c.t + 0.5 / prm.gamma);
        for (int level = 0; level < 3; ++level) {
            Candidate best_local = c;
            for (int j = -8; j <= 8; ++j) {
                const double phi = c.phi + span * j / 8.0;
                Candidate b;
                sweep(phi, t_end, c.branch, b, nullptr);
                if (b.dist < best_local.dist) best_local = b;
            }
            c = best_local;
            span /= 8.0;
        }

        double phi = c.phi, T = std::max(c.t, 1e-12);
        const double Rgoal = c.branch * goal.R;
        auto residual = [&](double ph, double tt) -> std::array<double, 2> {
            try {
                const ExtremalState e =
                    extremal_endpoint(start, ph, tt, prm, cfg.integrate, &res.n_evals);
                return {e.r_x - goal.r_x, e.R - Rgoal};
            } catch (const DegenerateCovector&) {
                return {1e6, 1e6};
            } catch (const IntegrationError&) {
                return {1e6, 1e6};
            }
        };
        std::array<double, 2> r = residual(phi, T);
        double rn = std::hypot(r[0], r[1]);
        for (int it = 0; it < cfg.max_iters && rn > cfg.endpoint_tol; ++it) {
            const double dphi = 1e-7, dT = 1e-7 * std::max(1.0, T);
            const auto rp = residual(phi + dphi, T);
            const auto rt = residual(phi, T + dT);
            const double j00 = (rp[0] - r[0]) / dphi, j01 = (rt[0] - r[0]) / dT;
            const double j10 = (rp[1] - r[1]) / dphi, j11 = (rt[1] - r[1]) / dT;
            const double det = j00 * j11 - j01 * j10;
            if (std::abs(det) < 1e-300) break;
            const double sphi = (r[0] * j11 - r[1] * j01) / det;
            const double sT = (j00 * r[1] - j10 * r[0]) / det;
            bool improved = false;
            double lambda = 1.0;
            for (int h = 0; h < 8; ++h) {
                const double nphi = phi - lambda * sphi;
                const double nT = std::max(0.0, T - lambda * sT);
                const auto nr = residual(nphi, nT);
                const double nrn = std::hypot(nr[0], nr[1]);
                if (nrn < rn) {
                    phi = nphi;
                    T = nT;
                    r = nr;
                    rn = nrn;
                    improved = true;
                    break;
                }
                lambda *= 0.5;
            }
            if (!improved) break;
        }
        res.residual = std::min(res.residual, rn);
        if (rn <= cfg.endpoint_tol && T < bestT) {
            bestT = T;
            bestPhi = phi;
            bestRes = rn;
        }
    }

    if (std::isfinite(bestT)) {
        res.found = true;
        res.T_star = bestT;
        res.phi0 = bestPhi;
        res.residual = bestRes;
        ExtremalState s0{start.r_x, start.R, std::cos(bestPhi), std::sin(bestPhi)};
        res.trajectory = integrate_extremal(s0, bestT, prm, cfg.integrate, &res.n_evals);
    }
    return res;
}

namespace detail {

// First time |z(t)| crosses mu1 along the extremal launched at angle phi, or
// nullopt if it does not cross before the cap. Bisection on re-integration
// from the stored left bracket state.
inline std::optional<double> purity_crossing_time(const CylState& start, double phi, double mu1,
                                                  double cap, const PhysParams& prm,
                                                  const IntegrateOptions& opts,
                                                  std::size_t* evals) {
    std::array<double, 4> y{start.r_x, start.R, std::cos(phi), std::sin(phi)};
    auto rhs = [&](double, const std::array<double, 4>& v) -> std::array<double, 4> {
        if (evals) ++*evals;
        return extremal_rhs({v[0], v[1], v[2], v[3]}, prm);
    };
    const double z0 = std::hypot(y[0], y[1]);
    if (std::abs(z0 - mu1) <= 1e-14) return 0.0;
    const int s0 = z0 > mu1 ? +1 : -1;

    std::array<double, 4> left = y;
    double t_left = 0.0;
    bool bracketed = false;
    std::size_t steps_left = opts.max_steps;
    IntegrateOptions scan_opts = opts;
    scan_opts.max_dt = cap / 256.0;  // bound the bracket width
    rk45_segment<4>(rhs, 0.0, cap, y, scan_opts, steps_left,
                    [&](double t, const std::array<double, 4>& v) -> bool {
                        const double z = std::hypot(v[0], v[1]);
                        const int s = z > mu1 ? +1 : (z < mu1 ? -1 : 0);
                        if (s != s0) {
                            bracketed = true;
                            return true;
                        }
                        left = v;
                        t_left = t;
                        return false;
                    });
    if (!bracketed) return std::nullopt;

    double dt = scan_opts.max_dt;  // upper bound on bracket width
    for (int it = 0; it < 64 && dt > 1e-15 * std::max(1.0, t_left); ++it) {
        std::array<double, 4> mid = left;
        std::size_t budget = opts.max_steps;
        rk45_segment<4>(rhs, 0.0, 0.5 * dt, mid, opts, budget,
                        [](double, const std::array<double, 4>&) {});
        const double zm = std::hypot(mid[0], mid[1]);
        const int sm = zm > mu1 ? +1 : (zm < mu1 ? -1 : 0);
        if (sm == s0) {
            left = mid;
            t_left += 0.5 * dt;
        }
        dt *= 0.5;
    }
    return t_left;
}

}  // namespace detail

inline ShootResult shoot(const CylState& start, const PurityGoal& goal, const PhysParams& prm,
                         const ShootConfig& cfg = {}) {
    ShootResult res;
    const double mu0 = std::hypot(start.r_x, start.R);
    if (!(goal.mu1 < 1.0) && goal.mu1 > mu0)
        throw NoFiniteTime("shoot: purity level 1 is unreachable");
    if (std::abs(goal.mu1 - mu0) <= 1e-14) {
        res.found = true;
        res.T_star = 0.0;
        res.residual = std::abs(goal.mu1 - mu0);
        return res;
    }
    const double cap =
        cfg.time_cap > 0.0 ? cfg.time_cap : detail::default_time_cap(mu0, goal.mu1, prm);

    double bestPhi = 0.0, bestT = std::numeric_limits<double>::infinity();
    for (int k = 0; k < cfg.n_scan; ++k) {
        const double phi = 2.0 * M_PI * k / cfg.n_scan;
        IntegrateOptions coarse = cfg.integrate;
        coarse.rel_tol = 1e-8;
        try {
            const auto tc = detail::purity_crossing_time(start, phi, goal.mu1, cap, prm, coarse,
                                                         &res.n_evals);
            if (tc && *tc < bestT) {
                bestT = *tc;
                bestPhi = phi;
            }
        } catch (const DegenerateCovector&) {
            // isolated covector angles can hit R = q = 0 exactly; skip them
        }
    }
    if (!std::isfinite(bestT)) return res;  // not found; residual stays inf

    // Golden-section on phi around the best scan angle.
    const double span = 2.0 * M_PI / cfg.n_scan;
    double lo = bestPhi - span, hi = bestPhi + span;
    auto timeOf = [&](double phi) {
        try {
            const auto tc = detail::purity_crossing_time(start, phi, goal.mu1, cap, prm,
                                                         cfg.integrate, &res.n_evals);
            return tc ? *tc : std::numeric_limits<double>::infinity();
        } catch (const DegenerateCovector&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = timeOf(x1), f2 = timeOf(x2);
    for (int it = 0; it < 48; ++it) {
        if (f1 > f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = timeOf(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = timeOf(x1);
        }
    }
    const double phi = f1 < f2 ? x1 : x2;
    const double T = std::min(f1, f2);
    if (!std::isfinite(T)) return res;

    res.found = true;
    res.T_star = T;
    res.phi0 = phi;
    ExtremalState s0{start.r_x, start.R, std::cos(phi), std::sin(phi)};
    res.trajectory = integrate_extremal(s0, T, prm, cfg.integrate, &res.n_evals);
    const ExtremalState e = res.trajectory.final_state();
    res.residual = std::abs(std::hypot(e.r_x, e.R) - goal.mu1);
    return res;
}

}  // namespace qctl
