#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <variant>
#include <vector>

#include "qctl/bloch.hpp"
#include "qctl/bounds.hpp"
#include "qctl/dynamics.hpp"
#include "qctl/schedule.hpp"

namespace qctl {

// Uniform n x n cell grid over the square [-1, 1]^2 covering the unit disk,
// with n_theta discretized control angles and a time substep dt satisfying
// dt * (max speed over the disk) <= cell size, so one substep cannot skip a
// cell.
struct GridSpec {
    int n = 400;
    int n_theta = 64;
    double dt = 0.0;

    double cell() const noexcept { return 2.0 / n; }

    static double max_speed(const PhysParams& p) noexcept {
        const double vx = 0.5 * p.gamma + p.omega;
        const double vR = p.omega + 2.0 * p.gamma;
        return std::hypot(vx, vR);
    }

    static GridSpec make(int n, int n_theta, const PhysParams& p) {
        GridSpec s;
        s.n = n;
        s.n_theta = n_theta;
        s.dt = s.cell() / max_speed(p);
        s.validate(p);
        return s;
    }

    void validate(const PhysParams& p) const {
        if (n < 2 || n_theta < 2) throw std::invalid_argument("GridSpec: n and n_theta must be >= 2");
        if (!(dt > 0.0)) throw std::invalid_argument("GridSpec: dt must be > 0");
        if (dt * max_speed(p) > cell() * (1.0 + 1e-12))
            throw std::invalid_argument("GridSpec: dt * max_speed exceeds the cell size");
    }
};

struct GoalPoint {
    double r_x = 0.0;
    double R = 0.0;      // canonical image, R >= 0; the reflected image also counts
    double tol = 0.0;    // <= 0: one cell diameter
};
struct GoalPurity {
    double mu1 = 0.0;
};
using OracleGoal = std::variant<GoalPoint, GoalPurity>;

struct OracleOptions {
    double horizon_cap = 0.0;  // 0: derived from the two-point bounds
    std::size_t max_substeps_per_edge = 4096;
    bool capture_front = false;
};

struct OracleResult {
    bool reached = false;
    double time = std::numeric_limits<double>::infinity();
    double slack = 0.0;
    double goal_tol = 0.0;
    std::size_t expanded = 0;
    std::vector<std::pair<double, double>> path;       // (theta, duration) legs
    std::vector<std::array<double, 3>> front;          // (r_x, R, label) of settled cells

    // The best path as a theta schedule for replay through the integrator.
    ControlSchedule path_schedule() const {
        ControlSchedule s;
        double t = 0.0;
        for (const auto& [theta, dur] : path) {
            if (dur <= 0.0) continue;
            s.pieces.push_back(Piece::constant(t, t + dur, theta));
            t += dur;
        }
        s.horizon = t;
        return s;
    }
};

namespace detail {

// One RK4 step of the affine system xdot = A x + b as an affine map
// x -> Phi x + psi (exact composition of the RK4 stages).
struct AffineStep {
    double phi00, phi01, phi10, phi11;
    double psi0, psi1;

    static AffineStep make(double theta, double dt, const PhysParams& p) {
        const double c = std::cos(theta), s = std::sin(theta);
        const double a00 = -0.5 * p.gamma, a01 = -p.omega * c;
        const double a10 = p.omega * c, a11 = -0.5 * p.gamma * (1.0 + s * s);
        const double b0 = 0.0, b1 = p.gamma * s;

        // Phi = I + M + M^2/2 + M^3/6 + M^4/24 with M = dt*A;
        // psi = (I + M/2 + M^2/6 + M^3/24) dt*b.
        double m[2][2] = {{dt * a00, dt * a01}, {dt * a10, dt * a11}};
        double phi[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
        double pw[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
        double coef[5] = {1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0};
        double acc[2][2] = {{0.0, 0.0}, {0.0, 0.0}};  // I/1 + M/2 + M^2/6 + M^3/24
        for (int k = 1; k <= 4; ++k) {
            acc[0][0] += coef[k] * pw[0][0];
            acc[0][1] += coef[k] * pw[0][1];
            acc[1][0] += coef[k] * pw[1][0];
            acc[1][1] += coef[k] * pw[1][1];
            double nw[2][2];
            nw[0][0] = pw[0][0] * m[0][0] + pw[0][1] * m[1][0];
            nw[0][1] = pw[0][0] * m[0][1] + pw[0][1] * m[1][1];
            nw[1][0] = pw[1][0] * m[0][0] + pw[1][1] * m[1][0];
            nw[1][1] = pw[1][0] * m[0][1] + pw[1][1] * m[1][1];
            pw[0][0] = nw[0][0];
            pw[0][1] = nw[0][1];
            pw[1][0] = nw[1][0];
            pw[1][1] = nw[1][1];
            phi[0][0] += coef[k] * pw[0][0];
            phi[0][1] += coef[k] * pw[0][1];
            phi[1][0] += coef[k] * pw[1][0];
            phi[1][1] += coef[k] * pw[1][1];
        }
        AffineStep st;
        st.phi00 = phi[0][0];
        st.phi01 = phi[0][1];
        st.phi10 = phi[1][0];
        st.phi11 = phi[1][1];
        st.psi0 = dt * (acc[0][0] * b0 + acc[0][1] * b1);
        st.psi1 = dt * (acc[1][0] * b0 + acc[1][1] * b1);
        return st;
    }

    void apply(double& x, double& y) const noexcept {
        const double nx = phi00 * x + phi01 * y + psi0;
        const double ny = phi10 * x + phi11 * y + psi1;
        x = nx;
        y = ny;
    }
};

}  // namespace detail

// Dijkstra-style first-arrival search on the cell grid. Each settled cell
// stores the continuous state through which it was first entered; edges flow
// that state under one constant control angle, in dt substeps, until the
// flow leaves the cell. The search runs on the full disk; reflected states
// (R < 0) are identified with their canonical images at read-out.
inline OracleResult min_time_grid(const CylState& start, const OracleGoal& goal,
                                  const GridSpec& spec, const PhysParams& params,
                                  const OracleOptions& opts = {}) {
    spec.validate(params);
    const int n = spec.n;
    const double h = spec.cell();
    const double inf = std::numeric_limits<double>::infinity();

    const GoalPoint* gp = std::get_if<GoalPoint>(&goal);
    const GoalPurity* gq = std::get_if<GoalPurity>(&goal);
    const double goal_tol = gp ? (gp->tol > 0.0 ? gp->tol : h * std::sqrt(2.0)) : 0.0;
    if (gq && !(gq->mu1 < 1.0) && std::hypot(start.r_x, start.R) < 1.0)
        throw NoFiniteTime("oracle: purity level 1 is unreachable");

    double cap = opts.horizon_cap;
    if (cap <= 0.0) {
        const double mu0 = std::min(std::hypot(start.r_x, start.R), 1.0);
        const double mu1 = std::min(gp ? std::hypot(gp->r_x, gp->R) : gq->mu1, 1.0);
        const TimeBounds tb = two_point_bounds_mu(mu0, std::min(mu1, 1.0 - 1e-12), params);
        cap = 3.0 * (tb.lower + upper_bound_gap(params)) + 5.0 / params.gamma;
    }

    auto cell_of = [&](double x, double y) -> int {
        int i = static_cast<int>(std::floor((x + 1.0) / h));
        int j = static_cast<int>(std::floor((y + 1.0) / h));
        i = std::clamp(i, 0, n - 1);
        j = std::clamp(j, 0, n - 1);
        return i * n + j;
    };

    const double z0 = std::hypot(start.r_x, start.R);
    const int purity_side = gq ? (z0 > gq->mu1 ? +1 : (z0 < gq->mu1 ? -1 : 0)) : 0;
    auto goal_metric = [&](double x, double y) -> double {
        if (gp)
            return std::min(std::hypot(x - gp->r_x, y - gp->R),
                            std::hypot(x - gp->r_x, y + gp->R)) -
                   goal_tol;
        return (std::hypot(x, y) - gq->mu1) * purity_side;  // crossing when <= 0
    };

    OracleResult res;
    res.goal_tol = gp ? goal_tol : 0.0;
    if (goal_metric(start.r_x, start.R) <= 0.0 || (gq && purity_side == 0)) {
        res.reached = true;
        res.time = 0.0;
        res.slack = spec.dt;
        return res;
    }

    std::vector<detail::AffineStep> steps;
    steps.reserve(spec.n_theta);
    std::vector<double> thetas(spec.n_theta);
    for (int k = 0; k < spec.n_theta; ++k) {
        thetas[k] = 2.0 * M_PI * k / spec.n_theta;
        steps.push_back(detail::AffineStep::make(thetas[k], spec.dt, params));
    }

    const int ncells = n * n;
    std::vector<double> label(ncells, inf);
    std::vector<double> ex(ncells, 0.0), ey(ncells, 0.0);  // entry states
    std::vector<int> parent(ncells, -1);
    std::vector<int16_t> parent_theta(ncells, -1);
    std::vector<double> parent_dur(ncells, 0.0);
    std::vector<uint8_t> settled(ncells, 0);

    using QItem = std::pair<double, int>;
    std::priority_queue<QItem, std::vector<QItem>, std::greater<>> pq;

    const int c0 = cell_of(start.r_x, start.R);
    label[c0] = 0.0;
    ex[c0] = start.r_x;
    ey[c0] = start.R;
    pq.push({0.0, c0});

    double best_goal = inf;
    int best_goal_cell = -1;
    int best_goal_theta = -1;
    double best_goal_dur = 0.0;

    while (!pq.empty()) {
        const auto [dist, c] = pq.top();
        pq.pop();
        if (settled[c] || dist > label[c]) continue;
        if (dist >= best_goal) break;
        settled[c] = 1;
        ++res.expanded;

        const double x0 = ex[c], y0 = ey[c];
        for (int k = 0; k < spec.n_theta; ++k) {
            double x = x0, y = y0;
            double g_prev = goal_metric(x, y);
            for (std::size_t s = 1; s <= opts.max_substeps_per_edge; ++s) {
                steps[k].apply(x, y);
                const double t_here = dist + static_cast<double>(s) * spec.dt;
                if (x * x + y * y > 1.0 + 1e-9) break;  // numeric spill over the disk edge

                const double g_here = goal_metric(x, y);
                if (g_here <= 0.0 && t_here < best_goal) {
                    // sub-dt refinement of the crossing by linear interpolation
                    double frac = 1.0;
                    if (g_prev > 0.0 && g_prev - g_here > 0.0)
                        frac = std::clamp(g_prev / (g_prev - g_here), 0.0, 1.0);
                    const double t_cross = dist + (static_cast<double>(s) - 1.0 + frac) * spec.dt;
                    if (t_cross < best_goal) {
                        best_goal = t_cross;
                        best_goal_cell = c;
                        best_goal_theta = k;
                        best_goal_dur = (static_cast<double>(s) - 1.0 + frac) * spec.dt;
                    }
                }
                g_prev = g_here;

                const int c2 = cell_of(x, y);
                if (c2 != c) {
                    if (!settled[c2] && t_here < label[c2] && t_here < cap &&
                        t_here < best_goal) {
                        label[c2] = t_here;
                        ex[c2] = x;
                        ey[c2] = y;
                        parent[c2] = c;
                        parent_theta[c2] = static_cast<int16_t>(k);
                        parent_dur[c2] = static_cast<double>(s) * spec.dt;
                        pq.push({t_here, c2});
                    }
                    break;
                }
            }
        }
    }

    if (best_goal_cell >= 0) {
        res.reached = true;
        res.time = best_goal;
        std::vector<std::pair<double, double>> rev;
        rev.emplace_back(thetas[best_goal_theta], best_goal_dur);
        int c = best_goal_cell;
        while (parent[c] >= 0) {
            rev.emplace_back(thetas[parent_theta[c]], parent_dur[c]);
            c = parent[c];
        }
        res.path.assign(rev.rbegin(), rev.rend());

        // Error model: time quantization plus the cell-size resolution divided
        // by the slowest speed met along the winning path. The replay repeats
        // the search propagation in dt substeps.
        double vmin = inf;
        {
            double x = start.r_x, y = start.R;
            for (const auto& [theta, dur] : res.path) {
                const detail::AffineStep st = detail::AffineStep::make(theta, spec.dt, params);
                const auto m = static_cast<std::size_t>(std::floor(dur / spec.dt + 0.5));
                for (std::size_t i = 0; i < m; ++i) {
                    const Vec2 v = rhs_aux({x, y, theta}, params);
                    vmin = std::min(vmin, std::hypot(v[0], v[1]));
                    st.apply(x, y);
                }
            }
        }
        if (!(vmin > 1e-12)) vmin = 1e-12;
        res.slack = 2.0 * (spec.dt + h * std::sqrt(2.0) / vmin);
    }

    if (opts.capture_front) {
        for (int c = 0; c < ncells; ++c)
            if (settled[c]) res.front.push_back({ex[c], ey[c], label[c]});
    }
    return res;
}

struct ConvergenceRow {
    int n;
    int n_theta;
    double dt;
    double estimate;
    double slack;
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    double extrapolated = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;   // estimates settle within slack
    bool antitone = false;    // finer grids find faster-or-equal paths, up to slack
};

// Runs a ladder of progressively finer grids and reports the trend.
inline ConvergenceTable refine_study(const CylState& start, const OracleGoal& goal,
                                     const PhysParams& params,
                                     const std::vector<GridSpec>& ladder,
                                     const OracleOptions& opts = {}) {
    if (ladder.size() < 3)
        throw std::invalid_argument("refine_study: need a ladder of >= 3 grid specs");
    ConvergenceTable table;
    for (const GridSpec& spec : ladder) {
        const OracleResult r = min_time_grid(start, goal, spec, params, opts);
        table.rows.push_back({spec.n, spec.n_theta, spec.dt,
                              r.reached ? r.time : std::numeric_limits<double>::infinity(),
                              r.slack});
    }
    table.antitone = true;
    for (std::size_t i = 1; i < table.rows.size(); ++i)
        if (table.rows[i].estimate > table.rows[i - 1].estimate + table.rows[i - 1].slack)
            table.antitone = false;

    const std::size_t m = table.rows.size();
    const double e1 = table.rows[m - 3].estimate, e2 = table.rows[m - 2].estimate,
                 e3 = table.rows[m - 1].estimate;
    if (std::isfinite(e3)) {
        const double d1 = e2 - e1, d2 = e3 - e2;
        if (std::abs(d2) < std::abs(d1) && std::abs(d1 - d2) > 1e-300) {
            table.extrapolated = e3 + d2 * d2 / (d1 - d2);  // Aitken
            table.converged = true;
        } else {
            table.extrapolated = e3;
            table.converged = std::abs(d2) <= table.rows[m - 1].slack;
        }
    }
    return table;
}

}  // namespace qctl
