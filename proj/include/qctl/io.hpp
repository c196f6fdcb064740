#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qctl/bounds.hpp"
#include "qctl/errors.hpp"
#include "qctl/extremal.hpp"
#include "qctl/integrate.hpp"
#include "qctl/oracle.hpp"
#include "qctl/protocol.hpp"
#include "qctl/schedule.hpp"

namespace qctl::io {

using json = nlohmann::ordered_json;

// %.17g round-trips doubles exactly and keeps CSV output byte-stable.
inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// Writes via a temp file in the same directory plus rename, so readers never
// observe partial content.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    fs::create_directories(dir);
    const fs::path tmp = dir / (path.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw ConfigError("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

// --- schedules --------------------------------------------------------------

inline json schedule_to_json(const ControlSchedule& s) {
    json j;
    j["horizon"] = s.horizon;
    j["impulses"] = json::array();
    for (const Impulse& im : s.impulses) j["impulses"].push_back({{"t", im.t}, {"dtheta", im.dtheta}});
    j["smooth"] = json::array();
    for (const Piece& p : s.pieces) {
        json pj;
        pj["t0"] = p.t0;
        pj["t1"] = p.t1;
        if (p.kind == Piece::Kind::Constant) {
            pj["kind"] = "const";
            pj["data"] = {{"value", p.value}};
        } else {
            pj["kind"] = "samples";
            pj["data"] = {{"t", p.ts}, {"v", p.vs}, {"interpolation", "cubic"}};
        }
        j["smooth"].push_back(std::move(pj));
    }
    return j;
}

inline ControlSchedule schedule_from_json(const json& j) {
    ControlSchedule s;
    s.horizon = j.at("horizon").get<double>();
    for (const json& im : j.value("impulses", json::array()))
        s.impulses.push_back({im.at("t").get<double>(), im.at("dtheta").get<double>()});
    for (const json& pj : j.value("smooth", json::array())) {
        const std::string kind = pj.at("kind").get<std::string>();
        if (kind == "const") {
            s.pieces.push_back(Piece::constant(pj.at("t0").get<double>(),
                                               pj.at("t1").get<double>(),
                                               pj.at("data").at("value").get<double>()));
        } else if (kind == "samples") {
            s.pieces.push_back(
                Piece::samples(pj.at("data").at("t").get<std::vector<double>>(),
                               pj.at("data").at("v").get<std::vector<double>>()));
        } else {
            throw ConfigError("schedule piece kind must be 'const' or 'samples', got " + kind);
        }
    }
    s.validate();
    return s;
}

// --- results ----------------------------------------------------------------

inline json bounds_to_json(const TimeBounds& tb) {
    json j;
    j["lower"] = tb.lower;
    if (tb.upper)
        j["upper"] = *tb.upper;
    else
        j["upper"] = nullptr;
    j["sigma"] = tb.sigma;
    j["feasible_upper"] = tb.feasible_upper;
    j["reachable"] = tb.reachable;
    return j;
}

inline json plan_to_json(const ProtocolPlan& plan) {
    json j;
    j["tau0"] = plan.tau0;
    j["tau_half"] = plan.tau_half;
    j["tau1"] = plan.tau1;
    j["total"] = plan.total;
    j["theta_pieces"] = plan.theta_pieces;
    j["tildeR0"] = plan.tildeR0;
    j["tildeR1"] = plan.tildeR1;
    j["tilde_sigma"] = plan.tilde_sigma;
    auto imp = [](const std::vector<Impulse>& v) {
        json a = json::array();
        for (const Impulse& im : v) a.push_back({{"t", im.t}, {"dtheta", im.dtheta}});
        return a;
    };
    j["v_impulses_raw"] = imp(plan.v_impulses_raw);
    j["v_impulses"] = imp(plan.v_impulses);
    return j;
}

inline json synthesis_to_json(const Synthesis& s) {
    json j;
    j["plan"] = plan_to_json(s.plan);
    j["theta_schedule"] = schedule_to_json(s.theta);
    j["v_schedule"] = schedule_to_json(s.v);
    if (s.u)
        j["u_schedule"] = schedule_to_json(*s.u);
    else
        j["u_schedule"] = nullptr;
    if (!s.u_note.empty()) j["u_note"] = s.u_note;
    return j;
}

inline json report_to_json(const ProtocolReport& r) {
    json j;
    j["endpoint_err_aux"] = r.endpoint_err_aux;
    if (r.endpoint_err_3d)
        j["endpoint_err_3d"] = *r.endpoint_err_3d;
    else
        j["endpoint_err_3d"] = nullptr;
    j["elapsed"] = r.elapsed;
    j["bounds"] = bounds_to_json(r.bounds);
    j["within_bounds"] = r.within_bounds;
    j["passed"] = r.passed;
    return j;
}

inline json shoot_to_json(const ShootResult& r) {
    json j;
    j["found"] = r.found;
    j["T_star"] = r.T_star;
    j["phi0"] = r.phi0;
    j["residual"] = r.residual;
    j["n_evals"] = r.n_evals;
    return j;
}

inline json oracle_to_json(const OracleResult& r) {
    json j;
    j["reached"] = r.reached;
    j["time"] = r.reached ? json(r.time) : json(nullptr);
    j["slack"] = r.slack;
    j["goal_tol"] = r.goal_tol;
    j["expanded"] = r.expanded;
    return j;
}

// --- CSV --------------------------------------------------------------------

inline std::string bloch_csv(const BlochTrajectory& tr) {
    std::string s = "t,r_x,r_y,r_z\n";
    for (std::size_t i = 0; i < tr.t.size(); ++i)
        s += num(tr.t[i]) + "," + num(tr.y[i].x) + "," + num(tr.y[i].y) + "," + num(tr.y[i].z) +
             "\n";
    return s;
}

inline std::string cyl_csv(const CylTrajectory& tr) {
    std::string s = "t,r_x,R,theta\n";
    for (std::size_t i = 0; i < tr.t.size(); ++i)
        s += num(tr.t[i]) + "," + num(tr.y[i].r_x) + "," + num(tr.y[i].R) + "," +
             num(tr.y[i].theta) + "\n";
    return s;
}

inline std::string extremal_csv(const ExtremalTrajectory& tr) {
    std::string s = "t,r_x,R,p,q,theta_M\n";
    for (std::size_t i = 0; i < tr.t.size(); ++i)
        s += num(tr.t[i]) + "," + num(tr.y[i].r_x) + "," + num(tr.y[i].R) + "," + num(tr.y[i].p) +
             "," + num(tr.y[i].q) + "," + num(tr.theta[i]) + "\n";
    return s;
}

inline std::string figure1_csv(const std::vector<Figure1Row>& rows) {
    std::string s = "P0,P1,lower,upper,upper_neglect_pi_over_omega\n";
    for (const Figure1Row& r : rows)
        s += num(r.P0) + "," + num(r.P1) + "," + num(r.lower) + "," + num(r.upper) + "," +
             num(r.upper_neglect_pi_over_omega) + "\n";
    return s;
}

inline std::string convergence_csv(const ConvergenceTable& t) {
    std::string s = "n,n_theta,dt,estimate,slack\n";
    for (const ConvergenceRow& r : t.rows)
        s += std::to_string(r.n) + "," + std::to_string(r.n_theta) + "," + num(r.dt) + "," +
             num(r.estimate) + "," + num(r.slack) + "\n";
    return s;
}

inline std::string front_csv(const OracleResult& r) {
    std::string s = "r_x,R,time\n";
    for (const auto& row : r.front)
        s += num(row[0]) + "," + num(row[1]) + "," + num(row[2]) + "\n";
    return s;
}

}  // namespace qctl::io
