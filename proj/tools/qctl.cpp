// Command-line surface: bounds | protocol | simulate | extremal | oracle | figure1.
// All inputs come from a single JSON config; structured results go to JSON,
// time series to CSV. Exit codes: 0 success, 2 partial (upper bound absent or
// search incomplete), 3 unreachable target, 1 error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>

#include "qctl/qctl.hpp"

namespace fs = std::filesystem;
using qctl::io::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 424242;  // documented default for randomized suites

void require_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
    if (!j.is_object()) throw qctl::ConfigError(where + " must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw qctl::ConfigError("unknown key '" + key + "' in " + where);
}

json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw qctl::ConfigError("cannot open config file " + path);
    json j;
    in >> j;
    require_keys(j, {"params", "problem", "tolerances", "output", "seed", "schedule", "system",
                     "grid", "figure1"},
                 "config");
    return j;
}

qctl::PhysParams parse_params(const json& cfg) {
    if (!cfg.contains("params")) throw qctl::ConfigError("config requires a 'params' section");
    const json& p = cfg.at("params");
    require_keys(p, {"omega", "kappa", "gamma"}, "params");
    return {p.at("omega").get<double>(), p.at("kappa").get<double>(), p.at("gamma").get<double>()};
}

// A state is one of: {"bloch":[x,y,z]}, {"density":{...}}, {"cyl":[r_x,R,theta]},
// {"purity":P}, {"mu":m}. The last two describe only a sphere radius.
struct StateSpec {
    std::optional<qctl::BlochState> bloch;
    double mu = 0.0;
};

StateSpec parse_state(const json& j, const std::string& where) {
    require_keys(j, {"bloch", "density", "cyl", "purity", "mu"}, where);
    if (j.size() != 1) throw qctl::ConfigError(where + " must have exactly one state form");
    StateSpec out;
    if (j.contains("bloch")) {
        const auto v = j.at("bloch").get<std::vector<double>>();
        if (v.size() != 3) throw qctl::ConfigError(where + ".bloch needs [x, y, z]");
        out.bloch = qctl::BlochState{v[0], v[1], v[2]};
    } else if (j.contains("density")) {
        const json& d = j.at("density");
        require_keys(d, {"rho00", "rho11", "re01", "im01"}, where + ".density");
        out.bloch = qctl::density_to_bloch({d.at("rho00").get<double>(),
                                            d.at("rho11").get<double>(),
                                            d.at("re01").get<double>(),
                                            d.at("im01").get<double>()});
    } else if (j.contains("cyl")) {
        const auto v = j.at("cyl").get<std::vector<double>>();
        if (v.size() != 3) throw qctl::ConfigError(where + ".cyl needs [r_x, R, theta]");
        out.bloch = qctl::cyl_to_bloch(qctl::CylState{v[0], v[1], v[2]}.canonical());
    } else if (j.contains("purity")) {
        out.mu = qctl::mu_of_purity(j.at("purity").get<double>());
        return out;
    } else {
        out.mu = j.at("mu").get<double>();
        if (out.mu < 0.0 || out.mu > 1.0) throw qctl::ConfigError(where + ".mu outside [0, 1]");
        return out;
    }
    if (!out.bloch->valid())
        throw qctl::ConfigError(where + ": state lies outside the Bloch ball");
    out.mu = out.bloch->norm();
    return out;
}

struct ProblemSpec {
    StateSpec start;
    StateSpec goal;
    std::optional<double> theta0, theta1;
};

ProblemSpec parse_problem(const json& cfg) {
    if (!cfg.contains("problem")) throw qctl::ConfigError("config requires a 'problem' section");
    const json& p = cfg.at("problem");
    require_keys(p, {"start", "goal", "theta0", "theta1"}, "problem");
    ProblemSpec out;
    out.start = parse_state(p.at("start"), "problem.start");
    out.goal = parse_state(p.at("goal"), "problem.goal");
    if (p.contains("theta0")) out.theta0 = p.at("theta0").get<double>();
    if (p.contains("theta1")) out.theta1 = p.at("theta1").get<double>();
    return out;
}

qctl::IntegrateOptions parse_tolerances(const json& cfg, double* endpoint_tol = nullptr) {
    qctl::IntegrateOptions opts;
    if (!cfg.contains("tolerances")) return opts;
    const json& t = cfg.at("tolerances");
    require_keys(t, {"rel", "abs", "endpoint"}, "tolerances");
    if (t.contains("rel")) opts.rel_tol = t.at("rel").get<double>();
    if (t.contains("abs")) opts.abs_tol = t.at("abs").get<double>();
    if (endpoint_tol && t.contains("endpoint")) *endpoint_tol = t.at("endpoint").get<double>();
    return opts;
}

struct OutputSpec {
    fs::path dir = ".";
    std::string prefix = "qctl";
};

OutputSpec parse_output(const json& cfg) {
    OutputSpec out;
    if (!cfg.contains("output")) return out;
    const json& o = cfg.at("output");
    require_keys(o, {"dir", "prefix"}, "output");
    if (o.contains("dir")) out.dir = o.at("dir").get<std::string>();
    if (o.contains("prefix")) out.prefix = o.at("prefix").get<std::string>();
    return out;
}

std::uint64_t parse_seed(const json& cfg) {
    return cfg.contains("seed") ? cfg.at("seed").get<std::uint64_t>() : kDefaultSeed;
}

void emit(const OutputSpec& out, const std::string& name, const std::string& content) {
    qctl::io::atomic_write(out.dir / (out.prefix + "_" + name), content);
}

int cmd_bounds(const json& cfg) {
    const qctl::PhysParams prm = parse_params(cfg);
    const ProblemSpec prob = parse_problem(cfg);
    const OutputSpec out = parse_output(cfg);
    const qctl::TimeBounds tb = qctl::two_point_bounds_mu(prob.start.mu, prob.goal.mu, prm);
    json j = qctl::io::bounds_to_json(tb);
    j["seed"] = parse_seed(cfg);
    std::cout << j.dump(2) << "\n";
    emit(out, "bounds.json", j.dump(2) + "\n");
    return tb.feasible_upper ? 0 : 2;
}

int cmd_protocol(const json& cfg) {
    const qctl::PhysParams prm = parse_params(cfg);
    const ProblemSpec prob = parse_problem(cfg);
    const OutputSpec out = parse_output(cfg);
    if (!prob.start.bloch || !prob.goal.bloch)
        throw qctl::ConfigError("protocol needs full start and goal states");
    double endpoint_tol = 1e-6;
    qctl::SynthesisOptions sopts;
    sopts.integrate = parse_tolerances(cfg, &endpoint_tol);

    const double th0 = prob.theta0 ? *prob.theta0 : qctl::bloch_to_cyl(*prob.start.bloch).theta;
    const double th1 = prob.theta1 ? *prob.theta1 : qctl::bloch_to_cyl(*prob.goal.bloch).theta;
    const qctl::Synthesis s =
        qctl::synthesize(*prob.start.bloch, *prob.goal.bloch, th0, th1, prm, sopts);
    const qctl::ProtocolReport rep =
        qctl::validate(s, *prob.start.bloch, *prob.goal.bloch, prm, endpoint_tol, sopts.integrate);

    json j = qctl::io::synthesis_to_json(s);
    j["validation"] = qctl::io::report_to_json(rep);
    std::cout << j.dump(2) << "\n";
    emit(out, "plan.json", j.dump(2) + "\n");
    return rep.passed ? 0 : 2;
}

int cmd_simulate(const json& cfg) {
    const qctl::PhysParams prm = parse_params(cfg);
    const OutputSpec out = parse_output(cfg);
    if (!cfg.contains("schedule"))
        throw qctl::ConfigError("simulate requires 'schedule': path to a schedule JSON file");
    std::ifstream in(cfg.at("schedule").get<std::string>());
    if (!in) throw qctl::ConfigError("cannot open schedule file");
    json sj;
    in >> sj;
    const qctl::ControlSchedule sched = qctl::io::schedule_from_json(sj);

    const std::string system = cfg.value("system", std::string("bloch"));
    const ProblemSpec prob = parse_problem(cfg);
    if (!prob.start.bloch) throw qctl::ConfigError("simulate needs a full start state");
    const qctl::IntegrateOptions opts = parse_tolerances(cfg);

    if (system == "bloch") {
        const qctl::BlochTrajectory tr = qctl::integrate_bloch(sched, *prob.start.bloch, prm, opts);
        emit(out, "trajectory.csv", qctl::io::bloch_csv(tr));
        std::cout << "final: " << qctl::io::num(tr.final_state().x) << " "
                  << qctl::io::num(tr.final_state().y) << " " << qctl::io::num(tr.final_state().z)
                  << "\n";
    } else if (system == "auxiliary") {
        const qctl::CylState c0 = qctl::bloch_to_cyl(*prob.start.bloch);
        const qctl::CylTrajectory tr = qctl::integrate_aux(sched, c0, prm, opts);
        emit(out, "trajectory.csv", qctl::io::cyl_csv(tr));
        std::cout << "final: " << qctl::io::num(tr.final_state().r_x) << " "
                  << qctl::io::num(tr.final_state().R) << "\n";
    } else {
        throw qctl::ConfigError("system must be 'bloch' or 'auxiliary'");
    }
    return 0;
}

int cmd_extremal(const json& cfg) {
    const qctl::PhysParams prm = parse_params(cfg);
    const ProblemSpec prob = parse_problem(cfg);
    const OutputSpec out = parse_output(cfg);
    if (!prob.start.bloch) throw qctl::ConfigError("extremal needs a full start state");
    const qctl::CylState c0 = qctl::bloch_to_cyl(*prob.start.bloch);

    qctl::ShootResult res;
    if (prob.goal.bloch) {
        const qctl::CylState c1 = qctl::bloch_to_cyl(*prob.goal.bloch);
        res = qctl::shoot({c0.r_x, c0.R, 0.0}, qctl::PointGoal{c1.r_x, c1.R}, prm);
    } else {
        res = qctl::shoot({c0.r_x, c0.R, 0.0}, qctl::PurityGoal{prob.goal.mu}, prm);
    }
    json j = qctl::io::shoot_to_json(res);
    std::cout << j.dump(2) << "\n";
    emit(out, "shoot.json", j.dump(2) + "\n");
    emit(out, "extremal.csv", qctl::io::extremal_csv(res.trajectory));
    return res.found ? 0 : 2;
}

int cmd_oracle(const json& cfg) {
    const qctl::PhysParams prm = parse_params(cfg);
    const ProblemSpec prob = parse_problem(cfg);
    const OutputSpec out = parse_output(cfg);
    if (!prob.start.bloch) throw qctl::ConfigError("oracle needs a full start state");
    const qctl::CylState c0 = qctl::bloch_to_cyl(*prob.start.bloch);

    int n = 400, n_theta = 64;
    std::vector<int> ladder;
    qctl::OracleOptions opts;
    if (cfg.contains("grid")) {
        const json& g = cfg.at("grid");
        require_keys(g, {"n", "n_theta", "ladder", "front_csv", "horizon_cap"}, "grid");
        n = g.value("n", n);
        n_theta = g.value("n_theta", n_theta);
        if (g.contains("ladder")) ladder = g.at("ladder").get<std::vector<int>>();
        opts.capture_front = g.value("front_csv", false);
        opts.horizon_cap = g.value("horizon_cap", 0.0);
    }

    qctl::OracleGoal goal;
    if (prob.goal.bloch) {
        const qctl::CylState c1 = qctl::bloch_to_cyl(*prob.goal.bloch);
        goal = qctl::GoalPoint{c1.r_x, c1.R, 0.0};
    } else {
        goal = qctl::GoalPurity{prob.goal.mu};
    }

    const qctl::GridSpec spec = qctl::GridSpec::make(n, n_theta, prm);
    const qctl::OracleResult res =
        qctl::min_time_grid({c0.r_x, c0.R, 0.0}, goal, spec, prm, opts);
    json j = qctl::io::oracle_to_json(res);
    j["n"] = n;
    j["n_theta"] = n_theta;
    j["dt"] = spec.dt;

    if (!ladder.empty()) {
        std::vector<qctl::GridSpec> specs;
        for (int rung : ladder) specs.push_back(qctl::GridSpec::make(rung, n_theta, prm));
        const qctl::ConvergenceTable table =
            qctl::refine_study({c0.r_x, c0.R, 0.0}, goal, prm, specs, opts);
        emit(out, "convergence.csv", qctl::io::convergence_csv(table));
        j["extrapolated"] = table.extrapolated;
        j["converged"] = table.converged;
        j["antitone"] = table.antitone;
    }
    if (opts.capture_front) emit(out, "front.csv", qctl::io::front_csv(res));

    std::cout << j.dump(2) << "\n";
    emit(out, "oracle.json", j.dump(2) + "\n");
    return res.reached ? 0 : 2;
}

int cmd_figure1(const json& cfg) {
    const qctl::PhysParams prm = parse_params(cfg);
    const OutputSpec out = parse_output(cfg);
    int n = 41;
    if (cfg.contains("figure1")) {
        const json& f = cfg.at("figure1");
        require_keys(f, {"n"}, "figure1");
        n = f.value("n", n);
    }
    const auto rows = qctl::figure1_grid(prm.gamma, prm.omega, n);
    emit(out, "figure1.csv", qctl::io::figure1_csv(rows));
    std::cout << "rows: " << rows.size() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"minimal-time bounds, impulse-control synthesis, and optimal-control "
                 "verification for a dissipative qubit"};
    app.require_subcommand(1);

    std::string config_path;
    for (const char* name : {"bounds", "protocol", "simulate", "extremal", "oracle", "figure1"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
    }

    CLI11_PARSE(app, argc, argv);
    const std::string cmd = app.get_subcommands().front()->get_name();

    try {
        const json cfg = load_config(config_path);
        if (cmd == "bounds") return cmd_bounds(cfg);
        if (cmd == "protocol") return cmd_protocol(cfg);
        if (cmd == "simulate") return cmd_simulate(cfg);
        if (cmd == "extremal") return cmd_extremal(cfg);
        if (cmd == "oracle") return cmd_oracle(cfg);
        if (cmd == "figure1") return cmd_figure1(cfg);
        std::cerr << "unknown command " << cmd << "\n";
        return 1;
    } catch (const qctl::NoFiniteTime& e) {
        std::cerr << "unreachable: " << e.what() << "\n";
        return 3;
    } catch (const qctl::InfeasibleTarget& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
