#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "qctl/io.hpp"

using namespace qctl;

TEST_CASE("schedule JSON round trip") {
    ControlSchedule s;
    s.horizon = 1.5;
    s.impulses.push_back({0.0, M_PI / 2});
    s.impulses.push_back({1.5, -0.25});
    s.pieces.push_back(Piece::constant(0.0, 0.5, M_PI / 2));
    s.pieces.push_back(Piece::samples({0.5, 0.7, 0.9, 1.1, 1.5}, {0.1, 0.3, -0.2, 0.0, 0.4}));

    const io::json j = io::schedule_to_json(s);
    const ControlSchedule back = io::schedule_from_json(j);
    REQUIRE(back.horizon == s.horizon);
    REQUIRE(back.impulses.size() == 2);
    REQUIRE(back.impulses[0].dtheta == s.impulses[0].dtheta);
    REQUIRE(back.pieces.size() == 2);
    REQUIRE(back.pieces[1].kind == Piece::Kind::Samples);
    for (double t = 0.0; t <= 1.5; t += 0.05)
        REQUIRE(back.eval(t) == Catch::Approx(s.eval(t)).margin(1e-15));

    // Serialization is deterministic.
    REQUIRE(io::schedule_to_json(back).dump(2) == j.dump(2));
}

TEST_CASE("schedule JSON rejects unknown piece kinds") {
    io::json j;
    j["horizon"] = 1.0;
    j["impulses"] = io::json::array();
    j["smooth"] = io::json::array({{{"t0", 0.0}, {"t1", 1.0}, {"kind", "spline"}, {"data", {}}}});
    REQUIRE_THROWS_AS(io::schedule_from_json(j), ConfigError);
}

TEST_CASE("csv writers produce one row per sample with duplicate impulse rows") {
    const PhysParams prm(20.0, 1.0, 1.0);
    ControlSchedule sched = ControlSchedule::constant(0.4, 0.0);
    sched.impulses.push_back({0.2, 1.0});
    const BlochTrajectory tr = integrate_bloch(sched, {0.0, 0.3, 0.0}, prm);
    const std::string csv = io::bloch_csv(tr);
    REQUIRE(csv.rfind("t,r_x,r_y,r_z\n", 0) == 0);
    std::size_t rows = 0;
    for (char c : csv)
        if (c == '\n') ++rows;
    REQUIRE(rows == tr.t.size() + 1);
}

TEST_CASE("atomic_write replaces content completely") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "qctl_io_test";
    fs::create_directories(dir);
    const fs::path p = dir / "x.csv";
    io::atomic_write(p, "a,b\n1,2\n");
    io::atomic_write(p, "c\n");
    std::ifstream in(p);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    REQUIRE(content == "c\n");
    fs::remove_all(dir);
}

TEST_CASE("bounds JSON carries an explicit null for a missing upper bound") {
    const PhysParams prm(20.0, 1.0, 1.0);
    const TimeBounds tb = two_point_bounds_mu(0.0, 0.95, prm);
    const io::json j = io::bounds_to_json(tb);
    REQUIRE(j.at("upper").is_null());
    REQUIRE_FALSE(j.at("feasible_upper").get<bool>());
    REQUIRE(j.at("reachable").get<bool>());
}
