#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qctl/protocol.hpp"

using namespace qctl;

namespace {

BlochState random_ball_state(std::mt19937_64& rng, double rmax) {
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double x = gauss(rng), y = gauss(rng), z = gauss(rng);
    const double n = std::sqrt(x * x + y * y + z * z);
    const double r = std::cbrt(unif(rng)) * rmax;
    return {r * x / n, r * y / n, r * z / n};
}

}  // namespace

TEST_CASE("axis-to-axis transfer reduces to the radial motion") {
    const PhysParams prm(20.0, 1.0, 1.0);
    const double mu0 = 0.2, mu1 = 0.6;
    const Synthesis s = synthesize({0.0, 0.0, mu0}, {0.0, 0.0, mu1}, M_PI / 2, M_PI / 2, prm);
    REQUIRE(s.plan.tau0 == 0.0);
    REQUIRE(s.plan.tau1 == 0.0);
    REQUIRE(s.plan.total ==
            Catch::Approx(std::log((1.0 - mu0) / (1.0 - mu1)) / prm.gamma).epsilon(1e-14));
    REQUIRE(s.plan.tilde_sigma == +1);
    REQUIRE(s.plan.v_impulses.empty());  // theta already points along pi/2 everywhere
}

TEST_CASE("worked two-point example") {
    const PhysParams prm(20.0, 1.0, 1.0);
    const BlochState r0{0.3, 0.0, 0.4};
    const BlochState r1{0.0, 0.6, 0.0};
    const Synthesis s = synthesize(r0, r1, prm);

    REQUIRE(s.plan.tau0 == Catch::Approx(std::atan(0.75) / 20.0).epsilon(1e-14));
    REQUIRE(s.plan.tau1 == 0.0);
    REQUIRE(s.plan.tildeR0 == Catch::Approx(0.492020592702288).margin(1e-12));
    REQUIRE(s.plan.tildeR1 == Catch::Approx(0.6).margin(1e-15));
    REQUIRE(s.plan.tilde_sigma == +1);
    // Independent high-precision evaluation of the closed forms.
    REQUIRE(s.plan.tau_half == Catch::Approx(0.238976362833333465).margin(1e-12));
    REQUIRE(s.plan.total == Catch::Approx(0.271151418272997684).margin(1e-12));

    const TimeBounds tb = two_point_bounds(r0, r1, prm);
    REQUIRE(s.plan.total <= *tb.upper + 1e-9);
    REQUIRE(s.plan.total >= tb.lower - 1e-9);

    const ProtocolReport rep = validate(s, r0, r1, prm);
    REQUIRE(rep.elapsed == Catch::Approx(s.plan.total).margin(1e-7));
    REQUIRE(rep.endpoint_err_aux <= 1e-6);
    REQUIRE(rep.endpoint_err_3d.has_value());
    REQUIRE(*rep.endpoint_err_3d <= 1e-6);
    REQUIRE(rep.within_bounds);
    REQUIRE(rep.passed);
}

TEST_CASE("theta pieces take the advertised values and v has at most 4 impulses") {
    const PhysParams prm(20.0, 1.0, 1.0);
    std::mt19937_64 rng(401u);
    const double cap = feasibility_cap(prm);
    for (int i = 0; i < 40; ++i) {
        const BlochState r0 = random_ball_state(rng, 0.95);
        const BlochState r1 = random_ball_state(rng, cap - 1e-6);
        const Synthesis s = synthesize(r0, r1, prm);

        REQUIRE(s.plan.v_impulses.size() <= 4);
        REQUIRE(s.plan.tau0 <= M_PI / (2.0 * prm.omega) + 1e-15);
        REQUIRE(s.plan.tau1 <= M_PI / (2.0 * prm.omega) + 1e-15);
        REQUIRE(s.plan.tildeR1 <= 1.0);
        REQUIRE(s.plan.total ==
                Catch::Approx(s.plan.tau0 + s.plan.tau_half + s.plan.tau1).epsilon(1e-15));

        // Piece values sit in the advertised set {0, +-pi/2, pi}.
        for (double th : s.plan.theta_pieces) {
            const double v = std::abs(th);
            REQUIRE((v <= 1e-15 || std::abs(v - M_PI / 2) <= 1e-15 || std::abs(v - M_PI) <= 1e-15));
        }

        // The interior jumps follow the closed-form coefficients.
        const CylState c0 = bloch_to_cyl(r0);
        const CylState c1 = bloch_to_cyl(r1);
        const double a0 = std::atan2(c0.r_x, c0.R);
        const double a1 = std::atan2(c1.r_x, c1.R);
        if (s.plan.tau0 > 0.0 && s.plan.tau_half > 0.0) {
            const double expected =
                0.5 * M_PI * (-1.0 + s.plan.tilde_sigma + (a0 > 0 ? 1.0 : (a0 < 0 ? -1.0 : 0.0)));
            REQUIRE(s.plan.v_impulses_raw[1].dtheta == Catch::Approx(expected).margin(1e-12));
        }
        if (s.plan.tau1 > 0.0 && s.plan.tau_half > 0.0) {
            const double expected =
                0.5 * M_PI * (1.0 - s.plan.tilde_sigma + (a1 > 0 ? 1.0 : (a1 < 0 ? -1.0 : 0.0)));
            REQUIRE(s.plan.v_impulses_raw[s.plan.v_impulses_raw.size() - 2].dtheta ==
                    Catch::Approx(expected).margin(1e-12));
        }
    }
}

TEST_CASE("random feasible pairs validate to 1e-6 in both systems") {
    const PhysParams prm(20.0, 1.0, 1.0);
    std::mt19937_64 rng(402u);
    const double cap = feasibility_cap(prm);
    int with_u = 0;
    for (int i = 0; i < 30; ++i) {
        const BlochState r0 = random_ball_state(rng, 0.95);
        const BlochState r1 = random_ball_state(rng, cap - 1e-6);
        const Synthesis s = synthesize(r0, r1, prm);
        const ProtocolReport rep = validate(s, r0, r1, prm);
        REQUIRE(rep.endpoint_err_aux <= 1e-6);
        REQUIRE(rep.within_bounds);
        if (rep.endpoint_err_3d) {
            REQUIRE(*rep.endpoint_err_3d <= 1e-6);
            ++with_u;
        }
    }
    REQUIRE(with_u == 30);  // no random pair sits on the axis
}

TEST_CASE("middle phase preserves r_x within 1e-9") {
    const PhysParams prm(20.0, 1.0, 1.0);
    std::mt19937_64 rng(403u);
    for (int i = 0; i < 10; ++i) {
        const BlochState r0 = random_ball_state(rng, 0.9);
        const BlochState r1 = random_ball_state(rng, feasibility_cap(prm) - 1e-6);
        const Synthesis s = synthesize(r0, r1, prm);
        if (s.plan.tau_half <= 0.0) continue;
        const CylState c0 = bloch_to_cyl(r0);
        const CylTrajectory tr = integrate_aux(s.theta, c0, prm);
        for (std::size_t k = 0; k < tr.t.size(); ++k) {
            if (tr.t[k] >= s.plan.tau0 && tr.t[k] <= s.plan.tau0 + s.plan.tau_half)
                REQUIRE(std::abs(tr.y[k].r_x) <= 1e-9);
        }
    }
}

TEST_CASE("infeasible and unreachable targets are rejected") {
    const PhysParams prm(20.0, 1.0, 1.0);
    REQUIRE_THROWS_AS(synthesize({0, 0, 0}, {0, 0, 0.95}, prm), InfeasibleTarget);
    REQUIRE_THROWS_AS(synthesize({0, 0, 0}, {0, 0, 1.0}, prm), NoFiniteTime);
}

TEST_CASE("transfer to the origin") {
    const PhysParams prm(20.0, 1.0, 1.0);
    const BlochState r0{0.0, 0.3, 0.4};
    const BlochState r1{0.0, 0.0, 0.0};
    const Synthesis s = synthesize(r0, r1, prm);
    REQUIRE(s.plan.tau1 == 0.0);
    REQUIRE(s.plan.tilde_sigma == -1);
    REQUIRE(s.plan.tau_half == Catch::Approx(std::log(1.5) / prm.gamma).epsilon(1e-13));
    const ProtocolReport rep = validate(s, r0, r1, prm);
    REQUIRE(rep.endpoint_err_aux <= 1e-6);
}

TEST_CASE("zero-time transfer between rotation-equivalent states") {
    const PhysParams prm(20.0, 1.0, 1.0);
    // Same r_x and radius, different angle: one impulse, zero duration.
    const BlochState r0{0.0, 0.5, 0.0};
    const BlochState r1{0.0, 0.0, 0.5};
    const Synthesis s = synthesize(r0, r1, prm);
    REQUIRE(s.plan.total == 0.0);
    REQUIRE(s.plan.v_impulses.size() == 1);
    REQUIRE(s.plan.v_impulses.front().dtheta == Catch::Approx(M_PI / 2).margin(1e-15));
}
