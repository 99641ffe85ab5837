#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "pyrewatch/dtmc.hpp"
#include "pyrewatch/parallel.hpp"

#include <random>
#include <sstream>

using namespace pyrewatch;
using namespace pyrewatch::dtmc;

namespace {
detection::StepProbabilities step(int k, double p_d, double p_fa)
{
    detection::StepProbabilities s;
    s.k = k;
    s.p_d = p_d;
    s.p_fa = p_fa;
    s.p_int = p_d;
    return s;
}
} // namespace

TEST_CASE("transition entries")
{
    const auto t = build_transition(step(1, 0.2, 0.1), 0.65, 1.0);
    CHECK(t.p_vv == doctest::Approx(0.35));
    CHECK(t.p_nv == doctest::Approx(0.3));
    CHECK(t.p_nn == doctest::Approx(0.7));
    CHECK(t.p_vd == doctest::Approx(0.65 * 2.0 / 3.0));
    CHECK(t.p_vn == doctest::Approx(0.65 / 3.0));

    CHECK(build_transition(step(1, 0.2, 0.1), 1.0, 1.0).p_vv == 0.0);
    const auto clean = build_transition(step(1, 0.3, 0.0), 0.65, 1.0);
    CHECK(clean.p_vn == 0.0);
    CHECK(clean.p_vd == doctest::Approx(1.0 - clean.p_vv));
    const auto idle = build_transition(step(1, 0.0, 0.0), 0.65, 1.0);
    CHECK(idle.p_vv == 1.0);
    CHECK(idle.p_nn == 1.0);
    CHECK_THROWS(build_transition(step(1, 0.1, 0.1), 1.0, 0.5));
}

TEST_CASE("evolve")
{
    const StateVector start;
    const auto same = evolve(start, StepTransition{});
    CHECK(same.state.p_no_fire == 1.0);
    CHECK_FALSE(same.renormalized);

    StepTransition to_v{0.0, 1.0, 0.0, 0.0, 1.0};
    const auto a = evolve(start, to_v);
    const auto b = evolve(a.state, to_v);
    CHECK(a.state.p_verify == 1.0);
    CHECK(b.state.p_detected == 1.0);
}

TEST_CASE("chain matches path enumeration")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 0.5);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<detection::StepProbabilities> steps;
        std::vector<oracle::Step> path;
        for (int k = 1; k <= 7; ++k) {
            const double pd = u(rng), pfa = rep % 5 == 0 ? 0.0 : u(rng);
            steps.push_back(step(k, pd, pfa));
            path.push_back({pd, pfa});
        }
        const Scenario s(ScenarioParams{});
        const auto curve = run_chain(s, steps);
        CHECK(curve.final_detection() == doctest::Approx(oracle::path_sum_detection(path, 0.35)).epsilon(1e-12));
    }
}

TEST_CASE("forced path")
{
    const Scenario s = Scenario(ScenarioParams{}).with([](ScenarioParams& p) { p.verify_time_min = 0.65; });
    const auto curve = run_chain(s, {step(1, 1.0, 0.0), step(2, 1.0, 0.0), step(3, 1.0, 0.0)});
    CHECK(curve.points[0].pi_detected == 0.0);
    CHECK(curve.points[1].pi_detected == 1.0);
    CHECK(curve.points[1].rho_detected == 1.0);
    CHECK(curve.points[2].rho_detected == 0.0);
}

TEST_CASE("study curve invariants")
{
    for (int m : {1, 4, 8, 16}) {
        const Scenario s = Scenario(ScenarioParams{}).with([&](ScenarioParams& p) { p.flag_threshold = m; });
        const auto curve = detection_curve(s);
        REQUIRE(curve.points.size() == 46);
        CHECK(curve.rho_discrepancy <= kRhoTolerance);
        CHECK(curve.simplex_drift <= 1e-12);
        double prev = 0.0, rho = 0.0;
        for (const auto& p : curve.points) {
            CHECK(p.pi_detected >= prev);
            CHECK(std::abs(p.state.total() - 1.0) <= 1e-12);
            prev = p.pi_detected;
            rho += p.rho_detected;
        }
        CHECK(rho == doctest::Approx(curve.final_detection()).epsilon(1e-12));
        CHECK(detection_curve_serial(s, {}, s.steps()).final_detection() == curve.final_detection());
    }
}

TEST_CASE("no uav and no error never detects")
{
    const Scenario s = Scenario(ScenarioParams{}).with([](ScenarioParams& p) {
        p.num_uavs = 0;
        p.combined_error = 0.0;
    });
    const auto curve = detection_curve(s);
    CHECK(curve.final_detection() == 0.0);
    for (const auto& p : curve.points) CHECK(p.p_d == 0.0);
}

TEST_CASE("high error plateau")
{
    for (int m : {1, 4, 8, 16}) {
        const Scenario s = Scenario(ScenarioParams{}).with([&](ScenarioParams& p) {
            p.flag_threshold = m;
            p.combined_error = 0.5;
        });
        CHECK(detection_curve(s).final_detection() == doctest::Approx(0.6).epsilon(0.05 / 0.6));
    }
}

TEST_CASE("curve csv")
{
    const Scenario s(ScenarioParams{});
    std::ostringstream out;
    write_curve_csv(out, detection_curve(s));
    const std::string text = out.str();
    CHECK(text.rfind(std::string(kCurveSchema) + "\n" + kCurveHeader + "\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 48);
    CHECK(text.find('\r') == std::string::npos);
    CHECK(format_value(0.1) == "0.1");
    CHECK(format_value(1.0 / 3.0) == "0.333333333333");
}
