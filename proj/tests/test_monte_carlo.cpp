#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pyrewatch/detection_model.hpp"
#include "pyrewatch/errors.hpp"
#include "pyrewatch/monte_carlo.hpp"
#include "pyrewatch/parallel.hpp"

#include <sstream>

using namespace pyrewatch;
using namespace pyrewatch::mc;

namespace {
Scenario study(int m = 1)
{
    return Scenario(ScenarioParams{}).with([&](ScenarioParams& p) { p.flag_threshold = m; });
}

bool same_curve(const McCurve& a, const McCurve& b)
{
    if (a.trials != b.trials || a.false_alarms != b.false_alarms || a.points.size() != b.points.size()) return false;
    for (std::size_t i = 0; i < a.points.size(); ++i)
        if (a.points[i].detected != b.points[i].detected) return false;
    return true;
}
} // namespace

TEST_CASE("helpers")
{
    CHECK(partition_grid(10) == std::pair{2, 5});
    CHECK(partition_grid(9) == std::pair{3, 3});
    CHECK(partition_grid(7) == std::pair{1, 7});
    CHECK(partition_grid(0) == std::pair{0, 0});
    CHECK(wilson_halfwidth(0, 0) == 0.0);
    CHECK(wilson_halfwidth(50, 100) == doctest::Approx(0.0951).epsilon(0.01));
    CHECK(wilson_halfwidth(0, 100) > 0.0);
    CHECK(trial_seed(1, 0) != trial_seed(1, 1));
    CHECK(trial_seed(1, 0) != trial_seed(2, 0));
    CHECK(parse_boundary_mode("torus") == BoundaryMode::Torus);
    CHECK_THROWS_AS(parse_boundary_mode("edge"), ConfigError);
}

TEST_CASE("no uav and no error never detects")
{
    const Scenario s = study().with([](ScenarioParams& p) {
        p.num_uavs = 0;
        p.combined_error = 0.0;
    });
    const auto curve = run_trials({s, 200, 3, BoundaryMode::InteriorIgnition});
    CHECK(curve.points.back().detected == 0);
    CHECK(curve.false_alarms == 0);
}

TEST_CASE("single trial is a step")
{
    const auto curve = run_trials({study(), 1, 11, BoundaryMode::InteriorIgnition});
    REQUIRE(curve.points.size() == 46);
    int jumps = 0;
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        CHECK((curve.points[i].pi_hat == 0.0 || curve.points[i].pi_hat == 1.0));
        if (i > 0 && curve.points[i].pi_hat != curve.points[i - 1].pi_hat) ++jumps;
    }
    CHECK(jumps <= 1);
}

TEST_CASE("empirical curve is monotone with valid intervals")
{
    const auto curve = run_trials({study(4), 300, 5, BoundaryMode::Torus});
    long long prev = 0;
    for (const auto& p : curve.points) {
        CHECK(p.detected >= prev);
        CHECK(p.ci_halfwidth > 0.0);
        CHECK(p.ci_halfwidth < 0.5);
        prev = p.detected;
    }
}

TEST_CASE("worker count does not change results")
{
    const TrialConfig cfg{study(8), 200, 77, BoundaryMode::InteriorIgnition};
    const auto serial = run_trials_serial(cfg);
    for (int workers : {1, 3, 8}) {
        parallel::ScopedWorkers scope(workers);
        CHECK(same_curve(run_trials(cfg), serial));
    }
    for (long long i : {0LL, 17LL, 199LL}) CHECK(run_trial(cfg, i) == run_trial(cfg, i));
}

TEST_CASE("detect step bounded by the horizon")
{
    const TrialConfig cfg{study(), 100, 9, BoundaryMode::InteriorIgnition};
    for (long long i = 0; i < cfg.trials; ++i) {
        const auto o = run_trial(cfg, i);
        if (o.detected) {
            REQUIRE(o.detect_step.has_value());
            CHECK(*o.detect_step >= 1);
            CHECK(*o.detect_step <= 46);
        }
    }
}

TEST_CASE("interior ignition needs room")
{
    const Scenario small = study().with([](ScenarioParams& p) { p.forest_area_km2 = 2.0; });
    CHECK_THROWS_AS(run_trials({small, 10, 1, BoundaryMode::InteriorIgnition}), ConfigError);
    CHECK_NOTHROW(run_trials({small, 10, 1, BoundaryMode::Torus}));
    CHECK_THROWS_AS(run_trials({study(), 0, 1, BoundaryMode::Torus}), ConfigError);
}

TEST_CASE("single step frequencies")
{
    const Scenario clean = study().with([](ScenarioParams& p) { p.combined_error = 0.0; });
    CHECK(single_step_frequency({clean, 1, 4, BoundaryMode::InteriorIgnition}, 10, 2000).p_false_alarm == 0.0);
    const Scenario none = study().with([](ScenarioParams& p) { p.num_uavs = 0; });
    CHECK(single_step_frequency({none, 1, 4, BoundaryMode::InteriorIgnition}, 10, 2000).p_detect == 0.0);

    const Scenario s = study();
    const auto f = single_step_frequency({s, 1, 21, BoundaryMode::InteriorIgnition}, 10, 100000);
    const auto a = detection::step_probabilities(s, 10, {});
    CHECK(std::abs(f.p_detect - a.p_d) <= 0.01);
}

TEST_CASE("high threshold with little error detects far less than a single flag")
{
    auto detect = [](int m) {
        const Scenario s = study(m).with([](ScenarioParams& p) { p.combined_error = 0.001; });
        return run_trials({s, 400, 13, BoundaryMode::InteriorIgnition}).points.back().pi_hat;
    };
    const double strict = detect(16);
    const double single = detect(1);
    CHECK(strict < 0.5);
    CHECK(strict < single - 0.3);
}

TEST_CASE("csv schema")
{
    const Scenario s = study();
    const auto mc = run_trials({s, 20, 1, BoundaryMode::InteriorIgnition});
    std::ostringstream out;
    write_mc_csv(out, dtmc::detection_curve(s), mc);
    const auto text = out.str();
    CHECK(text.rfind(std::string(kMcSchema) + "\n" + kMcHeader + "\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 48);
}
