// Serial reference vs OpenMP kernels: wall time and agreement.
#include "pyrewatch/detection_model.hpp"
#include "pyrewatch/dtmc.hpp"
#include "pyrewatch/monte_carlo.hpp"
#include "pyrewatch/parallel.hpp"
#include "pyrewatch/planner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>

using namespace pyrewatch;

namespace {

double seconds(const std::function<void()>& fn)
{
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(const char* name, double serial, double threaded, bool same)
{
    std::printf("%-22s serial %8.3f s  parallel %8.3f s  speedup %5.2fx  %s\n", name, serial, threaded,
                threaded > 0.0 ? serial / threaded : 0.0, same ? "identical" : "MISMATCH");
}

} // namespace

int main(int argc, char** argv)
{
    const long long trials = argc > 1 ? std::atoll(argv[1]) : 2000;
    std::printf("workers: %d\n", parallel::worker_count());
    const Scenario s = Scenario(ScenarioParams{}).with([](ScenarioParams& p) { p.flag_threshold = 16; });

    {
        detection::QuadratureSpec quad;
        quad.points = 800;
        std::vector<double> a, b;
        const double ts = seconds([&] { a = detection::conditional_detection_profile_serial(s, quad, s.steps()); });
        const double tp = seconds([&] { b = detection::conditional_detection_profile(s, quad, s.steps()); });
        report("detection profile", ts, tp, a == b);
    }
    {
        dtmc::DetectionCurve a, b;
        const double ts = seconds([&] { a = dtmc::detection_curve_serial(s, {}, s.steps()); });
        const double tp = seconds([&] { b = dtmc::detection_curve(s, {}, s.steps()); });
        report("detection curve", ts, tp, a.final_detection() == b.final_detection());
    }
    {
        mc::TrialConfig cfg{s, trials, 42, mc::BoundaryMode::InteriorIgnition};
        mc::McCurve a, b;
        const double ts = seconds([&] { a = mc::run_trials_serial(cfg); });
        const double tp = seconds([&] { b = mc::run_trials(cfg); });
        bool same = a.false_alarms == b.false_alarms;
        for (std::size_t i = 0; same && i < a.points.size(); ++i) same = a.points[i].detected == b.points[i].detected;
        report("monte carlo", ts, tp, same);
    }
    {
        auto grid = planner::PlanGrid::defaults();
        grid.lambdas = {20, 60, 100, 140, 180, 220};
        grid.thresholds = {1, 2, 4, 8, 16};
        planner::PlanOutcome a, b;
        const double ts = seconds([&] { a = planner::solve_detection_serial(s, 4.0e5, grid); });
        const double tp = seconds([&] { b = planner::solve_detection(s, 4.0e5, grid); });
        report("planner (detection)", ts, tp, a.best.objective == b.best.objective);
    }
    return 0;
}
