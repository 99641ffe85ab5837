#pragma once

// Stochastic simulation of the physical system: Poisson sensor field,
// random ignition, circular spread, UAVs re-placed uniformly in their own
// partition each step, flags flipped with the combined error, threshold
// test and a geometric verification dwell. One verification pauses the
// whole fleet, as in the analytical chain.
//
// Trial i draws from its own generator seeded by (seed, i), so results do
// not depend on the number of workers.

#include "pyrewatch/dtmc.hpp"
#include "pyrewatch/scenario.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pyrewatch::mc {

enum class BoundaryMode {
    /// Ignition at least R_s[K] + R_hov from the border; no ring is clipped.
    InteriorIgnition,
    /// Coordinates wrap around the square forest.
    Torus,
};

BoundaryMode parse_boundary_mode(const std::string& text);
std::string to_string(BoundaryMode mode);

struct TrialConfig {
    Scenario scenario;
    long long trials = 10000;
    std::uint64_t seed = 1;
    BoundaryMode boundary = BoundaryMode::InteriorIgnition;
};

struct TrialOutcome {
    bool detected = false;
    std::optional<int> detect_step;
    int false_alarm_count = 0;

    bool operator==(const TrialOutcome&) const = default;
};

struct McPoint {
    int k = 0;
    long long detected = 0; // trials detected at or before step k
    double pi_hat = 0.0;
    double ci_halfwidth = 0.0; // Wilson 95 %
};

struct McCurve {
    std::vector<McPoint> points;
    long long trials = 0;
    long long false_alarms = 0;
};

/// Wilson score interval half-width at 95 % confidence.
double wilson_halfwidth(long long successes, long long trials);

/// Per-trial generator seed; a bijective mix of (seed, index).
std::uint64_t trial_seed(std::uint64_t seed, long long index);

/// Near-square grid (rows, cols) with rows * cols = uavs, rows <= cols.
std::pair<int, int> partition_grid(int uavs);

TrialOutcome run_trial(const TrialConfig& cfg, long long index);

McCurve run_trials(const TrialConfig& cfg);
McCurve run_trials_serial(const TrialConfig& cfg);

struct StepFrequency {
    double p_detect = 0.0;
    double p_false_alarm = 0.0;
    long long placements = 0;
};

/// Single-step alarm frequencies at a fixed fire radius over independent
/// placements, split by whether an alarming UAV's coverage touches the ring.
StepFrequency single_step_frequency(const TrialConfig& cfg, int k, long long placements);

inline constexpr const char* kMcSchema = "# pyrewatch mc-curve v1";
inline constexpr const char* kMcHeader = "k,t_min,p_int,p_fa,p_d,pi_D,rho_D,pi_D_mc,ci_halfwidth,trials";

/// Analytical curve columns followed by the simulated estimate for each step.
void write_mc_csv(std::ostream& out, const dtmc::DetectionCurve& analytic, const McCurve& simulated);

} // namespace pyrewatch::mc
