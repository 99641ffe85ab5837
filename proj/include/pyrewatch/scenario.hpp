#pragma once

// Scenario parameters, derived step quantities and JSON configuration.
//
// Units: areas in km^2, distances in m, rate of spread in m/min, observation
// time in s, every other time in min. Unspecified keys take the default
// study values below.

#include "pyrewatch/link_budget.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pyrewatch {

struct ScenarioParams {
    double forest_area_km2 = 400.0;
    double sensor_density_per_km2 = 180.0;
    int num_uavs = 10;
    double fire_ros_m_per_min = 20.0;
    double sensor_detect_radius_m = 100.0;
    /// Flag error; when unset it is derived from `channel`.
    std::optional<double> combined_error = 0.1;
    std::optional<link::ChannelParams> channel;
    double uav_coverage_radius_m = 400.0;
    double collection_ratio = 1.0;
    double obs_time_s = 0.1;
    double travel_time_min = 0.5;
    double verify_time_min = 1.0;
    double critical_time_min = 30.0;
    double fallback_time_min = 30.0;
    int flag_threshold = 1;
    double sensor_cost = 1.0;
    double uav_cost = 1000.0;
    double budget = 10.0e6;
    double damage_coeff = 10000.0;

    bool operator==(const ScenarioParams&) const = default;
};

/// floor() that absorbs representation error just below an integer
/// (30 / (0.5 + 0.5) must give 30, not 29).
long long stable_floor(double x);

/// A validated, immutable scenario with its derived quantities.
class Scenario {
public:
    /// Validates and derives; throws ConfigError naming the offending field.
    explicit Scenario(ScenarioParams params);

    const ScenarioParams& params() const { return params_; }

    double epsilon() const { return epsilon_; }
    /// N: observations collected per hovering location.
    int collected_per_step() const { return collected_; }
    /// T in minutes.
    double step_min() const { return step_min_; }
    /// K = floor(T_f / T).
    int steps() const { return steps_; }
    /// K-bar = floor(T_D / T).
    int fallback_steps() const { return fallback_steps_; }
    /// N_s = lambda_s * A (expected deployed sensors).
    double deployed_sensors() const { return params_.sensor_density_per_km2 * params_.forest_area_km2; }
    double fire_step_m() const { return params_.fire_ros_m_per_min * step_min_; }

    /// Informational messages produced while resolving the configuration.
    const std::vector<std::string>& notices() const { return notices_; }

    /// Copy with one or more fields changed, revalidated.
    template <typename Fn>
    Scenario with(Fn&& edit) const
    {
        ScenarioParams copy = params_;
        edit(copy);
        return Scenario(std::move(copy));
    }

private:
    ScenarioParams params_;
    double epsilon_ = 0.0;
    int collected_ = 0;
    double step_min_ = 0.0;
    int steps_ = 0;
    int fallback_steps_ = 0;
    std::vector<std::string> notices_;
};

/// floor(horizon / T); throws ConfigError when the horizon is shorter than one step.
int derived_step_count(const Scenario& scenario, double horizon_min);

/// Parses a JSON object (empty text means all defaults). Unknown keys are errors.
Scenario load_scenario(std::string_view config_text);

Scenario load_scenario_file(const std::string& path);

/// JSON text that load_scenario() maps back to identical parameters.
std::string dump_scenario(const Scenario& scenario, int indent = 2);

} // namespace pyrewatch
