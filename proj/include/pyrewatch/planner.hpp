#pragma once

// Budget-constrained design search over sensor density and flag threshold,
// with the UAV count fixed by the leftover budget.
//
//   detection : maximise pi_D[K] subject to w_s N_s + w_u N_u <= budget
//   losses    : minimise system cost + expected damage over the fallback horizon

#include "pyrewatch/detection_model.hpp"
#include "pyrewatch/dtmc.hpp"
#include "pyrewatch/scenario.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace pyrewatch::planner {

struct PlanGrid {
    std::vector<double> lambdas;   // sensors per km^2
    std::vector<int> thresholds;   // M
    std::vector<double> budgets;   // loss study only
    detection::QuadratureSpec quad;

    /// lambda in {10, 20, ..., 400}, M in {1, ..., 32}, 31 budgets log-spaced over [1e4, 1e7].
    static PlanGrid defaults();
};

std::vector<double> log_spaced(double lo, double hi, int count);

struct PlanResult {
    double budget = 0.0;
    double lambda_s = 0.0;
    int num_uavs = 0;
    int flag_threshold = 0;
    double objective = 0.0;
    double spend = 0.0;
    bool no_system = false; // loss study: deploying nothing was best
    dtmc::DetectionCurve curve;
};

struct SweepRow {
    double budget;
    double lambda_s;
    int flag_threshold;
    int num_uavs;
    double value;
};

struct BudgetOptimum {
    double budget;
    double min_loss;
    double lambda_s;
    int flag_threshold;
    int num_uavs;
};

struct PlanOutcome {
    PlanResult best;
    std::vector<SweepRow> sweep;
    std::vector<BudgetOptimum> per_budget; // loss study only
};

/// floor((budget - w_s N_s) / w_u). Throws InfeasibleError when the sensor
/// layer alone exceeds the budget.
long long budget_to_uavs(double budget, double n_sensors, double sensor_cost, double uav_cost);

/// w_s N_s + w_u N_u.
double system_cost(const Scenario& scenario);

/// damage_coeff * t^2, t in minutes.
double damage(const Scenario& scenario, double t_min);

/// System cost plus expected damage; `curve` must cover exactly k = 1..K-bar.
double expected_losses(const Scenario& scenario, const dtmc::DetectionCurve& curve);

/// Damage when the fire is only found by the fallback method at T_D.
double no_system_loss(const Scenario& scenario);

PlanOutcome solve_detection(const Scenario& tmpl, double budget, const PlanGrid& grid);
PlanOutcome solve_losses(const Scenario& tmpl, const PlanGrid& grid);

/// Loss search for several templates that differ only in costs, damage,
/// budget, fleet size or fallback horizon; detection profiles are computed once.
std::vector<PlanOutcome> solve_losses_batch(const std::vector<Scenario>& templates, const PlanGrid& grid);

/// Same searches evaluated without threads; identical results.
PlanOutcome solve_detection_serial(const Scenario& tmpl, double budget, const PlanGrid& grid);
PlanOutcome solve_losses_serial(const Scenario& tmpl, const PlanGrid& grid);

struct ThresholdChoice {
    double lambda_s;
    int best_threshold;
    double pi_detected;
};

/// Best M at each density with the template's UAV count held fixed.
std::vector<ThresholdChoice> best_threshold_by_density(const Scenario& tmpl, const std::vector<double>& lambdas,
                                                       const std::vector<int>& thresholds,
                                                       const detection::QuadratureSpec& quad);

inline constexpr const char* kDetectionSweepHeader = "budget,lambda_s,M,N_u,pi_D";
inline constexpr const char* kLossSweepHeader = "budget,lambda_s,M,N_u,expected_loss";

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool losses);
void write_budget_csv(std::ostream& out, const std::vector<BudgetOptimum>& rows);
std::string plan_result_json(const PlanResult& result, const std::string& problem);

} // namespace pyrewatch::planner
