#pragma once

// Time-inhomogeneous three-state chain {no fire, verifying, detected}.
// Detected is absorbing; one chain describes the whole fleet.

#include "pyrewatch/detection_model.hpp"
#include "pyrewatch/scenario.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace pyrewatch::dtmc {

struct StateVector {
    double p_no_fire = 1.0;
    double p_verify = 0.0;
    double p_detected = 0.0;

    double total() const { return p_no_fire + p_verify + p_detected; }
};

/// Nonzero entries of one step matrix; the detected row is (0, 0, 1).
struct StepTransition {
    double p_nn = 1.0;
    double p_nv = 0.0;
    double p_vn = 0.0;
    double p_vv = 1.0;
    double p_vd = 0.0;
};

/// Requires T_vrf >= T (std::invalid_argument otherwise). When
/// p_d + p_fa = 0 the verification resolves nowhere and P_VV = 1.
StepTransition build_transition(const detection::StepProbabilities& step, double step_min, double verify_min);

StepTransition build_transition(const detection::StepProbabilities& step, const Scenario& scenario);

struct EvolveResult {
    StateVector state;
    bool renormalized = false;
};

/// Row vector times step matrix. Renormalises only when the mass drifts by
/// more than 1e-12.
EvolveResult evolve(const StateVector& state, const StepTransition& step);

struct CurvePoint {
    int k = 0;
    double t_min = 0.0;
    double p_int = 0.0;
    double p_fa = 0.0;
    double p_d = 0.0;
    double pi_detected = 0.0;
    double rho_detected = 0.0;
    StateVector state;
};

struct DetectionCurve {
    std::vector<CurvePoint> points; // k = 1..K
    /// Largest |(pi_D[k] - pi_D[k-1]) - pi_V[k-1] P_VD[k]| seen.
    double rho_discrepancy = 0.0;
    /// Largest |sum(pi[k]) - 1| seen before any renormalisation.
    double simplex_drift = 0.0;
    int renormalizations = 0;

    double final_detection() const { return points.empty() ? 0.0 : points.back().pi_detected; }
};

/// Tolerance of the runtime check between the two routes to rho_D.
inline constexpr double kRhoTolerance = 1e-10;

/// Runs the chain over precomputed step probabilities. Throws NumericError
/// when the two rho_D routes disagree beyond kRhoTolerance.
DetectionCurve run_chain(const Scenario& scenario, const std::vector<detection::StepProbabilities>& steps);

/// Chain over k = 1..steps with per-step probabilities rebuilt from a
/// conditional detection profile (see detection::conditional_detection_profile).
DetectionCurve curve_from_profile(const Scenario& scenario, const std::vector<double>& profile);

/// Full evaluation for k = 1..K; step probabilities are computed in parallel.
DetectionCurve detection_curve(const Scenario& scenario, const detection::QuadratureSpec& quad = {});
DetectionCurve detection_curve(const Scenario& scenario, const detection::QuadratureSpec& quad, int steps);
DetectionCurve detection_curve_serial(const Scenario& scenario, const detection::QuadratureSpec& quad, int steps);

inline constexpr const char* kCurveSchema = "# pyrewatch detection-curve v1";
inline constexpr const char* kCurveHeader = "k,t_min,p_int,p_fa,p_d,pi_D,rho_D";

/// Formats a value with 12 significant digits.
std::string format_value(double value);

/// Schema comment line, header and one row per step.
void write_curve_csv(std::ostream& out, const DetectionCurve& curve);

} // namespace pyrewatch::dtmc
