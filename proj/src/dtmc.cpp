#include "pyrewatch/dtmc.hpp"

#include "pyrewatch/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace pyrewatch::dtmc {

StepTransition build_transition(const detection::StepProbabilities& step, double step_min, double verify_min)
{
    if (verify_min < step_min) throw std::invalid_argument("build_transition: verification shorter than a step");
    const double alarm = step.p_d + step.p_fa;
    if (alarm > 1.0 + 1e-12) throw std::invalid_argument("build_transition: p_d + p_fa exceeds 1");

    StepTransition t;
    t.p_nv = std::min(alarm, 1.0);
    t.p_nn = 1.0 - t.p_nv;
    if (alarm > 0.0) {
        t.p_vv = 1.0 - step_min / verify_min;
        const double leave = 1.0 - t.p_vv;
        t.p_vn = leave * step.p_fa / alarm;
        t.p_vd = leave * step.p_d / alarm;
    } else {
        t.p_vv = 1.0;
        t.p_vn = 0.0;
        t.p_vd = 0.0;
    }
    return t;
}

StepTransition build_transition(const detection::StepProbabilities& step, const Scenario& scenario)
{
    return build_transition(step, scenario.step_min(), scenario.params().verify_time_min);
}

EvolveResult evolve(const StateVector& s, const StepTransition& t)
{
    EvolveResult r;
    r.state.p_no_fire = s.p_no_fire * t.p_nn + s.p_verify * t.p_vn;
    r.state.p_verify = s.p_no_fire * t.p_nv + s.p_verify * t.p_vv;
    r.state.p_detected = s.p_verify * t.p_vd + s.p_detected;
    const double total = r.state.total();
    if (std::abs(total - 1.0) > 1e-12) {
        r.state.p_no_fire /= total;
        r.state.p_verify /= total;
        r.state.p_detected /= total;
        r.renormalized = true;
    }
    return r;
}

DetectionCurve run_chain(const Scenario& scenario, const std::vector<detection::StepProbabilities>& steps)
{
    DetectionCurve curve;
    curve.points.reserve(steps.size());
    StateVector state;
    for (const auto& step : steps) {
        const auto transition = build_transition(step, scenario);
        const auto next = evolve(state, transition);
        const double drift = std::abs(
            state.p_no_fire * (transition.p_nn + transition.p_nv) +
            state.p_verify * (transition.p_vn + transition.p_vv + transition.p_vd) + state.p_detected - 1.0);
        curve.simplex_drift = std::max(curve.simplex_drift, drift);
        if (next.renormalized) ++curve.renormalizations;

        CurvePoint pt;
        pt.k = step.k;
        pt.t_min = step.k * scenario.step_min();
        pt.p_int = step.p_int;
        pt.p_fa = step.p_fa;
        pt.p_d = step.p_d;
        pt.state = next.state;
        pt.pi_detected = next.state.p_detected;
        pt.rho_detected = next.state.p_detected - state.p_detected;
        const double rho_entry = state.p_verify * transition.p_vd;
        curve.rho_discrepancy = std::max(curve.rho_discrepancy, std::abs(pt.rho_detected - rho_entry));
        if (!(std::abs(pt.rho_detected - rho_entry) <= kRhoTolerance))
            throw NumericError("dtmc: rho_D routes disagree at k = " + std::to_string(step.k));
        curve.points.push_back(pt);
        state = next.state;
    }
    return curve;
}

DetectionCurve curve_from_profile(const Scenario& scenario, const std::vector<double>& profile)
{
    std::vector<detection::StepProbabilities> steps;
    steps.reserve(profile.size());
    for (std::size_t i = 0; i < profile.size(); ++i)
        steps.push_back(detection::assemble_step(scenario, static_cast<int>(i) + 1, profile[i]));
    return run_chain(scenario, steps);
}

DetectionCurve detection_curve(const Scenario& scenario, const detection::QuadratureSpec& quad, int steps)
{
    return curve_from_profile(scenario, detection::conditional_detection_profile(scenario, quad, steps));
}

DetectionCurve detection_curve(const Scenario& scenario, const detection::QuadratureSpec& quad)
{
    return detection_curve(scenario, quad, scenario.steps());
}

DetectionCurve detection_curve_serial(const Scenario& scenario, const detection::QuadratureSpec& quad, int steps)
{
    return curve_from_profile(scenario, detection::conditional_detection_profile_serial(scenario, quad, steps));
}

std::string format_value(double value)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", value);
    return buf;
}

void write_curve_csv(std::ostream& out, const DetectionCurve& curve)
{
    out << kCurveSchema << '\n' << kCurveHeader << '\n';
    for (const auto& p : curve.points) {
        out << p.k << ',' << format_value(p.t_min) << ',' << format_value(p.p_int) << ',' << format_value(p.p_fa)
            << ',' << format_value(p.p_d) << ',' << format_value(p.pi_detected) << ','
            << format_value(p.rho_detected) << '\n';
    }
}

} // namespace pyrewatch::dtmc
