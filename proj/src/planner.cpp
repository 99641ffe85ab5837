#include "pyrewatch/planner.hpp"

#include "pyrewatch/errors.hpp"
#include "pyrewatch/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <stdexcept>

namespace pyrewatch::planner {
namespace {

constexpr double kTie = 1e-12;

// One (density, threshold) design with its UAV-independent detection profile.
struct Cell {
    double lambda_s;
    int threshold;
    std::optional<Scenario> base;
    std::vector<double> profile;
};

std::vector<Cell> enumerate_cells(const Scenario& tmpl, const PlanGrid& grid)
{
    std::vector<Cell> cells;
    for (double lambda : grid.lambdas) {
        for (int m : grid.thresholds) {
            Cell c{lambda, m, std::nullopt, {}};
            try {
                c.base = tmpl.with([&](ScenarioParams& p) {
                    p.sensor_density_per_km2 = lambda;
                    p.flag_threshold = m;
                });
            } catch (const ConfigError&) {
                continue; // M > N or the step outgrows the verification time
            }
            cells.push_back(std::move(c));
        }
    }
    return cells;
}

int profile_length(const Scenario& s) { return std::max(s.steps(), s.fallback_steps()); }

void fill_profiles(std::vector<Cell>& cells, const detection::QuadratureSpec& quad, bool threaded)
{
    detection::validate(quad);
    const auto n = static_cast<long long>(cells.size());
    if (threaded) {
#pragma omp parallel for schedule(dynamic) num_threads(parallel::worker_count())
        for (long long i = 0; i < n; ++i) {
            auto& c = cells[static_cast<std::size_t>(i)];
            c.profile = detection::conditional_detection_profile_serial(*c.base, quad, profile_length(*c.base));
        }
    } else {
        for (auto& c : cells)
            c.profile = detection::conditional_detection_profile_serial(*c.base, quad, profile_length(*c.base));
    }
}

dtmc::DetectionCurve chain(const Scenario& s, const std::vector<double>& profile, int steps)
{
    return dtmc::curve_from_profile(s, {profile.begin(), profile.begin() + steps});
}

std::optional<Scenario> staffed(const Cell& c, double budget)
{
    const auto& p = c.base->params();
    const double n_sensors = c.base->deployed_sensors();
    if (p.sensor_cost * n_sensors > budget) return std::nullopt;
    const long long uavs = budget_to_uavs(budget, n_sensors, p.sensor_cost, p.uav_cost);
    if (uavs > 1'000'000'000) return std::nullopt;
    return c.base->with([&](ScenarioParams& q) {
        q.num_uavs = static_cast<int>(uavs);
        q.budget = budget;
    });
}

PlanResult make_result(const Scenario& s, double budget, double objective)
{
    PlanResult r;
    r.budget = budget;
    r.lambda_s = s.params().sensor_density_per_km2;
    r.num_uavs = s.params().num_uavs;
    r.flag_threshold = s.params().flag_threshold;
    r.objective = objective;
    r.spend = system_cost(s);
    return r;
}

// Deterministic preference between two candidates; `maximise` picks the direction.
bool preferred(const PlanResult& a, const PlanResult& b, bool maximise)
{
    const double gain = maximise ? a.objective - b.objective : b.objective - a.objective;
    if (gain > kTie) return true;
    if (gain < -kTie) return false;
    if (a.spend != b.spend) return a.spend < b.spend;
    if (a.flag_threshold != b.flag_threshold) return a.flag_threshold < b.flag_threshold;
    return a.lambda_s < b.lambda_s;
}

PlanOutcome detection_search(const Scenario& tmpl, double budget, const PlanGrid& grid, bool threaded)
{
    if (grid.lambdas.empty() || grid.thresholds.empty()) throw ConfigError("grid: empty density or threshold grid");
    auto cells = enumerate_cells(tmpl, grid);
    fill_profiles(cells, grid.quad, threaded);

    PlanOutcome out;
    std::optional<PlanResult> best;
    std::optional<Scenario> best_scenario;
    std::size_t best_cell = 0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const auto s = staffed(cells[i], budget);
        if (!s) continue;
        const auto curve = chain(*s, cells[i].profile, s->steps());
        auto r = make_result(*s, budget, curve.final_detection());
        out.sweep.push_back({budget, r.lambda_s, r.flag_threshold, r.num_uavs, r.objective});
        if (!best || preferred(r, *best, true)) {
            best = r;
            best_scenario = s;
            best_cell = i;
        }
    }
    if (!best) throw InfeasibleError("detection: no density/threshold on the grid fits the budget");
    best->curve = chain(*best_scenario, cells[best_cell].profile, best_scenario->steps());
    out.best = std::move(*best);
    return out;
}

// Profiles depend on neither costs nor damage, so one set serves every template.
std::vector<Cell> rebase(const std::vector<Cell>& cells, const Scenario& tmpl)
{
    std::vector<Cell> out;
    out.reserve(cells.size());
    for (const auto& c : cells) {
        Cell r = c;
        r.base = tmpl.with([&](ScenarioParams& p) {
            p.sensor_density_per_km2 = c.lambda_s;
            p.flag_threshold = c.threshold;
        });
        out.push_back(std::move(r));
    }
    return out;
}

bool same_detection_model(const Scenario& a, const Scenario& b)
{
    auto strip = [](ScenarioParams p) {
        p.sensor_cost = p.uav_cost = p.budget = p.damage_coeff = 0.0;
        p.fallback_time_min = 1.0;
        p.num_uavs = 0;
        return p;
    };
    return strip(a.params()) == strip(b.params()) && a.epsilon() == b.epsilon();
}

PlanOutcome loss_search(const Scenario& tmpl, const PlanGrid& grid, const std::vector<Cell>& cells)
{
    PlanOutcome out;
    std::optional<PlanResult> best;
    std::optional<Scenario> best_scenario;
    std::size_t best_cell = 0;
    for (double budget : grid.budgets) {
        std::optional<PlanResult> local;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const auto s = staffed(cells[i], budget);
            if (!s) continue;
            if (static_cast<int>(cells[i].profile.size()) < s->fallback_steps()) continue;
            const auto curve = chain(*s, cells[i].profile, s->fallback_steps());
            auto r = make_result(*s, budget, expected_losses(*s, curve));
            out.sweep.push_back({budget, r.lambda_s, r.flag_threshold, r.num_uavs, r.objective});
            if (!local || preferred(r, *local, false)) local = r;
            if (!best || preferred(r, *best, false)) {
                best = r;
                best_scenario = s;
                best_cell = i;
            }
        }
        if (local)
            out.per_budget.push_back(
                {budget, local->objective, local->lambda_s, local->flag_threshold, local->num_uavs});
    }
    if (!best) throw InfeasibleError("losses: no density/threshold on the grid fits any budget");

    const double baseline = no_system_loss(tmpl);
    if (baseline < best->objective) {
        PlanResult none;
        none.objective = baseline;
        none.no_system = true;
        out.best = std::move(none);
        return out;
    }
    best->curve = chain(*best_scenario, cells[best_cell].profile, best_scenario->fallback_steps());
    out.best = std::move(*best);
    return out;
}

std::vector<PlanOutcome> loss_batch(const std::vector<Scenario>& templates, const PlanGrid& grid, bool threaded)
{
    if (grid.lambdas.empty() || grid.thresholds.empty() || grid.budgets.empty())
        throw ConfigError("grid: empty density, threshold or budget grid");
    if (templates.empty()) return {};
    for (const auto& t : templates)
        if (!same_detection_model(t, templates.front()))
            throw std::invalid_argument("solve_losses_batch: templates differ beyond costs and damage");
    // Profiles must reach the longest fallback horizon of the batch.
    const auto longest = std::max_element(templates.begin(), templates.end(), [](const auto& a, const auto& b) {
        return a.params().fallback_time_min < b.params().fallback_time_min;
    });
    auto cells = enumerate_cells(*longest, grid);
    fill_profiles(cells, grid.quad, threaded);

    std::vector<PlanOutcome> out;
    for (const auto& t : templates) out.push_back(loss_search(t, grid, rebase(cells, t)));
    return out;
}

} // namespace

std::vector<double> log_spaced(double lo, double hi, int count)
{
    std::vector<double> v;
    if (count <= 0) return v;
    if (count == 1) return {lo};
    for (int i = 0; i < count; ++i) v.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
    return v;
}

PlanGrid PlanGrid::defaults()
{
    PlanGrid g;
    for (int l = 10; l <= 400; l += 10) g.lambdas.push_back(l);
    for (int m = 1; m <= 32; ++m) g.thresholds.push_back(m);
    g.budgets = log_spaced(1.0e4, 1.0e7, 31);
    return g;
}

long long budget_to_uavs(double budget, double n_sensors, double sensor_cost, double uav_cost)
{
    const double sensors = sensor_cost * n_sensors;
    if (sensors > budget) throw InfeasibleError("budget: sensor layer alone exceeds the budget");
    long long uavs = stable_floor((budget - sensors) / uav_cost);
    while (uavs > 0 && sensors + uav_cost * static_cast<double>(uavs) > budget) --uavs;
    return uavs;
}

double system_cost(const Scenario& s)
{
    const auto& p = s.params();
    return p.sensor_cost * s.deployed_sensors() + p.uav_cost * p.num_uavs;
}

double damage(const Scenario& s, double t_min) { return s.params().damage_coeff * t_min * t_min; }

double expected_losses(const Scenario& s, const dtmc::DetectionCurve& curve)
{
    const int horizon = s.fallback_steps();
    if (static_cast<int>(curve.points.size()) != horizon)
        throw std::invalid_argument("expected_losses: curve does not span the fallback horizon");
    double loss = system_cost(s);
    for (const auto& pt : curve.points) loss += damage(s, pt.k * s.step_min()) * pt.rho_detected;
    loss += damage(s, (horizon + 1) * s.step_min()) * (1.0 - curve.final_detection());
    return loss;
}

double no_system_loss(const Scenario& s) { return damage(s, s.params().fallback_time_min); }

PlanOutcome solve_detection(const Scenario& tmpl, double budget, const PlanGrid& grid)
{
    return detection_search(tmpl, budget, grid, true);
}

PlanOutcome solve_detection_serial(const Scenario& tmpl, double budget, const PlanGrid& grid)
{
    return detection_search(tmpl, budget, grid, false);
}

PlanOutcome solve_losses(const Scenario& tmpl, const PlanGrid& grid) { return loss_batch({tmpl}, grid, true).front(); }

PlanOutcome solve_losses_serial(const Scenario& tmpl, const PlanGrid& grid)
{
    return loss_batch({tmpl}, grid, false).front();
}

std::vector<PlanOutcome> solve_losses_batch(const std::vector<Scenario>& templates, const PlanGrid& grid)
{
    return loss_batch(templates, grid, true);
}

std::vector<ThresholdChoice> best_threshold_by_density(const Scenario& tmpl, const std::vector<double>& lambdas,
                                                       const std::vector<int>& thresholds,
                                                       const detection::QuadratureSpec& quad)
{
    PlanGrid grid;
    grid.lambdas = lambdas;
    grid.thresholds = thresholds;
    grid.quad = quad;
    auto cells = enumerate_cells(tmpl, grid);
    fill_profiles(cells, quad, true);

    std::vector<ThresholdChoice> out;
    for (double lambda : lambdas) {
        std::optional<ThresholdChoice> choice;
        for (const auto& c : cells) {
            if (c.lambda_s != lambda) continue;
            const double pi = chain(*c.base, c.profile, c.base->steps()).final_detection();
            if (!choice || pi > choice->pi_detected + kTie) choice = ThresholdChoice{lambda, c.threshold, pi};
        }
        if (choice) out.push_back(*choice);
    }
    return out;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows, bool losses)
{
    using dtmc::format_value;
    out << (losses ? "# pyrewatch loss-sweep v1" : "# pyrewatch detection-sweep v1") << '\n'
        << (losses ? kLossSweepHeader : kDetectionSweepHeader) << '\n';
    for (const auto& r : rows)
        out << format_value(r.budget) << ',' << format_value(r.lambda_s) << ',' << r.flag_threshold << ','
            << r.num_uavs << ',' << format_value(r.value) << '\n';
}

void write_budget_csv(std::ostream& out, const std::vector<BudgetOptimum>& rows)
{
    using dtmc::format_value;
    out << "# pyrewatch loss-by-budget v1\nbudget,min_loss,lambda_s,M,N_u\n";
    for (const auto& r : rows)
        out << format_value(r.budget) << ',' << format_value(r.min_loss) << ',' << format_value(r.lambda_s) << ','
            << r.flag_threshold << ',' << r.num_uavs << '\n';
}

std::string plan_result_json(const PlanResult& r, const std::string& problem)
{
    nlohmann::json curve = nlohmann::json::array();
    for (const auto& p : r.curve.points)
        curve.push_back({{"k", p.k}, {"t_min", p.t_min}, {"pi_D", p.pi_detected}, {"rho_D", p.rho_detected}});
    nlohmann::json doc{{"problem", problem},
                       {"budget", r.budget},
                       {"lambda_s", r.lambda_s},
                       {"num_uavs", r.num_uavs},
                       {"flag_threshold", r.flag_threshold},
                       {"objective", r.objective},
                       {"spend", r.spend},
                       {"no_system", r.no_system},
                       {"curve", curve}};
    return doc.dump(2);
}

} // namespace pyrewatch::planner
