#include "cli.hpp"

#include "pyrewatch/dtmc.hpp"
#include "pyrewatch/errors.hpp"
#include "pyrewatch/link_budget.hpp"
#include "pyrewatch/monte_carlo.hpp"
#include "pyrewatch/planner.hpp"
#include "pyrewatch/scenario.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>

namespace pyrewatch::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Common {
    std::string config;
    std::string out_dir = ".";
    int quad_points = 200;
};

// Outputs of one command, collected for the manifest.
struct Run {
    std::string command;
    std::optional<Scenario> scenario;
    json options = json::object();
    json seeds = json::array();
    std::vector<std::string> outputs;
};

Scenario resolve_scenario(const std::string& path)
{
    if (path.empty()) return Scenario(ScenarioParams{});
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    // A manifest from an earlier run carries the resolved scenario.
    try {
        const auto doc = json::parse(text);
        if (doc.is_object() && doc.contains("scenario") && doc.contains("command"))
            return load_scenario(doc["scenario"].dump());
    } catch (const json::parse_error&) {
    }
    return load_scenario(text);
}

std::string out_path(const Common& c, const std::string& name) { return (fs::path(c.out_dir) / name).string(); }

void emit(Run& run, const Common& c, const std::string& name, const std::string& content)
{
    const auto path = out_path(c, name);
    write_atomic(path, content);
    run.outputs.push_back(path);
}

void write_manifest(const Run& run, const Common& c, double seconds)
{
    json doc{{"command", run.command},
             {"tool_version", kToolVersion},
             {"scenario", run.scenario ? json::parse(dump_scenario(*run.scenario)) : json(nullptr)},
             {"options", run.options},
             {"seeds", run.seeds},
             {"outputs", run.outputs},
             {"wall_clock_s", seconds}};
    write_atomic(out_path(c, "manifest.json"), doc.dump(2) + "\n");
}

detection::QuadratureSpec quad_of(const Common& c)
{
    detection::QuadratureSpec q;
    q.points = c.quad_points;
    detection::validate(q);
    return q;
}

std::string curve_csv(const dtmc::DetectionCurve& curve)
{
    std::ostringstream s;
    dtmc::write_curve_csv(s, curve);
    return s.str();
}

double rho_sum(const dtmc::DetectionCurve& curve)
{
    double sum = 0.0;
    for (const auto& p : curve.points) sum += p.rho_detected;
    return sum;
}

// analyze ---------------------------------------------------------------

void cmd_analyze(Run& run, const Common& c, bool validate, std::ostream& out)
{
    const auto quad = quad_of(c);
    const Scenario& s = *run.scenario;
    const auto curve = dtmc::detection_curve(s, quad);
    run.options["quad_points"] = quad.points;

    json summary{{"pi_D_K", curve.final_detection()},
                 {"sum_rho_D", rho_sum(curve)},
                 {"K", s.steps()},
                 {"N", s.collected_per_step()},
                 {"T_min", s.step_min()},
                 {"epsilon", s.epsilon()},
                 {"rho_discrepancy", curve.rho_discrepancy},
                 {"simplex_drift", curve.simplex_drift},
                 {"renormalizations", curve.renormalizations},
                 {"notices", s.notices()}};
    if (validate) {
        detection::QuadratureSpec doubled;
        doubled.points = quad.points * 2;
        const auto fine = dtmc::detection_curve(s, doubled);
        double quad_gap = 0.0;
        for (std::size_t i = 0; i < curve.points.size(); ++i)
            quad_gap = std::max(quad_gap, std::abs(curve.points[i].pi_detected - fine.points[i].pi_detected));
        summary["validation"] = {{"rho_discrepancy", curve.rho_discrepancy},
                                 {"simplex_drift", curve.simplex_drift},
                                 {"quadrature_doubling_gap", quad_gap}};
        out << "rho_D max discrepancy: " << dtmc::format_value(curve.rho_discrepancy) << '\n'
            << "simplex max drift: " << dtmc::format_value(curve.simplex_drift) << '\n'
            << "quadrature doubling max |d pi_D| (I=" << quad.points << " vs " << doubled.points
            << "): " << dtmc::format_value(quad_gap) << '\n';
    }
    emit(run, c, "curve.csv", curve_csv(curve));
    emit(run, c, "summary.json", summary.dump(2) + "\n");
    out << "pi_D[" << s.steps() << "] = " << dtmc::format_value(curve.final_detection()) << '\n';
}

// simulate --------------------------------------------------------------

void cmd_simulate(Run& run, const Common& c, long long trials, std::uint64_t seed, const std::string& boundary,
                  std::ostream& out)
{
    mc::TrialConfig cfg{*run.scenario, trials, seed, mc::parse_boundary_mode(boundary)};
    const auto simulated = mc::run_trials(cfg);
    const auto analytic = dtmc::detection_curve(cfg.scenario, quad_of(c));
    run.options["trials"] = trials;
    run.options["boundary"] = mc::to_string(cfg.boundary);
    run.options["quad_points"] = c.quad_points;
    run.seeds.push_back(seed);

    std::ostringstream csv;
    mc::write_mc_csv(csv, analytic, simulated);
    emit(run, c, "mc_curve.csv", csv.str());

    double gap = 0.0;
    for (std::size_t i = 0; i < simulated.points.size(); ++i)
        gap = std::max(gap, std::abs(simulated.points[i].pi_hat - analytic.points[i].pi_detected));
    out << "pi_D_mc[" << cfg.scenario.steps() << "] = " << dtmc::format_value(simulated.points.back().pi_hat)
        << " +- " << dtmc::format_value(simulated.points.back().ci_halfwidth) << "  (analysis "
        << dtmc::format_value(analytic.final_detection()) << ", max gap " << dtmc::format_value(gap) << ")\n";
}

// optimize ----------------------------------------------------------------

struct GridOptions {
    std::string lambdas;
    std::string thresholds;
    std::string budgets;
};

planner::PlanGrid make_grid(const Common& c, const GridOptions& g)
{
    auto grid = planner::PlanGrid::defaults();
    grid.quad = quad_of(c);
    if (!g.lambdas.empty()) grid.lambdas = parse_range(g.lambdas);
    if (!g.thresholds.empty()) {
        grid.thresholds.clear();
        for (double m : parse_range(g.thresholds)) grid.thresholds.push_back(static_cast<int>(std::lround(m)));
    }
    if (!g.budgets.empty()) grid.budgets = parse_list(g.budgets);
    return grid;
}

json grid_json(const planner::PlanGrid& grid)
{
    return {{"lambdas", grid.lambdas}, {"thresholds", grid.thresholds}, {"quad_points", grid.quad.points}};
}

void cmd_optimize_detection(Run& run, const Common& c, std::optional<double> budget, const GridOptions& g,
                            std::ostream& out)
{
    const auto grid = make_grid(c, g);
    const double zeta = budget.value_or(run.scenario->params().budget);
    if (!(zeta > 0.0)) throw ConfigError("budget: must be > 0");
    const auto result = planner::solve_detection(*run.scenario, zeta, grid);
    run.options = grid_json(grid);
    run.options["budget"] = zeta;

    std::ostringstream sweep;
    planner::write_sweep_csv(sweep, result.sweep, false);
    emit(run, c, "detection_sweep.csv", sweep.str());
    emit(run, c, "plan.json", planner::plan_result_json(result.best, "detection") + "\n");
    const auto& b = result.best;
    out << "budget " << dtmc::format_value(zeta) << ": pi_D = " << dtmc::format_value(b.objective)
        << " at lambda_s = " << dtmc::format_value(b.lambda_s) << ", M = " << b.flag_threshold
        << ", N_u = " << b.num_uavs << '\n';
}

void cmd_optimize_losses(Run& run, const Common& c, const GridOptions& g, std::ostream& out)
{
    const auto grid = make_grid(c, g);
    const auto result = planner::solve_losses(*run.scenario, grid);
    run.options = grid_json(grid);
    run.options["budgets"] = grid.budgets;

    std::ostringstream sweep;
    planner::write_sweep_csv(sweep, result.sweep, true);
    emit(run, c, "loss_sweep.csv", sweep.str());
    std::ostringstream by_budget;
    planner::write_budget_csv(by_budget, result.per_budget);
    emit(run, c, "loss_by_budget.csv", by_budget.str());
    emit(run, c, "plan.json", planner::plan_result_json(result.best, "losses") + "\n");
    const auto& b = result.best;
    out << "no-system loss: " << dtmc::format_value(planner::no_system_loss(*run.scenario)) << '\n';
    if (b.no_system) {
        out << "best: deploy nothing, loss = " << dtmc::format_value(b.objective) << '\n';
    } else {
        out << "best: loss = " << dtmc::format_value(b.objective) << " at budget " << dtmc::format_value(b.budget)
            << ", lambda_s = " << dtmc::format_value(b.lambda_s) << ", M = " << b.flag_threshold
            << ", N_u = " << b.num_uavs << '\n';
    }
}

// altitude ------------------------------------------------------------------

void cmd_altitude(Run& run, const Common& c, const std::string& snr_list, int profile_points, std::ostream& out)
{
    const auto base = run.scenario->params().channel.value_or(link::ChannelParams{});
    const auto targets = parse_list(snr_list);
    run.options["snr_db"] = targets;

    std::ostringstream csv;
    csv << "# pyrewatch altitude v1\ntarget_snr_db,h_opt_m,r_max_m,status\n";
    std::ostringstream profile;
    profile << "# pyrewatch altitude-profile v1\ntarget_snr_db,h_m,r_max_m\n";
    for (double snr : targets) {
        auto ch = base;
        ch.target_edge_snr_db = snr;
        link::validate(ch);
        csv << dtmc::format_value(snr) << ',';
        try {
            const auto d = link::optimize_altitude(ch);
            csv << dtmc::format_value(d.h_opt_m) << ',' << dtmc::format_value(d.r_hov_max_m) << ",ok\n";
            out << "SNR " << dtmc::format_value(snr) << " dB: h* = " << dtmc::format_value(d.h_opt_m)
                << " m, R* = " << dtmc::format_value(d.r_hov_max_m) << " m\n";
        } catch (const InfeasibleError&) {
            csv << ",,infeasible\n";
            out << "SNR " << dtmc::format_value(snr) << " dB: infeasible\n";
        }
        if (profile_points > 0)
            for (const auto& p : link::altitude_sweep(ch, profile_points))
                profile << dtmc::format_value(snr) << ',' << dtmc::format_value(p.h_m) << ','
                        << dtmc::format_value(p.r_max_m) << '\n';
    }
    emit(run, c, "altitude.csv", csv.str());
    if (profile_points > 0) {
        run.options["profile_points"] = profile_points;
        emit(run, c, "altitude_profile.csv", profile.str());
    }
}

// sweep -------------------------------------------------------------------

const std::map<std::string, std::string>& aliases()
{
    static const std::map<std::string, std::string> table{
        {"lambda_s", "sensor_density_per_km2"}, {"epsilon", "combined_error"}, {"T_vrf", "verify_time_min"},
        {"d_s", "sensor_detect_radius_m"},      {"N_u", "num_uavs"},           {"M", "flag_threshold"},
        {"R_hov", "uav_coverage_radius_m"},     {"v", "fire_ros_m_per_min"},   {"T_f", "critical_time_min"},
        {"T_D", "fallback_time_min"},           {"omega_d", "damage_coeff"},   {"beta", "collection_ratio"}};
    return table;
}

std::string canonical_key(const std::string& key)
{
    const auto it = aliases().find(key);
    return it == aliases().end() ? key : it->second;
}

Scenario with_value(const Scenario& s, const std::string& key, double value)
{
    auto doc = json::parse(dump_scenario(s));
    if (key == "channel" || (!doc.contains(key) && key != "combined_error"))
        throw ConfigError("vary: unknown or non-numeric key '" + key + "'");
    if (std::floor(value) == value && std::abs(value) < 1e15) doc[key] = static_cast<long long>(value);
    else doc[key] = value;
    return load_scenario(doc.dump());
}

std::pair<std::string, std::string> split_assignment(const std::string& text, const std::string& flag)
{
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(flag + ": expected key=values, got '" + text + "'");
    return {text.substr(0, eq), text.substr(eq + 1)};
}

void cmd_sweep(Run& run, const Common& c, const std::string& vary, const std::string& series,
               std::vector<std::string> metrics, std::ostream& out)
{
    const auto quad = quad_of(c);
    const auto [vary_key_raw, vary_spec] = split_assignment(vary, "--vary");
    const auto vary_key = canonical_key(vary_key_raw);
    const auto vary_values = parse_range(vary_spec);
    std::string series_key;
    std::vector<double> series_values{std::nan("")};
    if (!series.empty()) {
        const auto [k, v] = split_assignment(series, "--series");
        series_key = canonical_key(k);
        series_values = parse_list(v);
    }
    if (metrics.empty()) metrics = {"pi_D"};
    for (const auto& m : metrics)
        if (m != "pi_D" && m != "pi_D_k" && m != "sum_rho_D" && m != "expected_loss")
            throw ConfigError("metric: expected pi_D, pi_D_k, sum_rho_D or expected_loss, got '" + m + "'");
    run.options = {{"vary", vary}, {"series", series}, {"metrics", metrics}, {"quad_points", quad.points}};

    std::ostringstream csv;
    csv << "# pyrewatch sweep v1\nvary_key,vary_value,series_key,series_value,metric,k,value\n";
    long long rows = 0;
    for (double sv : series_values) {
        const Scenario base = series_key.empty() ? *run.scenario : with_value(*run.scenario, series_key, sv);
        for (double vv : vary_values) {
            const Scenario s = with_value(base, vary_key, vv);
            const auto prefix = vary_key + ',' + dtmc::format_value(vv) + ',' + series_key + ',' +
                                (series_key.empty() ? std::string() : dtmc::format_value(sv)) + ',';
            const auto curve = dtmc::detection_curve(s, quad);
            for (const auto& m : metrics) {
                if (m == "pi_D") {
                    csv << prefix << m << ',' << s.steps() << ',' << dtmc::format_value(curve.final_detection())
                        << '\n';
                    ++rows;
                } else if (m == "pi_D_k") {
                    for (const auto& p : curve.points) {
                        csv << prefix << m << ',' << p.k << ',' << dtmc::format_value(p.pi_detected) << '\n';
                        ++rows;
                    }
                } else if (m == "sum_rho_D") {
                    csv << prefix << m << ',' << s.steps() << ',' << dtmc::format_value(rho_sum(curve)) << '\n';
                    ++rows;
                } else {
                    const auto horizon = dtmc::detection_curve(s, quad, s.fallback_steps());
                    csv << prefix << m << ',' << s.fallback_steps() << ','
                        << dtmc::format_value(planner::expected_losses(s, horizon)) << '\n';
                    ++rows;
                }
            }
        }
    }
    emit(run, c, "sweep.csv", csv.str());
    out << rows << " rows written\n";
}

} // namespace

std::vector<double> parse_range(const std::string& text)
{
    std::vector<double> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) {
        try {
            std::size_t used = 0;
            parts.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("range: cannot parse '" + text + "'");
        }
    }
    if (parts.size() == 1) return parts;
    if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
        throw ConfigError("range: expected start:stop:step with step > 0 and stop >= start, got '" + text + "'");
    const auto count = static_cast<long long>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9)) + 1;
    if (count > 1'000'000) throw ConfigError("range: more than 10^6 points in '" + text + "'");
    std::vector<double> values;
    for (long long i = 0; i < count; ++i) {
        const double v = parts[0] + static_cast<double>(i) * parts[2];
        values.push_back(std::abs(v) < 1e-12 * parts[2] ? 0.0 : v);
    }
    return values;
}

std::vector<double> parse_list(const std::string& text)
{
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("list: cannot parse '" + text + "'");
        }
    }
    if (values.empty()) throw ConfigError("list: empty");
    return values;
}

void write_atomic(const std::string& path, const std::string& content)
{
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw ConfigError("output: cannot write " + tmp.string());
        f << content;
        f.flush();
        if (!f) throw ConfigError("output: write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"UAV-assisted IoT wildfire detection toolkit", "pyrewatch"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config, "scenario JSON or an earlier manifest");
        sub->add_option("--out", common.out_dir, "output directory");
        sub->add_option("--quad-points", common.quad_points, "radial quadrature points")->check(CLI::PositiveNumber);
    };

    auto* analyze = app.add_subcommand("analyze", "detection curve and summary");
    bool validate = false;
    add_common(analyze);
    analyze->add_flag("--validate", validate, "report rho_D and quadrature self-checks");

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo detection curve");
    long long trials = 10000;
    std::uint64_t seed = 1;
    std::string boundary = "interior-ignition";
    add_common(simulate);
    simulate->add_option("--trials", trials)->check(CLI::PositiveNumber);
    simulate->add_option("--seed", seed);
    simulate->add_option("--boundary", boundary)->check(CLI::IsMember({"interior-ignition", "torus"}));

    GridOptions grid;
    auto add_grid = [&](CLI::App* sub) {
        sub->add_option("--lambdas", grid.lambdas, "density grid start:stop:step");
        sub->add_option("--thresholds", grid.thresholds, "threshold grid start:stop:step");
    };
    auto* opt_det = app.add_subcommand("optimize-detection", "maximise pi_D[K] under a budget");
    std::optional<double> budget;
    add_common(opt_det);
    add_grid(opt_det);
    opt_det->add_option("--budget", budget, "total budget (defaults to the scenario's)");

    auto* opt_loss = app.add_subcommand("optimize-losses", "minimise cost plus expected damage");
    add_common(opt_loss);
    add_grid(opt_loss);
    opt_loss->add_option("--budgets", grid.budgets, "comma separated budgets");

    auto* altitude = app.add_subcommand("altitude", "optimal hovering altitude per edge SNR");
    std::string snr_list = "0,5,10";
    int profile_points = 0;
    add_common(altitude);
    altitude->add_option("--snr-db", snr_list, "comma separated target SNRs in dB");
    altitude->add_option("--profile-points", profile_points, "also write R_max(h) on this many altitudes")
        ->check(CLI::NonNegativeNumber);

    auto* sweep = app.add_subcommand("sweep", "one-parameter sweep in long format");
    std::string vary;
    std::string series;
    std::vector<std::string> metrics;
    add_common(sweep);
    sweep->add_option("--vary", vary, "key=start:stop:step")->required();
    sweep->add_option("--series", series, "key=v1,v2,... evaluated for every sweep point");
    sweep->add_option("--metric", metrics, "pi_D, pi_D_k, sum_rho_D or expected_loss");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfigError;
    }

    const auto start = std::chrono::steady_clock::now();
    try {
        Run run;
        run.command = app.get_subcommands().front()->get_name();
        run.scenario = resolve_scenario(common.config);
        for (const auto& note : run.scenario->notices()) err << "note: " << note << '\n';

        if (analyze->parsed()) cmd_analyze(run, common, validate, out);
        else if (simulate->parsed()) cmd_simulate(run, common, trials, seed, boundary, out);
        else if (opt_det->parsed()) cmd_optimize_detection(run, common, budget, grid, out);
        else if (opt_loss->parsed()) cmd_optimize_losses(run, common, grid, out);
        else if (altitude->parsed()) cmd_altitude(run, common, snr_list, profile_points, out);
        else cmd_sweep(run, common, vary, series, metrics, out);

        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_manifest(run, common, seconds);
        return kOk;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << '\n';
        return kInfeasible;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kNumericError;
    } catch (const fs::filesystem_error& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        err << "config error: " << e.what() << '\n';
        return kConfigError;
    }
}

} // namespace pyrewatch::cli
