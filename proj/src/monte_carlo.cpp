#include "pyrewatch/monte_carlo.hpp"

#include "pyrewatch/errors.hpp"
#include "pyrewatch/geometry.hpp"
#include "pyrewatch/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

namespace pyrewatch::mc {
namespace {

using Rng = std::mt19937_64;

struct Point {
    double x;
    double y;
};

// Geometry of the square forest with optional wrap-around.
struct Forest {
    double side_m;
    bool torus;

    double delta(double a, double b) const
    {
        double d = a - b;
        if (torus) {
            if (d > 0.5 * side_m) d -= side_m;
            else if (d < -0.5 * side_m) d += side_m;
        }
        return d;
    }
    double dist2(Point a, Point b) const
    {
        const double dx = delta(a.x, b.x);
        const double dy = delta(a.y, b.y);
        return dx * dx + dy * dy;
    }
    double dist(Point a, Point b) const { return std::sqrt(dist2(a, b)); }
};

// Sensor positions bucketed on a square grid for disk queries.
class SensorField {
public:
    SensorField(const Forest& forest, double density_per_m2, double cell_m, Rng& rng) : forest_(forest)
    {
        cells_ = std::max(1, static_cast<int>(std::ceil(forest.side_m / cell_m)));
        cell_m_ = forest.side_m / cells_;
        std::poisson_distribution<long long> count_dist(density_per_m2 * cell_m_ * cell_m_);
        std::uniform_real_distribution<double> offset(0.0, cell_m_);
        const auto total = static_cast<std::size_t>(cells_) * cells_;
        start_.assign(total + 1, 0);
        points_.reserve(static_cast<std::size_t>(density_per_m2 * forest.side_m * forest.side_m * 1.01) + 16);
        for (std::size_t c = 0; c < total; ++c) {
            const double x0 = static_cast<double>(c % cells_) * cell_m_;
            const double y0 = static_cast<double>(c / cells_) * cell_m_;
            for (auto n = count_dist(rng); n > 0; --n) {
                const double x = x0 + offset(rng);
                points_.push_back({x, y0 + offset(rng)});
            }
            start_[c + 1] = points_.size();
        }
    }

    // Appends every sensor within `radius` of `center`.
    void query(Point center, double radius, std::vector<Point>& out) const
    {
        const int reach = static_cast<int>(std::ceil(radius / cell_m_));
        const double r2 = radius * radius;
        auto scan_cell = [&](int ix, int iy) {
            const auto c = static_cast<std::size_t>(iy) * cells_ + ix;
            for (auto i = start_[c]; i < start_[c + 1]; ++i)
                if (forest_.dist2(points_[i], center) <= r2) out.push_back(points_[i]);
        };
        if (forest_.torus && 2 * reach + 1 >= cells_) {
            for (int iy = 0; iy < cells_; ++iy)
                for (int ix = 0; ix < cells_; ++ix) scan_cell(ix, iy);
            return;
        }
        const int cx = cell_index(center.x);
        const int cy = cell_index(center.y);
        for (int gy = cy - reach; gy <= cy + reach; ++gy) {
            for (int gx = cx - reach; gx <= cx + reach; ++gx) {
                if (forest_.torus) {
                    scan_cell(((gx % cells_) + cells_) % cells_, ((gy % cells_) + cells_) % cells_);
                } else if (gx >= 0 && gy >= 0 && gx < cells_ && gy < cells_) {
                    scan_cell(gx, gy);
                }
            }
        }
    }

private:
    int cell_index(double v) const { return std::clamp(static_cast<int>(v / cell_m_), 0, cells_ - 1); }

    Forest forest_;
    int cells_ = 1;
    double cell_m_ = 1.0;
    std::vector<std::size_t> start_;
    std::vector<Point> points_;
};

struct Layout {
    Forest forest;
    int rows = 0;
    int cols = 0;
    double margin_m = 0.0;
};

Layout make_layout(const TrialConfig& cfg, int horizon_steps)
{
    const auto& p = cfg.scenario.params();
    Layout l{{std::sqrt(p.forest_area_km2) * 1000.0, cfg.boundary == BoundaryMode::Torus}, 0, 0, 0.0};
    if (p.num_uavs > 0) std::tie(l.rows, l.cols) = partition_grid(p.num_uavs);
    if (cfg.boundary == BoundaryMode::InteriorIgnition) {
        const auto outer = geometry::fire_geometry_at(cfg.scenario, horizon_steps);
        l.margin_m = outer.r_u_outer_m;
        if (2.0 * l.margin_m >= l.forest.side_m)
            throw ConfigError("boundary_mode: forest too small for interior ignition; use torus");
    }
    return l;
}

Point sample_ignition(const Layout& l, Rng& rng)
{
    std::uniform_real_distribution<double> u(l.margin_m, l.forest.side_m - l.margin_m);
    const double x = u(rng);
    const double y = u(rng);
    return {x, y};
}

Point sample_uav(const Layout& l, int uav, Rng& rng)
{
    const double w = l.forest.side_m / l.cols;
    const double h = l.forest.side_m / l.rows;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int col = uav % l.cols;
    const int row = uav / l.cols;
    const double x = (col + u(rng)) * w;
    const double y = (row + u(rng)) * h;
    return {x, y};
}

struct Visit {
    bool alarm = false;
    bool touches_ring = false;
};

// One hovering location: collect up to N flags from live covered sensors.
Visit visit(const Scenario& s, const Forest& forest, Point uav, Point fire, double r_fire, double r_sense,
            std::vector<Point>& covered, Rng& rng)
{
    const auto& p = s.params();
    Visit v;
    const double d = forest.dist(uav, fire);
    v.touches_ring = d - p.uav_coverage_radius_m <= r_sense && d + p.uav_coverage_radius_m >= r_fire;

    // Burnt sensors stay silent.
    const double fire2 = r_fire * r_fire;
    const double sense2 = r_sense * r_sense;
    std::erase_if(covered, [&](const Point& q) { return forest.dist2(q, fire) < fire2; });
    const auto limit = static_cast<std::size_t>(s.collected_per_step());
    if (covered.size() > limit) {
        for (std::size_t i = 0; i < limit; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, covered.size() - 1);
            std::swap(covered[i], covered[pick(rng)]);
        }
        covered.resize(limit);
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double eps = s.epsilon();
    int positives = 0;
    for (const auto& q : covered) {
        const bool in_ring = forest.dist2(q, fire) <= sense2;
        const bool flipped = u(rng) < eps;
        if (in_ring != flipped) ++positives;
    }
    v.alarm = positives >= p.flag_threshold;
    return v;
}

void accumulate(const std::vector<TrialOutcome>& outcomes, int steps, McCurve& curve)
{
    std::vector<long long> first_hits(static_cast<std::size_t>(steps) + 1, 0);
    curve.trials = static_cast<long long>(outcomes.size());
    for (const auto& o : outcomes) {
        curve.false_alarms += o.false_alarm_count;
        if (o.detected) ++first_hits[static_cast<std::size_t>(*o.detect_step)];
    }
    long long running = 0;
    for (int k = 1; k <= steps; ++k) {
        running += first_hits[static_cast<std::size_t>(k)];
        McPoint pt;
        pt.k = k;
        pt.detected = running;
        pt.pi_hat = curve.trials > 0 ? static_cast<double>(running) / curve.trials : 0.0;
        pt.ci_halfwidth = wilson_halfwidth(running, curve.trials);
        curve.points.push_back(pt);
    }
}

} // namespace

BoundaryMode parse_boundary_mode(const std::string& text)
{
    if (text == "interior-ignition") return BoundaryMode::InteriorIgnition;
    if (text == "torus") return BoundaryMode::Torus;
    throw ConfigError("boundary_mode: expected interior-ignition or torus, got '" + text + "'");
}

std::string to_string(BoundaryMode mode)
{
    return mode == BoundaryMode::Torus ? "torus" : "interior-ignition";
}

double wilson_halfwidth(long long successes, long long trials)
{
    if (trials <= 0) return 0.0;
    constexpr double z = 1.959963984540054;
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    return z * std::sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n)) / (1.0 + z * z / n);
}

std::uint64_t trial_seed(std::uint64_t seed, long long index)
{
    // splitmix64 finaliser over a Weyl step keyed by the trial index
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::pair<int, int> partition_grid(int uavs)
{
    if (uavs < 1) return {0, 0};
    int rows = static_cast<int>(std::sqrt(static_cast<double>(uavs)));
    while (rows > 1 && uavs % rows != 0) --rows;
    return {rows, uavs / rows};
}

TrialOutcome run_trial(const TrialConfig& cfg, long long index)
{
    const Scenario& s = cfg.scenario;
    const auto& p = s.params();
    const int steps = s.steps();
    const Layout layout = make_layout(cfg, steps);
    Rng rng(trial_seed(cfg.seed, index));

    TrialOutcome out;
    const Point fire = sample_ignition(layout, rng);
    const SensorField field(layout.forest, p.sensor_density_per_km2 / 1.0e6, p.uav_coverage_radius_m, rng);
    const double resolve_prob = s.step_min() / p.verify_time_min;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Point> covered;

    bool verifying = false;
    bool alarm_true = false;
    for (int k = 1; k <= steps; ++k) {
        if (verifying) {
            if (u(rng) < resolve_prob) {
                if (alarm_true) {
                    out.detected = true;
                    out.detect_step = k;
                    return out;
                }
                verifying = false;
            }
            continue;
        }
        const double r_fire = s.fire_step_m() * k;
        const double r_sense = r_fire + p.sensor_detect_radius_m;
        bool alarm = false;
        bool truth = false;
        for (int uav = 0; uav < p.num_uavs; ++uav) {
            const Point pos = sample_uav(layout, uav, rng);
            covered.clear();
            field.query(pos, p.uav_coverage_radius_m, covered);
            const Visit v = visit(s, layout.forest, pos, fire, r_fire, r_sense, covered, rng);
            if (v.alarm) {
                alarm = true;
                truth = truth || v.touches_ring;
            }
        }
        if (alarm) {
            verifying = true;
            alarm_true = truth;
            if (!truth) ++out.false_alarm_count;
        }
    }
    return out;
}

McCurve run_trials_serial(const TrialConfig& cfg)
{
    if (cfg.trials < 1) throw ConfigError("trials: must be >= 1");
    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(cfg.trials));
    for (long long i = 0; i < cfg.trials; ++i) outcomes[static_cast<std::size_t>(i)] = run_trial(cfg, i);
    McCurve curve;
    accumulate(outcomes, cfg.scenario.steps(), curve);
    return curve;
}

McCurve run_trials(const TrialConfig& cfg)
{
    if (cfg.trials < 1) throw ConfigError("trials: must be >= 1");
    make_layout(cfg, cfg.scenario.steps()); // surface layout errors before the parallel region
    std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(cfg.trials));
    const long long trials = cfg.trials;
#pragma omp parallel for schedule(dynamic, 8) num_threads(parallel::worker_count())
    for (long long i = 0; i < trials; ++i) outcomes[static_cast<std::size_t>(i)] = run_trial(cfg, i);
    McCurve curve;
    accumulate(outcomes, cfg.scenario.steps(), curve);
    return curve;
}

StepFrequency single_step_frequency(const TrialConfig& cfg, int k, long long placements)
{
    if (k < 1) throw ConfigError("k: must be >= 1");
    if (placements < 1) throw ConfigError("placements: must be >= 1");
    const Scenario& s = cfg.scenario;
    const auto& p = s.params();
    const Layout layout = make_layout(cfg, k);
    const double r_fire = s.fire_step_m() * k;
    const double r_sense = r_fire + p.sensor_detect_radius_m;
    const double disk_mean = p.sensor_density_per_km2 / 1.0e6 * std::numbers::pi * p.uav_coverage_radius_m *
                             p.uav_coverage_radius_m;

    long long detections = 0;
    long long false_alarms = 0;
#pragma omp parallel for schedule(static) reduction(+ : detections, false_alarms) \
    num_threads(parallel::worker_count())
    for (long long i = 0; i < placements; ++i) {
        Rng rng(trial_seed(cfg.seed, i));
        std::poisson_distribution<long long> count(disk_mean);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<Point> covered;
        const Point fire = sample_ignition(layout, rng);
        bool alarm = false;
        bool truth = false;
        for (int uav = 0; uav < p.num_uavs; ++uav) {
            const Point pos = sample_uav(layout, uav, rng);
            // Sensor field restricted to this coverage disk.
            covered.resize(static_cast<std::size_t>(count(rng)));
            for (auto& q : covered) {
                const double rad = p.uav_coverage_radius_m * std::sqrt(u(rng));
                const double ang = 2.0 * std::numbers::pi * u(rng);
                q = {pos.x + rad * std::cos(ang), pos.y + rad * std::sin(ang)};
            }
            const Visit v = visit(s, layout.forest, pos, fire, r_fire, r_sense, covered, rng);
            if (v.alarm) {
                alarm = true;
                truth = truth || v.touches_ring;
            }
        }
        if (alarm && truth) ++detections;
        else if (alarm) ++false_alarms;
    }
    const auto n = static_cast<double>(placements);
    return {detections / n, false_alarms / n, placements};
}

void write_mc_csv(std::ostream& out, const dtmc::DetectionCurve& analytic, const McCurve& simulated)
{
    using dtmc::format_value;
    out << kMcSchema << '\n' << kMcHeader << '\n';
    const std::size_t rows = std::min(analytic.points.size(), simulated.points.size());
    for (std::size_t i = 0; i < rows; ++i) {
        const auto& a = analytic.points[i];
        const auto& m = simulated.points[i];
        out << a.k << ',' << format_value(a.t_min) << ',' << format_value(a.p_int) << ',' << format_value(a.p_fa)
            << ',' << format_value(a.p_d) << ',' << format_value(a.pi_detected) << ','
            << format_value(a.rho_detected) << ',' << format_value(m.pi_hat) << ',' << format_value(m.ci_halfwidth)
            << ',' << simulated.trials << '\n';
    }
}

} // namespace pyrewatch::mc
