#include "pyrewatch/detection_model.hpp"

#include "pyrewatch/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pyrewatch::detection {
namespace {

constexpr int kFactorialTable = 1 << 16;

const std::array<double, kFactorialTable>& factorial_table()
{
    static const auto table = [] {
        std::array<double, kFactorialTable> t{};
        t[0] = 0.0;
        for (int i = 1; i < kFactorialTable; ++i) t[i] = t[i - 1] + std::log(static_cast<double>(i));
        return t;
    }();
    return table;
}

double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

// P[Bin(n, p) <= upper], empty when upper < 0.
double binomial_cdf(int n, int upper, double p)
{
    double sum = 0.0;
    for (int m = 0; m <= std::min(n, upper); ++m) sum += binomial_pmf(n, m, p);
    return sum;
}

// Conditional detection at each quadrature radius r_1..r_I.
void quadrature_terms(const Scenario& scenario, const geometry::FireGeometry& geom, int points, int i_begin,
                      int i_end, double* out)
{
    const int collected = scenario.collected_per_step();
    const int threshold = scenario.params().flag_threshold;
    const double eps = scenario.epsilon();
    const double span = geom.r_u_outer_m - geom.r_u_inner_m;
    for (int i = i_begin; i < i_end; ++i) {
        const double r = geom.r_u_inner_m + span * static_cast<double>(i + 1) / points;
        const int n_in = geometry::sensors_in_intersection(scenario, geom, r);
        out[i] = p_detect_given_n_in(n_in, collected - n_in, threshold, eps);
    }
}

double weighted_sum(const std::vector<double>& weights, const std::vector<double>& terms)
{
    double sum = 0.0;
    for (std::size_t i = 1; i < terms.size(); ++i) sum += weights[i] * terms[i];
    return clamp_probability(sum);
}

} // namespace

double log_factorial(long long n)
{
    if (n < 0) throw std::invalid_argument("log_factorial: negative argument");
    if (n < kFactorialTable) return factorial_table()[static_cast<std::size_t>(n)];
    // Stirling series; relative error far below double epsilon at this size.
    const double x = static_cast<double>(n);
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    return x * std::log(x) - x + 0.5 * std::log(2.0 * std::numbers::pi * x) +
           inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 / 1260.0));
}

double binomial_pmf(int n, int m, double p)
{
    if (m < 0 || m > n) return 0.0;
    if (p <= 0.0) return m == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return m == n ? 1.0 : 0.0;
    const double log_choose = log_factorial(n) - log_factorial(m) - log_factorial(n - m);
    return std::exp(log_choose + m * std::log(p) + (n - m) * std::log1p(-p));
}

double binomial_upper_tail_direct(int n, int m, double p)
{
    double sum = 0.0;
    for (int j = std::max(m, 0); j <= n; ++j) sum += binomial_pmf(n, j, p);
    return clamp_probability(sum);
}

double binomial_upper_tail_complement(int n, int m, double p)
{
    return clamp_probability(1.0 - binomial_cdf(n, m - 1, p));
}

double binomial_upper_tail(int n, int m, double p)
{
    return 2 * m > n ? binomial_upper_tail_direct(n, m, p) : binomial_upper_tail_complement(n, m, p);
}

void validate(const QuadratureSpec& quad)
{
    if (quad.points < 2) throw std::invalid_argument("quadrature: point count must be >= 2");
}

double p_intersection(const Scenario& scenario, const geometry::FireGeometry& geom)
{
    const auto& p = scenario.params();
    return std::min(1.0, p.num_uavs * geom.ring_area_km2 / p.forest_area_km2);
}

double p_false_alarm(double p_int, int collected, int threshold, double eps)
{
    if (threshold > collected) throw std::invalid_argument("p_false_alarm: M exceeds N");
    if (threshold <= 0) return clamp_probability(1.0 - p_int);
    if (eps == 0.0) return 0.0;
    const double tail = threshold == 1 ? -std::expm1(collected * std::log1p(-eps))
                                       : binomial_upper_tail(collected, threshold, eps);
    return clamp_probability((1.0 - p_int) * tail);
}

double p_detect_given_n_in_direct(int n_in, int n_out, int threshold, double eps)
{
    double sum = 0.0;
    for (int m_in = 0; m_in <= n_in; ++m_in) {
        const double true_pos = binomial_pmf(n_in, m_in, 1.0 - eps);
        double false_tail = 0.0;
        for (int m_out = std::max(0, threshold - m_in); m_out <= n_out; ++m_out)
            false_tail += binomial_pmf(n_out, m_out, eps);
        sum += true_pos * false_tail;
    }
    return clamp_probability(sum);
}

double p_detect_given_n_in_complement(int n_in, int n_out, int threshold, double eps)
{
    double miss = 0.0;
    for (int m_in = 0; m_in <= std::min(n_in, threshold - 1); ++m_in) {
        const double true_pos = binomial_pmf(n_in, m_in, 1.0 - eps);
        double false_head = 0.0;
        for (int m_out = 0; m_out <= std::min(n_out, threshold - m_in - 1); ++m_out)
            false_head += binomial_pmf(n_out, m_out, eps);
        miss += true_pos * false_head;
    }
    return clamp_probability(1.0 - miss);
}

double p_detect_given_n_in(int n_in, int n_out, int threshold, double eps)
{
    if (n_in < 0 || n_out < 0) throw std::invalid_argument("p_detect_given_n_in: negative count");
    if (threshold < 1 || threshold > n_in + n_out)
        throw std::invalid_argument("p_detect_given_n_in: threshold outside [1, N]");
    if (eps == 0.0) return n_in >= threshold ? 1.0 : 0.0;
    if (threshold == 1) {
        // Miss only if every ring sensor errs and no outside sensor errs.
        return clamp_probability(-std::expm1(n_in * std::log(eps) + n_out * std::log1p(-eps)));
    }
    return 2 * threshold < n_in + n_out ? p_detect_given_n_in_complement(n_in, n_out, threshold, eps)
                                        : p_detect_given_n_in_direct(n_in, n_out, threshold, eps);
}

std::vector<double> quadrature_weights(const geometry::FireGeometry& geom, const QuadratureSpec& quad)
{
    validate(quad);
    const double lo = geom.r_u_inner_m;
    const double hi = geom.r_u_outer_m;
    const double norm = hi * hi - lo * lo;
    std::vector<double> w(static_cast<std::size_t>(quad.points), 0.0);
    double prev = lo + (hi - lo) / quad.points;
    for (int i = 2; i <= quad.points; ++i) {
        const double r = lo + (hi - lo) * static_cast<double>(i) / quad.points;
        w[static_cast<std::size_t>(i - 1)] = (r * r - prev * prev) / norm;
        prev = r;
    }
    return w;
}

double p_detect_given_intersection_serial(const Scenario& scenario, const geometry::FireGeometry& geom,
                                          const QuadratureSpec& quad)
{
    const auto weights = quadrature_weights(geom, quad);
    std::vector<double> terms(weights.size());
    quadrature_terms(scenario, geom, quad.points, 0, quad.points, terms.data());
    return weighted_sum(weights, terms);
}

double p_detect_given_intersection(const Scenario& scenario, const geometry::FireGeometry& geom,
                                   const QuadratureSpec& quad)
{
    const auto weights = quadrature_weights(geom, quad);
    std::vector<double> terms(weights.size());
    const int points = quad.points;
#pragma omp parallel for schedule(static) num_threads(parallel::worker_count())
    for (int i = 0; i < points; ++i) quadrature_terms(scenario, geom, points, i, i + 1, terms.data());
    return weighted_sum(weights, terms);
}

std::vector<double> conditional_detection_profile_serial(const Scenario& scenario, const QuadratureSpec& quad,
                                                         int steps)
{
    std::vector<double> profile(static_cast<std::size_t>(std::max(steps, 0)));
    for (int k = 1; k <= steps; ++k)
        profile[static_cast<std::size_t>(k - 1)] =
            p_detect_given_intersection_serial(scenario, geometry::fire_geometry_at(scenario, k), quad);
    return profile;
}

std::vector<double> conditional_detection_profile(const Scenario& scenario, const QuadratureSpec& quad, int steps)
{
    validate(quad);
    std::vector<double> profile(static_cast<std::size_t>(std::max(steps, 0)));
#pragma omp parallel for schedule(dynamic) num_threads(parallel::worker_count())
    for (int k = 1; k <= steps; ++k)
        profile[static_cast<std::size_t>(k - 1)] =
            p_detect_given_intersection_serial(scenario, geometry::fire_geometry_at(scenario, k), quad);
    return profile;
}

StepProbabilities assemble_step(const Scenario& scenario, int k, double p_detect_given_int)
{
    StepProbabilities s;
    s.k = k;
    s.p_int = p_intersection(scenario, geometry::fire_geometry_at(scenario, k));
    s.p_fa = p_false_alarm(s.p_int, scenario.collected_per_step(), scenario.params().flag_threshold,
                           scenario.epsilon());
    s.p_d = s.p_int * clamp_probability(p_detect_given_int);
    return s;
}

StepProbabilities step_probabilities(const Scenario& scenario, int k, const QuadratureSpec& quad)
{
    if (k < 1) throw std::invalid_argument("step_probabilities: k must be >= 1");
    return assemble_step(scenario, k,
                         p_detect_given_intersection(scenario, geometry::fire_geometry_at(scenario, k), quad));
}

} // namespace pyrewatch::detection
