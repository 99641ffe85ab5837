#pragma once

// Per-step detection and false-alarm probabilities of the UAV fleet.
//
// Counting distributions are evaluated in log space so that N can reach a
// few thousand observations. Every operation that runs over quadrature
// points or time steps has a `_serial` reference next to the OpenMP kernel;
// both sum in the same fixed order and return bit-identical results.

#include "pyrewatch/geometry.hpp"
#include "pyrewatch/scenario.hpp"

#include <vector>

namespace pyrewatch::detection {

double log_factorial(long long n);

/// C(n, m) p^m (1-p)^(n-m).
double binomial_pmf(int n, int m, double p);

/// P[Bin(n, p) >= m] summed term by term from m up to n.
double binomial_upper_tail_direct(int n, int m, double p);
/// The same tail as 1 - P[Bin(n, p) <= m - 1].
double binomial_upper_tail_complement(int n, int m, double p);
/// Picks the form with fewer terms.
double binomial_upper_tail(int n, int m, double p);

struct StepProbabilities {
    int k = 0;
    double p_int = 0.0;
    double p_fa = 0.0;
    double p_d = 0.0;
};

struct QuadratureSpec {
    int points = 200;
};

void validate(const QuadratureSpec& quad);

/// Probability that some UAV's coverage touches the detection ring, capped at 1.
double p_intersection(const Scenario& scenario, const geometry::FireGeometry& geom);

/// (1 - p_int) * P[at least M of N erroneous flags]. Throws std::invalid_argument when M > N.
double p_false_alarm(double p_int, int collected, int threshold, double eps);

/// P[true positives among n_in + false positives among n_out >= M], where
/// each of the n_in ring sensors reports correctly with probability 1 - eps
/// and each of the n_out others flips with probability eps.
double p_detect_given_n_in(int n_in, int n_out, int threshold, double eps);
/// Outer sum over true positives, inner tail over false positives.
double p_detect_given_n_in_direct(int n_in, int n_out, int threshold, double eps);
/// One minus the double sum of all outcomes with fewer than M positives; O(M^2).
double p_detect_given_n_in_complement(int n_in, int n_out, int threshold, double eps);

/// Radial quadrature of the detection probability given that the ring is
/// touched: sum over i = 2..I of the annulus mass [r_{i-1}, r_i] times the
/// conditional detection at r_i.
double p_detect_given_intersection(const Scenario& scenario, const geometry::FireGeometry& geom,
                                   const QuadratureSpec& quad);
double p_detect_given_intersection_serial(const Scenario& scenario, const geometry::FireGeometry& geom,
                                          const QuadratureSpec& quad);

/// Annulus masses used by the quadrature (index 0 is the dropped i = 1 term).
std::vector<double> quadrature_weights(const geometry::FireGeometry& geom, const QuadratureSpec& quad);

/// Conditional detection probability for k = 1..steps. Depends on the sensor
/// layer and the threshold but not on the number of UAVs.
std::vector<double> conditional_detection_profile(const Scenario& scenario, const QuadratureSpec& quad, int steps);
std::vector<double> conditional_detection_profile_serial(const Scenario& scenario, const QuadratureSpec& quad,
                                                         int steps);

/// Combines a precomputed conditional detection probability with the
/// intersection and false-alarm terms of step k.
StepProbabilities assemble_step(const Scenario& scenario, int k, double p_detect_given_int);

/// Requires k >= 1.
StepProbabilities step_probabilities(const Scenario& scenario, int k, const QuadratureSpec& quad);

} // namespace pyrewatch::detection
