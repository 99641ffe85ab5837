#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pyrewatch/errors.hpp"
#include "pyrewatch/link_budget.hpp"

#include <cmath>

using namespace pyrewatch;
using namespace pyrewatch::link;

namespace {
double rel(double got, double want) { return std::abs(got - want) / std::abs(want); }
}

TEST_CASE("bpsk bit error rates")
{
    CHECK(rel(bpsk_ber(db_to_linear(10.0)), 3.9e-6) <= 0.02);
    CHECK(rel(bpsk_ber(db_to_linear(5.0)), 6e-3) <= 0.05);
    CHECK(rel(bpsk_ber(db_to_linear(0.0)), 7.86e-2) <= 0.01);
    CHECK(bpsk_ber(0.0) == 0.5);
    CHECK_THROWS(bpsk_ber(-1.0));
}

TEST_CASE("repetition coding")
{
    CHECK(repetition_error(0.2, 1) == doctest::Approx(0.2));
    CHECK(repetition_error(0.0, 5) == 0.0);
    CHECK(repetition_error(0.1, 3) == doctest::Approx(0.028).epsilon(1e-12));
    // gamma = 5 by hand: C(5,3) p^3 q^2 + C(5,4) p^4 q + p^5
    const double p = 0.3, q = 0.7;
    CHECK(repetition_error(p, 5) ==
          doctest::Approx(10 * p * p * p * q * q + 5 * p * p * p * p * q + p * p * p * p * p).epsilon(1e-14));
    CHECK_THROWS(repetition_error(0.1, 2));
}

TEST_CASE("combined error")
{
    CHECK(combined_error(0.0, 0.0) == 0.0);
    CHECK(combined_error(0.1, 0.0) == doctest::Approx(0.1));
    for (double x : {0.0, 0.2, 0.37, 0.5}) CHECK(combined_error(0.5, x) == doctest::Approx(0.5));
}

TEST_CASE("line of sight probability")
{
    const double overhead = 1.0 / (1.0 + 4.88 * std::exp(-0.43 * (90.0 - 4.88)));
    CHECK(los_probability(100.0, 100.0, 4.88, 0.43) == doctest::Approx(overhead).epsilon(1e-15));
    CHECK(overhead == doctest::Approx(1.0).epsilon(1e-15));
    const double grazing = 1.0 / (1.0 + 4.88 * std::exp(4.88 * 0.43));
    CHECK(grazing == doctest::Approx(0.0244).epsilon(0.01));
    CHECK(los_probability(1e-6, 1e6, 4.88, 0.43) == doctest::Approx(grazing).epsilon(1e-9));
    for (double w : {100.0, 200.0, 1000.0}) CHECK(los_probability(50.0, w, 4.88, 0.0) == doctest::Approx(1.0 / 5.88));
    double prev = 0.0;
    for (double h = 10.0; h <= 1000.0; h += 10.0) {
        const double p = los_probability(h, 1000.0, 4.88, 0.43);
        CHECK(p >= prev);
        prev = p;
    }
    CHECK_THROWS(los_probability(200.0, 100.0, 4.88, 0.43));
}

TEST_CASE("average snr scaling")
{
    ChannelParams ch;
    ch.path_loss_exp = 2.0;
    // Same elevation angle, twice the distance.
    CHECK(average_snr(ch, 200.0, 400.0) == doctest::Approx(average_snr(ch, 100.0, 200.0) / 4.0).epsilon(1e-12));
    ch.eta_nlos_db = ch.eta_los_db;
    CHECK(average_snr(ch, 10.0, 400.0) == doctest::Approx(average_snr(ch, 390.0, 400.0)).epsilon(1e-12));

    const ChannelParams defaults;
    double prev = INFINITY;
    for (double w = 110.0; w < 5000.0; w *= 1.1) {
        const double s = average_snr(defaults, 100.0, w);
        CHECK(s < prev);
        prev = s;
    }
}

TEST_CASE("altitude optimisation")
{
    ChannelParams ch;
    double prev_r = INFINITY;
    for (double snr : {0.0, 5.0, 10.0}) {
        ch.target_edge_snr_db = snr;
        const auto d = optimize_altitude(ch);
        CHECK(d.r_hov_max_m > 0.0);
        CHECK(d.r_hov_max_m < prev_r);
        prev_r = d.r_hov_max_m;
        // optimum against a fine sweep
        for (const auto& s : altitude_sweep(ch, 2000)) CHECK(s.r_max_m <= d.r_hov_max_m * (1.0 + 1e-9));
        CHECK(max_coverage_radius(ch, d.h_opt_m) == doctest::Approx(d.r_hov_max_m));
    }
    ch.target_edge_snr_db = 2.0;
    const double r2 = optimize_altitude(ch).r_hov_max_m;
    ch.target_edge_snr_db = 5.0;
    CHECK(optimize_altitude(ch).r_hov_max_m < r2);

    ch.target_edge_snr_db = 200.0;
    CHECK_THROWS_AS(optimize_altitude(ch), InfeasibleError);
}

TEST_CASE("coverage radius meets the target at the edge")
{
    const ChannelParams ch;
    const double h = 120.0;
    const double r = max_coverage_radius(ch, h);
    REQUIRE(r > 0.0);
    const double target = db_to_linear(ch.target_edge_snr_db);
    CHECK(average_snr(ch, h, std::hypot(h, r)) == doctest::Approx(target).epsilon(1e-9));
    CHECK(average_snr(ch, h, std::hypot(h, r * 1.01)) < target);
}

TEST_CASE("link evaluation and edge error")
{
    ChannelParams ch;
    ch.repetitions = 3;
    ch.sensing_error = 0.05;
    const auto q = evaluate_link(ch, 100.0, 300.0);
    CHECK(q.eps_t == doctest::Approx(repetition_error(q.ber_bpsk, 3)));
    CHECK(q.eps_combined == doctest::Approx(combined_error(0.05, q.eps_t)));
    const double ber = bpsk_ber(db_to_linear(5.0));
    CHECK(edge_combined_error(ch) == doctest::Approx(combined_error(0.05, repetition_error(ber, 3))));
    ch.repetitions = 4;
    CHECK_THROWS_AS(validate(ch), ConfigError);
}
