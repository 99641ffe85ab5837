#include "pyrewatch/link_budget.hpp"

#include "pyrewatch/errors.hpp"

#include <algorithm>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pyrewatch::link {

void validate(const ChannelParams& p)
{
    auto fail = [](const std::string& what) { throw ConfigError("channel." + what); };
    if (!(p.env_a > 0.0)) fail("env_a must be > 0");
    if (!(p.env_b > 0.0)) fail("env_b must be > 0");
    if (!(p.path_loss_exp > 0.0)) fail("path_loss_exp must be > 0");
    if (!(p.eta_nlos_db >= p.eta_los_db)) fail("eta_nlos_db must be >= eta_los_db");
    if (p.repetitions < 1 || p.repetitions % 2 == 0) fail("repetitions must be an odd positive integer");
    if (!(p.sensing_error >= 0.0 && p.sensing_error <= 0.5)) fail("sensing_error must lie in [0, 0.5]");
}

double los_probability(double h_m, double w_m, double env_a, double env_b)
{
    if (!(h_m > 0.0) || !(w_m > 0.0)) throw std::invalid_argument("los_probability: distances must be positive");
    if (h_m > w_m) throw std::invalid_argument("los_probability: height exceeds slant distance");
    const double theta_deg = std::asin(h_m / w_m) * 180.0 / std::numbers::pi;
    return 1.0 / (1.0 + env_a * std::exp(-env_b * (theta_deg - env_a)));
}

double average_snr(const ChannelParams& p, double h_m, double w_m)
{
    if (!(w_m > 0.0)) throw std::invalid_argument("average_snr: nonpositive distance");
    const double p_los = los_probability(h_m, w_m, p.env_a, p.env_b);
    const double budget = db_to_linear(p.tx_power_dbm - p.noise_dbm);
    const double excess = p_los / db_to_linear(p.eta_los_db) + (1.0 - p_los) / db_to_linear(p.eta_nlos_db);
    return budget * std::pow(w_m, -p.path_loss_exp) * excess;
}

double bpsk_ber(double snr_linear)
{
    if (snr_linear < 0.0) throw std::invalid_argument("bpsk_ber: negative SNR");
    // Q(x) = erfc(x / sqrt 2) / 2 with x = sqrt(2 snr)
    return 0.5 * std::erfc(std::sqrt(snr_linear));
}

double repetition_error(double ber, int gamma)
{
    if (gamma < 1 || gamma % 2 == 0) throw std::invalid_argument("repetition_error: gamma must be odd and positive");
    if (ber == 0.0) return 0.0;
    double sum = 0.0;
    double coeff = 1.0; // C(gamma, i), built up from i = 0
    for (int i = 0; i <= gamma; ++i) {
        if (i > 0) coeff = coeff * (gamma - i + 1) / i;
        if (i >= (gamma + 1) / 2) sum += coeff * std::pow(ber, i) * std::pow(1.0 - ber, gamma - i);
    }
    return sum;
}

double combined_error(double eps_s, double eps_t) { return eps_s * (1.0 - eps_t) + (1.0 - eps_s) * eps_t; }

LinkQuality evaluate_link(const ChannelParams& p, double h_m, double w_m)
{
    LinkQuality q;
    q.p_los = los_probability(h_m, w_m, p.env_a, p.env_b);
    q.snr_linear = average_snr(p, h_m, w_m);
    q.ber_bpsk = bpsk_ber(q.snr_linear);
    q.eps_t = repetition_error(q.ber_bpsk, p.repetitions);
    q.eps_combined = combined_error(p.sensing_error, q.eps_t);
    return q;
}

double edge_combined_error(const ChannelParams& p)
{
    const double ber = bpsk_ber(db_to_linear(p.target_edge_snr_db));
    return combined_error(p.sensing_error, repetition_error(ber, p.repetitions));
}

double max_coverage_radius(const ChannelParams& p, double h_m)
{
    const double target = db_to_linear(p.target_edge_snr_db);
    auto snr_at = [&](double radius) { return average_snr(p, h_m, std::hypot(h_m, radius)); };
    if (snr_at(0.0) < target) return 0.0;

    constexpr double kRadiusCap = 1.0e8;
    double lo = 0.0;
    double hi = std::max(1.0, h_m);
    while (snr_at(hi) >= target) {
        lo = hi;
        hi *= 2.0;
        if (hi > kRadiusCap) return kRadiusCap;
    }
    // SNR decreases monotonically with ground radius at fixed height.
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (snr_at(mid) >= target ? lo : hi) = mid;
    }
    return lo;
}

std::vector<AltitudeSample> altitude_sweep(const ChannelParams& p, int points)
{
    constexpr double kLo = 1.0;
    constexpr double kHi = 1.0e4;
    std::vector<AltitudeSample> out;
    out.reserve(static_cast<std::size_t>(std::max(points, 2)));
    const int n = std::max(points, 2);
    for (int i = 0; i < n; ++i) {
        const double h = kLo * std::pow(kHi / kLo, static_cast<double>(i) / (n - 1));
        out.push_back({h, max_coverage_radius(p, h)});
    }
    return out;
}

AltitudeDesign optimize_altitude(const ChannelParams& p)
{
    validate(p);
    // Coarse log scan brackets the optimum (R_max(h) is zero on part of the
    // range), then golden-section refines inside the bracket.
    const auto scan = altitude_sweep(p, 400);
    const auto best = std::max_element(scan.begin(), scan.end(),
                                       [](const auto& a, const auto& b) { return a.r_max_m < b.r_max_m; });
    if (best->r_max_m <= 0.0) throw InfeasibleError("altitude: target edge SNR unreachable for h in [1 m, 10 km]");

    const auto idx = static_cast<std::size_t>(best - scan.begin());
    double a = scan[idx == 0 ? 0 : idx - 1].h_m;
    double b = scan[std::min(idx + 1, scan.size() - 1)].h_m;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = max_coverage_radius(p, c);
    double fd = max_coverage_radius(p, d);
    for (int it = 0; it < 200 && b - a > 1e-9 * b; ++it) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = max_coverage_radius(p, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = max_coverage_radius(p, d);
        }
    }
    AltitudeDesign design{0.5 * (a + b), 0.0};
    design.r_hov_max_m = max_coverage_radius(p, design.h_opt_m);
    if (design.r_hov_max_m < best->r_max_m) design = {best->h_m, best->r_max_m};
    return design;
}

} // namespace pyrewatch::link
