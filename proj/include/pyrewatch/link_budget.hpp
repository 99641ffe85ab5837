#pragma once

// Sensor -> UAV link quality: air-to-ground LoS probability, mean SNR,
// coherent BPSK bit error, repetition coding and the combined flag error.

#include <cmath>
#include <vector>

namespace pyrewatch::link {

struct ChannelParams {
    double tx_power_dbm = 10.0;
    double noise_dbm = -90.0;
    double path_loss_exp = 3.5;
    double eta_los_db = 0.1;
    double eta_nlos_db = 21.0;
    double env_a = 4.88; // suburban / forest
    double env_b = 0.43;
    int repetitions = 1; // odd
    double sensing_error = 0.0;
    double target_edge_snr_db = 5.0;

    bool operator==(const ChannelParams&) const = default;
};

/// Throws ConfigError naming the first violated bound.
void validate(const ChannelParams& params);

struct LinkQuality {
    double snr_linear = 0.0;
    double p_los = 0.0;
    double ber_bpsk = 0.5;
    double eps_t = 0.5;
    double eps_combined = 0.5;
};

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// LoS probability for a UAV at height `h_m` seen at slant distance `w_m`.
/// The elevation angle enters in degrees, which is what (a, b) are fitted to.
double los_probability(double h_m, double w_m, double env_a, double env_b);

/// Mean SNR (linear) averaged over the LoS / NLoS excess losses.
double average_snr(const ChannelParams& params, double h_m, double w_m);

/// Coherent BPSK over AWGN: Q(sqrt(2 snr)).
double bpsk_ber(double snr_linear);

/// Majority-decoding error of a `gamma`-fold repetition code.
double repetition_error(double ber, int gamma);

double combined_error(double eps_s, double eps_t);

/// Full link evaluation at slant distance `w_m` from a UAV hovering at `h_m`.
LinkQuality evaluate_link(const ChannelParams& params, double h_m, double w_m);

/// Flag error implied by the channel at the coverage edge (target SNR).
double edge_combined_error(const ChannelParams& params);

/// Largest ground radius at which the edge SNR still meets the target for a
/// UAV at height `h_m`; 0 when even the point directly below misses it.
double max_coverage_radius(const ChannelParams& params, double h_m);

struct AltitudeDesign {
    double h_opt_m = 0.0;
    double r_hov_max_m = 0.0;
};

/// Altitude maximising the coverage radius at the target edge SNR.
/// Throws InfeasibleError when no altitude in [1 m, 10 km] reaches it.
AltitudeDesign optimize_altitude(const ChannelParams& params);

struct AltitudeSample {
    double h_m;
    double r_max_m;
};

/// R_max(h) on a log-spaced altitude grid, for plotting.
std::vector<AltitudeSample> altitude_sweep(const ChannelParams& params, int points);

} // namespace pyrewatch::link
