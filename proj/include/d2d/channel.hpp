#pragma once

#include <span>

#include "d2d/rng.hpp"

namespace d2d {

// Wireless parameters; defaults follow the urban-macrocell setup used throughout.
struct ChannelParams {
  double pathloss_exponent = 3.0;   // alpha
  double shadowing_stddev_db = 12.0;
  double noise_dbm_hz = -174.0;
  double rb_bandwidth_hz = 180e3;   // l_z: 12 subcarriers x 15 kHz
  double device_tx_power_w = 0.1;
  double bs_tx_power_w = 10.0;
  double d_max_m = 15.0;
  double sinr_threshold_db = 0.0;
  double b2d_scale = 1e-6;          // K, 0 < K < 1
  double light_speed_mps = 2.998e8; // eta

  double noise_power_w() const;     // sigma^2 over one RB, in watts
  double sinr_threshold_linear() const;
  void validate() const;            // throws ConfigError
};

// One Rayleigh-power + log-normal shadowing realization, frozen per link per session.
struct FadingDraw {
  double m0_sq = 1.0;  // |m0|^2
  double psi_db = 0.0; // shadowing
};

inline constexpr FadingDraw kUnitFading{1.0, 0.0};

// Fully evaluated link: powers in watts, sinr linear, rate bit/s, delay s.
struct LinkBudget {
  double distance_m = 0.0;
  double received_power_w = 0.0;
  double interference_w = 0.0;
  double sinr = 0.0;
  double rate_bps = 0.0;
  double delay_s = 0.0;
  double d2d_cost = 0.0;  // un-normalized, equals received power
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double db_to_linear(double db);
double linear_to_db(double x);

// p = tx * d^-alpha * |m0|^2 * 10^(psi/10). Throws DegenerateGeometryError for d <= 0.
double received_power(double tx_power_w, double distance_m, const FadingDraw& fading,
                      const ChannelParams& params);

// gamma = p_rx / (sum of co-channel received powers + sigma^2)
double sinr(double rx_power_w, std::span<const double> interferer_powers_w,
            const ChannelParams& params);

// R = l_z * log2(1 + gamma)
double rate(double sinr_linear, const ChannelParams& params);

// t = d/eta + b/R. Throws UnreachableLinkError when rate <= 0.
double hop_delay(double distance_m, double content_bits, double rate_bps,
                 const ChannelParams& params);

// Incentive the BS pays for the hop; numerically identical to received power.
double d2d_cost(double tx_power_w, double distance_m, const FadingDraw& fading,
                const ChannelParams& params);

// K / received BS power: cheap next to the BS, expensive at the cell edge.
double b2d_cost(double bs_distance_m, const FadingDraw& fading, const ChannelParams& params);

// Convenience: full budget for one hop carrying `content_bits`.
LinkBudget link_budget(double distance_m, double content_bits, const FadingDraw& fading,
                       std::span<const double> interferer_powers_w, const ChannelParams& params);

FadingDraw draw_fading(RandomStream& rng, const ChannelParams& params);

}  // namespace d2d
