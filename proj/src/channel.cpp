#include "d2d/channel.hpp"

#include <cmath>
#include <numeric>

#include "d2d/errors.hpp"

namespace d2d {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

double linear_to_db(double x) { return 10.0 * std::log10(x); }

double ChannelParams::noise_power_w() const {
  return dbm_to_watts(noise_dbm_hz) * rb_bandwidth_hz;
}

double ChannelParams::sinr_threshold_linear() const { return db_to_linear(sinr_threshold_db); }

void ChannelParams::validate() const {
  if (pathloss_exponent <= 0.0) throw ConfigError("pathloss exponent must be > 0");
  if (rb_bandwidth_hz <= 0.0) throw ConfigError("RB bandwidth must be > 0");
  if (b2d_scale <= 0.0 || b2d_scale >= 1.0) throw ConfigError("B2D scale K must be in (0, 1)");
  if (d_max_m <= 0.0) throw ConfigError("d_max must be > 0");
  if (std::abs(light_speed_mps - 2.998e8) > 0.001 * 2.998e8)
    throw ConfigError("light speed must be 2.998e8 m/s within 0.1%");
  if (device_tx_power_w <= 0.0 || bs_tx_power_w <= 0.0)
    throw ConfigError("transmit powers must be > 0");
  if (shadowing_stddev_db < 0.0) throw ConfigError("shadowing stddev must be >= 0");
}

double received_power(double tx_power_w, double distance_m, const FadingDraw& fading,
                      const ChannelParams& params) {
  if (distance_m <= 0.0)
    throw DegenerateGeometryError("co-located devices: distance must be > 0");
  return tx_power_w * std::pow(distance_m, -params.pathloss_exponent) * fading.m0_sq *
         std::pow(10.0, fading.psi_db / 10.0);
}

double sinr(double rx_power_w, std::span<const double> interferer_powers_w,
            const ChannelParams& params) {
  double interference =
      std::accumulate(interferer_powers_w.begin(), interferer_powers_w.end(), 0.0);
  return rx_power_w / (interference + params.noise_power_w());
}

double rate(double sinr_linear, const ChannelParams& params) {
  return params.rb_bandwidth_hz * std::log2(1.0 + sinr_linear);
}

double hop_delay(double distance_m, double content_bits, double rate_bps,
                 const ChannelParams& params) {
  if (rate_bps <= 0.0) throw UnreachableLinkError("zero-rate link cannot carry content");
  return distance_m / params.light_speed_mps + content_bits / rate_bps;
}

double d2d_cost(double tx_power_w, double distance_m, const FadingDraw& fading,
                const ChannelParams& params) {
  return received_power(tx_power_w, distance_m, fading, params);
}

double b2d_cost(double bs_distance_m, const FadingDraw& fading, const ChannelParams& params) {
  return params.b2d_scale /
         received_power(params.bs_tx_power_w, bs_distance_m, fading, params);
}

LinkBudget link_budget(double distance_m, double content_bits, const FadingDraw& fading,
                       std::span<const double> interferer_powers_w,
                       const ChannelParams& params) {
  LinkBudget lb;
  lb.distance_m = distance_m;
  lb.received_power_w = received_power(params.device_tx_power_w, distance_m, fading, params);
  lb.interference_w =
      std::accumulate(interferer_powers_w.begin(), interferer_powers_w.end(), 0.0);
  lb.sinr = lb.received_power_w / (lb.interference_w + params.noise_power_w());
  lb.rate_bps = rate(lb.sinr, params);
  lb.delay_s = hop_delay(distance_m, content_bits, lb.rate_bps, params);
  lb.d2d_cost = lb.received_power_w;
  return lb;
}

FadingDraw draw_fading(RandomStream& rng, const ChannelParams& params) {
  FadingDraw f;
  f.m0_sq = rng.exponential(1.0);
  f.psi_db = rng.normal(0.0, params.shadowing_stddev_db);
  return f;
}

}  // namespace d2d
