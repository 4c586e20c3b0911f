#pragma once

// Test-only re-evaluation of the propagation closed forms, done in the dB
// domain so it shares no code path with the linear-domain implementation.

#include <cmath>

namespace oracle {

inline double from_dbm(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

inline double received_power_w(double tx_w, double d_m, double m0_sq, double psi_db,
                               double alpha) {
  double rx_dbm = to_dbm(tx_w) - 10.0 * alpha * std::log10(d_m) + 10.0 * std::log10(m0_sq) +
                  psi_db;
  return from_dbm(rx_dbm);
}

inline double noise_w(double noise_dbm_hz, double bandwidth_hz) {
  return from_dbm(noise_dbm_hz + 10.0 * std::log10(bandwidth_hz));
}

inline double sinr(double rx_w, double interference_w, double noise_w_total) {
  return rx_w / (interference_w + noise_w_total);
}

inline double rate_bps(double sinr_linear, double bandwidth_hz) {
  return bandwidth_hz * std::log(1.0 + sinr_linear) / std::log(2.0);
}

inline double hop_delay_s(double d_m, double bits, double rate, double light_speed) {
  return d_m / light_speed + bits / rate;
}

inline double b2d_cost(double k, double bs_tx_w, double d_m, double m0_sq, double psi_db,
                       double alpha) {
  return k / received_power_w(bs_tx_w, d_m, m0_sq, psi_db, alpha);
}

}  // namespace oracle
