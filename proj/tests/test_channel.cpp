#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "d2d/channel.hpp"
#include "d2d/errors.hpp"
#include "d2d/rng.hpp"
#include "oracle_channel.hpp"

using namespace d2d;

namespace {
ChannelParams table_defaults() { return ChannelParams{}; }
}  // namespace

TEST_CASE("received power closed form") {
  ChannelParams p = table_defaults();
  CHECK(received_power(0.1, 10.0, kUnitFading, p) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(received_power(0.1, 1.0, kUnitFading, p) == doctest::Approx(0.1).epsilon(1e-12));
  // 0.1 * 10^-3 * 0.5 * 10^-1.2
  CHECK(received_power(0.1, 10.0, {0.5, -12.0}, p) ==
        doctest::Approx(3.154786722400966e-6).epsilon(1e-12));
  CHECK_THROWS_AS(received_power(0.1, 0.0, kUnitFading, p), DegenerateGeometryError);
}

TEST_CASE("sinr ratios") {
  ChannelParams p = table_defaults();
  double noise = p.noise_power_w();
  CHECK(sinr(noise, {}, p) == doctest::Approx(1.0).epsilon(1e-12));
  std::vector<double> one{noise};
  CHECK(sinr(noise, one, p) == doctest::Approx(0.5).epsilon(1e-12));

  // 0.1 W at 15 m, unit fading, no interference, sigma^2 for 180 kHz at -174 dBm/Hz
  double rx = received_power(p.device_tx_power_w, 15.0, kUnitFading, p);
  double expect = oracle::sinr(oracle::received_power_w(0.1, 15.0, 1.0, 0.0, 3.0), 0.0,
                               oracle::noise_w(-174.0, 180e3));
  CHECK(sinr(rx, {}, p) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("rate closed form") {
  ChannelParams p = table_defaults();
  CHECK(rate(1.0, p) == doctest::Approx(180e3).epsilon(1e-12));
  CHECK(rate(3.0, p) == doctest::Approx(360e3).epsilon(1e-12));
  CHECK(rate(0.0, p) == 0.0);
}

TEST_CASE("hop delay") {
  ChannelParams p = table_defaults();
  CHECK(hop_delay(15.0, 1.2e6, 1.2e6, p) ==
        doctest::Approx(1.0 + 15.0 / 2.998e8).epsilon(1e-12));
  CHECK(hop_delay(3e8, 0.0, 1.0, p) == doctest::Approx(3e8 / 2.998e8).epsilon(1e-12));
  CHECK(hop_delay(15.0, 8e6, 360e3, p) ==
        doctest::Approx(8e6 / 360e3 + 15.0 / 2.998e8).epsilon(1e-12));
  CHECK_THROWS_AS(hop_delay(15.0, 1e6, 0.0, p), UnreachableLinkError);
}

TEST_CASE("costs") {
  ChannelParams p = table_defaults();
  CHECK(d2d_cost(0.1, 10.0, kUnitFading, p) == received_power(0.1, 10.0, kUnitFading, p));
  CHECK(b2d_cost(1.0, kUnitFading, p) == doctest::Approx(1e-7).epsilon(1e-12));
  CHECK(b2d_cost(100.0, kUnitFading, p) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(b2d_cost(200.0, kUnitFading, p) / b2d_cost(100.0, kUnitFading, p) ==
        doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("monotonicity and curvature") {
  ChannelParams p = table_defaults();
  RandomStream rng(42);
  for (int i = 0; i < 200; ++i) {
    double d1 = rng.uniform(0.5, 400.0);
    double d2 = d1 + rng.uniform(0.1, 100.0);
    FadingDraw f{rng.exponential(1.0) + 1e-9, rng.normal(0.0, 12.0)};
    CHECK(received_power(0.1, d1, f, p) > received_power(0.1, d2, f, p));
    CHECK(b2d_cost(d1, f, p) < b2d_cost(d2, f, p));

    double g1 = rng.uniform(0.0, 50.0);
    double g2 = g1 + rng.uniform(0.01, 50.0);
    CHECK(rate(g2, p) > rate(g1, p));
    // concavity at the midpoint
    CHECK(rate(0.5 * (g1 + g2), p) >= 0.5 * (rate(g1, p) + rate(g2, p)) - 1e-9);

    double bits = rng.uniform(1e3, 1e7);
    double r1 = rng.uniform(1e3, 1e7);
    double r2 = r1 + rng.uniform(1.0, 1e6);
    CHECK(hop_delay(10.0, bits, r2, p) < hop_delay(10.0, bits, r1, p));
    CHECK(hop_delay(10.0, bits + 1.0, r1, p) > hop_delay(10.0, bits, r1, p));
  }
}

TEST_CASE("dbm round trip") {
  RandomStream rng(7);
  for (int i = 0; i < 200; ++i) {
    double x = std::pow(10.0, rng.uniform(-18.0, 2.0));
    CHECK(dbm_to_watts(watts_to_dbm(x)) == doctest::Approx(x).epsilon(1e-12));
  }
}

TEST_CASE("closed forms match the dB-domain evaluation") {
  ChannelParams p = table_defaults();
  RandomStream rng(99);
  for (int i = 0; i < 500; ++i) {
    double tx = rng.uniform(0.01, 10.0);
    double d = rng.uniform(0.5, 500.0);
    FadingDraw f{rng.exponential(1.0) + 1e-12, rng.normal(0.0, 12.0)};
    double mine = received_power(tx, d, f, p);
    double ref = oracle::received_power_w(tx, d, f.m0_sq, f.psi_db, p.pathloss_exponent);
    CHECK(mine == doctest::Approx(ref).epsilon(1e-9));

    double interference = rng.uniform(0.0, 1e-9);
    std::vector<double> ints{interference};
    CHECK(sinr(mine, ints, p) ==
          doctest::Approx(oracle::sinr(ref, interference, oracle::noise_w(-174.0, 180e3)))
              .epsilon(1e-9));
  }
}

TEST_CASE("parameter validation") {
  ChannelParams p = table_defaults();
  CHECK_NOTHROW(p.validate());
  p.b2d_scale = 1.5;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = table_defaults();
  p.light_speed_mps = 3.2e8;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("fading draws are distributed sanely") {
  ChannelParams p = table_defaults();
  RandomStream rng(5);
  double mean_m0 = 0.0, mean_psi = 0.0, var_psi = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    FadingDraw f = draw_fading(rng, p);
    CHECK(f.m0_sq >= 0.0);
    mean_m0 += f.m0_sq;
    mean_psi += f.psi_db;
  }
  mean_m0 /= n;
  mean_psi /= n;
  RandomStream rng2(5);
  for (int i = 0; i < n; ++i) {
    FadingDraw f = draw_fading(rng2, p);
    var_psi += (f.psi_db - mean_psi) * (f.psi_db - mean_psi);
  }
  var_psi /= n;
  CHECK(mean_m0 == doctest::Approx(1.0).epsilon(0.05));
  CHECK(std::abs(mean_psi) < 0.35);  // sigma/sqrt(n) ~ 0.085
  CHECK(std::sqrt(var_psi) == doctest::Approx(12.0).epsilon(0.05));
}
