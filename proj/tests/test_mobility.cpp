#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "d2d/errors.hpp"
#include "d2d/mobility.hpp"
#include "d2d/rng.hpp"

using namespace d2d;

namespace {

MobilityTrace trace_from_rows(double tick_s,
                              const std::vector<std::vector<Eigen::Vector2d>>& per_device,
                              Arena arena = {1000, 1000}) {
  std::vector<Eigen::Matrix2Xd> pos;
  for (const auto& track : per_device) {
    Eigen::Matrix2Xd m(2, static_cast<long>(track.size()));
    for (std::size_t k = 0; k < track.size(); ++k) m.col(static_cast<long>(k)) = track[k];
    pos.push_back(m);
  }
  return MobilityTrace(tick_s, arena, std::move(pos));
}

std::string write_temp(const std::string& name, const std::string& content) {
  auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

}  // namespace

TEST_CASE("euclidean distance") {
  auto t = trace_from_rows(1.0, {{{0, 0}, {1, 1}}, {{3, 4}, {4, 5}}});
  CHECK(distance(t, 0, 1, 0) == doctest::Approx(5.0));
  CHECK(distance(t, 0, 0, 0) == 0.0);
  CHECK(distance(t, 0, 1, 1) == doctest::Approx(5.0));
}

TEST_CASE("generator is deterministic") {
  GeneratorParams gp;
  auto a = generate_trace(11, 2, {500, 500}, 120.0, 1.0, gp);
  auto b = generate_trace(11, 2, {500, 500}, 120.0, 1.0, gp);
  REQUIRE(a.n_devices() == b.n_devices());
  REQUIRE(a.n_ticks() == b.n_ticks());
  for (int d = 0; d < a.n_devices(); ++d)
    CHECK(a.device_track(d) == b.device_track(d));
  auto c = generate_trace(12, 2, {500, 500}, 120.0, 1.0, gp);
  bool same = true;
  for (int d = 0; d < a.n_devices(); ++d) same = same && a.device_track(d) == c.device_track(d);
  CHECK_FALSE(same);
}

TEST_CASE("one shared tight cluster forces a long encounter") {
  GeneratorParams gp;
  gp.clusters = 1;
  gp.clusters_per_device = 1;
  gp.cluster_sigma_m = 2.0;  // all waypoints within a few meters
  gp.pause_min_s = 60.0;
  gp.pause_max_s = 120.0;
  auto t = generate_trace(3, 2, {1000, 1000}, 600.0, 1.0, gp);
  auto hist = extract_encounters(t, 15.0, 0.0, 600.0);
  auto it = hist.by_pair.find({0, 1});
  REQUIRE(it != hist.by_pair.end());
  double longest = 0.0;
  for (const Encounter& e : it->second) longest = std::max(longest, e.duration_s);
  CHECK(longest >= 60.0);
}

TEST_CASE("protocol-sized generation") {
  GeneratorParams gp;
  auto t = generate_trace(1, 400, {1000, 1000}, 72.0 * 3600.0, 60.0, gp);
  CHECK(t.n_devices() == 400);
  CHECK(t.horizon_s() == doctest::Approx(72.0 * 3600.0));
  for (int d = 0; d < t.n_devices(); d += 37)
    for (long k = 0; k < t.n_ticks(); k += 101) {
      Eigen::Vector2d p = t.position(d, k);
      CHECK(p.x() >= 0.0);
      CHECK(p.x() <= 1000.0);
      CHECK(p.y() >= 0.0);
      CHECK(p.y() <= 1000.0);
    }
  CHECK_THROWS_AS(generate_trace(1, 1, {1000, 1000}, 3600.0, 1.0, gp), ConfigError);
}

TEST_CASE("trace CSV round trip") {
  GeneratorParams gp;
  auto t = generate_trace(21, 3, {800, 900}, 30.0, 1.0, gp);
  std::ostringstream buf;
  save_trace_csv(t, buf);
  auto path = write_temp("d2d_roundtrip.csv", buf.str());
  auto back = load_trace(path, Arena{800, 900});
  REQUIRE(back.n_devices() == 3);
  REQUIRE(back.n_ticks() == t.n_ticks());
  for (int d = 0; d < 3; ++d)
    for (long k = 0; k < t.n_ticks(); ++k)
      CHECK((back.position(d, k) - t.position(d, k)).norm() < 1e-7);
}

TEST_CASE("streamed generation matches in-memory generation") {
  GeneratorParams gp;
  auto t = generate_trace(5, 4, {300, 300}, 60.0, 2.0, gp);
  std::ostringstream whole;
  save_trace_csv(t, whole);
  std::ostringstream streamed;
  generate_trace_csv(5, 4, {300, 300}, 60.0, 2.0, gp, streamed);
  CHECK(whole.str() == streamed.str());
}

TEST_CASE("loader validation errors carry row numbers") {
  auto ok = "time_s,node_id,x_m,y_m\n0,0,1,1\n1,0,2,2\n2,0,3,3\n";
  auto t = load_trace(write_temp("d2d_ok.csv", ok));
  CHECK(t.n_devices() == 1);
  CHECK(t.n_ticks() == 3);

  auto bad_bounds = "time_s,node_id,x_m,y_m\n0,0,1,1\n1,0,-5,2\n";
  try {
    load_trace(write_temp("d2d_bounds.csv", bad_bounds));
    FAIL("expected bounds error");
  } catch (const ParseError& e) {
    CHECK(e.row == 3);
  }

  auto dup = "time_s,node_id,x_m,y_m\n0,0,1,1\n0,0,1,1\n";
  try {
    load_trace(write_temp("d2d_dup.csv", dup));
    FAIL("expected duplicate error");
  } catch (const ParseError& e) {
    CHECK(e.row == 3);
    CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
  }

  auto nonmono = "time_s,node_id,x_m,y_m\n1,0,1,1\n0.5,0,1,1\n";
  CHECK_THROWS_AS(load_trace(write_temp("d2d_mono.csv", nonmono)), ParseError);

  auto missing = "time_s,node_id,x_m,y_m\n0,0,1,1\n1,0,1,1\n0,1,3,3\n";
  CHECK_THROWS_AS(load_trace(write_temp("d2d_missing.csv", missing)), ParseError);
}

TEST_CASE("encounter extraction examples") {
  // two static devices 10 m apart
  std::vector<Eigen::Vector2d> a(101, {0, 0}), b(101, {10, 0});
  auto t = trace_from_rows(1.0, {a, b});
  auto hist = extract_encounters(t, 15.0, 0.0, 100.0);
  REQUIRE(hist.by_pair.count({0, 1}) == 1);
  REQUIRE(hist.by_pair.at({0, 1}).size() == 1);
  CHECK(hist.by_pair.at({0, 1})[0].duration_s == doctest::Approx(100.0));

  // 20 m apart: none
  std::vector<Eigen::Vector2d> c(101, {20, 0});
  auto t2 = trace_from_rows(1.0, {a, c});
  CHECK(extract_encounters(t2, 15.0, 0.0, 100.0).by_pair.empty());
}

TEST_CASE("split runs become separate encounters") {
  // in range for ticks [3,7) and [9,12)
  std::vector<Eigen::Vector2d> a, b;
  for (int k = 0; k < 14; ++k) {
    a.push_back({0, 0});
    bool in = (k >= 3 && k < 7) || (k >= 9 && k < 12);
    b.push_back({in ? 10.0 : 100.0, 0});
  }
  auto t = trace_from_rows(1.0, {a, b});
  auto hist = extract_encounters(t, 15.0, 0.0, 14.0);
  const auto& encs = hist.by_pair.at({0, 1});
  REQUIRE(encs.size() == 2);
  CHECK(encs[0].start_s == doctest::Approx(3.0));
  CHECK(encs[0].duration_s == doctest::Approx(4.0));
  CHECK(encs[1].start_s == doctest::Approx(9.0));
  CHECK(encs[1].duration_s == doctest::Approx(3.0));
}

TEST_CASE("encounter properties on random traces") {
  GeneratorParams gp;
  gp.clusters = 3;
  gp.cluster_sigma_m = 10.0;
  gp.pause_min_s = 5.0;
  gp.pause_max_s = 50.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto t = generate_trace(seed, 6, {200, 200}, 300.0, 1.0, gp);
    auto hist = extract_encounters(t, 15.0, 0.0, 300.0);

    // idempotence
    auto hist2 = extract_encounters(t, 15.0, 0.0, 300.0);
    REQUIRE(hist.by_pair.size() == hist2.by_pair.size());

    for (const auto& [pair, encs] : hist.by_pair) {
      double total = 0.0;
      double prev_end = -1.0;
      for (const Encounter& e : encs) {
        total += e.duration_s;
        CHECK(e.duration_s >= t.tick_duration());
        CHECK(e.start_s >= prev_end);  // ordered, non-overlapping
        prev_end = e.start_s + e.duration_s;

        // oracle re-verification: every covered tick is in range, the ticks
        // just outside are not (unless the window truncated the run)
        long first = static_cast<long>(e.start_s / t.tick_duration());
        long count = static_cast<long>(e.duration_s / t.tick_duration());
        long last_window_tick = static_cast<long>((300.0 - 1e-9) / t.tick_duration());
        for (long k = first; k < first + count; ++k)
          CHECK(distance(t, pair.first, pair.second, k) <= 15.0);
        if (first > 0) CHECK(distance(t, pair.first, pair.second, first - 1) > 15.0);
        if (first + count <= last_window_tick)
          CHECK(distance(t, pair.first, pair.second, first + count) > 15.0);
      }
      CHECK(total <= 300.0 + 1e-9);
    }
  }
}

TEST_CASE("extraction is invariant to a time shift") {
  GeneratorParams gp;
  gp.clusters = 2;
  gp.cluster_sigma_m = 8.0;
  auto t = generate_trace(9, 4, {150, 150}, 200.0, 1.0, gp);

  // rebuild the same trajectories shifted by 50 ticks
  std::vector<std::vector<Eigen::Vector2d>> shifted(4);
  for (int d = 0; d < 4; ++d) {
    for (long k = 0; k < 50; ++k) shifted[d].push_back({1000 + 10.0 * d, 1000});
    for (long k = 0; k < t.n_ticks(); ++k) shifted[d].push_back(t.position(d, k));
  }
  auto t2 = trace_from_rows(1.0, shifted, {2000, 2000});

  auto h1 = extract_encounters(t, 15.0, 0.0, 200.0);
  auto h2 = extract_encounters(t2, 15.0, 50.0, 250.0);
  REQUIRE(h1.by_pair.size() == h2.by_pair.size());
  for (const auto& [pair, encs] : h1.by_pair) {
    const auto& other = h2.by_pair.at(pair);
    REQUIRE(encs.size() == other.size());
    for (std::size_t i = 0; i < encs.size(); ++i) {
      CHECK(other[i].start_s == doctest::Approx(encs[i].start_s + 50.0));
      CHECK(other[i].duration_s == doctest::Approx(encs[i].duration_s));
    }
  }
}

TEST_CASE("time-of-day filter keeps a circular window") {
  EncounterHistory hist;
  hist.window_start_s = 0.0;
  hist.window_end_s = 2.0 * 86400.0;
  hist.by_pair[{0, 1}] = {
      {0, 1, 3600.0, 10.0},                  // 01:00
      {0, 1, 13.0 * 3600.0, 10.0},           // 13:00
      {0, 1, 86400.0 + 2.0 * 3600.0, 10.0},  // next day 02:00
  };
  auto f = filter_time_of_day(hist, 2.0 * 3600.0, 2.0 * 3600.0);  // 02:00 +- 2h
  REQUIRE(f.by_pair.count({0, 1}) == 1);
  CHECK(f.by_pair.at({0, 1}).size() == 2);
}
