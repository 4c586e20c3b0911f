#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "d2d/errors.hpp"
#include "d2d/relaygraph.hpp"
#include "d2d/rng.hpp"
#include "fixtures.hpp"
#include "oracle_channel.hpp"

using namespace d2d;
using fixtures::static_trace;

namespace {

CommunityStructure communities_of(const std::vector<std::vector<int>>& members, int n) {
  CommunityStructure s;
  s.community_of.assign(n, -1);
  s.members = members;
  for (std::size_t c = 0; c < members.size(); ++c)
    for (int u : members[c]) s.community_of[u] = static_cast<int>(c);
  s.durability.assign(members.size(), 0.0);
  return s;
}

}  // namespace

TEST_CASE("adjacency by distance") {
  auto close = static_trace({{0, 0}, {14.9, 0}}, 2);
  CHECK(build_adjacency(close, 0, 15.0).size() == 2);  // both directions

  auto far = static_trace({{0, 0}, {15.1, 0}}, 2);
  CHECK(build_adjacency(far, 0, 15.0).empty());

  auto triple = static_trace({{0, 0}, {10, 0}, {5, 8}}, 2);
  CHECK(build_adjacency(triple, 0, 15.0).size() == 6);
}

TEST_CASE("conflict sets are symmetric and exclude self") {
  auto t = static_trace({{0, 0}, {10, 0}, {200, 0}, {210, 0}}, 2);
  auto links = build_adjacency(t, 0, 15.0);
  REQUIRE(links.size() == 4);  // (0,1),(1,0),(2,3),(3,2)
  auto conf = conflict_sets(links, t, 0, 30.0);
  for (std::size_t a = 0; a < links.size(); ++a) {
    for (int b : conf[a]) {
      CHECK(b != static_cast<int>(a));
      const auto& back = conf[b];
      CHECK(std::find(back.begin(), back.end(), static_cast<int>(a)) != back.end());
    }
  }
  // the two clusters are 200 m apart: no cross conflicts
  for (int b : conf[0]) CHECK(links[b].first < 2);
}

TEST_CASE("rb allocation is a proper coloring when the pool suffices") {
  // star of 4 mutually conflicting links
  std::vector<std::vector<int>> conflicts{{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
  auto rbs = allocate_rbs(conflicts, 4);
  std::set<int> used(rbs.begin(), rbs.end());
  CHECK(used.size() == 4);

  // exhaustive proper-coloring check on a random conflict structure
  RandomStream rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    int n = rng.uniform_int(2, 12);
    std::vector<std::vector<int>> c(n);
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        if (rng.uniform() < 0.4) {
          c[a].push_back(b);
          c[b].push_back(a);
        }
    auto colors = allocate_rbs(c, n + 1);  // pool large enough: no wrap
    for (int a = 0; a < n; ++a)
      for (int b : c[a]) CHECK(colors[a] != colors[b]);
  }
}

TEST_CASE("two non-conflicting links may share an RB, pool wrap stays in range") {
  std::vector<std::vector<int>> conflicts{{}, {}};
  auto rbs = allocate_rbs(conflicts, 2);
  CHECK(rbs[0] == rbs[1]);  // both take the first color

  std::vector<std::vector<int>> chain{{1}, {0, 2}, {1, 3}, {2}};
  auto wrapped = allocate_rbs(chain, 1);
  for (int rb : wrapped) CHECK(rb == 0);
}

TEST_CASE("social weight rules and their ordering") {
  // communities: {0,1,2} with internal sustainable weight, {3,4}, {5}
  // G_p: 0-1 sustainable, 0-2 bridge, 3-4 sustainable, 2-3 bridge (cross),
  //      1-4 sustainable (cross); device 5 base has no G_p edges
  SocialParams sp;
  sp.zeta = 0.7;
  auto cg = make_contact_graph(
      6, {{0, 1, 2.0}, {0, 2, 0.4}, {3, 4, 1.5}, {2, 3, 0.3}, {1, 4, 0.9}}, sp);
  auto cs = communities_of({{0, 1, 2}, {3, 4}, {5}}, 6);

  std::vector<std::pair<int, int>> links{
      {0, 1},  // rule i: same community, sustainable
      {0, 2},  // rule ii: same community, bridge
      {2, 3},  // rule iii: cross, bridge edge connecting
      {1, 4},  // rule iv: cross, sustainable edge
      {2, 5},  // rule iii fallback: no connecting edge at all
  };
  SocialWeightParams params;
  auto w = social_weights(links, cs, cg, params);
  REQUIRE(w.size() == 5);
  for (double v : w) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  CHECK(w[4] == doctest::Approx(1.0));        // isolated pair takes the max
  CHECK(w[0] < w[1]);                         // rule i below rule ii
  CHECK(w[1] <= w[3] + 1e-12);                // fixture built for the full chain
  CHECK(w[3] < w[2]);                         // rule iv below its rule-iii value
  // rule iii uses the minimum connecting weight between the two communities
  // connecting edges {0,1,2}x{3,4}: 2-3 (0.3) and 1-4 (0.9) -> 1/0.3
  // rule iv for the same pair: 0.75x that raw value
  CHECK(w[3] / w[2] < 1.0);
}

TEST_CASE("devices missing from the community structure act as singletons") {
  SocialParams sp;
  auto cg = make_contact_graph(2, {{0, 1, 1.0}}, sp);
  auto cs = communities_of({{0}, {1}}, 2);
  // device 7 outside the structure
  std::vector<std::pair<int, int>> links{{0, 1}, {0, 7}};
  auto w = social_weights(links, cs, cg, {});
  CHECK(w[1] == doctest::Approx(1.0));  // no connecting edges: W_max branch
}

TEST_CASE("assemble: two devices in range") {
  auto t = static_trace({{400, 400}, {410, 400}}, 5);
  auto cg = make_contact_graph(2, {});
  auto cs = communities_of({{0}, {1}}, 2);
  ChannelParams chan;
  RelayParams relay;
  auto g = assemble(t, 0.0, 0, 1, 1.2e6, 100.0, cs, cg, chan, relay, 77);
  REQUIRE(g.n == 2);
  const RelayEdge* e = g.find_edge(0, 1);
  REQUIRE(e != nullptr);
  // delay matches the straight-line evaluation with the same frozen fading
  double rx = oracle::received_power_w(0.1, 10.0, e->fading.m0_sq, e->fading.psi_db, 3.0);
  double gamma = oracle::sinr(rx, 0.0, oracle::noise_w(-174.0, 180e3));
  double delay = oracle::hop_delay_s(10.0, 1.2e6, oracle::rate_bps(gamma, 180e3), 2.998e8);
  CHECK(e->delay_s == doctest::Approx(delay).epsilon(1e-9));
  CHECK(e->cost == doctest::Approx(1.0));  // sole edge: normalized by itself
  CHECK(e->weight == doctest::Approx(e->social + e->cost));
  CHECK(g.b2d_cost_of[1] > 0.0);
}

TEST_CASE("assemble: isolated target keeps only its BS link") {
  auto t = static_trace({{100, 100}, {110, 100}, {800, 800}}, 5);
  auto cg = make_contact_graph(3, {});
  auto cs = communities_of({{0}, {1}, {2}}, 3);
  auto g = assemble(t, 0.0, 0, 2, 1.2e6, 100.0, cs, cg, ChannelParams{}, RelayParams{}, 3);
  for (const RelayEdge& e : g.edges) CHECK(e.to != 2);
  CHECK(g.b2d_cost_of[2] > 0.0);
}

TEST_CASE("assemble: five-device line matches the straight-line evaluation") {
  std::vector<Eigen::Vector2d> line;
  for (int i = 0; i < 5; ++i) line.push_back({200.0 + 10.0 * i, 300.0});
  auto t = static_trace(line, 5);
  auto cg = make_contact_graph(5, {});
  auto cs = communities_of({{0}, {1}, {2}, {3}, {4}}, 5);
  ChannelParams chan;
  RelayParams relay;
  relay.total_rbs = 30;
  relay.cellular_users = 0;  // wide pool: all links get distinct RBs, no interference
  auto g = assemble(t, 0.0, 0, 4, 1.2e6, 100.0, cs, cg, chan, relay, 11);

  // neighbors at 10 m are adjacent; second neighbors at 20 m are not
  std::set<std::pair<int, int>> expect;
  for (int i = 0; i + 1 < 5; ++i) {
    expect.insert({i, i + 1});
    expect.insert({i + 1, i});
  }
  std::set<std::pair<int, int>> got;
  double max_cost_raw = 0.0;
  for (const RelayEdge& e : g.edges) {
    got.insert({e.from, e.to});
    CHECK(e.interference_w == 0.0);
    double rx = oracle::received_power_w(0.1, e.distance_m, e.fading.m0_sq, e.fading.psi_db, 3.0);
    max_cost_raw = std::max(max_cost_raw, rx);
  }
  CHECK(got == expect);
  for (const RelayEdge& e : g.edges) {
    double rx = oracle::received_power_w(0.1, e.distance_m, e.fading.m0_sq, e.fading.psi_db, 3.0);
    double gamma = oracle::sinr(rx, 0.0, oracle::noise_w(-174.0, 180e3));
    CHECK(e.sinr == doctest::Approx(gamma).epsilon(1e-9));
    CHECK(e.delay_s ==
          doctest::Approx(oracle::hop_delay_s(e.distance_m, 1.2e6,
                                              oracle::rate_bps(gamma, 180e3), 2.998e8))
              .epsilon(1e-9));
    CHECK(e.cost == doctest::Approx(rx / max_cost_raw).epsilon(1e-9));
    // BS cost per the inverse-received-power form
    double d_bs = (t.position(e.to, 0) - Eigen::Vector2d(500, 500)).norm();
    (void)d_bs;
  }
  for (int j = 0; j < 5; ++j) {
    CHECK(g.b2d_cost_of[j] > 0.0);
    CHECK(g.b2d_delay_s[j] > 0.0);
  }
}

TEST_CASE("cost and social weights stay in the unit interval") {
  RandomStream rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Eigen::Vector2d> pts;
    int n = rng.uniform_int(4, 12);
    for (int i = 0; i < n; ++i)
      pts.push_back({rng.uniform(480.0, 540.0), rng.uniform(480.0, 540.0)});
    auto t = static_trace(pts, 3);
    auto cg = make_contact_graph(n, {});
    std::vector<std::vector<int>> singletons;
    for (int i = 0; i < n; ++i) singletons.push_back({i});
    auto cs = communities_of(singletons, n);
    auto g = assemble(t, 0.0, 0, n - 1, 1.2e6, 100.0, cs, cg, ChannelParams{}, RelayParams{},
                      trial);
    for (const RelayEdge& e : g.edges) {
      CHECK(e.cost >= 0.0);
      CHECK(e.cost <= 1.0 + 1e-12);
      CHECK(e.social >= 0.0);
      CHECK(e.social <= 1.0 + 1e-12);
      CHECK(e.weight == doctest::Approx(e.social + e.cost));
      CHECK(e.rb >= 0);
      CHECK(e.rb < RelayParams{}.d2d_rb_pool());
      CHECK(e.sinr >= ChannelParams{}.sinr_threshold_linear());
    }
  }
}

TEST_CASE("removing a device never adds adjacency") {
  RandomStream rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Eigen::Vector2d> pts;
    for (int i = 0; i < 8; ++i)
      pts.push_back({rng.uniform(0.0, 60.0), rng.uniform(0.0, 60.0)});
    auto t = static_trace(pts, 2);
    auto full = build_adjacency(t, 0, 15.0);

    // drop device 7
    std::vector<Eigen::Vector2d> fewer(pts.begin(), pts.end() - 1);
    auto t2 = static_trace(fewer, 2);
    auto reduced = build_adjacency(t2, 0, 15.0);

    std::set<std::pair<int, int>> full_set(full.begin(), full.end());
    for (const auto& link : reduced) CHECK(full_set.count(link) == 1);
  }
}

TEST_CASE("relay graph dump and reload") {
  auto g = fixtures::two_routes(8.0);
  std::ostringstream out;
  dump_relay_graph_csv(g, out);
  auto path = std::filesystem::temp_directory_path() / "d2d_graph.csv";
  std::ofstream(path) << out.str();
  auto back = load_relay_graph_csv(path.string(), 0, 3, 8.0);
  CHECK(back.n == g.n);
  CHECK(back.edges.size() == g.edges.size());
  const RelayEdge* e = back.find_edge(0, 2);
  REQUIRE(e != nullptr);
  CHECK(e->weight == doctest::Approx(3.0));
  CHECK(e->delay_s == doctest::Approx(2.0));
  CHECK(back.b2d_cost_of[3] == doctest::Approx(1e9));
}
