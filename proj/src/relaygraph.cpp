#include "d2d/relaygraph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "d2d/errors.hpp"
#include "d2d/rng.hpp"

namespace d2d {

void RelayGraph::build_index() {
  out_edges.assign(n, {});
  for (std::size_t k = 0; k < edges.size(); ++k) out_edges[edges[k].from].push_back(static_cast<int>(k));
}

const RelayEdge* RelayGraph::find_edge(int from, int to) const {
  if (from < 0 || from >= n) return nullptr;
  for (int k : out_edges[from])
    if (edges[k].to == to) return &edges[k];
  return nullptr;
}

std::vector<std::pair<int, int>> build_adjacency(const MobilityTrace& trace, long tick,
                                                 double d_max_m) {
  std::vector<std::pair<int, int>> links;
  const int n = trace.n_devices();
  const double d2 = d_max_m * d_max_m;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      if ((trace.position(i, tick) - trace.position(j, tick)).squaredNorm() <= d2)
        links.emplace_back(i, j);
    }
  return links;
}

std::vector<std::vector<int>> conflict_sets(const std::vector<std::pair<int, int>>& links,
                                            const MobilityTrace& trace, long tick,
                                            double conflict_radius_m) {
  const double r2 = conflict_radius_m * conflict_radius_m;
  auto near = [&](int a, int b) {
    return (trace.position(a, tick) - trace.position(b, tick)).squaredNorm() <= r2;
  };
  std::vector<std::vector<int>> out(links.size());
  for (std::size_t a = 0; a < links.size(); ++a) {
    for (std::size_t b = a + 1; b < links.size(); ++b) {
      auto [ta, ra] = links[a];
      auto [tb, rb] = links[b];
      if (near(ta, tb) || near(ta, rb) || near(tb, ra)) {
        out[a].push_back(static_cast<int>(b));
        out[b].push_back(static_cast<int>(a));
      }
    }
  }
  return out;
}

std::vector<int> allocate_rbs(const std::vector<std::vector<int>>& conflicts, int pool_size) {
  if (pool_size < 1) throw ConfigError("RB pool must hold at least one block");
  const int n = static_cast<int>(conflicts.size());
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return conflicts[a].size() > conflicts[b].size();
  });

  std::vector<int> color(n, -1);
  std::vector<char> used;
  for (int link : order) {
    used.assign(n + 1, 0);
    for (int other : conflicts[link])
      if (color[other] >= 0) used[color[other]] = 1;
    int c = 0;
    while (used[c]) ++c;
    color[link] = c;
  }
  for (int& c : color) c %= pool_size;
  return color;
}

namespace {

FadingDraw fading_for(std::uint64_t seed, int a, int b, const ChannelParams& params) {
  if (a > b) std::swap(a, b);
  RandomStream rng(RandomStream::mix(RandomStream::mix(seed, static_cast<std::uint64_t>(a + 1)),
                                     static_cast<std::uint64_t>(b + 1)));
  return draw_fading(rng, params);
}

}  // namespace

std::vector<double> social_weights(const std::vector<std::pair<int, int>>& links,
                                   const CommunityStructure& communities,
                                   const ContactGraph& cg, const SocialWeightParams& params) {
  // devices missing from the community structure act as their own singletons
  auto comm_of = [&](int dev) {
    if (dev < static_cast<int>(communities.community_of.size()) &&
        communities.community_of[dev] >= 0)
      return communities.community_of[dev];
    return -(dev + 2);
  };

  std::vector<double> internal(communities.k(), 0.0);
  std::map<std::pair<int, int>, std::pair<double, double>> connecting;  // (min w, max w)
  for (const ContactEdge& e : cg.edges()) {
    int cu = comm_of(e.u), cv = comm_of(e.v);
    if (cu == cv) {
      if (cu >= 0) internal[cu] += e.weight;
      continue;
    }
    auto key = std::minmax(cu, cv);
    auto [it, fresh] = connecting.try_emplace({key.first, key.second}, e.weight, e.weight);
    if (!fresh) {
      it->second.first = std::min(it->second.first, e.weight);
      it->second.second = std::max(it->second.second, e.weight);
    }
  }

  enum class Rule { SameSustainable, SameWeak, CrossConnected, CrossSustainable, CrossIsolated };
  std::vector<Rule> rule(links.size());
  std::vector<double> raw(links.size(), 0.0);

  double rule1_max = 0.0;
  for (std::size_t k = 0; k < links.size(); ++k) {
    auto [i, j] = links[k];
    int ci = comm_of(i), cj = comm_of(j);
    const ContactEdge* e = cg.find_edge(i, j);
    if (ci == cj) {
      if (e && e->cls == EdgeClass::Sustainable) {
        rule[k] = Rule::SameSustainable;
        raw[k] = 1.0 / internal[ci];
        rule1_max = std::max(rule1_max, raw[k]);
      } else {
        rule[k] = Rule::SameWeak;
      }
    } else {
      auto key = std::minmax(ci, cj);
      auto it = connecting.find({key.first, key.second});
      if (it == connecting.end()) {
        rule[k] = Rule::CrossIsolated;
      } else {
        double conn = params.rule3_use_max ? it->second.second : it->second.first;
        if (e && e->cls == EdgeClass::Sustainable) {
          rule[k] = Rule::CrossSustainable;
          raw[k] = params.rule4_factor / conn;
        } else {
          rule[k] = Rule::CrossConnected;
          raw[k] = 1.0 / conn;
        }
      }
    }
  }

  if (rule1_max == 0.0) {
    // no rule-(i) link in this graph: anchor the same-community weak value to
    // the tightest community present, or to 1 when there are none
    double best = 0.0;
    for (double w : internal)
      if (w > 0.0) best = std::max(best, 1.0 / w);
    rule1_max = best > 0.0 ? best : 1.0;
  }
  for (std::size_t k = 0; k < links.size(); ++k)
    if (rule[k] == Rule::SameWeak) raw[k] = params.rule2_factor * rule1_max;

  double assigned_max = 0.0;
  for (std::size_t k = 0; k < links.size(); ++k)
    if (rule[k] != Rule::CrossIsolated) assigned_max = std::max(assigned_max, raw[k]);
  if (assigned_max == 0.0) assigned_max = 1.0;
  for (std::size_t k = 0; k < links.size(); ++k)
    if (rule[k] == Rule::CrossIsolated) raw[k] = assigned_max;

  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (double v : raw) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::vector<double> out(links.size(), 1.0);
  if (hi > lo)
    for (std::size_t k = 0; k < links.size(); ++k) out[k] = (raw[k] - lo) / (hi - lo);
  return out;
}

RelayGraph assemble(const MobilityTrace& trace, double request_time_s, int source, int target,
                    double content_bits, double t_max_s, const CommunityStructure& communities,
                    const ContactGraph& contact_graph, const ChannelParams& channel,
                    const RelayParams& relay, std::uint64_t fading_seed) {
  const long tick = trace.tick_at(request_time_s);
  auto links = build_adjacency(trace, tick, channel.d_max_m);
  auto conflicts =
      conflict_sets(links, trace, tick, relay.conflict_radius_factor * channel.d_max_m);
  auto rbs = allocate_rbs(conflicts, relay.d2d_rb_pool());

  const double noise = channel.noise_power_w();
  const double threshold = channel.sinr_threshold_linear();

  // transmitters per RB, deduplicated per receiver later
  std::vector<std::vector<int>> tx_on_rb(relay.d2d_rb_pool());
  for (std::size_t k = 0; k < links.size(); ++k) tx_on_rb[rbs[k]].push_back(links[k].first);

  RelayGraph g;
  g.n = trace.n_devices();
  g.source = source;
  g.target = target;
  g.request_time_s = request_time_s;
  g.content_bits = content_bits;
  g.t_max_s = t_max_s;

  std::vector<std::pair<int, int>> kept_links;
  std::vector<int> kept_rbs;
  std::vector<RelayEdge> kept;
  for (std::size_t k = 0; k < links.size(); ++k) {
    auto [i, j] = links[k];
    RelayEdge e;
    e.from = i;
    e.to = j;
    e.distance_m = distance(trace, i, j, tick);
    e.fading = fading_for(fading_seed, i, j, channel);
    e.rb = rbs[k];

    double p_rx = received_power(channel.device_tx_power_w, e.distance_m, e.fading, channel);
    std::set<int> interferers;
    for (int q : tx_on_rb[e.rb])
      if (q != i && q != j) interferers.insert(q);
    double interference = 0.0;
    for (int q : interferers)
      interference += received_power(channel.device_tx_power_w, distance(trace, q, j, tick),
                                     fading_for(fading_seed, q, j, channel), channel);
    e.interference_w = interference;
    e.sinr = p_rx / (interference + noise);
    if (e.sinr < threshold) continue;
    e.rate_bps = rate(e.sinr, channel);
    if (e.rate_bps <= 0.0) continue;
    e.delay_s = hop_delay(e.distance_m, content_bits, e.rate_bps, channel);
    e.cost = p_rx;  // normalized below
    kept.push_back(e);
    kept_links.emplace_back(i, j);
  }

  double max_cost = 0.0;
  for (const RelayEdge& e : kept) max_cost = std::max(max_cost, e.cost);
  if (max_cost > 0.0)
    for (RelayEdge& e : kept) e.cost /= max_cost;

  auto social = social_weights(kept_links, communities, contact_graph, relay.social);
  for (std::size_t k = 0; k < kept.size(); ++k) {
    kept[k].social = social[k];
    kept[k].weight = kept[k].social + kept[k].cost;
  }
  g.edges = std::move(kept);

  const Eigen::Vector2d bs_pos(trace.arena().width_m / 2.0, trace.arena().height_m / 2.0);
  g.b2d_cost_of.resize(g.n);
  g.b2d_delay_s.resize(g.n);
  for (int j = 0; j < g.n; ++j) {
    double d = (trace.position(j, tick) - bs_pos).norm();
    FadingDraw f = fading_for(fading_seed, kBsVertex, j, channel);
    g.b2d_cost_of[j] = b2d_cost(d, f, channel);
    double p_rx = received_power(channel.bs_tx_power_w, d, f, channel);
    g.b2d_delay_s[j] = hop_delay(d, content_bits, rate(p_rx / noise, channel), channel);
  }

  g.build_index();
  return g;
}

void dump_relay_graph_csv(const RelayGraph& graph, std::ostream& out) {
  out << "i,j,c_ij,W_ij,w_ij,t_ij,rb\n";
  char buf[192];
  for (const RelayEdge& e : graph.edges) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.10g,%.10g,%.10g,%.10g,%d\n", e.from, e.to, e.cost,
                  e.social, e.weight, e.delay_s, e.rb);
    out << buf;
  }
  for (int j = 0; j < graph.n; ++j) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.10g,0,%.10g,0,-1\n", kBsVertex, j,
                  graph.b2d_cost_of[j], graph.b2d_cost_of[j]);
    out << buf;
  }
}

RelayGraph load_relay_graph_csv(const std::string& path, int source, int target, double t_max_s) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open relay graph file: " + path);
  RelayGraph g;
  g.source = source;
  g.target = target;
  g.t_max_s = t_max_s;

  std::string line;
  long row = 0;
  bool saw_header = false;
  std::vector<RelayEdge> edges;
  std::map<int, double> b2d;
  int max_id = -1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      if (line != "i,j,c_ij,W_ij,w_ij,t_ij,rb")
        throw ParseError("expected header 'i,j,c_ij,W_ij,w_ij,t_ij,rb'", row);
      saw_header = true;
      continue;
    }
    std::istringstream ss(line);
    std::string f[7];
    for (int c = 0; c < 7; ++c)
      if (!std::getline(ss, f[c], c == 6 ? '\n' : ','))
        throw ParseError("expected 7 comma-separated fields", row);
    try {
      int i = std::stoi(f[0]);
      int j = std::stoi(f[1]);
      if (i == kBsVertex) {
        b2d[j] = std::stod(f[2]);
        max_id = std::max(max_id, j);
        continue;
      }
      RelayEdge e;
      e.from = i;
      e.to = j;
      e.cost = std::stod(f[2]);
      e.social = std::stod(f[3]);
      e.weight = std::stod(f[4]);
      e.delay_s = std::stod(f[5]);
      e.rb = std::stoi(f[6]);
      edges.push_back(e);
      max_id = std::max(max_id, std::max(i, j));
    } catch (const std::invalid_argument&) {
      throw ParseError("malformed numeric field", row);
    }
  }
  if (!saw_header) throw ParseError("relay graph file has no header", std::max(row, 1L));
  g.n = max_id + 1;
  g.edges = std::move(edges);
  g.b2d_cost_of.assign(g.n, 0.0);
  g.b2d_delay_s.assign(g.n, 0.0);
  for (const auto& [j, c] : b2d)
    if (j >= 0 && j < g.n) g.b2d_cost_of[j] = c;
  if (source < 0 || source >= g.n || target < 0 || target >= g.n)
    throw ConfigError("source/target outside the loaded graph");
  g.build_index();
  return g;
}

}  // namespace d2d
