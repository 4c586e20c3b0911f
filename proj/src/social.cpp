#include "d2d/social.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "d2d/errors.hpp"

namespace d2d {

ContactGraph::ContactGraph(int n, std::vector<ContactEdge> edges, SocialParams params)
    : n_(n), edges_(std::move(edges)), params_(params) {
  adjacency_.assign(n_, {});
  strength_.assign(n_, 0.0);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    ContactEdge& e = edges_[i];
    if (e.u > e.v) std::swap(e.u, e.v);
    if (e.u < 0 || e.v >= n_ || e.u == e.v) throw ConfigError("contact edge endpoints invalid");
    index_[{e.u, e.v}] = static_cast<int>(i);
    adjacency_[e.u].emplace_back(e.v, e.weight);
    adjacency_[e.v].emplace_back(e.u, e.weight);
    strength_[e.u] += e.weight;
    strength_[e.v] += e.weight;
    total_weight_ += e.weight;
  }
  for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
}

bool ContactGraph::has_edge(int u, int v) const { return find_edge(u, v) != nullptr; }

const ContactEdge* ContactGraph::find_edge(int u, int v) const {
  if (u > v) std::swap(u, v);
  auto it = index_.find({u, v});
  return it == index_.end() ? nullptr : &edges_[it->second];
}

double ContactGraph::weight(int u, int v) const {
  const ContactEdge* e = find_edge(u, v);
  return e ? e->weight : 0.0;
}

double nominal_transfer_time(double content_bits, const ChannelParams& params) {
  if (content_bits <= 0.0) throw ConfigError("content size must be > 0");
  double rx = received_power(params.device_tx_power_w, params.d_max_m, kUnitFading, params);
  double gamma = rx / params.noise_power_w();
  return hop_delay(params.d_max_m, content_bits, rate(gamma, params), params);
}

EdgeClass classify_edge(double weight, double zeta) {
  return weight >= zeta ? EdgeClass::Sustainable : EdgeClass::Bridge;
}

namespace {

// (x - min) / (max - min); a flat range maps everything to 1.
double min_max(double x, double lo, double hi) {
  return hi > lo ? (x - lo) / (hi - lo) : 1.0;
}

}  // namespace

ContactGraph build_contact_graph(const EncounterHistory& history, double t_c,
                                 const SocialParams& params) {
  if (params.rho < 0.0 || params.rho > 1.0) throw ConfigError("rho must be in [0, 1]");
  if (params.delta < 0.0) throw ConfigError("delta must be >= 0");
  if (t_c <= 0.0) throw ConfigError("t_c must be > 0");
  if (params.lambda_window_s <= 0.0) throw ConfigError("lambda window must be > 0");

  int n = 0;
  std::vector<ContactEdge> kept;
  const double windows = history.window_length_s() / params.lambda_window_s;
  for (const auto& [pair, encounters] : history.by_pair) {
    n = std::max(n, std::max(pair.first, pair.second) + 1);
    if (encounters.empty()) continue;
    double total = 0.0;
    int longer = 0;
    for (const Encounter& e : encounters) {
      total += e.duration_s;
      if (e.duration_s > t_c) ++longer;
    }
    double avg = total / static_cast<double>(encounters.size());
    if (avg < (1.0 + params.delta) * t_c) continue;
    ContactEdge edge;
    edge.u = pair.first;
    edge.v = pair.second;
    edge.avg_duration_s = avg;
    edge.success_fraction = static_cast<double>(longer) / static_cast<double>(encounters.size());
    edge.encounter_rate = static_cast<double>(encounters.size()) / windows;
    kept.push_back(edge);
  }

  double rate_lo = std::numeric_limits<double>::infinity(), rate_hi = 0.0;
  double dur_lo = std::numeric_limits<double>::infinity(), dur_hi = 0.0;
  for (const ContactEdge& e : kept) {
    double term = e.success_fraction * e.encounter_rate;
    rate_lo = std::min(rate_lo, term);
    rate_hi = std::max(rate_hi, term);
    dur_lo = std::min(dur_lo, e.avg_duration_s);
    dur_hi = std::max(dur_hi, e.avg_duration_s);
  }
  for (ContactEdge& e : kept) {
    double term = e.success_fraction * e.encounter_rate;
    double dur = e.avg_duration_s;
    if (params.normalize_w) {
      term = min_max(term, rate_lo, rate_hi);
      dur = min_max(dur, dur_lo, dur_hi);
    }
    e.weight = params.rho * term + (1.0 - params.rho) * dur;
    e.cls = classify_edge(e.weight, params.zeta);
  }
  return ContactGraph(n, std::move(kept), params);
}

ContactGraph make_contact_graph(int n, const std::vector<std::tuple<int, int, double>>& edges,
                                SocialParams params) {
  std::vector<ContactEdge> list;
  list.reserve(edges.size());
  for (const auto& [u, v, w] : edges) {
    ContactEdge e;
    e.u = u;
    e.v = v;
    e.weight = w;
    e.avg_duration_s = w;
    e.success_fraction = 1.0;
    e.encounter_rate = 1.0;
    e.cls = classify_edge(w, params.zeta);
    list.push_back(e);
  }
  return ContactGraph(n, std::move(list), params);
}

void dump_contact_graph_csv(const ContactGraph& graph, std::ostream& out) {
  out << "u,v,avg_duration_s,success_frac,rate_per_day,weight,class\n";
  char buf[192];
  for (const ContactEdge& e : graph.edges()) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.10g,%.10g,%.10g,%.10g,%s\n", e.u, e.v,
                  e.avg_duration_s, e.success_fraction, e.encounter_rate, e.weight,
                  e.cls == EdgeClass::Sustainable ? "sustainable" : "bridge");
    out << buf;
  }
}

}  // namespace d2d
