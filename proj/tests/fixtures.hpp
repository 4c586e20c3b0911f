#pragma once

// Shared test fixtures: hand-built traces and synthetic relay graphs.

#include <vector>

#include "d2d/mobility.hpp"
#include "d2d/relaygraph.hpp"

namespace fixtures {

inline d2d::MobilityTrace trace_from_rows(
    double tick_s, const std::vector<std::vector<Eigen::Vector2d>>& per_device,
    d2d::Arena arena = {1000, 1000}) {
  std::vector<Eigen::Matrix2Xd> pos;
  for (const auto& track : per_device) {
    Eigen::Matrix2Xd m(2, static_cast<long>(track.size()));
    for (std::size_t k = 0; k < track.size(); ++k) m.col(static_cast<long>(k)) = track[k];
    pos.push_back(m);
  }
  return d2d::MobilityTrace(tick_s, arena, std::move(pos));
}

// static trace: every device sits at its position for `ticks` ticks
inline d2d::MobilityTrace static_trace(const std::vector<Eigen::Vector2d>& positions, long ticks,
                                       d2d::Arena arena = {1000, 1000}) {
  std::vector<std::vector<Eigen::Vector2d>> rows;
  for (const auto& p : positions) rows.emplace_back(ticks, p);
  return trace_from_rows(1.0, rows, arena);
}

struct EdgeSpec {
  int from, to;
  double weight;   // w_ij
  double delay_s;  // t_ij
  double cost;     // c_ij (defaults to weight when < 0)
};

// synthetic relay graph for solver tests: w and c settable independently
inline d2d::RelayGraph make_graph(int n, int source, int target, double t_max_s,
                                  const std::vector<EdgeSpec>& edges) {
  d2d::RelayGraph g;
  g.n = n;
  g.source = source;
  g.target = target;
  g.t_max_s = t_max_s;
  for (const EdgeSpec& e : edges) {
    d2d::RelayEdge re;
    re.from = e.from;
    re.to = e.to;
    re.weight = e.weight;
    re.delay_s = e.delay_s;
    re.cost = e.cost < 0.0 ? e.weight : e.cost;
    re.social = re.weight - re.cost;
    g.edges.push_back(re);
  }
  g.b2d_cost_of.assign(n, 1e9);
  g.b2d_delay_s.assign(n, 0.0);
  g.build_index();
  return g;
}

// the two-route fixture: s-a-r cheap and slow, s-b-r costly and fast
inline d2d::RelayGraph two_routes(double t_max_s) {
  return make_graph(4, 0, 3, t_max_s,
                    {{0, 1, 1.0, 5.0, -1.0},
                     {1, 3, 1.0, 5.0, -1.0},
                     {0, 2, 3.0, 2.0, -1.0},
                     {2, 3, 3.0, 2.0, -1.0}});
}

}  // namespace fixtures
