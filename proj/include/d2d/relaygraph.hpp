#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "d2d/channel.hpp"
#include "d2d/community.hpp"
#include "d2d/mobility.hpp"
#include "d2d/social.hpp"

namespace d2d {

inline constexpr int kBsVertex = -1;

struct RelayEdge {
  int from = 0, to = 0;
  double distance_m = 0.0;
  FadingDraw fading;           // frozen for the session
  double interference_w = 0.0; // co-channel sum at assembly, frozen for monitoring
  double sinr = 0.0;           // linear
  double rate_bps = 0.0;
  double delay_s = 0.0;        // t_ij for the request's content size
  double cost = 0.0;           // c_ij, normalized to (0, 1]
  double social = 0.0;         // W_ij, normalized to [0, 1]
  double weight = 0.0;         // w_ij = W_ij + c_ij
  int rb = 0;
};

// Instantaneous multi-hop D2D graph at request time. The BS is an implicit
// extra vertex reaching every device at its B2D cost; no edge enters the BS,
// so it never appears inside an s->r relay path.
struct RelayGraph {
  int n = 0;
  int source = -1, target = -1;
  double request_time_s = 0.0;
  double content_bits = 0.0;
  double t_max_s = 0.0;
  std::vector<RelayEdge> edges;
  std::vector<double> b2d_cost_of;          // per device
  std::vector<double> b2d_delay_s;          // direct BS->device transfer time
  std::vector<std::vector<int>> out_edges;  // device -> edge ids

  void build_index();
  const RelayEdge* find_edge(int from, int to) const;
};

struct SocialWeightParams {
  double rule2_factor = 1.5;   // same community, weak/no tie: x max rule-(i) value
  double rule4_factor = 0.75;  // sustainable cross-community tie: x rule-(iii) value
  bool rule3_use_max = false;  // use the heaviest connecting edge instead of the lightest
};

struct RelayParams {
  int total_rbs = 25;
  int cellular_users = 20;  // occupy RBs first; D2D colors the remaining pool
  double conflict_radius_factor = 2.0;  // x d_max
  SocialWeightParams social;

  int d2d_rb_pool() const { return std::max(1, total_rbs - cellular_users); }
};

// All ordered in-range pairs (distance screen only; the SINR screen runs after
// RB allocation inside assemble()).
std::vector<std::pair<int, int>> build_adjacency(const MobilityTrace& trace, long tick,
                                                 double d_max_m);

// Symmetric conflict sets: two links conflict when either endpoint of one lies
// within the conflict radius of the other's transmitter.
std::vector<std::vector<int>> conflict_sets(const std::vector<std::pair<int, int>>& links,
                                            const MobilityTrace& trace, long tick,
                                            double conflict_radius_m);

// Greedy largest-degree-first coloring; colors beyond the pool wrap round-robin.
std::vector<int> allocate_rbs(const std::vector<std::vector<int>>& conflicts, int pool_size);

// W_ij per the four community rules, min-max normalized to [0, 1].
std::vector<double> social_weights(const std::vector<std::pair<int, int>>& links,
                                   const CommunityStructure& communities,
                                   const ContactGraph& contact_graph,
                                   const SocialWeightParams& params);

// Full pipeline: adjacency -> conflicts -> RBs -> fading/SINR screen -> rates,
// delays, costs -> social weights -> combined edge weight, plus B2D costs.
RelayGraph assemble(const MobilityTrace& trace, double request_time_s, int source, int target,
                    double content_bits, double t_max_s, const CommunityStructure& communities,
                    const ContactGraph& contact_graph, const ChannelParams& channel,
                    const RelayParams& relay, std::uint64_t fading_seed);

// `i,j,c_ij,W_ij,w_ij,t_ij,rb`; BS rows use i = -1.
void dump_relay_graph_csv(const RelayGraph& graph, std::ostream& out);
RelayGraph load_relay_graph_csv(const std::string& path, int source, int target, double t_max_s);

}  // namespace d2d
