#pragma once

#include <iosfwd>
#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include "d2d/channel.hpp"
#include "d2d/mobility.hpp"

namespace d2d {

enum class EdgeClass { Sustainable, Bridge };

struct SocialParams {
  double rho = 0.8;    // weight factor between success-rate and duration terms
  double delta = 4.0;  // stability threshold on average duration
  double zeta = 0.7;   // strength threshold splitting sustainable/bridge
  double lambda_window_s = 86400.0;  // encounter-rate divisor (per day)
  bool normalize_w = true;  // min-max normalize both weight terms before mixing
};

struct ContactEdge {
  int u = 0, v = 0;             // u < v
  double avg_duration_s = 0.0;  // D-bar
  double success_fraction = 0.0;  // B: share of encounters strictly longer than t_c
  double encounter_rate = 0.0;    // lambda: encounters per lambda_window
  double weight = 0.0;            // w
  EdgeClass cls = EdgeClass::Bridge;
};

// Weighted undirected contact graph G_p over all devices.
class ContactGraph {
 public:
  ContactGraph() = default;
  ContactGraph(int n, std::vector<ContactEdge> edges, SocialParams params);

  int n() const { return n_; }
  const std::vector<ContactEdge>& edges() const { return edges_; }
  const SocialParams& params() const { return params_; }

  bool has_edge(int u, int v) const;
  const ContactEdge* find_edge(int u, int v) const;
  double weight(int u, int v) const;  // 0 when absent

  // neighbor id -> edge weight, sorted by neighbor id
  const std::vector<std::pair<int, double>>& neighbors(int u) const { return adjacency_[u]; }
  // w_u: total weight incident to u
  double strength(int u) const { return strength_[u]; }
  double total_weight() const { return total_weight_; }

 private:
  int n_ = 0;
  std::vector<ContactEdge> edges_;
  SocialParams params_;
  std::map<std::pair<int, int>, int> index_;
  std::vector<std::vector<std::pair<int, double>>> adjacency_;
  std::vector<double> strength_;
  double total_weight_ = 0.0;
};

// t_c: one-hop transfer time at exactly d_max with unit fading and no interference.
double nominal_transfer_time(double content_bits, const ChannelParams& params);

// Keeps pairs with average duration >= (1+delta)*t_c, computes B, lambda and
// w = rho*B*lambda + (1-rho)*D-bar (terms min-max normalized across kept pairs
// when params.normalize_w).
ContactGraph build_contact_graph(const EncounterHistory& history, double t_c,
                                 const SocialParams& params);

// Fixture helper: graph from explicit weighted edges (stats back-filled from weight).
ContactGraph make_contact_graph(int n, const std::vector<std::tuple<int, int, double>>& edges,
                                SocialParams params = {});

EdgeClass classify_edge(double weight, double zeta);

// `u,v,avg_duration_s,success_frac,rate_per_day,weight,class`
void dump_contact_graph_csv(const ContactGraph& graph, std::ostream& out);

}  // namespace d2d
