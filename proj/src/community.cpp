#include "d2d/community.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>

#include "d2d/errors.hpp"
#include "d2d/rng.hpp"

namespace d2d {

namespace {

constexpr double kGainTol = 1e-12;

double h_of(double internal, double strength_sum) {
  double denom = strength_sum - internal;  // w_C + w_C_out
  return denom > 0.0 ? internal / denom : 0.0;
}

// Incremental partition bookkeeping: per community, the internal weight I_C and
// the sum of member strengths S_C, so h_C = I_C / (S_C - I_C).
struct Partition {
  const ContactGraph& g;
  std::vector<int> comm;                  // node -> community (-1 while unassigned)
  std::vector<std::vector<int>> members;  // may contain dead (empty) communities
  std::vector<double> internal;
  std::vector<double> strength_sum;

  explicit Partition(const ContactGraph& graph)
      : g(graph), comm(graph.n(), -1) {}

  double h(int c) const { return h_of(internal[c], strength_sum[c]); }

  double total() const {
    double r = 0.0;
    for (std::size_t c = 0; c < members.size(); ++c)
      if (!members[c].empty()) r += h(c);
    return r;
  }

  double weight_to(int node, int c) const {
    double s = 0.0;
    for (const auto& [nb, w] : g.neighbors(node))
      if (comm[nb] == c) s += w;
    return s;
  }

  int new_community(int node) {
    int c = static_cast<int>(members.size());
    members.push_back({node});
    internal.push_back(0.0);
    strength_sum.push_back(g.strength(node));
    comm[node] = c;
    return c;
  }

  void add(int node, int c, double w_node_c) {
    comm[node] = c;
    members[c].push_back(node);
    internal[c] += w_node_c;
    strength_sum[c] += g.strength(node);
  }

  // removes to a fresh singleton community
  void eject(int node, double w_node_c) {
    int c = comm[node];
    members[c].erase(std::find(members[c].begin(), members[c].end(), node));
    internal[c] -= w_node_c;
    strength_sum[c] -= g.strength(node);
    new_community(node);
  }

  void transfer(int node, int to, double w_node_from, double w_node_to) {
    int from = comm[node];
    members[from].erase(std::find(members[from].begin(), members[from].end(), node));
    internal[from] -= w_node_from;
    strength_sum[from] -= g.strength(node);
    add(node, to, w_node_to);
  }

  void merge(int a, int b, double cross) {
    for (int u : members[b]) comm[u] = a;
    members[a].insert(members[a].end(), members[b].begin(), members[b].end());
    members[b].clear();
    internal[a] += internal[b] + cross;
    strength_sum[a] += strength_sum[b];
    internal[b] = strength_sum[b] = 0.0;
  }

  void rebuild_from_labels(const std::vector<int>& labels) {
    int k = 0;
    for (int c : labels) k = std::max(k, c + 1);
    comm = labels;
    members.assign(k, {});
    internal.assign(k, 0.0);
    strength_sum.assign(k, 0.0);
    for (int u = 0; u < g.n(); ++u) {
      members[labels[u]].push_back(u);
      strength_sum[labels[u]] += g.strength(u);
    }
    for (const ContactEdge& e : g.edges())
      if (labels[e.u] == labels[e.v]) internal[labels[e.u]] += e.weight;
  }

  // cross weights of connected community pairs, keyed (min id, max id)
  std::map<std::pair<int, int>, double> cross_weights() const {
    std::map<std::pair<int, int>, double> x;
    for (const ContactEdge& e : g.edges()) {
      int a = comm[e.u], b = comm[e.v];
      if (a == b || a < 0 || b < 0) continue;
      x[{std::min(a, b), std::max(a, b)}] += e.weight;
    }
    return x;
  }

  int min_member(int c) const {
    return *std::min_element(members[c].begin(), members[c].end());
  }
};

CommunityStructure finalize(const Partition& p) {
  // canonical order: communities sorted by smallest member id
  std::vector<int> alive;
  for (std::size_t c = 0; c < p.members.size(); ++c)
    if (!p.members[c].empty()) alive.push_back(static_cast<int>(c));
  std::sort(alive.begin(), alive.end(),
            [&](int a, int b) { return p.min_member(a) < p.min_member(b); });

  CommunityStructure out;
  out.community_of.assign(p.g.n(), -1);
  for (int c : alive) {
    std::vector<int> m = p.members[c];
    std::sort(m.begin(), m.end());
    int id = static_cast<int>(out.members.size());
    for (int u : m) out.community_of[u] = id;
    out.members.push_back(std::move(m));
  }
  // recompute h_C from the graph so the stored values are exactly reproducible
  out.durability.resize(out.members.size());
  out.total_durability = 0.0;
  for (std::size_t c = 0; c < out.members.size(); ++c) {
    out.durability[c] = durability(out.members[c], p.g);
    out.total_durability += out.durability[c];
  }
  return out;
}

Partition to_partition(const CommunityStructure& s, const ContactGraph& g) {
  Partition p(g);
  p.members.resize(s.members.size());
  p.internal.assign(s.members.size(), 0.0);
  p.strength_sum.assign(s.members.size(), 0.0);
  for (std::size_t c = 0; c < s.members.size(); ++c) {
    p.members[c] = s.members[c];
    for (int u : s.members[c]) {
      p.comm[u] = static_cast<int>(c);
      p.strength_sum[c] += g.strength(u);
    }
  }
  for (const ContactEdge& e : g.edges())
    if (p.comm[e.u] == p.comm[e.v] && p.comm[e.u] >= 0) p.internal[p.comm[e.u]] += e.weight;
  return p;
}

void development_phase(Partition& p, RandomStream& rng) {
  const int n = p.g.n();
  std::vector<int> unassigned(n);
  for (int i = 0; i < n; ++i) unassigned[i] = i;
  std::vector<char> is_unassigned(n, 1);

  while (!unassigned.empty()) {
    int pick = rng.uniform_int(0, static_cast<int>(unassigned.size()) - 1);
    int x = unassigned[pick];
    unassigned[pick] = unassigned.back();
    unassigned.pop_back();
    is_unassigned[x] = 0;
    int c = p.new_community(x);

    while (true) {
      // candidates: unassigned neighbors of the community; growing by a
      // disconnected node can never raise h_C, so others are skipped
      double h_now = p.h(c);
      int best = -1;
      double best_h = h_now;
      for (int u : p.members[c]) {
        for (const auto& [nb, w] : p.g.neighbors(u)) {
          (void)w;
          if (!is_unassigned[nb]) continue;
          double wyc = p.weight_to(nb, c);
          double h_new = h_of(p.internal[c] + wyc, p.strength_sum[c] + p.g.strength(nb));
          if (h_new <= h_now) continue;
          bool better = best < 0 || h_new > best_h + kGainTol ||
                        (std::abs(h_new - best_h) <= kGainTol && nb < best);
          if (better) {
            best = nb;
            best_h = std::max(best_h, h_new);
          }
        }
      }
      if (best < 0) break;
      p.add(best, c, p.weight_to(best, c));
      is_unassigned[best] = 0;
      unassigned.erase(std::find(unassigned.begin(), unassigned.end(), best));
    }
  }
}

void augmentation_phase(Partition& p) {
  const std::size_t fixed_count = p.members.size();  // ejected singletons need no re-scan
  for (std::size_t c = 0; c < fixed_count; ++c) {
    while (p.members[c].size() >= 2) {
      double h_now = p.h(c);
      int best = -1;
      double best_gain = 0.0;
      for (int u : p.members[c]) {
        double wuc = p.weight_to(u, static_cast<int>(c));
        double h_without =
            h_of(p.internal[c] - wuc, p.strength_sum[c] - p.g.strength(u));
        double gain = h_without - h_now;
        if (gain <= kGainTol) continue;
        bool better = best < 0 || gain > best_gain + kGainTol ||
                      (std::abs(gain - best_gain) <= kGainTol && u < best);
        if (better) {
          best = u;
          best_gain = std::max(best_gain, gain);
        }
      }
      if (best < 0) break;
      p.eject(best, p.weight_to(best, static_cast<int>(c)));
    }
  }
}

void refinement_phase(Partition& p) {
  while (true) {
    auto cross = p.cross_weights();
    double best_gain = 0.0;
    int best_a = -1, best_b = -1;
    std::pair<int, int> best_key{-1, -1};
    for (const auto& [pair, x] : cross) {
      auto [a, b] = pair;
      double merged = h_of(p.internal[a] + p.internal[b] + x,
                           p.strength_sum[a] + p.strength_sum[b]);
      double gain = merged - p.h(a) - p.h(b);
      if (gain <= kGainTol) continue;
      std::pair<int, int> key{std::min(p.min_member(a), p.min_member(b)),
                              std::max(p.min_member(a), p.min_member(b))};
      bool better = best_a < 0 || gain > best_gain + kGainTol ||
                    (std::abs(gain - best_gain) <= kGainTol && key < best_key);
      if (better) {
        best_gain = gain;
        best_a = a;
        best_b = b;
        best_key = key;
      }
    }
    if (best_a < 0) break;
    p.merge(best_a, best_b, cross.at({std::min(best_a, best_b), std::max(best_a, best_b)}));
  }
}

struct Move {
  enum class Kind { None, Eject, Merge, Transfer } kind = Kind::None;
  double gain = 0.0;
  int node = -1, from = -1, to = -1;
  double w_from = 0.0, w_to = 0.0, cross = 0.0;
};

Move best_move(const Partition& p) {
  Move best;
  // ejections
  for (std::size_t c = 0; c < p.members.size(); ++c) {
    if (p.members[c].size() < 2) continue;
    double h_now = p.h(static_cast<int>(c));
    for (int u : p.members[c]) {
      double wuc = p.weight_to(u, static_cast<int>(c));
      double gain =
          h_of(p.internal[c] - wuc, p.strength_sum[c] - p.g.strength(u)) - h_now;
      if (gain > best.gain + kGainTol) {
        best = {Move::Kind::Eject, gain, u, static_cast<int>(c), -1, wuc, 0.0, 0.0};
      }
    }
  }
  // merges
  for (const auto& [pair, x] : p.cross_weights()) {
    auto [a, b] = pair;
    double gain = h_of(p.internal[a] + p.internal[b] + x,
                       p.strength_sum[a] + p.strength_sum[b]) -
                  p.h(a) - p.h(b);
    if (gain > best.gain + kGainTol) {
      best = {Move::Kind::Merge, gain, -1, a, b, 0.0, 0.0, x};
    }
  }
  // transfers into adjacent communities
  std::vector<double> w_by_comm(p.members.size(), 0.0);
  for (int v = 0; v < p.g.n(); ++v) {
    int cv = p.comm[v];
    std::vector<int> touched;
    for (const auto& [nb, w] : p.g.neighbors(v)) {
      int c = p.comm[nb];
      if (w_by_comm[c] == 0.0) touched.push_back(c);
      w_by_comm[c] += w;
    }
    double h_cv = p.h(cv);
    double h_cv_without =
        h_of(p.internal[cv] - w_by_comm[cv], p.strength_sum[cv] - p.g.strength(v));
    if (p.members[cv].size() == 1) h_cv_without = 0.0;
    for (int c : touched) {
      if (c == cv) continue;
      double h_c_with =
          h_of(p.internal[c] + w_by_comm[c], p.strength_sum[c] + p.g.strength(v));
      double gain = (h_c_with - p.h(c)) + (h_cv_without - h_cv);
      if (gain > best.gain + kGainTol) {
        best = {Move::Kind::Transfer, gain, v, cv, c, w_by_comm[cv], w_by_comm[c], 0.0};
      }
    }
    for (int c : touched) w_by_comm[c] = 0.0;
  }
  return best;
}

void greedy_moves(Partition& p) {
  const long cap = 200L * std::max(1, p.g.n());
  for (long iter = 0; iter < cap; ++iter) {
    Move m = best_move(p);
    switch (m.kind) {
      case Move::Kind::None:
        return;
      case Move::Kind::Eject:
        p.eject(m.node, m.w_from);
        break;
      case Move::Kind::Merge:
        p.merge(m.from, m.to, m.cross);
        break;
      case Move::Kind::Transfer:
        p.transfer(m.node, m.to, m.w_from, m.w_to);
        break;
    }
  }
}

// One Kernighan-Lin-style sweep: chain single-node relocations (interim losses
// allowed), each node at most once, and keep the best prefix. This is what
// breaks up an over-merged community, which no single positive-gain move can.
bool kl_sweep(Partition& p) {
  const int n = p.g.n();
  std::vector<char> frozen(n, 0);
  double r_now = p.total();
  double r_best = r_now;
  const std::vector<int> base_labels = p.comm;
  std::vector<int> best_labels;
  bool improved = false;

  std::vector<double> w_by_comm;
  for (int step = 0; step < n; ++step) {
    // best single relocation over unfrozen nodes, sign unrestricted
    double best_gain = -std::numeric_limits<double>::infinity();
    int best_node = -1, best_to = -1;
    double best_w_from = 0.0, best_w_to = 0.0;
    bool best_is_eject = false;
    w_by_comm.assign(p.members.size(), 0.0);
    for (int v = 0; v < n; ++v) {
      if (frozen[v]) continue;
      int cv = p.comm[v];
      std::vector<int> touched;
      for (const auto& [nb, w] : p.g.neighbors(v)) {
        int c = p.comm[nb];
        if (w_by_comm[c] == 0.0) touched.push_back(c);
        w_by_comm[c] += w;
      }
      double h_cv = p.h(cv);
      double h_cv_without =
          p.members[cv].size() == 1
              ? 0.0
              : h_of(p.internal[cv] - w_by_comm[cv], p.strength_sum[cv] - p.g.strength(v));
      double leave_gain = h_cv_without - h_cv;
      for (int c : touched) {
        if (c == cv) continue;
        double gain = leave_gain + h_of(p.internal[c] + w_by_comm[c],
                                        p.strength_sum[c] + p.g.strength(v)) -
                      p.h(c);
        if (gain > best_gain + 1e-15) {
          best_gain = gain;
          best_node = v;
          best_to = c;
          best_w_from = w_by_comm[cv];
          best_w_to = w_by_comm[c];
          best_is_eject = false;
        }
      }
      if (p.members[cv].size() > 1) {  // eject to a fresh singleton
        double gain = leave_gain;
        if (gain > best_gain + 1e-15) {
          best_gain = gain;
          best_node = v;
          best_to = -1;
          best_w_from = w_by_comm[cv];
          best_is_eject = true;
        }
      }
      for (int c : touched) w_by_comm[c] = 0.0;
    }
    if (best_node < 0) break;
    if (best_is_eject) {
      p.eject(best_node, best_w_from);
    } else {
      p.transfer(best_node, best_to, best_w_from, best_w_to);
    }
    frozen[best_node] = 1;
    r_now += best_gain;
    if (r_now > r_best + 1e-12) {
      r_best = r_now;
      best_labels = p.comm;
      improved = true;
    }
  }

  // rewind to the best prefix (or all the way back when nothing improved)
  const std::vector<int>& target = improved ? best_labels : base_labels;
  std::vector<int> remap(p.members.size() + static_cast<std::size_t>(n) + 1, -1);
  int next = 0;
  std::vector<int> labels(n);
  for (int u = 0; u < n; ++u) {
    if (remap[target[u]] < 0) remap[target[u]] = next++;
    labels[u] = remap[target[u]];
  }
  p.rebuild_from_labels(labels);
  return improved;
}

void polish_phase(Partition& p) {
  for (int round = 0; round < 30; ++round) {
    greedy_moves(p);
    if (!kl_sweep(p)) return;
  }
  greedy_moves(p);
}

}  // namespace

double durability(const std::vector<int>& community, const ContactGraph& graph) {
  if (community.empty()) throw ConfigError("durability of an empty set is undefined");
  std::vector<char> in(graph.n(), 0);
  for (int u : community) in[u] = 1;
  double internal = 0.0, strength_sum = 0.0;
  for (int u : community) {
    strength_sum += graph.strength(u);
    for (const auto& [nb, w] : graph.neighbors(u))
      if (in[nb] && nb > u) internal += w;
  }
  return h_of(internal, strength_sum);
}

CommunityStructure dcd(const ContactGraph& graph, std::uint64_t seed, const DcdOptions& options,
                       DcdDiagnostics* diag) {
  CommunityStructure best;
  DcdDiagnostics best_diag;
  const int restarts = std::max(1, options.restarts);
  for (int r = 0; r < restarts; ++r) {
    Partition p(graph);
    RandomStream rng(RandomStream::mix(RandomStream::mix(seed, 0xdcdULL),
                                       static_cast<std::uint64_t>(r)));
    DcdDiagnostics d;
    development_phase(p, rng);
    d.r_development = p.total();
    augmentation_phase(p);
    d.r_augmentation = p.total();
    refinement_phase(p);
    d.r_refinement = p.total();
    if (options.polish) polish_phase(p);
    d.r_final = p.total();
    if (r == 0 || d.r_final > best_diag.r_final + 1e-12) {
      best = finalize(p);
      best_diag = d;
    }
  }
  if (diag) *diag = best_diag;
  return best;
}

CommunityStructure dcd_oracle(const ContactGraph& graph) {
  const int n = graph.n();
  if (n > 10) throw ConfigError("dcd_oracle enumerates partitions only for n <= 10");
  if (n == 0) return CommunityStructure{};

  // enumerate restricted growth strings a[0..n-1]
  std::vector<int> a(n, 0), best_a;
  double best_r = -1.0;
  int best_k = n + 1;
  std::vector<double> internal, strength_sum;
  while (true) {
    int k = *std::max_element(a.begin(), a.end()) + 1;
    internal.assign(k, 0.0);
    strength_sum.assign(k, 0.0);
    for (int u = 0; u < n; ++u) strength_sum[a[u]] += graph.strength(u);
    for (const ContactEdge& e : graph.edges())
      if (a[e.u] == a[e.v]) internal[a[e.u]] += e.weight;
    double r = 0.0;
    for (int c = 0; c < k; ++c) r += h_of(internal[c], strength_sum[c]);

    // lexicographic enumeration makes the first hit the lexicographically
    // smallest assignment, so ties only need the fewer-communities rule
    if (r > best_r + 1e-12 || (std::abs(r - best_r) <= 1e-12 && k < best_k)) {
      best_r = r;
      best_k = k;
      best_a = a;
    }

    // next restricted growth string
    int i = n - 1;
    for (; i > 0; --i) {
      int prefix_max = *std::max_element(a.begin(), a.begin() + i);
      if (a[i] <= prefix_max) break;
    }
    if (i == 0) break;
    ++a[i];
    std::fill(a.begin() + i + 1, a.end(), 0);
  }

  Partition p(graph);
  p.members.resize(best_k);
  p.internal.assign(best_k, 0.0);
  p.strength_sum.assign(best_k, 0.0);
  for (int u = 0; u < n; ++u) {
    p.comm[u] = best_a[u];
    p.members[best_a[u]].push_back(u);
    p.strength_sum[best_a[u]] += graph.strength(u);
  }
  for (const ContactEdge& e : graph.edges())
    if (best_a[e.u] == best_a[e.v]) p.internal[best_a[e.u]] += e.weight;
  return finalize(p);
}

std::string OptimalityViolation::describe() const {
  char buf[160];
  switch (kind) {
    case Kind::ImprovingAdd:
      std::snprintf(buf, sizeof buf, "adding node %d to community %d improves R by %.3g", node,
                    community, gain);
      break;
    case Kind::ImprovingRemove:
      std::snprintf(buf, sizeof buf, "removing node %d from community %d improves R by %.3g",
                    node, community, gain);
      break;
    case Kind::ImprovingMerge:
      std::snprintf(buf, sizeof buf, "merging communities %d and %d improves R by %.3g",
                    community, other_community, gain);
      break;
  }
  return buf;
}

std::vector<OptimalityViolation> certify_local_optimality(const CommunityStructure& structure,
                                                          const ContactGraph& graph) {
  constexpr double tol = 1e-9;
  Partition p = to_partition(structure, graph);
  std::vector<OptimalityViolation> out;

  for (std::size_t c = 0; c < p.members.size(); ++c) {
    if (p.members[c].size() < 2) continue;
    double h_now = p.h(static_cast<int>(c));
    for (int u : p.members[c]) {
      double wuc = p.weight_to(u, static_cast<int>(c));
      double gain = h_of(p.internal[c] - wuc, p.strength_sum[c] - graph.strength(u)) - h_now;
      if (gain > tol)
        out.push_back({OptimalityViolation::Kind::ImprovingRemove, static_cast<int>(c), -1, u,
                       gain});
    }
  }
  for (const auto& [pair, x] : p.cross_weights()) {
    auto [a, b] = pair;
    double gain = h_of(p.internal[a] + p.internal[b] + x,
                       p.strength_sum[a] + p.strength_sum[b]) -
                  p.h(a) - p.h(b);
    if (gain > tol)
      out.push_back({OptimalityViolation::Kind::ImprovingMerge, a, b, -1, gain});
  }
  std::vector<double> w_by_comm(p.members.size(), 0.0);
  for (int v = 0; v < graph.n(); ++v) {
    int cv = p.comm[v];
    std::vector<int> touched;
    for (const auto& [nb, w] : graph.neighbors(v)) {
      int c = p.comm[nb];
      if (w_by_comm[c] == 0.0) touched.push_back(c);
      w_by_comm[c] += w;
    }
    double h_cv = p.h(cv);
    double h_cv_without =
        p.members[cv].size() == 1
            ? 0.0
            : h_of(p.internal[cv] - w_by_comm[cv], p.strength_sum[cv] - graph.strength(v));
    for (int c : touched) {
      if (c == cv) continue;
      double gain = (h_of(p.internal[c] + w_by_comm[c], p.strength_sum[c] + graph.strength(v)) -
                     p.h(c)) +
                    (h_cv_without - h_cv);
      if (gain > tol)
        out.push_back({OptimalityViolation::Kind::ImprovingAdd, c, cv, v, gain});
    }
    for (int c : touched) w_by_comm[c] = 0.0;
  }
  return out;
}

void dump_communities_csv(const CommunityStructure& structure, std::ostream& out) {
  out << "device_id,community_id\n";
  for (std::size_t u = 0; u < structure.community_of.size(); ++u)
    out << u << ',' << structure.community_of[u] << '\n';
  char buf[64];
  std::snprintf(buf, sizeof buf, "# k=%d,R=%.10g\n", structure.k(), structure.total_durability);
  out << buf;
}

}  // namespace d2d
