#include "d2d/rpf.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>

#include "d2d/errors.hpp"

namespace d2d {

namespace {

constexpr double kFlowEps = 1e-9;

bool is_short(double delay_s, double t_max_s) { return delay_s <= t_max_s + 1e-9; }

double edge_objective(const RelayEdge& e, PathObjective objective) {
  return objective == PathObjective::CombinedWeight ? e.weight : e.cost;
}

double path_objective(const RelayPath& p, PathObjective objective) {
  return objective == PathObjective::CombinedWeight ? p.total_weight : p.total_bs_cost;
}

// (objective, hops, nodes) ordering shared by solver and oracle tie-breaking
bool path_better(const RelayPath& a, const RelayPath& b, PathObjective objective) {
  double oa = path_objective(a, objective), ob = path_objective(b, objective);
  if (oa < ob - 1e-12) return true;
  if (oa > ob + 1e-12) return false;
  if (a.hops() != b.hops()) return a.hops() < b.hops();
  return a.nodes < b.nodes;
}

}  // namespace

RelayPath make_relay_path(const RelayGraph& graph, const std::vector<int>& nodes) {
  RelayPath p;
  p.nodes = nodes;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    const RelayEdge* e = graph.find_edge(nodes[i], nodes[i + 1]);
    if (!e) throw ConfigError("path uses a non-existent relay edge");
    p.total_weight += e->weight;
    p.total_delay_s += e->delay_s;
    p.total_bs_cost += e->cost;
  }
  return p;
}

PathLP build_path_lp(const RelayGraph& graph, PathObjective objective) {
  if (graph.source == graph.target || graph.source < 0 || graph.target < 0)
    throw ConfigError("path LP needs distinct source and target");

  PathLP lp;
  lp.graph = &graph;
  lp.objective = objective;

  const int n = graph.n;
  std::vector<char> fwd(n, 0), bwd(n, 0);
  std::vector<int> stack{graph.source};
  fwd[graph.source] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int k : graph.out_edges[u])
      if (!fwd[graph.edges[k].to]) {
        fwd[graph.edges[k].to] = 1;
        stack.push_back(graph.edges[k].to);
      }
  }
  std::vector<std::vector<int>> in_edges(n);
  for (std::size_t k = 0; k < graph.edges.size(); ++k)
    in_edges[graph.edges[k].to].push_back(static_cast<int>(k));
  stack.push_back(graph.target);
  bwd[graph.target] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int k : in_edges[u])
      if (!bwd[graph.edges[k].from]) {
        bwd[graph.edges[k].from] = 1;
        stack.push_back(graph.edges[k].from);
      }
  }

  std::vector<char> vertex_used(n, 0);
  for (std::size_t k = 0; k < graph.edges.size(); ++k) {
    const RelayEdge& e = graph.edges[k];
    if (fwd[e.from] && fwd[e.to] && bwd[e.from] && bwd[e.to]) {
      lp.active_edges.push_back(static_cast<int>(k));
      vertex_used[e.from] = vertex_used[e.to] = 1;
    }
  }
  for (int v = 0; v < n; ++v)
    if (vertex_used[v]) lp.active_vertices.push_back(v);
  return lp;
}

PathLpSolution solve_path_lp(const PathLP& lp) {
  PathLpSolution out;
  if (lp.active_edges.empty()) return out;  // target unreachable

  const RelayGraph& g = *lp.graph;
  const long n_edges = static_cast<long>(lp.active_edges.size());
  const long n_vertices = static_cast<long>(lp.active_vertices.size());

  std::vector<int> vertex_row(g.n, -1);
  for (long i = 0; i < n_vertices; ++i) vertex_row[lp.active_vertices[i]] = static_cast<int>(i);

  LpProblem p;
  p.cost.resize(n_edges);
  p.upper = Eigen::VectorXd::Ones(n_edges);
  p.a_eq = Eigen::MatrixXd::Zero(n_vertices, n_edges);
  p.b_eq = Eigen::VectorXd::Zero(n_vertices);
  p.a_le = Eigen::MatrixXd::Zero(1 + static_cast<long>(lp.cuts.size()), n_edges);
  p.b_le = Eigen::VectorXd::Zero(1 + static_cast<long>(lp.cuts.size()));

  for (long c = 0; c < n_edges; ++c) {
    const RelayEdge& e = g.edges[lp.active_edges[c]];
    p.cost[c] = edge_objective(e, lp.objective);
    p.a_eq(vertex_row[e.from], c) += 1.0;
    p.a_eq(vertex_row[e.to], c) -= 1.0;
    p.a_le(0, c) = e.delay_s;
  }
  p.b_eq[vertex_row[g.source]] = 1.0;
  p.b_eq[vertex_row[g.target]] = -1.0;
  p.b_le[0] = g.t_max_s;
  for (std::size_t i = 0; i < lp.cuts.size(); ++i) {
    for (int pos : lp.cuts[i].edge_ids) p.a_le(1 + static_cast<long>(i), pos) = 1.0;
    p.b_le[1 + static_cast<long>(i)] = lp.cuts[i].rhs;
  }

  LpSolution sol = solve_lp(p);
  out.status = sol.status;
  if (sol.status == LpStatus::Optimal) {
    out.x = sol.x;
    out.objective = sol.objective;
  }
  return out;
}

namespace {

struct SupportGraph {
  const PathLP& lp;
  const RelayGraph& g;
  std::vector<double> flow;                 // per active-edge position
  std::vector<std::vector<int>> out_pos;    // node -> positions with positive flow

  SupportGraph(const Eigen::VectorXd& x, const PathLP& plp) : lp(plp), g(*plp.graph) {
    flow.assign(lp.active_edges.size(), 0.0);
    out_pos.assign(g.n, {});
    for (std::size_t pos = 0; pos < lp.active_edges.size(); ++pos)
      if (x[static_cast<long>(pos)] > kFlowEps) flow[pos] = x[static_cast<long>(pos)];
    rebuild();
  }

  void rebuild() {
    for (auto& v : out_pos) v.clear();
    for (std::size_t pos = 0; pos < flow.size(); ++pos)
      if (flow[pos] > kFlowEps) out_pos[g.edges[lp.active_edges[pos]].from].push_back(static_cast<int>(pos));
  }

  int edge_to(int pos) const { return g.edges[lp.active_edges[pos]].to; }
  int edge_from(int pos) const { return g.edges[lp.active_edges[pos]].from; }
};

// removes circulation flow; net s->r flow is untouched
void cancel_cycles(SupportGraph& sg) {
  while (true) {
    // DFS for a cycle in the positive subgraph
    std::vector<int> state(sg.g.n, 0);  // 0 white, 1 on stack, 2 done
    std::vector<int> parent_pos(sg.g.n, -1);
    std::vector<int> cycle;
    std::function<bool(int)> dfs = [&](int u) -> bool {
      state[u] = 1;
      for (int pos : sg.out_pos[u]) {
        if (sg.flow[pos] <= kFlowEps) continue;
        int v = sg.edge_to(pos);
        if (state[v] == 1) {
          // unwind u -> ... -> v
          cycle.push_back(pos);
          int w = u;
          while (w != v) {
            cycle.push_back(parent_pos[w]);
            w = sg.edge_from(parent_pos[w]);
          }
          return true;
        }
        if (state[v] == 0) {
          parent_pos[v] = pos;
          if (dfs(v)) return true;
        }
      }
      state[u] = 2;
      return false;
    };
    bool found = false;
    for (int u = 0; u < sg.g.n && !found; ++u)
      if (state[u] == 0 && !sg.out_pos[u].empty()) found = dfs(u);
    if (!found) return;
    double bottleneck = std::numeric_limits<double>::infinity();
    for (int pos : cycle) bottleneck = std::min(bottleneck, sg.flow[pos]);
    for (int pos : cycle) sg.flow[pos] -= bottleneck;
    sg.rebuild();
  }
}

DecomposedPath trace_path(const SupportGraph& sg, const std::vector<int>& positions) {
  const PathLP& lp = sg.lp;
  DecomposedPath p;
  p.edge_positions = positions;
  p.nodes.push_back(sg.edge_from(positions.front()));
  for (int pos : positions) {
    const RelayEdge& e = sg.g.edges[lp.active_edges[pos]];
    p.nodes.push_back(e.to);
    p.delay_s += e.delay_s;
    p.objective_weight += edge_objective(e, lp.objective);
  }
  p.short_delay = is_short(p.delay_s, sg.g.t_max_s);
  return p;
}

// exact two-path recombination of the support, if one exists
bool try_two_path_form(const SupportGraph& sg, const Eigen::VectorXd& x,
                       std::vector<DecomposedPath>& out) {
  const PathLP& lp = sg.lp;
  const RelayGraph& g = sg.g;

  // enumerate simple s->r paths inside the support (capped)
  std::vector<std::vector<int>> found;
  std::vector<int> pos_stack;
  std::vector<char> on_path(g.n, 0);
  bool overflow = false;
  std::function<void(int)> dfs = [&](int u) {
    if (overflow) return;
    if (u == g.target) {
      found.push_back(pos_stack);
      if (found.size() > 64) overflow = true;
      return;
    }
    on_path[u] = 1;
    for (int pos : sg.out_pos[u]) {
      int v = sg.edge_to(pos);
      if (on_path[v]) continue;
      pos_stack.push_back(pos);
      dfs(v);
      pos_stack.pop_back();
    }
    on_path[u] = 0;
  };
  dfs(g.source);
  if (overflow) return false;

  std::vector<char> in_a(lp.active_edges.size(), 0), in_b(lp.active_edges.size(), 0);
  for (std::size_t ia = 0; ia < found.size(); ++ia) {
    for (std::size_t ib = ia + 1; ib < found.size(); ++ib) {
      std::fill(in_a.begin(), in_a.end(), 0);
      std::fill(in_b.begin(), in_b.end(), 0);
      for (int pos : found[ia]) in_a[pos] = 1;
      for (int pos : found[ib]) in_b[pos] = 1;
      // pick f from an edge unique to path a
      double f = -1.0;
      for (int pos : found[ia])
        if (!in_b[pos]) {
          f = x[pos];
          break;
        }
      if (f < 0.0) continue;  // identical edge sets
      bool ok = f > kFlowEps && f < 1.0 - kFlowEps;
      for (std::size_t pos = 0; pos < lp.active_edges.size() && ok; ++pos) {
        double expect = in_a[pos] && in_b[pos] ? 1.0
                        : in_a[pos]            ? f
                        : in_b[pos]            ? 1.0 - f
                                               : 0.0;
        ok = std::abs(x[static_cast<long>(pos)] - expect) <= 1e-7;
      }
      if (!ok) continue;
      DecomposedPath pa = trace_path(sg, found[ia]);
      pa.flow = f;
      DecomposedPath pb = trace_path(sg, found[ib]);
      pb.flow = 1.0 - f;
      out = {pa, pb};
      return true;
    }
  }
  return false;
}

}  // namespace

FlowDecomposition decompose_flow(const Eigen::VectorXd& x, const PathLP& lp) {
  SupportGraph sg(x, lp);
  cancel_cycles(sg);
  const RelayGraph& g = *lp.graph;

  FlowDecomposition out;
  while (true) {
    // remaining s-outflow
    double outflow = 0.0;
    for (int pos : sg.out_pos[g.source]) outflow += sg.flow[pos];
    if (outflow <= 1e-7) break;

    // walk the largest-remaining-flow edges; the support is acyclic now
    std::vector<int> positions;
    int u = g.source;
    std::vector<char> seen(g.n, 0);
    while (u != g.target) {
      if (seen[u]) throw SolverError("flow decomposition revisited a vertex");
      seen[u] = 1;
      int best = -1;
      for (int pos : sg.out_pos[u]) {
        if (sg.flow[pos] <= kFlowEps) continue;
        if (best < 0 || sg.flow[pos] > sg.flow[best] + 1e-15 ||
            (std::abs(sg.flow[pos] - sg.flow[best]) <= 1e-15 && pos < best))
          best = pos;
      }
      if (best < 0) throw SolverError("flow decomposition stuck before reaching the target");
      positions.push_back(best);
      u = sg.edge_to(best);
    }
    double bottleneck = std::numeric_limits<double>::infinity();
    for (int pos : positions) bottleneck = std::min(bottleneck, sg.flow[pos]);
    for (int pos : positions) sg.flow[pos] -= bottleneck;
    sg.rebuild();

    DecomposedPath p = trace_path(sg, positions);
    p.flow = bottleneck;
    out.paths.push_back(std::move(p));
    if (out.paths.size() > lp.active_edges.size())
      throw SolverError("flow decomposition produced more paths than edges");
  }

  for (double f : sg.flow) out.residual = std::max(out.residual, f);
  if (out.residual > 1e-6) throw SolverError("flow decomposition left residual flow");

  if (out.paths.size() > 2) {
    SupportGraph fresh(x, lp);
    cancel_cycles(fresh);
    std::vector<DecomposedPath> two;
    if (try_two_path_form(fresh, x, two)) out.paths = std::move(two);
  }
  return out;
}

void add_cut(PathLP& lp, const DecomposedPath& path, double x_sum, bool combinatorial,
             double epsilon) {
  PathLP::Cut cut;
  cut.edge_ids = path.edge_positions;
  cut.rhs = combinatorial ? static_cast<double>(path.edge_positions.size()) - 1.0
                          : x_sum - epsilon;
  lp.cuts.push_back(std::move(cut));
}

RpfResult rpf(const RelayGraph& graph, const RpfOptions& options, PathObjective objective,
              RpfTrace* trace) {
  RpfResult result;
  PathLP lp = build_path_lp(graph, objective);
  if (lp.active_edges.empty()) return result;

  const long cap =
      std::max<long>(16, options.iteration_cap_factor * static_cast<long>(lp.active_edges.size()));

  std::set<std::vector<int>> in_q, cut_paths;
  std::vector<RelayPath> q;
  auto incumbent = [&]() -> const RelayPath* {
    const RelayPath* best = nullptr;
    for (const RelayPath& p : q)
      if (!best || path_better(p, *best, objective)) best = &p;
    return best;
  };

  for (long iter = 0;; ++iter) {
    if (iter >= cap) {
      result.status = RpfStatus::IterationCapped;
      if (const RelayPath* best = incumbent()) result.path = *best;
      return result;
    }
    PathLpSolution sol = solve_path_lp(lp);
    if (sol.status == LpStatus::Infeasible) break;

    FlowDecomposition dec = decompose_flow(sol.x, lp);
    if (dec.paths.empty()) break;  // no usable flow

    RpfIteration rec;
    rec.iteration = static_cast<int>(iter);
    rec.lp_objective = sol.objective;
    rec.n_paths = static_cast<int>(dec.paths.size());
    rec.integral = dec.paths.size() == 1 && std::abs(dec.paths[0].flow - 1.0) <= 1e-7;
    for (const DecomposedPath& p : dec.paths) rec.path_nodes.push_back(p.nodes);

    for (const DecomposedPath& p : dec.paths) {
      if (!p.short_delay) continue;
      if (in_q.insert(p.nodes).second) q.push_back(make_relay_path(graph, p.nodes));
    }

    const RelayPath* best = incumbent();
    if (options.bound_stop && best &&
        sol.objective >=
            path_objective(*best, objective) - 1e-9 * std::max(1.0, std::abs(sol.objective))) {
      if (trace) trace->iterations.push_back(std::move(rec));
      break;  // bound closed: nothing cheaper remains feasible
    }
    if (dec.paths.size() == 1) {
      if (trace) trace->iterations.push_back(std::move(rec));
      break;  // integral optimum
    }

    // cut the minimum-delay short path not yet excluded
    std::vector<const DecomposedPath*> shorts;
    for (const DecomposedPath& p : dec.paths)
      if (p.short_delay) shorts.push_back(&p);
    std::sort(shorts.begin(), shorts.end(), [](const DecomposedPath* a, const DecomposedPath* b) {
      if (a->delay_s != b->delay_s) return a->delay_s < b->delay_s;
      return a->nodes < b->nodes;
    });
    if (shorts.empty()) throw SolverError("feasible LP decomposed into long paths only");

    const DecomposedPath* to_cut = nullptr;
    for (const DecomposedPath* p : shorts)
      if (!cut_paths.count(p->nodes)) {
        to_cut = p;
        break;
      }
    bool combinatorial = options.cut_mode == RpfOptions::CutMode::Combinatorial;
    if (!to_cut) {
      // every short path here was already cut; push the fractional point out
      to_cut = shorts.front();
      combinatorial = false;
    } else {
      cut_paths.insert(to_cut->nodes);
    }
    double x_sum = 0.0;
    for (int pos : to_cut->edge_positions) x_sum += sol.x[pos];
    add_cut(lp, *to_cut, x_sum, combinatorial, options.epsilon);
    rec.cut_path = to_cut->nodes;
    rec.cut_combinatorial = combinatorial;
    if (trace) trace->iterations.push_back(std::move(rec));
  }

  if (const RelayPath* best = incumbent()) {
    result.status = RpfStatus::Found;
    result.path = *best;
  }
  return result;
}

RpfResult rpf_oracle(const RelayGraph& graph, PathObjective objective) {
  if (graph.n > 14) throw ConfigError("rpf_oracle enumerates paths only for |V| <= 14");
  RpfResult result;
  std::vector<int> nodes{graph.source};
  std::vector<char> visited(graph.n, 0);
  visited[graph.source] = 1;
  std::optional<RelayPath> best;

  std::function<void(int, double, double)> dfs = [&](int u, double delay, double objective_sum) {
    if (!is_short(delay, graph.t_max_s)) return;
    if (best) {
      double bound = path_objective(*best, objective);
      if (objective_sum > bound + 1e-12) return;
    }
    if (u == graph.target) {
      RelayPath p = make_relay_path(graph, nodes);
      if (!best || path_better(p, *best, objective)) best = p;
      return;
    }
    for (int k : graph.out_edges[u]) {
      const RelayEdge& e = graph.edges[k];
      if (visited[e.to]) continue;
      visited[e.to] = 1;
      nodes.push_back(e.to);
      dfs(e.to, delay + e.delay_s, objective_sum + edge_objective(e, objective));
      nodes.pop_back();
      visited[e.to] = 0;
    }
  };
  dfs(graph.source, 0.0, 0.0);

  if (best) {
    result.status = RpfStatus::Found;
    result.path = *best;
  }
  return result;
}

Delivery decide_delivery(const RpfResult& result, double b2d_cost_of_target) {
  if (!result.path) return Delivery::UseB2D;
  return result.path->total_bs_cost < b2d_cost_of_target ? Delivery::UseD2D : Delivery::UseB2D;
}

}  // namespace d2d
