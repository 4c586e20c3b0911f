#pragma once

#include <optional>
#include <vector>

#include "d2d/lp.hpp"
#include "d2d/relaygraph.hpp"

namespace d2d {

struct RelayPath {
  std::vector<int> nodes;  // s ... r
  double total_weight = 0.0;
  double total_delay_s = 0.0;
  double total_bs_cost = 0.0;  // sum of c_ij, what the BS actually pays

  int hops() const { return static_cast<int>(nodes.size()) - 1; }
};

// RPF minimizes w_ij = W_ij + c_ij; the MC baseline reuses the same machinery
// with the plain BS cost as objective.
enum class PathObjective { CombinedWeight, CostOnly };

// Path LP over a relay graph: one [0,1] variable per D2D edge, flow balance at
// every vertex, one delay row, plus any accumulated cut rows.
struct PathLP {
  const RelayGraph* graph = nullptr;
  PathObjective objective = PathObjective::CombinedWeight;
  std::vector<int> active_edges;     // edge ids on some s->r route
  std::vector<int> active_vertices;  // vertices touched by those edges
  struct Cut {
    std::vector<int> edge_ids;  // positions in active_edges
    double rhs;
  };
  std::vector<Cut> cuts;
};

PathLP build_path_lp(const RelayGraph& graph, PathObjective objective);

struct PathLpSolution {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;  // per active edge
  double objective = 0.0;
};

PathLpSolution solve_path_lp(const PathLP& lp);

struct DecomposedPath {
  std::vector<int> nodes;
  std::vector<int> edge_positions;  // positions in lp.active_edges
  double flow = 0.0;
  double delay_s = 0.0;
  double objective_weight = 0.0;
  bool short_delay = false;
};

struct FlowDecomposition {
  std::vector<DecomposedPath> paths;
  double residual = 0.0;
};

// Cancels zero-net cycles, peels s->r paths off the fractional solution, and
// prefers an exact two-path representation when the greedy peel finds more.
FlowDecomposition decompose_flow(const Eigen::VectorXd& x, const PathLP& lp);

// Appends either the fractional cut sum x <= X_p - epsilon or the combinatorial
// cut sum x <= |p| - 1 that removes exactly the integral path p.
void add_cut(PathLP& lp, const DecomposedPath& path, double x_sum, bool combinatorial,
             double epsilon);

struct RpfOptions {
  enum class CutMode { Combinatorial, Epsilon } cut_mode = CutMode::Combinatorial;
  double epsilon = 1e-6;
  int iteration_cap_factor = 10;  // cap = factor * |E|
  // Stop once the LP bound meets the incumbent: no uncut short path can be
  // cheaper than the current best, so further cuts cannot change the answer.
  bool bound_stop = true;
};

// Per-iteration record for debugging and the structural audit of LP optima.
struct RpfIteration {
  int iteration = 0;
  double lp_objective = 0.0;
  int n_paths = 0;
  bool integral = false;
  std::vector<std::vector<int>> path_nodes;
  std::vector<int> cut_path;  // empty when no cut was added
  bool cut_combinatorial = false;
};

struct RpfTrace {
  std::vector<RpfIteration> iterations;
};

enum class RpfStatus { Found, NoFeasiblePath, IterationCapped };

struct RpfResult {
  RpfStatus status = RpfStatus::NoFeasiblePath;
  std::optional<RelayPath> path;  // best-so-far when capped
};

RpfResult rpf(const RelayGraph& graph, const RpfOptions& options = {},
              PathObjective objective = PathObjective::CombinedWeight,
              RpfTrace* trace = nullptr);

// Exhaustive simple-path search, |V| <= 14; ground truth for the solver.
RpfResult rpf_oracle(const RelayGraph& graph,
                     PathObjective objective = PathObjective::CombinedWeight);

enum class Delivery { UseD2D, UseB2D };

// D2D only when a feasible path exists and its BS cost beats the direct link;
// ties go to B2D.
Delivery decide_delivery(const RpfResult& result, double b2d_cost_of_target);

RelayPath make_relay_path(const RelayGraph& graph, const std::vector<int>& nodes);

}  // namespace d2d
