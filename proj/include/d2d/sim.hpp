#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "d2d/config.hpp"
#include "d2d/rpf.hpp"

namespace d2d {

struct RequestEvent {
  double time_s = 0.0;
  int requester = -1;
  int source = -1;  // -1: no device holds the content
  double content_bits = 0.0;
  double t_max_s = 0.0;
  std::uint64_t fading_seed = 0;
};

enum class FallbackReason { None, NoSource, NoFeasiblePath, CostExceedsB2D, MobilityTeardown };

std::string fallback_reason_name(FallbackReason r);

struct SessionOutcome {
  bool delivered_d2d = false;
  FallbackReason reason = FallbackReason::None;
  double elapsed_s = 0.0;    // D2D time spent (up to the teardown for failures)
  double bs_cost_paid = 0.0; // path cost sum for D2D, the B2D cost otherwise
  int hops = 0;
  double pre_tx_path_cost = -1.0;  // chosen path's BS cost before transmission, -1 if none
  double b2d_busy_s = 0.0;         // direct-link occupancy when falling back
};

// Path selection for one assembled graph. CD walks geometrically; MC reuses
// the cutting-plane solver with the plain BS cost objective.
RpfResult select_path(const RelayGraph& graph, const MobilityTrace& trace, Method method,
                      const RpfOptions& options);
RpfResult baseline_mc(const RelayGraph& graph, const RpfOptions& options = {});
RpfResult baseline_cd(const RelayGraph& graph, const MobilityTrace& trace);

// Hop-by-hop store-and-forward replay over the trace: the active hop's SINR is
// re-evaluated every tick with its frozen fading; dropping below the threshold
// tears the session down to a B2D fallback.
SessionOutcome deliver_over_path(const RelayGraph& graph, const RpfResult& selection,
                                 const MobilityTrace& trace, const ChannelParams& channel);

// Full decision flow for one request.
SessionOutcome run_session(const RequestEvent& event, const MobilityTrace& trace,
                           const CommunityStructure& communities,
                           const ContactGraph& contact_graph, Method method,
                           const ChannelParams& channel, const RelayParams& relay,
                           const RpfOptions& solver);

struct SessionRecord {
  double content_kb = 0.0;
  double t_max_s = 0.0;
  Method method = Method::Rpf;
  std::uint64_t seed = 0;
  int session_id = 0;
  SessionOutcome outcome;
};

struct AggregateRow {
  double content_kb = 0.0;
  double t_max_s = 0.0;
  Method method = Method::Rpf;
  int sessions = 0;
  int delivered = 0;
  int no_source = 0, no_path = 0, cost_exceeds = 0, teardown = 0;
  double delivery_rate = 0.0;
  double delivery_rate_stderr = 0.0;  // across seeds
  double active_b2d_links = 0.0;      // mean concurrent B2D links over the replay window
  double total_bs_cost = 0.0;
  double total_bs_cost_norm = 0.0;    // divided by the report-wide divisor
  double mean_pre_tx_cost = 0.0;      // over sessions where a path was chosen
};

struct SimReport {
  std::string config_canonical;
  std::uint64_t config_hash = 0;
  std::vector<SessionRecord> sessions;
  std::vector<AggregateRow> aggregates;
  double bs_cost_divisor = 1.0;
};

SimReport run_experiment(const ExperimentConfig& config);

// `method,seed,session_id,outcome,reason,elapsed_s,hops,bs_cost` for one
// (content size, t_max) slice, preceded by a config-hash comment line.
void write_results_csv(const SimReport& report, double content_kb, double t_max_s,
                       std::ostream& out);
void write_figdata_csv(const SimReport& report, std::ostream& out);
void write_aggregate_json(const SimReport& report, std::ostream& out);

}  // namespace d2d
