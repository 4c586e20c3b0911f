#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace d2d {

struct Arena {
  double width_m = 1000.0;
  double height_m = 1000.0;
};

// Time-indexed 2-D positions for all devices on a uniform tick grid.
class MobilityTrace {
 public:
  MobilityTrace() = default;
  MobilityTrace(double tick_s, Arena arena, std::vector<Eigen::Matrix2Xd> positions);

  int n_devices() const { return static_cast<int>(positions_.size()); }
  long n_ticks() const { return positions_.empty() ? 0 : positions_[0].cols(); }
  double tick_duration() const { return tick_s_; }
  double horizon_s() const { return (n_ticks() - 1) * tick_s_; }
  const Arena& arena() const { return arena_; }

  Eigen::Vector2d position(int device, long tick) const { return positions_[device].col(tick); }
  const Eigen::Matrix2Xd& device_track(int device) const { return positions_[device]; }

  double time_at(long tick) const { return tick * tick_s_; }
  // Tick whose sample time covers `time_s`, clamped to the trace.
  long tick_at(double time_s) const;

 private:
  double tick_s_ = 1.0;
  Arena arena_;
  std::vector<Eigen::Matrix2Xd> positions_;  // [device](2 x n_ticks)
};

// Surrogate for self-similar waypoint mobility: global cluster centers, per-device
// waypoint sets Gaussian around a few chosen clusters, nearest-unvisited-first walks
// with truncated-Pareto pauses. Devices sharing clusters meet again and again.
struct GeneratorParams {
  int clusters = 18;
  int clusters_per_device = 3;
  int waypoints_per_device = 24;
  double cluster_sigma_m = 25.0;
  double speed_mps = 1.4;
  double pause_alpha = 1.5;
  double pause_min_s = 30.0;
  double pause_max_s = 600.0;
};

MobilityTrace generate_trace(std::uint64_t seed, int n_devices, Arena arena, double horizon_s,
                             double tick_s, const GeneratorParams& params);

// Streams exactly the rows save_trace_csv(generate_trace(...)) would write,
// one device at a time, so long traces never sit in memory whole.
void generate_trace_csv(std::uint64_t seed, int n_devices, Arena arena, double horizon_s,
                        double tick_s, const GeneratorParams& params, std::ostream& out);

// CSV: header `time_s,node_id,x_m,y_m`, LF endings, times strictly increasing per node.
MobilityTrace load_trace(const std::string& path, std::optional<Arena> arena = std::nullopt);
void save_trace_csv(const MobilityTrace& trace, std::ostream& out);

double distance(const MobilityTrace& trace, int u, int v, long tick);

// One maximal in-range run of a device pair.
struct Encounter {
  int u = 0, v = 0;
  double start_s = 0.0;
  double duration_s = 0.0;
};

struct EncounterHistory {
  double window_start_s = 0.0;
  double window_end_s = 0.0;
  double tick_s = 1.0;
  // keyed (u, v) with u < v; encounters time-ordered and non-overlapping
  std::map<std::pair<int, int>, std::vector<Encounter>> by_pair;

  double window_length_s() const { return window_end_s - window_start_s; }
};

// Every maximal contiguous run of ticks with pair distance <= d_max inside
// [window_start, window_end) becomes one Encounter; runs are truncated at the edges.
EncounterHistory extract_encounters(const MobilityTrace& trace, double d_max_m,
                                    double window_start_s, double window_end_s);

// Keep only encounters starting within +-half_width_s (circular, mod 24 h) of the
// given time of day. Meaningful only for histories spanning a day or more.
EncounterHistory filter_time_of_day(const EncounterHistory& history, double time_of_day_s,
                                    double half_width_s);

}  // namespace d2d
