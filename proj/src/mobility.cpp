#include "d2d/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "d2d/errors.hpp"
#include "d2d/rng.hpp"

namespace d2d {

MobilityTrace::MobilityTrace(double tick_s, Arena arena, std::vector<Eigen::Matrix2Xd> positions)
    : tick_s_(tick_s), arena_(arena), positions_(std::move(positions)) {}

long MobilityTrace::tick_at(double time_s) const {
  long tick = static_cast<long>(std::floor(time_s / tick_s_));
  return std::clamp(tick, 0L, n_ticks() - 1);
}

double distance(const MobilityTrace& trace, int u, int v, long tick) {
  return (trace.position(u, tick) - trace.position(v, tick)).norm();
}

namespace {

Eigen::Vector2d clamp_to_arena(Eigen::Vector2d p, const Arena& arena) {
  // reflect overshoots back inside so border waypoints never pile up on the
  // exact corner (co-located devices are rejected downstream)
  auto reflect = [](double x, double hi) {
    if (x < 0.0) x = -x;
    if (x > hi) x = 2.0 * hi - x;
    return std::clamp(x, 0.0, hi);
  };
  p.x() = reflect(p.x(), arena.width_m);
  p.y() = reflect(p.y(), arena.height_m);
  return p;
}

// Piecewise walk of one device: alternating pause and straight travel segments,
// sampled on the tick grid.
void walk_device(RandomStream& rng, const std::vector<Eigen::Vector2d>& waypoints,
                 const GeneratorParams& gp, double tick_s, Eigen::Matrix2Xd& out) {
  const long n_ticks = out.cols();
  std::vector<char> visited(waypoints.size(), 0);
  std::size_t current = 0;
  visited[current] = 1;
  Eigen::Vector2d pos = waypoints[current];

  double t = 0.0;       // continuous time cursor
  long next_tick = 0;   // first tick not yet written
  bool pausing = true;
  double segment_end = rng.pareto_truncated(gp.pause_alpha, gp.pause_min_s, gp.pause_max_s);
  Eigen::Vector2d seg_from = pos, seg_to = pos;
  double seg_start = 0.0;

  while (next_tick < n_ticks) {
    double tick_time = next_tick * tick_s;
    if (tick_time < segment_end || segment_end <= seg_start) {
      if (pausing) {
        out.col(next_tick) = seg_to;
      } else {
        double f = (tick_time - seg_start) / (segment_end - seg_start);
        out.col(next_tick) = seg_from + f * (seg_to - seg_from);
      }
      ++next_tick;
      continue;
    }
    // advance to the next segment
    t = segment_end;
    if (pausing) {
      // choose nearest unvisited waypoint; reset the visited set when exhausted
      if (std::all_of(visited.begin(), visited.end(), [](char c) { return c != 0; })) {
        std::fill(visited.begin(), visited.end(), 0);
        visited[current] = 1;
      }
      std::size_t best = current;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < waypoints.size(); ++i) {
        if (visited[i]) continue;
        double d = (waypoints[i] - seg_to).norm();
        if (d < best_d) {
          best_d = d;
          best = i;
        }
      }
      if (best == current || !std::isfinite(best_d)) {
        // single-waypoint device: keep pausing in place
        seg_start = t;
        segment_end = t + rng.pareto_truncated(gp.pause_alpha, gp.pause_min_s, gp.pause_max_s);
        continue;
      }
      visited[best] = 1;
      seg_from = seg_to;
      seg_to = waypoints[best];
      current = best;
      seg_start = t;
      segment_end = t + (seg_to - seg_from).norm() / gp.speed_mps;
      pausing = false;
    } else {
      seg_from = seg_to;
      seg_start = t;
      segment_end = t + rng.pareto_truncated(gp.pause_alpha, gp.pause_min_s, gp.pause_max_s);
      pausing = true;
    }
  }
}

}  // namespace

namespace {

void check_generator(int n_devices, double horizon_s, double tick_s, const GeneratorParams& gp) {
  if (n_devices < 2) throw ConfigError("need at least 2 devices");
  if (tick_s <= 0.0 || horizon_s < tick_s) throw ConfigError("bad tick/horizon");
  if (gp.clusters < 1 || gp.clusters_per_device < 1 || gp.waypoints_per_device < 1)
    throw ConfigError("generator cluster/waypoint counts must be >= 1");
  if (gp.speed_mps <= 0.0) throw ConfigError("speed must be > 0");
  if (gp.pause_min_s <= 0.0 || gp.pause_max_s < gp.pause_min_s)
    throw ConfigError("bad pause time range");
}

std::vector<Eigen::Vector2d> cluster_centers(std::uint64_t seed, Arena arena,
                                             const GeneratorParams& gp) {
  RandomStream rng(RandomStream::mix(seed, 0xc1a57e25ULL));
  std::vector<Eigen::Vector2d> centers(gp.clusters);
  for (auto& c : centers)
    c = {rng.uniform(0.0, arena.width_m), rng.uniform(0.0, arena.height_m)};
  return centers;
}

void device_track(std::uint64_t seed, int dev, const std::vector<Eigen::Vector2d>& centers,
                  Arena arena, const GeneratorParams& gp, double tick_s,
                  Eigen::Matrix2Xd& out) {
  RandomStream rng(RandomStream::mix(seed, static_cast<std::uint64_t>(dev)));
  int k = std::min(gp.clusters_per_device, gp.clusters);
  std::vector<int> mine;
  while (static_cast<int>(mine.size()) < k) {
    int c = rng.uniform_int(0, gp.clusters - 1);
    if (std::find(mine.begin(), mine.end(), c) == mine.end()) mine.push_back(c);
  }
  std::vector<Eigen::Vector2d> waypoints(gp.waypoints_per_device);
  for (auto& w : waypoints) {
    const Eigen::Vector2d& c = centers[static_cast<std::size_t>(
        mine[static_cast<std::size_t>(rng.uniform_int(0, k - 1))])];
    w = clamp_to_arena({c.x() + rng.normal(0.0, gp.cluster_sigma_m),
                        c.y() + rng.normal(0.0, gp.cluster_sigma_m)},
                       arena);
  }
  walk_device(rng, waypoints, gp, tick_s, out);
}

}  // namespace

MobilityTrace generate_trace(std::uint64_t seed, int n_devices, Arena arena, double horizon_s,
                             double tick_s, const GeneratorParams& gp) {
  check_generator(n_devices, horizon_s, tick_s, gp);
  const long n_ticks = static_cast<long>(std::floor(horizon_s / tick_s)) + 1;
  auto centers = cluster_centers(seed, arena, gp);
  std::vector<Eigen::Matrix2Xd> positions(n_devices, Eigen::Matrix2Xd(2, n_ticks));
  for (int dev = 0; dev < n_devices; ++dev)
    device_track(seed, dev, centers, arena, gp, tick_s, positions[dev]);
  return MobilityTrace(tick_s, arena, std::move(positions));
}

void generate_trace_csv(std::uint64_t seed, int n_devices, Arena arena, double horizon_s,
                        double tick_s, const GeneratorParams& gp, std::ostream& out) {
  check_generator(n_devices, horizon_s, tick_s, gp);
  const long n_ticks = static_cast<long>(std::floor(horizon_s / tick_s)) + 1;
  auto centers = cluster_centers(seed, arena, gp);
  out << "time_s,node_id,x_m,y_m\n";
  char buf[128];
  Eigen::Matrix2Xd track(2, n_ticks);
  for (int dev = 0; dev < n_devices; ++dev) {
    device_track(seed, dev, centers, arena, gp, tick_s, track);
    for (long tick = 0; tick < n_ticks; ++tick) {
      std::snprintf(buf, sizeof buf, "%.10g,%d,%.10g,%.10g\n", tick * tick_s, dev, track(0, tick),
                    track(1, tick));
      out << buf;
    }
  }
}

void save_trace_csv(const MobilityTrace& trace, std::ostream& out) {
  out << "time_s,node_id,x_m,y_m\n";
  char buf[128];
  for (int dev = 0; dev < trace.n_devices(); ++dev) {
    for (long tick = 0; tick < trace.n_ticks(); ++tick) {
      Eigen::Vector2d p = trace.position(dev, tick);
      std::snprintf(buf, sizeof buf, "%.10g,%d,%.10g,%.10g\n", trace.time_at(tick), dev, p.x(),
                    p.y());
      out << buf;
    }
  }
}

namespace {

struct Row {
  double time, x, y;
};

double parse_double(const std::string& s, long row) {
  std::size_t pos = 0;
  double v;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw ParseError("not a number: '" + s + "'", row);
  }
  if (pos != s.size()) throw ParseError("trailing garbage in field '" + s + "'", row);
  return v;
}

}  // namespace

MobilityTrace load_trace(const std::string& path, std::optional<Arena> arena) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open trace file: " + path);

  std::string line;
  long row = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line != "time_s,node_id,x_m,y_m")
      throw ParseError("expected header 'time_s,node_id,x_m,y_m'", row);
    saw_header = true;
    break;
  }
  if (!saw_header) throw ParseError("empty trace file", std::max(row, 1L));

  std::map<int, std::vector<Row>> per_node;
  double max_x = 0.0, max_y = 0.0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string f0, f1, f2, f3;
    if (!std::getline(ss, f0, ',') || !std::getline(ss, f1, ',') || !std::getline(ss, f2, ',') ||
        !std::getline(ss, f3))
      throw ParseError("expected 4 comma-separated fields", row);
    double t = parse_double(f0, row);
    double node_d = parse_double(f1, row);
    int node = static_cast<int>(node_d);
    if (node < 0 || node != node_d) throw ParseError("node_id must be a non-negative integer", row);
    double x = parse_double(f2, row);
    double y = parse_double(f3, row);
    if (x < 0.0 || y < 0.0 || (arena && (x > arena->width_m || y > arena->height_m)))
      throw ParseError("coordinate out of arena bounds", row);
    auto& rows = per_node[node];
    if (!rows.empty() && t <= rows.back().time) {
      if (t == rows.back().time) throw ParseError("duplicate (time, node) sample", row);
      throw ParseError("time not strictly increasing for node " + std::to_string(node), row);
    }
    rows.push_back({t, x, y});
    max_x = std::max(max_x, x);
    max_y = std::max(max_y, y);
  }
  if (per_node.empty()) throw ParseError("trace has no data rows", row);

  int n = static_cast<int>(per_node.size());
  if (per_node.begin()->first != 0 || per_node.rbegin()->first != n - 1)
    throw ParseError("node ids must be contiguous starting at 0", row);

  const std::vector<Row>& ref = per_node.at(0);
  long n_ticks = static_cast<long>(ref.size());
  double t0 = ref[0].time;
  double tick_s = n_ticks > 1 ? ref[1].time - ref[0].time : 1.0;
  for (long k = 0; k < n_ticks; ++k)
    if (std::abs(ref[k].time - (t0 + k * tick_s)) > 1e-9 * std::max(1.0, std::abs(ref[k].time)))
      throw ParseError("node 0 samples are not on a uniform time grid", row);

  Arena a = arena.value_or(Arena{std::max(max_x, 1.0), std::max(max_y, 1.0)});
  std::vector<Eigen::Matrix2Xd> positions(n, Eigen::Matrix2Xd(2, n_ticks));
  for (auto& [node, rows] : per_node) {
    if (static_cast<long>(rows.size()) != n_ticks)
      throw ParseError("node " + std::to_string(node) + " is missing ticks (has " +
                           std::to_string(rows.size()) + ", expected " + std::to_string(n_ticks) +
                           ")",
                       row);
    for (long k = 0; k < n_ticks; ++k) {
      if (std::abs(rows[k].time - ref[k].time) > 1e-9 * std::max(1.0, std::abs(ref[k].time)))
        throw ParseError("node " + std::to_string(node) + " tick grid differs from node 0", row);
      positions[node].col(k) = Eigen::Vector2d(rows[k].x, rows[k].y);
    }
  }
  return MobilityTrace(tick_s, a, std::move(positions));
}

EncounterHistory extract_encounters(const MobilityTrace& trace, double d_max_m,
                                    double window_start_s, double window_end_s) {
  if (window_start_s < 0.0 || window_end_s > trace.horizon_s() + trace.tick_duration() ||
      window_end_s <= window_start_s)
    throw ConfigError("encounter window must lie within the trace horizon");

  const double tick_s = trace.tick_duration();
  long first = static_cast<long>(std::ceil(window_start_s / tick_s - 1e-9));
  long last = std::min<long>(static_cast<long>(std::floor((window_end_s - 1e-9) / tick_s)),
                             trace.n_ticks() - 1);

  EncounterHistory hist;
  hist.window_start_s = window_start_s;
  hist.window_end_s = window_end_s;
  hist.tick_s = tick_s;

  const double d2 = d_max_m * d_max_m;
  const int n = trace.n_devices();
  for (int u = 0; u < n; ++u) {
    const Eigen::Matrix2Xd& pu = trace.device_track(u);
    for (int v = u + 1; v < n; ++v) {
      const Eigen::Matrix2Xd& pv = trace.device_track(v);
      std::vector<Encounter> runs;
      long run_start = -1;
      for (long k = first; k <= last; ++k) {
        bool in_range = (pu.col(k) - pv.col(k)).squaredNorm() <= d2;
        if (in_range && run_start < 0) run_start = k;
        if (!in_range && run_start >= 0) {
          runs.push_back({u, v, run_start * tick_s, (k - run_start) * tick_s});
          run_start = -1;
        }
      }
      if (run_start >= 0)
        runs.push_back({u, v, run_start * tick_s, (last + 1 - run_start) * tick_s});
      if (!runs.empty()) hist.by_pair.emplace(std::make_pair(u, v), std::move(runs));
    }
  }
  return hist;
}

EncounterHistory filter_time_of_day(const EncounterHistory& history, double time_of_day_s,
                                    double half_width_s) {
  constexpr double kDay = 86400.0;
  double center = std::fmod(time_of_day_s, kDay);
  EncounterHistory out;
  out.window_start_s = history.window_start_s;
  out.window_end_s = history.window_end_s;
  out.tick_s = history.tick_s;
  for (const auto& [pair, encs] : history.by_pair) {
    std::vector<Encounter> kept;
    for (const Encounter& e : encs) {
      double tod = std::fmod(e.start_s, kDay);
      double diff = std::abs(tod - center);
      diff = std::min(diff, kDay - diff);
      if (diff <= half_width_s) kept.push_back(e);
    }
    if (!kept.empty()) out.by_pair.emplace(pair, std::move(kept));
  }
  return out;
}

}  // namespace d2d
