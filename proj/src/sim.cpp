#include "d2d/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "d2d/errors.hpp"
#include "d2d/rng.hpp"

namespace d2d {

std::string fallback_reason_name(FallbackReason r) {
  switch (r) {
    case FallbackReason::None: return "none";
    case FallbackReason::NoSource: return "no_source";
    case FallbackReason::NoFeasiblePath: return "no_feasible_path";
    case FallbackReason::CostExceedsB2D: return "cost_exceeds_b2d";
    case FallbackReason::MobilityTeardown: return "mobility_teardown";
  }
  return "?";
}

RpfResult baseline_mc(const RelayGraph& graph, const RpfOptions& options) {
  return rpf(graph, options, PathObjective::CostOnly);
}

RpfResult baseline_cd(const RelayGraph& graph, const MobilityTrace& trace) {
  RpfResult result;
  const long tick = trace.tick_at(graph.request_time_s);
  std::vector<char> visited(graph.n, 0);
  std::vector<int> nodes{graph.source};
  visited[graph.source] = 1;
  double delay = 0.0;
  int current = graph.source;
  while (current != graph.target) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k : graph.out_edges[current]) {
      const RelayEdge& e = graph.edges[k];
      if (visited[e.to]) continue;
      double d = distance(trace, e.to, graph.target, tick);
      if (d < best_d || (d == best_d && (best < 0 || e.to < best))) {
        best_d = d;
        best = e.to;
      }
    }
    if (best < 0) return result;  // stuck: greedy walk does not backtrack
    delay += graph.find_edge(current, best)->delay_s;
    if (delay > graph.t_max_s + 1e-9) return result;
    visited[best] = 1;
    nodes.push_back(best);
    current = best;
  }
  result.status = RpfStatus::Found;
  result.path = make_relay_path(graph, nodes);
  return result;
}

RpfResult select_path(const RelayGraph& graph, const MobilityTrace& trace, Method method,
                      const RpfOptions& options) {
  switch (method) {
    case Method::Rpf: return rpf(graph, options, PathObjective::CombinedWeight);
    case Method::Mc: return baseline_mc(graph, options);
    case Method::Cd: return baseline_cd(graph, trace);
  }
  return {};
}

SessionOutcome deliver_over_path(const RelayGraph& graph, const RpfResult& selection,
                                 const MobilityTrace& trace, const ChannelParams& channel) {
  SessionOutcome out;
  const int r = graph.target;
  const double b2d = graph.b2d_cost_of[r];

  if (selection.path) out.pre_tx_path_cost = selection.path->total_bs_cost;
  if (decide_delivery(selection, b2d) == Delivery::UseB2D) {
    out.reason = selection.path ? FallbackReason::CostExceedsB2D : FallbackReason::NoFeasiblePath;
    out.bs_cost_paid = b2d;
    out.b2d_busy_s = graph.b2d_delay_s[r];
    return out;
  }

  const RelayPath& path = *selection.path;
  const double noise = channel.noise_power_w();
  const double threshold = channel.sinr_threshold_linear();
  double t_now = graph.request_time_s;
  for (std::size_t h = 0; h + 1 < path.nodes.size(); ++h) {
    const RelayEdge* e = graph.find_edge(path.nodes[h], path.nodes[h + 1]);
    double hop_end = t_now + e->delay_s;
    // monitor at every tick boundary inside the hop
    for (long k = static_cast<long>(std::floor(t_now / trace.tick_duration())) + 1;; ++k) {
      double tau = k * trace.tick_duration();
      if (tau > hop_end) break;
      long tick = std::min<long>(k, trace.n_ticks() - 1);
      double d_now = distance(trace, e->from, e->to, tick);
      double p_now = received_power(channel.device_tx_power_w, d_now, e->fading, channel);
      if (p_now / (e->interference_w + noise) < threshold) {
        out.reason = FallbackReason::MobilityTeardown;
        out.elapsed_s = tau - graph.request_time_s;
        out.bs_cost_paid = b2d;
        out.b2d_busy_s = graph.b2d_delay_s[r];
        out.hops = static_cast<int>(h);
        return out;
      }
    }
    t_now = hop_end;
  }
  out.delivered_d2d = true;
  out.elapsed_s = t_now - graph.request_time_s;
  out.bs_cost_paid = path.total_bs_cost;
  out.hops = path.hops();
  return out;
}

SessionOutcome run_session(const RequestEvent& event, const MobilityTrace& trace,
                           const CommunityStructure& communities,
                           const ContactGraph& contact_graph, Method method,
                           const ChannelParams& channel, const RelayParams& relay,
                           const RpfOptions& solver) {
  if (event.source < 0) {
    // nobody holds the content: straight to the direct link
    RelayGraph g = assemble(trace, event.time_s, 0, event.requester, event.content_bits,
                            event.t_max_s, communities, contact_graph, channel, relay,
                            event.fading_seed);
    SessionOutcome out;
    out.reason = FallbackReason::NoSource;
    out.bs_cost_paid = g.b2d_cost_of[event.requester];
    out.b2d_busy_s = g.b2d_delay_s[event.requester];
    return out;
  }
  RelayGraph g = assemble(trace, event.time_s, event.source, event.requester, event.content_bits,
                          event.t_max_s, communities, contact_graph, channel, relay,
                          event.fading_seed);
  RpfResult selection = select_path(g, trace, method, solver);
  return deliver_over_path(g, selection, trace, channel);
}

namespace {

struct SessionTask {
  std::uint64_t seed = 0;
  int seed_index = 0;
  int session_id = 0;
  RequestEvent event;
  double content_kb = 0.0;
  double t_max_s = 0.0;
};

void run_parallel(int jobs, long n_tasks, const std::function<void(long)>& work) {
  if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
  jobs = std::max(1, std::min<long>(jobs, n_tasks) > 0 ? std::min<int>(jobs, static_cast<int>(n_tasks)) : 1);
  if (jobs == 1) {
    for (long i = 0; i < n_tasks; ++i) work(i);
    return;
  }
  std::atomic<long> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&]() {
      for (long i = next.fetch_add(1); i < n_tasks; i = next.fetch_add(1)) {
        try {
          work(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

SimReport run_experiment(const ExperimentConfig& config) {
  config.validate();
  SimReport report;
  report.config_canonical = config.canonical();
  report.config_hash = config.hash();

  const double replay_window_s = config.horizon_s() - config.mine_end_s();

  struct SeedData {
    MobilityTrace trace;
    EncounterHistory history;
    std::vector<RequestEvent> events;  // times and pairs; content/t_max filled per slice
  };

  // per-seed traces, histories and request pairs
  std::vector<SeedData> seeds(config.seeds);
  for (int si = 0; si < config.seeds; ++si) {
    std::uint64_t seed = config.seed + static_cast<std::uint64_t>(si);
    SeedData& sd = seeds[si];
    if (!config.trace_file.empty()) {
      sd.trace = load_trace(config.trace_file, Arena{config.arena_w_m, config.arena_h_m});
    } else {
      sd.trace = generate_trace(seed, config.n_devices,
                                Arena{config.arena_w_m, config.arena_h_m}, config.horizon_s(),
                                config.tick_s, config.generator);
    }
    sd.history =
        extract_encounters(sd.trace, config.channel.d_max_m, 0.0, config.mine_end_s());

    RandomStream rng(RandomStream::mix(seed, 0x5e55ULL));
    for (int sid = 0; sid < config.sessions; ++sid) {
      RequestEvent ev;
      ev.time_s = rng.uniform(config.mine_end_s(), sd.trace.horizon_s());
      long tick = sd.trace.tick_at(ev.time_s);
      int tries = 0;
      do {
        ev.source = rng.uniform_int(0, sd.trace.n_devices() - 1);
        ev.requester = rng.uniform_int(0, sd.trace.n_devices() - 1);
        if (++tries > 5000)
          throw ConfigError("could not sample a request pair farther apart than d_max");
      } while (ev.source == ev.requester ||
               distance(sd.trace, ev.source, ev.requester, tick) <= config.channel.d_max_m);
      ev.fading_seed = RandomStream::mix(RandomStream::mix(seed, 0xfade), sid);
      sd.events.push_back(ev);
    }
  }

  // one community structure per (seed, content size): t_c gates the edges
  std::map<std::pair<int, int>, std::pair<ContactGraph, CommunityStructure>> mined;
  for (int si = 0; si < config.seeds; ++si)
    for (std::size_t bi = 0; bi < config.content_kb.size(); ++bi) {
      double bits = config.content_kb[bi] * 8000.0;
      double t_c = nominal_transfer_time(bits, config.channel);
      ContactGraph cg = build_contact_graph(seeds[si].history, t_c, config.social);
      if (cg.n() < seeds[si].trace.n_devices()) {
        // pad isolated devices so the community structure covers every vertex
        cg = ContactGraph(seeds[si].trace.n_devices(), cg.edges(), config.social);
      }
      CommunityStructure cs = dcd(cg, config.seed + static_cast<std::uint64_t>(si));
      mined.emplace(std::make_pair(si, static_cast<int>(bi)),
                    std::make_pair(std::move(cg), std::move(cs)));
    }

  const bool use_tod =
      config.tod_half_h > 0.0 && seeds[0].trace.horizon_s() >= 86400.0;

  struct Slot {
    SessionRecord record;
  };
  std::vector<SessionTask> tasks;
  for (std::size_t bi = 0; bi < config.content_kb.size(); ++bi)
    for (double t_max : config.tmax_s)
      for (int si = 0; si < config.seeds; ++si)
        for (int sid = 0; sid < config.sessions; ++sid) {
          SessionTask task;
          task.seed = config.seed + static_cast<std::uint64_t>(si);
          task.seed_index = si;
          task.session_id = sid;
          task.event = seeds[si].events[sid];
          task.event.content_bits = config.content_kb[bi] * 8000.0;
          task.event.t_max_s = t_max;
          task.content_kb = config.content_kb[bi];
          task.t_max_s = t_max;
          tasks.push_back(task);
        }

  const long n_methods = static_cast<long>(config.methods.size());
  std::vector<Slot> slots(tasks.size() * n_methods);

  run_parallel(config.jobs, static_cast<long>(tasks.size()), [&](long ti) {
    const SessionTask& task = tasks[ti];
    const SeedData& sd = seeds[task.seed_index];
    int bi = 0;
    for (std::size_t i = 0; i < config.content_kb.size(); ++i)
      if (config.content_kb[i] == task.content_kb) bi = static_cast<int>(i);
    const auto& [cg_shared, cs_shared] = mined.at({task.seed_index, bi});

    const ContactGraph* cg = &cg_shared;
    const CommunityStructure* cs = &cs_shared;
    ContactGraph cg_local;
    CommunityStructure cs_local;
    if (use_tod) {
      EncounterHistory filtered = filter_time_of_day(
          sd.history, std::fmod(task.event.time_s, 86400.0), config.tod_half_h * 3600.0);
      double t_c = nominal_transfer_time(task.event.content_bits, config.channel);
      cg_local = build_contact_graph(filtered, t_c, config.social);
      if (cg_local.n() < sd.trace.n_devices())
        cg_local = ContactGraph(sd.trace.n_devices(), cg_local.edges(), config.social);
      cs_local = dcd(cg_local, task.seed);
      cg = &cg_local;
      cs = &cs_local;
    }

    RelayGraph g = assemble(sd.trace, task.event.time_s, task.event.source, task.event.requester,
                            task.event.content_bits, task.event.t_max_s, *cs, *cg, config.channel,
                            config.relay, task.event.fading_seed);
    for (long mi = 0; mi < n_methods; ++mi) {
      RpfResult selection = select_path(g, sd.trace, config.methods[mi], config.solver);
      SessionOutcome outcome = deliver_over_path(g, selection, sd.trace, config.channel);
      SessionRecord rec;
      rec.content_kb = task.content_kb;
      rec.t_max_s = task.t_max_s;
      rec.method = config.methods[mi];
      rec.seed = task.seed;
      rec.session_id = task.session_id;
      rec.outcome = outcome;
      slots[ti * n_methods + mi].record = rec;
    }
  });

  report.sessions.reserve(slots.size());
  for (const Slot& s : slots) report.sessions.push_back(s.record);

  // aggregates per (content, t_max, method)
  for (std::size_t bi = 0; bi < config.content_kb.size(); ++bi)
    for (double t_max : config.tmax_s)
      for (Method m : config.methods) {
        AggregateRow row;
        row.content_kb = config.content_kb[bi];
        row.t_max_s = t_max;
        row.method = m;
        std::vector<double> per_seed_rate(config.seeds, 0.0), per_seed_count(config.seeds, 0.0);
        std::vector<double> per_seed_busy(config.seeds, 0.0);
        double pre_cost_sum = 0.0;
        int pre_cost_n = 0;
        for (const SessionRecord& rec : report.sessions) {
          if (rec.method != m || rec.content_kb != row.content_kb || rec.t_max_s != t_max)
            continue;
          int si = static_cast<int>(rec.seed - config.seed);
          ++row.sessions;
          per_seed_count[si] += 1.0;
          if (rec.outcome.delivered_d2d) {
            ++row.delivered;
            per_seed_rate[si] += 1.0;
          }
          switch (rec.outcome.reason) {
            case FallbackReason::NoSource: ++row.no_source; break;
            case FallbackReason::NoFeasiblePath: ++row.no_path; break;
            case FallbackReason::CostExceedsB2D: ++row.cost_exceeds; break;
            case FallbackReason::MobilityTeardown: ++row.teardown; break;
            case FallbackReason::None: break;
          }
          row.total_bs_cost += rec.outcome.bs_cost_paid;
          per_seed_busy[si] += rec.outcome.b2d_busy_s;
          if (rec.outcome.pre_tx_path_cost >= 0.0) {
            pre_cost_sum += rec.outcome.pre_tx_path_cost;
            ++pre_cost_n;
          }
        }
        row.delivery_rate = row.sessions ? static_cast<double>(row.delivered) / row.sessions : 0.0;
        double mean_busy = 0.0, mean_rate = 0.0;
        for (int si = 0; si < config.seeds; ++si) {
          if (per_seed_count[si] > 0) per_seed_rate[si] /= per_seed_count[si];
          mean_rate += per_seed_rate[si];
          per_seed_busy[si] /= replay_window_s;
          mean_busy += per_seed_busy[si];
        }
        mean_rate /= config.seeds;
        mean_busy /= config.seeds;
        row.active_b2d_links = mean_busy;
        if (config.seeds > 1) {
          double var = 0.0;
          for (int si = 0; si < config.seeds; ++si)
            var += (per_seed_rate[si] - mean_rate) * (per_seed_rate[si] - mean_rate);
          var /= (config.seeds - 1);
          row.delivery_rate_stderr = std::sqrt(var / config.seeds);
        }
        row.mean_pre_tx_cost = pre_cost_n ? pre_cost_sum / pre_cost_n : 0.0;
        report.aggregates.push_back(row);
      }

  report.bs_cost_divisor = 1.0;
  for (const AggregateRow& row : report.aggregates)
    report.bs_cost_divisor = std::max(report.bs_cost_divisor, row.total_bs_cost);
  for (AggregateRow& row : report.aggregates)
    row.total_bs_cost_norm = row.total_bs_cost / report.bs_cost_divisor;

  return report;
}

void write_results_csv(const SimReport& report, double content_kb, double t_max_s,
                       std::ostream& out) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "# config_hash=%016llx\n",
                static_cast<unsigned long long>(report.config_hash));
  out << buf;
  out << "method,seed,session_id,outcome,reason,elapsed_s,hops,bs_cost\n";
  for (const SessionRecord& rec : report.sessions) {
    if (rec.content_kb != content_kb || rec.t_max_s != t_max_s) continue;
    std::snprintf(buf, sizeof buf, "%s,%llu,%d,%s,%s,%.10g,%d,%.10g\n",
                  method_name(rec.method).c_str(), static_cast<unsigned long long>(rec.seed),
                  rec.session_id,
                  rec.outcome.delivered_d2d ? "delivered_d2d" : "fell_back_to_b2d",
                  fallback_reason_name(rec.outcome.reason).c_str(), rec.outcome.elapsed_s,
                  rec.outcome.hops, rec.outcome.bs_cost_paid);
    out << buf;
  }
}

void write_figdata_csv(const SimReport& report, std::ostream& out) {
  char buf[320];
  std::snprintf(buf, sizeof buf, "# config_hash=%016llx\n",
                static_cast<unsigned long long>(report.config_hash));
  out << buf;
  out << "content_kb,t_max_s,method,sessions,delivered,delivery_rate,delivery_rate_stderr,"
         "active_b2d_links,total_bs_cost,total_bs_cost_norm,mean_pre_tx_cost\n";
  for (const AggregateRow& r : report.aggregates) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%s,%d,%d,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n",
                  r.content_kb, r.t_max_s, method_name(r.method).c_str(), r.sessions, r.delivered,
                  r.delivery_rate, r.delivery_rate_stderr, r.active_b2d_links, r.total_bs_cost,
                  r.total_bs_cost_norm, r.mean_pre_tx_cost);
    out << buf;
  }
}

void write_aggregate_json(const SimReport& report, std::ostream& out) {
  nlohmann::json j;
  char hash_buf[32];
  std::snprintf(hash_buf, sizeof hash_buf, "%016llx",
                static_cast<unsigned long long>(report.config_hash));
  j["config_hash"] = hash_buf;
  j["bs_cost_divisor"] = report.bs_cost_divisor;
  j["aggregates"] = nlohmann::json::array();
  for (const AggregateRow& r : report.aggregates) {
    nlohmann::json row;
    row["content_kb"] = r.content_kb;
    row["t_max_s"] = r.t_max_s;
    row["method"] = method_name(r.method);
    row["sessions"] = r.sessions;
    row["delivered"] = r.delivered;
    row["no_source"] = r.no_source;
    row["no_feasible_path"] = r.no_path;
    row["cost_exceeds_b2d"] = r.cost_exceeds;
    row["mobility_teardown"] = r.teardown;
    row["delivery_rate"] = r.delivery_rate;
    row["delivery_rate_stderr"] = r.delivery_rate_stderr;
    row["active_b2d_links"] = r.active_b2d_links;
    row["total_bs_cost"] = r.total_bs_cost;
    row["total_bs_cost_norm"] = r.total_bs_cost_norm;
    row["mean_pre_tx_cost"] = r.mean_pre_tx_cost;
    j["aggregates"].push_back(row);
  }
  j["parameters"] = report.config_canonical;
  out << j.dump(2) << '\n';
}

}  // namespace d2d
