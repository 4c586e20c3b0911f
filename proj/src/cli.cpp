#include "d2d/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "d2d/community.hpp"
#include "d2d/config.hpp"
#include "d2d/errors.hpp"
#include "d2d/mobility.hpp"
#include "d2d/relaygraph.hpp"
#include "d2d/rpf.hpp"
#include "d2d/sim.hpp"
#include "d2d/social.hpp"

namespace d2d {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNoFeasiblePath = 3;
constexpr int kExitInternal = 4;

void apply_env_seed(ExperimentConfig& cfg) {
  if (const char* env = std::getenv("D2D_SIM_SEED")) cfg.apply("seed", env);
}

std::string hash_line(const ExperimentConfig& cfg) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "# config_hash=%016llx\n",
                static_cast<unsigned long long>(cfg.hash()));
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  return out;
}

struct CommonOptions {
  std::string config_file;
  std::string config_json_file;
  std::vector<std::pair<std::string, std::string>> overrides;

  ExperimentConfig build() const {
    ExperimentConfig cfg;
    if (!config_file.empty() && !config_json_file.empty())
      throw ConfigError("use either --config or --config-json, not both");
    if (!config_file.empty()) cfg = load_config(config_file);
    if (!config_json_file.empty()) cfg = load_config_json(config_json_file);
    for (const auto& [k, v] : overrides) cfg.apply(k, v);
    apply_env_seed(cfg);
    return cfg;
  }
};

void add_common(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("--config", common.config_file, "flat key=value config file");
  cmd->add_option("--config-json", common.config_json_file, "JSON config file");
}

// deferred override: records key=value to apply on top of the config file
void add_override(CLI::App* cmd, CommonOptions& common, const std::string& flag,
                  const std::string& key, const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&common, key](const std::string& v) { common.overrides.emplace_back(key, v); },
      help);
}

int cmd_generate(const CommonOptions& common, const std::string& out_path) {
  ExperimentConfig cfg = common.build();
  cfg.channel.validate();
  std::ostringstream body;
  body << hash_line(cfg);
  generate_trace_csv(cfg.seed, cfg.n_devices, Arena{cfg.arena_w_m, cfg.arena_h_m},
                     cfg.horizon_s(), cfg.tick_s, cfg.generator, body);
  if (out_path.empty()) {
    std::cout << body.str();
  } else {
    open_out(out_path) << body.str();
    std::cerr << "wrote " << out_path << "\n";
  }
  return kExitOk;
}

// shared mining pipeline for the communities and graph commands
struct Mined {
  MobilityTrace trace;
  ContactGraph contact_graph;
  CommunityStructure communities;
};

Mined mine(const ExperimentConfig& cfg, const std::string& trace_path, double content_kb,
           bool use_oracle) {
  Mined m;
  if (!trace_path.empty())
    m.trace = load_trace(trace_path, Arena{cfg.arena_w_m, cfg.arena_h_m});
  else if (!cfg.trace_file.empty())
    m.trace = load_trace(cfg.trace_file, Arena{cfg.arena_w_m, cfg.arena_h_m});
  else
    m.trace = generate_trace(cfg.seed, cfg.n_devices, Arena{cfg.arena_w_m, cfg.arena_h_m},
                             cfg.horizon_s(), cfg.tick_s, cfg.generator);
  double mine_end = std::min(cfg.mine_end_s(), m.trace.horizon_s());
  EncounterHistory hist = extract_encounters(m.trace, cfg.channel.d_max_m, 0.0, mine_end);
  double t_c = nominal_transfer_time(content_kb * 8000.0, cfg.channel);
  m.contact_graph = build_contact_graph(hist, t_c, cfg.social);
  if (m.contact_graph.n() < m.trace.n_devices())
    m.contact_graph =
        ContactGraph(m.trace.n_devices(), m.contact_graph.edges(), cfg.social);
  m.communities = use_oracle ? dcd_oracle(m.contact_graph) : dcd(m.contact_graph, cfg.seed);
  return m;
}

int cmd_communities(const CommonOptions& common, const std::string& trace_path,
                    double content_kb, bool use_oracle, const std::string& out_path,
                    const std::string& gp_dump_path) {
  ExperimentConfig cfg = common.build();
  Mined m = mine(cfg, trace_path, content_kb, use_oracle);
  std::ostringstream body;
  body << hash_line(cfg);
  dump_communities_csv(m.communities, body);
  if (out_path.empty())
    std::cout << body.str();
  else
    open_out(out_path) << body.str();
  if (!gp_dump_path.empty()) {
    auto out = open_out(gp_dump_path);
    out << hash_line(cfg);
    dump_contact_graph_csv(m.contact_graph, out);
  }
  return kExitOk;
}

int cmd_graph(const CommonOptions& common, const std::string& trace_path, double time_s,
              int source, int target, double content_kb, double t_max_s,
              const std::string& out_path) {
  ExperimentConfig cfg = common.build();
  Mined m = mine(cfg, trace_path, content_kb, false);
  std::uint64_t fading_seed = RandomStream::mix(RandomStream::mix(cfg.seed, 0xfade), 0);
  RelayGraph g = assemble(m.trace, time_s, source, target, content_kb * 8000.0, t_max_s,
                          m.communities, m.contact_graph, cfg.channel, cfg.relay, fading_seed);
  std::ostringstream body;
  body << hash_line(cfg);
  dump_relay_graph_csv(g, body);
  if (out_path.empty())
    std::cout << body.str();
  else
    open_out(out_path) << body.str();
  return kExitOk;
}

void write_solver_trace(const RpfTrace& trace, const std::string& path) {
  auto out = open_out(path);
  for (const RpfIteration& it : trace.iterations) {
    nlohmann::json j;
    j["iteration"] = it.iteration;
    j["objective"] = it.lp_objective;
    j["n_paths"] = it.n_paths;
    j["integral"] = it.integral;
    j["paths"] = it.path_nodes;
    j["cut"] = it.cut_path;
    j["combinatorial_cut"] = it.cut_combinatorial;
    out << j.dump() << '\n';
  }
}

int cmd_solve(const CommonOptions& common, const std::string& graph_path, int source, int target,
              double t_max_s, bool check_oracle, const std::string& trace_out) {
  ExperimentConfig cfg = common.build();
  RelayGraph g = load_relay_graph_csv(graph_path, source, target, t_max_s);
  RpfTrace trace;
  RpfResult result = rpf(g, cfg.solver, PathObjective::CombinedWeight, &trace);
  if (!trace_out.empty()) write_solver_trace(trace, trace_out);

  if (result.status == RpfStatus::IterationCapped)
    std::cerr << "warning: cut iteration cap reached; reporting best path found so far\n";
  if (!result.path) {
    std::cout << "no feasible path\n";
    return result.status == RpfStatus::IterationCapped ? kExitInternal : kExitNoFeasiblePath;
  }
  const RelayPath& p = *result.path;
  std::cout << "path:";
  for (std::size_t i = 0; i < p.nodes.size(); ++i)
    std::cout << (i ? " -> " : " ") << p.nodes[i];
  char buf[160];
  std::snprintf(buf, sizeof buf, "\nweight: %.10g\ndelay_s: %.10g\nbs_cost: %.10g\n",
                p.total_weight, p.total_delay_s, p.total_bs_cost);
  std::cout << buf;

  if (check_oracle) {
    RpfResult oracle = rpf_oracle(g);
    bool agree;
    if (!oracle.path)
      agree = result.status != RpfStatus::Found;
    else
      agree = result.path && std::abs(oracle.path->total_weight - p.total_weight) <= 1e-9;
    if (agree) {
      std::cout << "oracle: agree\n";
    } else {
      std::snprintf(buf, sizeof buf, "oracle: DISAGREE (oracle weight %.10g)\n",
                    oracle.path ? oracle.path->total_weight : -1.0);
      std::cout << buf;
      return kExitInternal;
    }
  }
  return kExitOk;
}

int cmd_run(const CommonOptions& common) {
  ExperimentConfig cfg = common.build();
  cfg.validate();
  SimReport report = run_experiment(cfg);

  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  auto path = [&](const std::string& name) { return (fs::path(cfg.output_dir) / name).string(); };

  open_out(path("config.txt")) << report.config_canonical;
  char buf[96];
  for (double b : cfg.content_kb)
    for (double t : cfg.tmax_s) {
      std::snprintf(buf, sizeof buf, "results_b%g_t%g.csv", b, t);
      auto out = open_out(path(buf));
      write_results_csv(report, b, t, out);
    }
  {
    auto out = open_out(path("figdata.csv"));
    write_figdata_csv(report, out);
  }
  {
    auto out = open_out(path("aggregate.json"));
    write_aggregate_json(report, out);
  }

  for (const AggregateRow& r : report.aggregates) {
    std::snprintf(buf, sizeof buf, "b=%gKB tmax=%gs %-3s delivery=%.3f b2d_links=%.4f cost=%.4g\n",
                  r.content_kb, r.t_max_s, method_name(r.method).c_str(), r.delivery_rate,
                  r.active_b2d_links, r.total_bs_cost_norm);
    std::cout << buf;
  }
  std::cerr << "wrote " << cfg.output_dir << "/\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"cost-minimal mobility-resilient multi-hop D2D relay simulator"};
  app.require_subcommand(1);

  CommonOptions gen_common, comm_common, graph_common, solve_common, run_common;

  auto* gen = app.add_subcommand("generate", "generate a mobility trace CSV");
  add_common(gen, gen_common);
  add_override(gen, gen_common, "--seed", "seed", "generator seed");
  add_override(gen, gen_common, "--n", "n_devices", "device count");
  add_override(gen, gen_common, "--hours", "horizon_h", "trace length in hours");
  add_override(gen, gen_common, "--tick", "tick_s", "sample period in seconds");
  add_override(gen, gen_common, "--arena-w", "arena_w_m", "arena width in meters");
  add_override(gen, gen_common, "--arena-h", "arena_h_m", "arena height in meters");
  std::string gen_out;
  gen->add_option("--out", gen_out, "output file (default stdout)");

  auto* comm = app.add_subcommand("communities", "mine durable communities from a trace");
  add_common(comm, comm_common);
  std::string comm_trace, comm_out, comm_gp_out;
  double comm_content_kb = 150.0;
  bool comm_oracle = false;
  comm->add_option("--trace", comm_trace, "trace CSV (default: generate from config)");
  comm->add_option("--content-kb", comm_content_kb, "content size for t_c, in KB");
  comm->add_flag("--oracle", comm_oracle, "exhaustive optimum (n <= 10)");
  comm->add_option("--out", comm_out, "community CSV output (default stdout)");
  comm->add_option("--dump-gp", comm_gp_out, "also dump the contact graph CSV here");
  add_override(comm, comm_common, "--seed", "seed", "seed");
  add_override(comm, comm_common, "--mine-hours", "mine_h", "history span to mine, in hours");

  auto* graph = app.add_subcommand("graph", "assemble and dump one relay graph");
  add_common(graph, graph_common);
  std::string graph_trace, graph_out;
  double graph_t = 0.0, graph_content_kb = 150.0, graph_tmax = 100.0;
  int graph_s = 0, graph_r = 1;
  graph->add_option("--trace", graph_trace, "trace CSV (default: generate from config)");
  graph->add_option("--t", graph_t, "request time in seconds")->required();
  graph->add_option("--s", graph_s, "source device")->required();
  graph->add_option("--r", graph_r, "requesting device")->required();
  graph->add_option("--content-kb", graph_content_kb, "content size in KB");
  graph->add_option("--tmax", graph_tmax, "delay bound in seconds");
  graph->add_option("--out", graph_out, "output file (default stdout)");
  add_override(graph, graph_common, "--seed", "seed", "seed");

  auto* solve = app.add_subcommand("solve", "find the least-cost feasible path in a graph dump");
  add_common(solve, solve_common);
  std::string solve_graph, solve_trace_out;
  int solve_s = 0, solve_r = 1;
  double solve_tmax = 100.0;
  bool solve_oracle = false;
  solve->add_option("--graph", solve_graph, "relay graph CSV dump")->required();
  solve->add_option("--s", solve_s, "source device")->required();
  solve->add_option("--r", solve_r, "requesting device")->required();
  solve->add_option("--tmax", solve_tmax, "delay bound in seconds")->required();
  solve->add_flag("--oracle", solve_oracle, "cross-check against exhaustive search");
  solve->add_option("--trace-out", solve_trace_out, "write per-iteration solver trace (JSONL)");

  auto* run = app.add_subcommand("run", "replay sessions and emit metrics");
  add_common(run, run_common);
  add_override(run, run_common, "--seed", "seed", "master seed");
  add_override(run, run_common, "--seeds", "seeds", "number of seeds to average");
  add_override(run, run_common, "--n", "n_devices", "device count");
  add_override(run, run_common, "--hours", "horizon_h", "trace length in hours");
  add_override(run, run_common, "--mine-hours", "mine_h", "history span mined for communities");
  add_override(run, run_common, "--sessions", "sessions", "sessions per seed");
  add_override(run, run_common, "--method", "methods", "comma list: rpf,mc,cd");
  add_override(run, run_common, "--content-kb", "content_kb", "content sizes (list or range)");
  add_override(run, run_common, "--tmax", "tmax_s", "delay bounds (list or lo..hi[..step])");
  add_override(run, run_common, "--jobs", "jobs", "worker threads (0 = cores)");
  add_override(run, run_common, "--out-dir", "output_dir", "output directory");
  add_override(run, run_common, "--trace-file", "trace_file", "ingest this trace instead");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (gen->parsed()) return cmd_generate(gen_common, gen_out);
    if (comm->parsed())
      return cmd_communities(comm_common, comm_trace, comm_content_kb, comm_oracle, comm_out,
                             comm_gp_out);
    if (graph->parsed())
      return cmd_graph(graph_common, graph_trace, graph_t, graph_s, graph_r, graph_content_kb,
                       graph_tmax, graph_out);
    if (solve->parsed())
      return cmd_solve(solve_common, solve_graph, solve_s, solve_r, solve_tmax, solve_oracle,
                       solve_trace_out);
    if (run->parsed()) return cmd_run(run_common);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitInternal;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitValidation;
}

}  // namespace d2d
