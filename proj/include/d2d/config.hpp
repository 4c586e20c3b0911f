#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "d2d/channel.hpp"
#include "d2d/mobility.hpp"
#include "d2d/relaygraph.hpp"
#include "d2d/rpf.hpp"
#include "d2d/social.hpp"

namespace d2d {

enum class Method { Rpf, Mc, Cd };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

// Flat key=value experiment configuration ('#' comments); also loadable from a
// flat JSON object. Unknown keys are rejected.
struct ExperimentConfig {
  std::uint64_t seed = 1;
  int seeds = 1;  // number of consecutive seeds averaged by run_experiment
  int n_devices = 40;
  double arena_w_m = 1000.0, arena_h_m = 1000.0;
  double tick_s = 1.0;
  double horizon_h = 3.0;
  double mine_h = 2.0;  // leading span mined for communities; the rest is replayed
  GeneratorParams generator;
  std::string trace_file;  // when set, ingest instead of generating

  ChannelParams channel;
  SocialParams social;
  double tod_half_h = 2.0;  // time-of-day window half-width (traces >= 24 h)

  RelayParams relay;
  RpfOptions solver;

  int sessions = 20;
  std::vector<Method> methods{Method::Rpf, Method::Mc, Method::Cd};
  std::vector<double> content_kb{150.0};
  std::vector<double> tmax_s{100.0};
  int jobs = 0;  // 0: hardware concurrency
  std::string output_dir = "out";

  void apply(const std::string& key, const std::string& value);  // ConfigError on unknown key
  void validate() const;
  std::string canonical() const;  // stable key=value serialization
  std::uint64_t hash() const;     // FNV-1a over canonical()

  double horizon_s() const { return horizon_h * 3600.0; }
  double mine_end_s() const { return mine_h * 3600.0; }
};

ExperimentConfig load_config(const std::string& path);
ExperimentConfig load_config_json(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

}  // namespace d2d
