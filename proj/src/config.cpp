#include "d2d/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "d2d/errors.hpp"

namespace d2d {

std::string method_name(Method m) {
  switch (m) {
    case Method::Rpf: return "rpf";
    case Method::Mc: return "mc";
    case Method::Cd: return "cd";
  }
  return "?";
}

Method method_from_name(const std::string& name) {
  if (name == "rpf") return Method::Rpf;
  if (name == "mc") return Method::Mc;
  if (name == "cd") return Method::Cd;
  throw ConfigError("unknown method '" + name + "' (expected rpf, mc or cd)");
}

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': '" + value + "' is not a number");
  }
}

int to_int(const std::string& key, const std::string& value) {
  double v = to_double(key, value);
  int i = static_cast<int>(v);
  if (i != v) throw ConfigError("config key '" + key + "' must be an integer");
  return i;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config key '" + key + "' must be true or false");
}

// "a,b,c" or "lo..hi" or "lo..hi..step" (default step 10)
std::vector<double> to_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  auto range_pos = value.find("..");
  if (range_pos != std::string::npos) {
    double lo = to_double(key, value.substr(0, range_pos));
    std::string rest = value.substr(range_pos + 2);
    double step = 10.0;
    auto step_pos = rest.find("..");
    if (step_pos != std::string::npos) {
      step = to_double(key, rest.substr(step_pos + 2));
      rest = rest.substr(0, step_pos);
    }
    double hi = to_double(key, rest);
    if (hi < lo || step <= 0.0) throw ConfigError("config key '" + key + "': empty range");
    for (double v = lo; v <= hi + 1e-9; v += step) out.push_back(v);
    return out;
  }
  std::istringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  if (out.empty()) throw ConfigError("config key '" + key + "' has an empty list");
  return out;
}

}  // namespace

void ExperimentConfig::apply(const std::string& key, const std::string& value) {
  if (key == "seed") seed = static_cast<std::uint64_t>(to_double(key, value));
  else if (key == "seeds") seeds = to_int(key, value);
  else if (key == "n_devices") n_devices = to_int(key, value);
  else if (key == "arena_w_m") arena_w_m = to_double(key, value);
  else if (key == "arena_h_m") arena_h_m = to_double(key, value);
  else if (key == "tick_s") tick_s = to_double(key, value);
  else if (key == "horizon_h") horizon_h = to_double(key, value);
  else if (key == "mine_h") mine_h = to_double(key, value);
  else if (key == "gen_clusters") generator.clusters = to_int(key, value);
  else if (key == "gen_clusters_per_device") generator.clusters_per_device = to_int(key, value);
  else if (key == "gen_waypoints_per_device") generator.waypoints_per_device = to_int(key, value);
  else if (key == "gen_cluster_sigma_m") generator.cluster_sigma_m = to_double(key, value);
  else if (key == "gen_speed_mps") generator.speed_mps = to_double(key, value);
  else if (key == "gen_pause_alpha") generator.pause_alpha = to_double(key, value);
  else if (key == "gen_pause_min_s") generator.pause_min_s = to_double(key, value);
  else if (key == "gen_pause_max_s") generator.pause_max_s = to_double(key, value);
  else if (key == "trace_file") trace_file = value;
  else if (key == "alpha") channel.pathloss_exponent = to_double(key, value);
  else if (key == "shadowing_db") channel.shadowing_stddev_db = to_double(key, value);
  else if (key == "noise_dbm_hz") channel.noise_dbm_hz = to_double(key, value);
  else if (key == "rb_hz") channel.rb_bandwidth_hz = to_double(key, value);
  else if (key == "p_device_w") channel.device_tx_power_w = to_double(key, value);
  else if (key == "p_bs_w") channel.bs_tx_power_w = to_double(key, value);
  else if (key == "d_max_m") channel.d_max_m = to_double(key, value);
  else if (key == "sinr_threshold_db") channel.sinr_threshold_db = to_double(key, value);
  else if (key == "k_b2d") channel.b2d_scale = to_double(key, value);
  else if (key == "light_speed") channel.light_speed_mps = to_double(key, value);
  else if (key == "rho") social.rho = to_double(key, value);
  else if (key == "delta") social.delta = to_double(key, value);
  else if (key == "zeta") social.zeta = to_double(key, value);
  else if (key == "lambda_window_s") social.lambda_window_s = to_double(key, value);
  else if (key == "normalize_w") social.normalize_w = to_bool(key, value);
  else if (key == "tod_half_h") tod_half_h = to_double(key, value);
  else if (key == "rb_count") relay.total_rbs = to_int(key, value);
  else if (key == "cellular_users") relay.cellular_users = to_int(key, value);
  else if (key == "conflict_radius_factor") relay.conflict_radius_factor = to_double(key, value);
  else if (key == "rule2_factor") relay.social.rule2_factor = to_double(key, value);
  else if (key == "rule4_factor") relay.social.rule4_factor = to_double(key, value);
  else if (key == "rule3_use_max") relay.social.rule3_use_max = to_bool(key, value);
  else if (key == "cut_mode") {
    if (value == "combinatorial") solver.cut_mode = RpfOptions::CutMode::Combinatorial;
    else if (value == "epsilon") solver.cut_mode = RpfOptions::CutMode::Epsilon;
    else throw ConfigError("cut_mode must be combinatorial or epsilon");
  }
  else if (key == "cut_epsilon") solver.epsilon = to_double(key, value);
  else if (key == "iteration_cap_factor") solver.iteration_cap_factor = to_int(key, value);
  else if (key == "bound_stop") solver.bound_stop = to_bool(key, value);
  else if (key == "sessions") sessions = to_int(key, value);
  else if (key == "methods") {
    methods.clear();
    std::istringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) methods.push_back(method_from_name(trim(item)));
    if (methods.empty()) throw ConfigError("methods list is empty");
  }
  else if (key == "content_kb") content_kb = to_list(key, value);
  else if (key == "tmax_s") tmax_s = to_list(key, value);
  else if (key == "jobs") jobs = to_int(key, value);
  else if (key == "output_dir") output_dir = value;
  else throw ConfigError("unknown config key '" + key + "'");
}

void ExperimentConfig::validate() const {
  channel.validate();
  if (seeds < 1) throw ConfigError("seeds must be >= 1");
  if (n_devices < 2) throw ConfigError("n_devices must be >= 2");
  if (tick_s <= 0.0) throw ConfigError("tick_s must be > 0");
  if (horizon_h <= 0.0 || mine_h <= 0.0 || mine_h >= horizon_h)
    throw ConfigError("need 0 < mine_h < horizon_h");
  if (social.rho < 0.0 || social.rho > 1.0) throw ConfigError("rho must be in [0, 1]");
  if (social.delta < 0.0) throw ConfigError("delta must be >= 0");
  if (social.zeta <= 0.0) throw ConfigError("zeta must be > 0");
  if (social.lambda_window_s <= 0.0) throw ConfigError("lambda_window_s must be > 0");
  if (relay.total_rbs < 1) throw ConfigError("rb_count must be >= 1");
  if (relay.cellular_users < 0) throw ConfigError("cellular_users must be >= 0");
  if (relay.conflict_radius_factor <= 0.0) throw ConfigError("conflict_radius_factor must be > 0");
  if (solver.epsilon <= 0.0) throw ConfigError("cut_epsilon must be > 0");
  if (solver.iteration_cap_factor < 1) throw ConfigError("iteration_cap_factor must be >= 1");
  if (sessions < 1) throw ConfigError("sessions must be >= 1");
  if (methods.empty()) throw ConfigError("methods list is empty");
  if (content_kb.empty() || tmax_s.empty()) throw ConfigError("content_kb/tmax_s must be non-empty");
  for (double b : content_kb)
    if (b <= 0.0) throw ConfigError("content_kb entries must be > 0");
  for (double t : tmax_s)
    if (t <= 0.0) throw ConfigError("tmax_s entries must be > 0");
  if (jobs < 0) throw ConfigError("jobs must be >= 0");
  if (tod_half_h < 0.0) throw ConfigError("tod_half_h must be >= 0");
}

std::string ExperimentConfig::canonical() const {
  char buf[256];
  std::ostringstream out;
  auto put = [&](const char* key, const std::string& v) { out << key << '=' << v << '\n'; };
  auto num = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%.10g", v);
    put(key, buf);
  };
  auto list = [&](const char* key, const std::vector<double>& vs) {
    std::string s;
    for (double v : vs) {
      std::snprintf(buf, sizeof buf, "%.10g", v);
      s += (s.empty() ? "" : ",") + std::string(buf);
    }
    put(key, s);
  };
  num("seed", static_cast<double>(seed));
  num("seeds", seeds);
  num("n_devices", n_devices);
  num("arena_w_m", arena_w_m);
  num("arena_h_m", arena_h_m);
  num("tick_s", tick_s);
  num("horizon_h", horizon_h);
  num("mine_h", mine_h);
  num("gen_clusters", generator.clusters);
  num("gen_clusters_per_device", generator.clusters_per_device);
  num("gen_waypoints_per_device", generator.waypoints_per_device);
  num("gen_cluster_sigma_m", generator.cluster_sigma_m);
  num("gen_speed_mps", generator.speed_mps);
  num("gen_pause_alpha", generator.pause_alpha);
  num("gen_pause_min_s", generator.pause_min_s);
  num("gen_pause_max_s", generator.pause_max_s);
  put("trace_file", trace_file);
  num("alpha", channel.pathloss_exponent);
  num("shadowing_db", channel.shadowing_stddev_db);
  num("noise_dbm_hz", channel.noise_dbm_hz);
  num("rb_hz", channel.rb_bandwidth_hz);
  num("p_device_w", channel.device_tx_power_w);
  num("p_bs_w", channel.bs_tx_power_w);
  num("d_max_m", channel.d_max_m);
  num("sinr_threshold_db", channel.sinr_threshold_db);
  num("k_b2d", channel.b2d_scale);
  num("light_speed", channel.light_speed_mps);
  num("rho", social.rho);
  num("delta", social.delta);
  num("zeta", social.zeta);
  num("lambda_window_s", social.lambda_window_s);
  put("normalize_w", social.normalize_w ? "true" : "false");
  num("tod_half_h", tod_half_h);
  num("rb_count", relay.total_rbs);
  num("cellular_users", relay.cellular_users);
  num("conflict_radius_factor", relay.conflict_radius_factor);
  num("rule2_factor", relay.social.rule2_factor);
  num("rule4_factor", relay.social.rule4_factor);
  put("rule3_use_max", relay.social.rule3_use_max ? "true" : "false");
  put("cut_mode", solver.cut_mode == RpfOptions::CutMode::Combinatorial ? "combinatorial"
                                                                        : "epsilon");
  num("cut_epsilon", solver.epsilon);
  num("iteration_cap_factor", solver.iteration_cap_factor);
  put("bound_stop", solver.bound_stop ? "true" : "false");
  num("sessions", sessions);
  {
    std::string s;
    for (Method m : methods) s += (s.empty() ? "" : ",") + method_name(m);
    put("methods", s);
  }
  list("content_kb", content_kb);
  list("tmax_s", tmax_s);
  num("jobs", jobs);
  put("output_dir", output_dir);
  return out.str();
}

std::uint64_t ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  long row = 0;
  while (std::getline(in, line)) {
    ++row;
    auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", row);
    cfg.apply(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ExperimentConfig load_config_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid JSON config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("JSON config must be a flat object");
  ExperimentConfig cfg;
  for (const auto& [key, value] : j.items()) {
    std::string v;
    if (value.is_string()) {
      v = value.get<std::string>();
    } else if (value.is_boolean()) {
      v = value.get<bool>() ? "true" : "false";
    } else if (value.is_number()) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.10g", value.get<double>());
      v = buf;
    } else if (value.is_array()) {
      for (const auto& item : value) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.10g", item.get<double>());
        v += (v.empty() ? "" : ",") + std::string(buf);
      }
    } else {
      throw ConfigError("config key '" + key + "' has an unsupported JSON type");
    }
    cfg.apply(key, v);
  }
  return cfg;
}

}  // namespace d2d
