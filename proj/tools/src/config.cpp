#include "mmlsh_bench/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "mmlsh/errors.hpp"
#include "mmlsh/schedule.hpp"

namespace mmlsh::bench {

namespace {

template <typename C, typename F>
void visit_synth(C& s, F&& f) {
  f("objects", s.objects);
  f("points_per_object", s.points_per_object);
  f("dimension", s.dimension);
  f("spread", s.spread);
  f("seed", s.seed);
}

template <typename C, typename F>
void visit_fields(C& c, F&& f) {
  f("features", c.features);
  f("object_map", c.object_map);
  f("index", c.index_path);
  f("profile", c.profile_path);
  f("groundtruth", c.groundtruth_path);
  f("out", c.out_prefix);
  f("trace", c.trace_path);
  f("rankings", c.rankings_path);
  f("delta", c.delta);
  f("beta", c.beta);
  f("w", c.w);
  f("c", c.c);
  f("index_seed", c.index_seed);
  f("m", c.m);
  f("l", c.l);
  f("gamma", c.gamma);
  f("epsilon", c.epsilon);
  f("k", c.k);
  f("k_primes", c.k_primes);
  f("buffer_mb", c.buffer_mb);
  f("sweep_mb", c.sweep_mb);
  f("strategy", c.strategy);
  f("splits", c.splits);
  f("recency_window", c.recency_window);
  f("distance_threshold", c.distance_threshold);
  f("queries", c.queries);
  f("points_per_query", c.points_per_query);
  f("query_seed", c.query_seed);
  f("profile_queries", c.profile_queries);
  f("regions", c.regions);
  f("profile_seed", c.profile_seed);
  f("index_scale", c.index_scale);
  f("alg_ms_per_op", c.alg_ms_per_op);
  f("calibrate", c.calibrate);
  f("max_level", c.max_level);
  f("seek_ms", c.seek_ms);
  f("read_rate_mb_per_ms", c.read_rate_mb_per_ms);
  f("json", c.json);
  f("quiet", c.quiet);
}

}  // namespace

double RunConfig::resolved_beta(std::size_t object_count) const {
  if (beta > 0.0) return beta;
  return std::min(0.5, 25.0 / static_cast<double>(std::max<std::size_t>(1, object_count)));
}

GammaParams RunConfig::gamma_params(std::size_t object_count) const {
  return {gamma, resolved_epsilon(), resolved_beta(object_count), delta};
}

LshParams RunConfig::lsh_params(std::size_t object_count) const {
  auto p = derive_params(delta, resolved_beta(object_count), c, w);
  if (m > 0) {
    p.m = m;
    p.l = l > 0 ? l : static_cast<unsigned>(std::ceil(p.alpha * m));
  } else if (l > 0) {
    p.l = l;
  }
  p.validate();
  return p;
}

std::uint64_t RunConfig::mb_to_bytes(double mb) {
  if (!(mb > 0.0)) throw ParameterError("buffer size must be positive");
  return static_cast<std::uint64_t>(std::llround(mb * 1e6));
}

void RunConfig::validate() const {
  if (features.empty() != object_map.empty()) {
    throw ParameterError("--features and --object-map must be given together");
  }
  if (synth.objects == 0 || synth.points_per_object == 0 || synth.dimension == 0) {
    throw ParameterError("synthetic counts must be at least 1");
  }
  if (k == 0) throw ParameterError("k must be at least 1");
  for (auto kp : k_primes) {
    if (kp < k) throw ParameterError("every k' must be at least k");
  }
  if (queries == 0) throw ParameterError("query count must be at least 1");
  if (c < 2) throw ParameterError("c must be an integer >= 2");
  if (!(w > 0.0)) throw ParameterError("w must be positive");
  if (!(index_scale > 0.0)) throw ParameterError("index_scale must be positive");
  if (!(alg_ms_per_op >= 0.0)) throw ParameterError("alg_ms_per_op must be non-negative");
  if (regions == 0) throw ParameterError("regions must be at least 1");
  if (splits == 0) throw ParameterError("splits must be at least 1");
  if (profile_queries == 0) throw ParameterError("profile_queries must be at least 1");
  (void)mb_to_bytes(buffer_mb);
  for (double mb : sweep_mb) (void)mb_to_bytes(mb);
  (void)parse_strategy(strategy);
  GammaParams{gamma, resolved_epsilon(), beta > 0.0 ? beta : 0.1, delta}.validate();
  cost_model().validate();
}

void to_json(nlohmann::json& j, const RunConfig& c) {
  j = nlohmann::json::object();
  visit_fields(c, [&](const char* name, const auto& v) { j[name] = v; });
  nlohmann::json s = nlohmann::json::object();
  visit_synth(c.synth, [&](const char* name, const auto& v) { s[name] = v; });
  j["synth"] = s;
}

void from_json(const nlohmann::json& j, RunConfig& c) {
  if (!j.is_object()) throw FormatError("config must be a JSON object");
  std::set<std::string> known{"synth"};
  visit_fields(c, [&](const char* name, auto&) { known.insert(name); });
  for (const auto& [key, value] : j.items()) {
    if (!known.contains(key)) throw FormatError("unknown config key '" + key + "'");
  }
  try {
    visit_fields(c, [&](const char* name, auto& v) {
      if (j.contains(name)) j.at(name).get_to(v);
    });
    if (j.contains("synth")) {
      const auto& s = j.at("synth");
      visit_synth(c.synth, [&](const char* name, auto& v) {
        if (s.contains(name)) s.at(name).get_to(v);
      });
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad config value: ") + e.what());
  }
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("config " + path + ": " + e.what());
  }
  from_json(j, base);
  return base;
}

RunConfig preset(const std::string& name) {
  RunConfig c;
  if (name == "synth200") return c;
  if (name == "workload") {
    // 1000 objects x 20 points stand in for a ~20M point index;
    // index_scale inflates every bucket to that size for IO accounting.
    c.synth = {1000, 20, 32, 0.25, 42};
    c.index_scale = 1000.0;
    c.queries = 10;
    return c;
  }
  throw ParameterError("unknown preset '" + name + "' (expected synth200 or workload)");
}

}  // namespace mmlsh::bench
