#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmlsh/buffer.hpp"
#include "mmlsh/gamma.hpp"
#include "mmlsh/lsh.hpp"
#include "mmlsh/query.hpp"

namespace mmlsh::bench {

/// Synthetic Gaussian-cluster dataset used when no feature file is given.
struct SynthSpec {
  std::size_t objects = 200;
  std::size_t points_per_object = 20;
  std::size_t dimension = 32;
  double spread = 0.25;
  std::uint64_t seed = 42;
};

/// Everything a command needs. Zero-valued beta and epsilon are resolved at
/// run time (25 / S and 2 * delta).
struct RunConfig {
  std::string features;
  std::string object_map;
  SynthSpec synth;

  std::string index_path;
  std::string profile_path;
  std::string groundtruth_path;
  std::string out_prefix;
  std::string trace_path;
  std::string rankings_path;  ///< external point rankings scored by compare

  double delta = 0.1;
  double beta = 0.0;
  double w = 2.184;
  int c = 2;
  std::uint64_t index_seed = 1;
  unsigned m = 0;  ///< 0 = derived
  unsigned l = 0;  ///< 0 = ceil(alpha * m)

  double gamma = 0.5;
  double epsilon = 0.0;
  std::size_t k = 25;
  std::vector<std::size_t> k_primes{25, 50, 100};

  double buffer_mb = 30.0;
  std::vector<double> sweep_mb{20.0, 30.0, 40.0, 50.0};
  std::string strategy = "mmlsh";
  unsigned splits = 10;
  std::uint64_t recency_window = 0;
  std::int64_t distance_threshold = 0;

  std::size_t queries = 10;
  std::size_t points_per_query = 0;
  std::uint64_t query_seed = 7;

  std::size_t profile_queries = 1000;
  unsigned regions = 10;
  std::uint64_t profile_seed = 11;

  double index_scale = 1.0;
  double alg_ms_per_op = kDefaultAlgMsPerOp;
  bool calibrate = false;
  unsigned max_level = 0;
  double seek_ms = 8.5;
  double read_rate_mb_per_ms = 0.156;

  bool json = false;
  bool quiet = false;

  double resolved_beta(std::size_t object_count) const;
  double resolved_epsilon() const { return epsilon > 0.0 ? epsilon : 2.0 * delta; }
  GammaParams gamma_params(std::size_t object_count) const;
  /// Derived parameters with any m / l override applied.
  LshParams lsh_params(std::size_t object_count) const;
  CostModel cost_model() const { return {seek_ms, read_rate_mb_per_ms}; }
  std::uint64_t buffer_bytes() const { return mb_to_bytes(buffer_mb); }
  static std::uint64_t mb_to_bytes(double mb);

  /// Throws ParameterError on values no module would accept.
  void validate() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
/// Missing keys keep their current value; unknown keys are rejected.
void from_json(const nlohmann::json& j, RunConfig& c);

/// Reads a JSON config file over `base`. Throws FormatError.
RunConfig load_config(const std::string& path, RunConfig base = {});

/// Named starting points: "synth200" (the default desk-scale set) and
/// "workload" (a larger set whose bucket footprint overflows a 30 MB
/// buffer several times).
RunConfig preset(const std::string& name);

}  // namespace mmlsh::bench
