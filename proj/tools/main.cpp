#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>
#include <string_view>

#include "mmlsh/errors.hpp"
#include "mmlsh_bench/commands.hpp"

using namespace mmlsh;
using namespace mmlsh::bench;

namespace {

// --config and --preset seed the configuration before flags override it.
RunConfig initial_config(int argc, char** argv) {
  std::string preset_name, config_path;
  for (int i = 1; i < argc; ++i) {
    const std::string_view arg = argv[i];
    auto take = [&](std::string_view flag, std::string& into) {
      if (arg == flag && i + 1 < argc) {
        into = argv[i + 1];
      } else if (arg.starts_with(std::string(flag) + "=")) {
        into = std::string(arg.substr(flag.size() + 1));
      }
    };
    take("--preset", preset_name);
    take("--config", config_path);
  }
  RunConfig cfg = preset_name.empty() ? RunConfig{} : preset(preset_name);
  if (!config_path.empty()) cfg = load_config(config_path, cfg);
  return cfg;
}

void add_options(CLI::App* cmd, RunConfig& cfg) {
  std::string unused;
  cmd->add_option("--config", unused, "JSON config file (flags override it)");
  cmd->add_option("--preset", unused, "synth200 | workload");

  auto* data = "Data";
  cmd->add_option("--features", cfg.features, "vector file (int32 d + d float32 per record)")->group(data);
  cmd->add_option("--object-map", cfg.object_map, "point_id,object_id CSV")->group(data);
  cmd->add_option("--objects", cfg.synth.objects, "synthetic object count")->group(data);
  cmd->add_option("--points-per-object", cfg.synth.points_per_object)->group(data);
  cmd->add_option("--dim", cfg.synth.dimension, "synthetic dimension")->group(data);
  cmd->add_option("--spread", cfg.synth.spread, "synthetic cluster spread")->group(data);
  cmd->add_option("--data-seed", cfg.synth.seed)->group(data);

  auto* files = "Artifacts";
  cmd->add_option("--index", cfg.index_path, "index file")->group(files);
  cmd->add_option("--profile", cfg.profile_path, "frequency profile (default <index>.profile.json)")->group(files);
  cmd->add_option("--groundtruth", cfg.groundtruth_path, "ground-truth cache CSV")->group(files);
  cmd->add_option("--out", cfg.out_prefix, "report prefix (default mmlsh_<command>)")->group(files);
  cmd->add_option("--trace", cfg.trace_path, "buffer access trace (query only)")->group(files);
  cmd->add_option("--rankings", cfg.rankings_path, "external point rankings CSV (compare only)")->group(files);
  cmd->add_flag("--json", cfg.json, "also write <out>.json")->group(files);
  cmd->add_flag("--quiet", cfg.quiet, "no text report on stdout")->group(files);

  auto* lsh = "Index";
  cmd->add_option("--delta", cfg.delta)->group(lsh);
  cmd->add_option("--beta", cfg.beta, "0 = 25 / S")->group(lsh);
  cmd->add_option("--w", cfg.w, "bucket width")->group(lsh);
  cmd->add_option("-c", cfg.c, "approximation ratio")->group(lsh);
  cmd->add_option("--index-seed", cfg.index_seed)->group(lsh);
  cmd->add_option("-m", cfg.m, "projection count override (0 = derived)")->group(lsh);
  cmd->add_option("-l", cfg.l, "collision threshold override (0 = derived)")->group(lsh);

  auto* query = "Query";
  cmd->add_option("--gamma", cfg.gamma)->group(query);
  cmd->add_option("--epsilon", cfg.epsilon, "0 = 2 * delta")->group(query);
  cmd->add_option("-k", cfg.k)->group(query);
  cmd->add_option("--k-prime", cfg.k_primes, "Borda depths")->group(query)->delimiter(',');
  cmd->add_option("--queries", cfg.queries)->group(query);
  cmd->add_option("--points-per-query", cfg.points_per_query, "0 = whole object")->group(query);
  cmd->add_option("--query-seed", cfg.query_seed)->group(query);
  cmd->add_option("--max-level", cfg.max_level, "0 = automatic")->group(query);

  auto* buffer = "Buffer";
  cmd->add_option("--strategy", cfg.strategy, "ns1 | ns2 | mmlsh")->group(buffer);
  cmd->add_option("--buffer-mb", cfg.buffer_mb)->group(buffer);
  cmd->add_option("--sweep-mb", cfg.sweep_mb)->group(buffer)->delimiter(',');
  cmd->add_option("--splits", cfg.splits)->group(buffer);
  cmd->add_option("--recency-window", cfg.recency_window, "0 = resident count")->group(buffer);
  cmd->add_option("--distance-threshold", cfg.distance_threshold, "0 = 2 * level radius")->group(buffer);
  cmd->add_option("--profile-queries", cfg.profile_queries)->group(buffer);
  cmd->add_option("--regions", cfg.regions)->group(buffer);
  cmd->add_option("--profile-seed", cfg.profile_seed)->group(buffer);
  cmd->add_option("--index-scale", cfg.index_scale, "bucket size multiplier for IO accounting")->group(buffer);
  cmd->add_option("--seek-ms", cfg.seek_ms)->group(buffer);
  cmd->add_option("--read-rate", cfg.read_rate_mb_per_ms, "MB per ms")->group(buffer);
  cmd->add_option("--alg-ms-per-op", cfg.alg_ms_per_op)->group(buffer);
  cmd->add_flag("--calibrate", cfg.calibrate, "measure alg_ms_per_op on this host")->group(buffer);
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  try {
    cfg = initial_config(argc, argv);
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }

  CLI::App app{"Object-level LSH search benchmark"};
  app.require_subcommand(1);
  using Command = BenchReport (*)(const RunConfig&, std::ostream&);
  const std::pair<const char*, Command> verbs[] = {
      {"build", cmd_build},         {"groundtruth", cmd_groundtruth}, {"query", cmd_query},
      {"compare", cmd_compare},     {"buffer-sweep", cmd_buffer_sweep},
  };
  const char* help[] = {"build the index and frequency profile", "compute or reuse exact rankings",
                        "run object queries", "compare against Borda baselines",
                        "IO across buffer sizes and strategies"};
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < std::size(verbs); ++i) {
    subs.push_back(app.add_subcommand(verbs[i].first, help[i]));
    add_options(subs.back(), cfg);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      const auto report = verbs[i].second(cfg, std::cout);
      const std::string prefix = cfg.out_prefix.empty() ? fmt::format("mmlsh_{}", verbs[i].first) : cfg.out_prefix;
      write_csv(report, prefix);
      if (cfg.json) write_json(report, prefix + ".json");
    }
  } catch (const ParameterError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const MappingError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ContractError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
