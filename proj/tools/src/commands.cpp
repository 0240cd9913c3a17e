#include "mmlsh_bench/commands.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mmlsh/errors.hpp"
#include "mmlsh/strategy_report.hpp"

namespace mmlsh::bench {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

bool file_exists(const std::string& path) { return !path.empty() && std::filesystem::exists(path); }

std::string profile_path_for(const RunConfig& cfg) {
  if (!cfg.profile_path.empty()) return cfg.profile_path;
  return cfg.index_path.empty() ? std::string{} : cfg.index_path + ".profile.json";
}

/// Config with every automatic value filled in, as embedded in reports.
nlohmann::json resolved_config(const RunConfig& cfg, const Dataset& data) {
  RunConfig r = cfg;
  r.beta = cfg.resolved_beta(data.object_count());
  r.epsilon = cfg.resolved_epsilon();
  return r;
}

std::string params_note(const LshParams& p) {
  return fmt::format("m={} l={} p1={:.9f} p2={:.9f} z={:.9f} alpha={:.9f} beta={:.6g} delta={:.6g} c={} w={:.6g}",
                     p.m, p.l, p.p1, p.p2, p.z, p.alpha, p.beta, p.delta, p.c, p.w);
}

std::vector<ObjectId> ids_of(const std::vector<ObjectDistance>& v, std::size_t k) {
  std::vector<ObjectId> out;
  for (std::size_t i = 0; i < std::min(k, v.size()); ++i) out.push_back(v[i].object_id);
  return out;
}

std::vector<double> distances_of(const std::vector<ObjectDistance>& v, std::size_t k) {
  std::vector<double> out;
  for (std::size_t i = 0; i < std::min(k, v.size()); ++i) out.push_back(v[i].distance);
  return out;
}

/// Resolves alg_ms_per_op (calibrating when asked) and records it.
QueryOptions prepared_options(RunConfig& cfg, const Dataset& data, const LshIndex& index,
                              const FrequencyProfile* profile, const std::vector<QueryObject>& queries,
                              std::vector<std::string>& notes) {
  auto opts = query_options(cfg, data, profile);
  if (cfg.calibrate && !queries.empty()) {
    cfg.alg_ms_per_op = calibrate_alg_cost(data, index, queries.front(), opts);
    opts.alg_ms_per_op = cfg.alg_ms_per_op;
    notes.push_back(fmt::format("alg_ms_per_op calibrated on this host: {:.6g}", cfg.alg_ms_per_op));
  } else {
    notes.push_back(fmt::format("alg_ms_per_op fixed: {:.6g}", cfg.alg_ms_per_op));
  }
  return opts;
}

QueryRow mmlsh_row(const QueryObject& q, const QueryResult& r, const std::vector<ObjectDistance>& truth,
                   std::size_t k, double wall_ms) {
  QueryRow row;
  row.query_id = q.object_id;
  row.method = "mmLSH";
  const auto ret = distances_of(r.top_k, k);
  const auto tru = distances_of(truth, k);
  const auto ratio = object_ratio(ret, tru);
  row.object_ratio = ratio.value;
  row.infinite_terms = ratio.infinite_terms;
  row.total_ms = r.stats.total_ms;
  row.alg_ms = r.stats.alg_ms;
  row.index_io_ms = r.stats.index_io_ms;
  row.wall_ms = wall_ms;
  row.stop = to_string(r.stop);
  row.levels = r.levels_used;
  row.hits = r.stats.io.buffer_hits;
  row.misses = r.stats.io.buffer_misses;
  row.complete = r.complete && !ratio.partial;
  return row;
}

}  // namespace

Dataset load_dataset(const RunConfig& cfg) {
  if (!cfg.features.empty()) {
    if (cfg.object_map.empty()) throw ParameterError("--features requires --object-map");
    const auto points = load_feature_file(cfg.features);
    if (points.empty()) throw FormatError("feature file " + cfg.features + " is empty");
    return load_object_map(cfg.object_map, points);
  }
  const auto& s = cfg.synth;
  return synth_dataset(s.objects, s.points_per_object, s.dimension, s.spread, s.seed);
}

LshIndex load_or_build_index(const RunConfig& cfg, const Dataset& data, std::vector<std::string>* notes) {
  if (file_exists(cfg.index_path)) {
    auto index = load_index(cfg.index_path);
    if (index.point_count() != data.size() || index.dimension() != data.dimension()) {
      throw FormatError("index " + cfg.index_path + " was built for a different dataset");
    }
    if (notes) notes->push_back("index loaded from " + cfg.index_path);
    return index;
  }
  const auto params = cfg.lsh_params(data.object_count());
  if (notes) notes->push_back("index built in memory");
  return build_index(data, params, cfg.index_seed);
}

FrequencyProfile load_or_build_profile(const RunConfig& cfg, const LshIndex& index, const Dataset& data,
                                       std::vector<std::string>* notes) {
  const auto path = profile_path_for(cfg);
  if (file_exists(path)) {
    auto profile = load_profile(path);
    if (profile.projections.size() != index.projection_count()) {
      throw FormatError("profile " + path + " does not match the index");
    }
    if (notes) notes->push_back("frequency profile loaded from " + path);
    return profile;
  }
  if (notes) notes->push_back("frequency profile built in memory");
  return build_frequency_profile(index, data, cfg.profile_queries, cfg.regions, cfg.profile_seed);
}

void save_profile(const FrequencyProfile& profile, const std::string& path) {
  nlohmann::json j;
  j["query_count"] = profile.query_count;
  j["seed"] = profile.seed;
  j["projections"] = nlohmann::json::array();
  for (const auto& p : profile.projections) {
    j["projections"].push_back({{"occupied", {p.occupied.lo, p.occupied.hi}}, {"region_mean", p.region_mean}});
  }
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  out << j.dump() << '\n';
}

FrequencyProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open profile " + path);
  try {
    nlohmann::json j;
    in >> j;
    FrequencyProfile p;
    p.query_count = j.at("query_count").get<std::size_t>();
    p.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("projections")) {
      ProjectionProfile pp;
      pp.occupied = {e.at("occupied").at(0).get<std::int64_t>(), e.at("occupied").at(1).get<std::int64_t>()};
      pp.region_mean = e.at("region_mean").get<std::vector<double>>();
      if (pp.region_mean.empty()) throw FormatError("profile projection without regions");
      p.projections.push_back(std::move(pp));
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("profile " + path + ": " + e.what());
  }
}

std::string groundtruth_fingerprint(const RunConfig& cfg, const Dataset& data) {
  std::string source = cfg.features.empty()
                           ? fmt::format("synth:{}x{}x{}:{}:{}", cfg.synth.objects, cfg.synth.points_per_object,
                                         cfg.synth.dimension, cfg.synth.spread, cfg.synth.seed)
                           : "files:" + cfg.features + "|" + cfg.object_map;
  return fmt::format("gamma={:.17g};n={};S={};d={};source={};queries={};points_per_query={};query_seed={}",
                     cfg.gamma, data.size(), data.object_count(), data.dimension(), source, cfg.queries,
                     cfg.points_per_query, cfg.query_seed);
}

GroundTruth compute_groundtruth(const Dataset& data, const std::vector<QueryObject>& queries, double gamma,
                                std::string fingerprint) {
  GroundTruth gt;
  gt.fingerprint = std::move(fingerprint);
  for (const auto& q : queries) {
    gt.query_ids.push_back(q.object_id);
    gt.rankings.push_back(exact_knn_objects(q, data, 0, gamma));
  }
  return gt;
}

void save_groundtruth(const GroundTruth& gt, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  out << "# " << gt.fingerprint << '\n';
  out << "query_object_id,rank,object_id,gamma_distance\n";
  for (std::size_t i = 0; i < gt.query_ids.size(); ++i) {
    for (std::size_t r = 0; r < gt.rankings[i].size(); ++r) {
      fmt::print(out, "{},{},{},{:.17g}\n", gt.query_ids[i], r + 1, gt.rankings[i][r].object_id,
                 gt.rankings[i][r].distance);
    }
  }
}

GroundTruth load_groundtruth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open ground truth " + path);
  GroundTruth gt;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line_no == 1) gt.fingerprint = line.size() > 2 ? line.substr(2) : std::string{};
      continue;
    }
    if (line.rfind("query_object_id", 0) == 0) continue;
    std::istringstream row(line);
    std::string a, b, c, d;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c, ',') ||
        !std::getline(row, d)) {
      throw FormatError(fmt::format("{}:{}: expected 4 columns", path, line_no));
    }
    try {
      const auto qid = static_cast<ObjectId>(std::stoul(a));
      const auto rank = std::stoul(b);
      if (gt.query_ids.empty() || gt.query_ids.back() != qid || rank == 1) {
        gt.query_ids.push_back(qid);
        gt.rankings.emplace_back();
      }
      if (rank != gt.rankings.back().size() + 1) throw FormatError("ranks out of order");
      gt.rankings.back().push_back({static_cast<ObjectId>(std::stoul(c)), std::stod(d)});
    } catch (const std::logic_error&) {
      throw FormatError(fmt::format("{}:{}: malformed ground-truth row", path, line_no));
    }
  }
  return gt;
}

GroundTruth load_or_compute_groundtruth(const RunConfig& cfg, const Dataset& data,
                                        const std::vector<QueryObject>& queries, bool* reused) {
  const auto fp = groundtruth_fingerprint(cfg, data);
  if (file_exists(cfg.groundtruth_path)) {
    auto gt = load_groundtruth(cfg.groundtruth_path);
    bool match = gt.fingerprint == fp && gt.query_ids.size() == queries.size();
    for (std::size_t i = 0; match && i < queries.size(); ++i) match = gt.query_ids[i] == queries[i].object_id;
    if (match) {
      if (reused) *reused = true;
      return gt;
    }
  }
  auto gt = compute_groundtruth(data, queries, cfg.gamma, fp);
  if (!cfg.groundtruth_path.empty()) save_groundtruth(gt, cfg.groundtruth_path);
  if (reused) *reused = false;
  return gt;
}

PointRankings load_point_rankings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open rankings " + path);
  PointRankings out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.rfind("query_object_id", 0) == 0) continue;
    std::istringstream row(line);
    std::string a, b, c, d;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c, ',') ||
        !std::getline(row, d)) {
      throw FormatError(fmt::format("{}:{}: expected 4 columns", path, line_no));
    }
    try {
      auto& lists = out[static_cast<ObjectId>(std::stoul(a))];
      const auto point = std::stoul(b);
      const auto rank = std::stoul(c);
      if (lists.size() <= point) lists.resize(point + 1);
      if (rank != lists[point].size() + 1) {
        throw FormatError(fmt::format("{}:{}: ranks must be contiguous from 1", path, line_no));
      }
      lists[point].push_back(static_cast<PointId>(std::stoul(d)));
    } catch (const std::logic_error&) {
      throw FormatError(fmt::format("{}:{}: malformed rankings row", path, line_no));
    }
  }
  return out;
}

std::vector<QueryObject> make_queries(const RunConfig& cfg, const Dataset& data) {
  return sample_queries(data, std::min(cfg.queries, data.object_count()), cfg.points_per_query, cfg.query_seed);
}

QueryOptions query_options(const RunConfig& cfg, const Dataset& data, const FrequencyProfile* profile) {
  QueryOptions o;
  o.gamma = cfg.gamma_params(data.object_count());
  o.k = cfg.k;
  o.scheduler.strategy = parse_strategy(cfg.strategy);
  o.scheduler.query_splits = cfg.splits;
  o.scheduler.recency_window = cfg.recency_window;
  o.scheduler.distance_threshold = cfg.distance_threshold;
  o.profile = profile;
  o.index_scale = cfg.index_scale;
  o.alg_ms_per_op = cfg.alg_ms_per_op;
  o.max_level = cfg.max_level;
  return o;
}

double calibrate_alg_cost(const Dataset& data, const LshIndex& index, const QueryObject& query,
                          const QueryOptions& options) {
  double best = std::numeric_limits<double>::infinity();
  for (int rep = 0; rep < 3; ++rep) {
    const auto start = Clock::now();
    const auto r = knn_objects(query, data, index, options);
    const double ms = elapsed_ms(start);
    if (r.stats.alg_ops() > 0) best = std::min(best, ms / static_cast<double>(r.stats.alg_ops()));
  }
  return std::isfinite(best) ? best : kDefaultAlgMsPerOp;
}

BenchReport cmd_build(const RunConfig& cfg_in, std::ostream& log) {
  RunConfig cfg = cfg_in;
  cfg.validate();
  if (cfg.index_path.empty()) throw ParameterError("build needs --index");
  const auto data = load_dataset(cfg);
  const auto params = cfg.lsh_params(data.object_count());
  const auto index = build_index(data, params, cfg.index_seed);
  save_index(index, cfg.index_path);
  const auto profile = build_frequency_profile(index, data, cfg.profile_queries, cfg.regions, cfg.profile_seed);
  const auto profile_path = profile_path_for(cfg);
  save_profile(profile, profile_path);

  BenchReport report;
  report.command = "build";
  report.config = resolved_config(cfg, data);
  report.notes.push_back(fmt::format("dataset n={} S={} d={}", data.size(), data.object_count(), data.dimension()));
  report.notes.push_back(params_note(params));
  report.notes.push_back("index written to " + cfg.index_path);
  report.notes.push_back("frequency profile written to " + profile_path);
  if (!cfg.quiet) write_text(report, log);
  return report;
}

BenchReport cmd_groundtruth(const RunConfig& cfg_in, std::ostream& log) {
  RunConfig cfg = cfg_in;
  cfg.validate();
  if (cfg.groundtruth_path.empty()) throw ParameterError("groundtruth needs --groundtruth");
  const auto data = load_dataset(cfg);
  const auto queries = make_queries(cfg, data);
  bool reused = false;
  const auto gt = load_or_compute_groundtruth(cfg, data, queries, &reused);

  BenchReport report;
  report.command = "groundtruth";
  report.config = resolved_config(cfg, data);
  report.notes.push_back(reused ? "ground truth reused from " + cfg.groundtruth_path
                                : "ground truth written to " + cfg.groundtruth_path);
  for (std::size_t i = 0; i < gt.query_ids.size(); ++i) {
    const auto& top = gt.rankings[i];
    report.notes.push_back(fmt::format("query {}: nearest {} at {:.6g}", gt.query_ids[i],
                                       top.empty() ? 0 : top[0].object_id, top.empty() ? 0.0 : top[0].distance));
  }
  if (!cfg.quiet) write_text(report, log);
  return report;
}

BenchReport cmd_query(const RunConfig& cfg_in, std::ostream& log) {
  RunConfig cfg = cfg_in;
  cfg.validate();
  BenchReport report;
  report.command = "query";
  const auto data = load_dataset(cfg);
  const auto index = load_or_build_index(cfg, data, &report.notes);
  const auto profile = load_or_build_profile(cfg, index, data, &report.notes);
  const auto queries = make_queries(cfg, data);
  bool reused = false;
  const auto gt = load_or_compute_groundtruth(cfg, data, queries, &reused);
  report.notes.push_back(reused ? "ground truth reused" : "ground truth computed");
  auto opts = prepared_options(cfg, data, index, &profile, queries, report.notes);
  report.notes.push_back(params_note(index.params()));

  const auto strategy = parse_strategy(cfg.strategy);
  BufferState buffer(cfg.buffer_bytes(), policy_for(strategy), cfg.cost_model(), {cfg.recency_window});
  std::ofstream trace;
  if (!cfg.trace_path.empty()) {
    trace.open(cfg.trace_path);
    if (!trace) throw FormatError("cannot write trace " + cfg.trace_path);
    buffer.set_trace(&trace);
  }

  bool warned = false;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    const auto start = Clock::now();
    const auto r = knn_objects(queries[i], data, index, opts, &buffer);
    const double wall = elapsed_ms(start);
    if (r.gamma_bound_violated && !warned) {
      report.notes.push_back(fmt::format("warning: gamma {:.6g} is below the guarantee bound {:.6g}", cfg.gamma,
                                         r.gamma_bound));
      warned = true;
    }
    report.rows.push_back(mmlsh_row(queries[i], r, gt.rankings[i], cfg.k, wall));
  }
  report.config = resolved_config(cfg, data);
  if (!cfg.quiet) write_text(report, log);
  return report;
}

BenchReport cmd_compare(const RunConfig& cfg_in, std::ostream& log) {
  RunConfig cfg = cfg_in;
  cfg.validate();
  BenchReport report;
  report.command = "compare";
  const auto data = load_dataset(cfg);
  const auto index = load_or_build_index(cfg, data, &report.notes);
  const auto profile = load_or_build_profile(cfg, index, data, &report.notes);
  const auto queries = make_queries(cfg, data);
  const auto gt = load_or_compute_groundtruth(cfg, data, queries);
  auto opts = prepared_options(cfg, data, index, &profile, queries, report.notes);
  report.notes.push_back(params_note(index.params()));
  const auto strategy = parse_strategy(cfg.strategy);

  {
    BufferState buffer(cfg.buffer_bytes(), policy_for(strategy), cfg.cost_model(), {cfg.recency_window});
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const auto start = Clock::now();
      const auto r = knn_objects(queries[i], data, index, opts, &buffer);
      report.rows.push_back(mmlsh_row(queries[i], r, gt.rankings[i], cfg.k, elapsed_ms(start)));
    }
  }

  auto borda_row = [&](std::size_t qi, const std::string& method, std::size_t k_prime,
                       const std::vector<std::vector<PointId>>& rankings, double alg_ms, const IoStats& io,
                       bool complete, double wall) {
    const auto top = borda_aggregate(rankings, data, {k_prime, cfg.k});
    std::vector<ObjectId> ids;
    for (const auto& s : top) ids.push_back(s.object_id);
    const auto truth = ids_of(gt.rankings[qi], cfg.k);
    const auto ratio = object_ratio(data, queries[qi], ids, truth, cfg.gamma);
    QueryRow row;
    row.query_id = queries[qi].object_id;
    row.method = method;
    row.k_prime = k_prime;
    row.object_ratio = ratio.value;
    row.infinite_terms = ratio.infinite_terms;
    row.alg_ms = alg_ms;
    row.index_io_ms = io.io_ms;
    row.total_ms = alg_ms + io.io_ms;
    row.wall_ms = wall;
    row.stop = "-";
    row.hits = io.buffer_hits;
    row.misses = io.buffer_misses;
    row.complete = complete && !ratio.partial;
    return row;
  };

  PointRankings external;
  if (!cfg.rankings_path.empty()) {
    external = load_point_rankings(cfg.rankings_path);
    report.notes.push_back("external rankings from " + cfg.rankings_path);
  }

  for (auto k_prime : cfg.k_primes) {
    for (std::size_t i = 0; i < queries.size() && !cfg.rankings_path.empty(); ++i) {
      auto it = external.find(queries[i].object_id);
      if (it == external.end()) {
        throw MappingError(fmt::format("no external rankings for query object {}", queries[i].object_id));
      }
      std::vector<std::vector<PointId>> rankings;
      for (const auto& list : it->second) {
        rankings.emplace_back(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(std::min(k_prime, list.size())));
        for (auto p : rankings.back()) {
          if (p >= data.size()) throw MappingError(fmt::format("external ranking names unknown point {}", p));
        }
      }
      report.rows.push_back(borda_row(i, "External-Borda", k_prime, rankings, 0.0, {}, true, 0.0));
    }
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const auto start = Clock::now();
      std::vector<std::vector<PointId>> rankings;
      for (std::size_t p = 0; p < queries[i].size(); ++p) {
        std::vector<PointId> ids;
        for (const auto& pd : point_knn_linear(queries[i].points.row(p), data, k_prime)) ids.push_back(pd.point);
        rankings.push_back(std::move(ids));
      }
      // One distance per stored point, one comparison per kept candidate.
      const double ops = static_cast<double>(queries[i].size()) *
                         (static_cast<double>(data.size() * data.dimension()) + static_cast<double>(data.size()));
      report.rows.push_back(
          borda_row(i, "Linear-Borda", k_prime, rankings, ops * opts.alg_ms_per_op, {}, true, elapsed_ms(start)));
    }
    BufferState buffer(cfg.buffer_bytes(), EvictionPolicy::Lru, cfg.cost_model());
    for (std::size_t i = 0; i < queries.size(); ++i) {
      const auto start = Clock::now();
      const IoStats before = buffer.io_stats();
      std::vector<std::vector<PointId>> rankings;
      std::uint64_t ops = 0;
      bool complete = true;
      for (std::size_t p = 0; p < queries[i].size(); ++p) {
        const auto r = point_knn_c2lsh(queries[i].points.row(p), data, index, k_prime, &buffer, cfg.index_scale,
                                       cfg.max_level);
        ops += r.collisions + r.distance_ops;
        complete = complete && r.complete;
        std::vector<PointId> ids;
        for (const auto& pd : r.top) ids.push_back(pd.point);
        rankings.push_back(std::move(ids));
      }
      const IoStats& after = buffer.io_stats();
      IoStats io{after.seeks - before.seeks,
                 after.bytes_read - before.bytes_read,
                 after.buffer_hits - before.buffer_hits,
                 after.buffer_misses - before.buffer_misses,
                 after.evictions - before.evictions,
                 after.io_ms - before.io_ms};
      report.rows.push_back(borda_row(i, "C2LSH-Borda", k_prime, rankings,
                                      static_cast<double>(ops) * opts.alg_ms_per_op, io, complete,
                                      elapsed_ms(start)));
    }
  }
  report.config = resolved_config(cfg, data);
  if (!cfg.quiet) write_text(report, log);
  return report;
}

BenchReport cmd_buffer_sweep(const RunConfig& cfg_in, std::ostream& log) {
  RunConfig cfg = cfg_in;
  cfg.validate();
  BenchReport report;
  report.command = "buffer-sweep";
  const auto data = load_dataset(cfg);
  const auto index = load_or_build_index(cfg, data, &report.notes);
  const auto profile = load_or_build_profile(cfg, index, data, &report.notes);
  const auto queries = make_queries(cfg, data);
  auto opts = prepared_options(cfg, data, index, &profile, queries, report.notes);
  report.notes.push_back(params_note(index.params()));

  for (double mb : cfg.sweep_mb) {
    for (auto s : {Strategy::NS1, Strategy::NS2, Strategy::MMLSH}) {
      const auto row = run_strategy(data, index, queries, s, RunConfig::mb_to_bytes(mb), opts, cfg.cost_model());
      report.sweep.push_back({mb, to_string(s), row.io.hit_rate(), row.io.buffer_hits, row.io.buffer_misses,
                              row.io.evictions, row.total_ms, row.alg_ms, row.index_io_ms});
    }
  }
  report.config = resolved_config(cfg, data);
  if (!cfg.quiet) write_text(report, log);
  return report;
}

}  // namespace mmlsh::bench
