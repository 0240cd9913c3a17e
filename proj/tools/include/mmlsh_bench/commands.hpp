#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mmlsh/baselines.hpp"
#include "mmlsh/dataset.hpp"
#include "mmlsh/lsh.hpp"
#include "mmlsh/schedule.hpp"
#include "mmlsh_bench/config.hpp"
#include "mmlsh_bench/report.hpp"

namespace mmlsh::bench {

/// Exit codes shared by the driver.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;

/// Feature file + object map when given, otherwise the synthetic settings.
Dataset load_dataset(const RunConfig& cfg);

/// Loads the index file when `cfg.index_path` names an existing file,
/// otherwise builds in memory.
LshIndex load_or_build_index(const RunConfig& cfg, const Dataset& data, std::vector<std::string>* notes = nullptr);

FrequencyProfile load_or_build_profile(const RunConfig& cfg, const LshIndex& index, const Dataset& data,
                                       std::vector<std::string>* notes = nullptr);

void save_profile(const FrequencyProfile& profile, const std::string& path);
FrequencyProfile load_profile(const std::string& path);

/// Full exact ranking for each query.
struct GroundTruth {
  std::string fingerprint;
  std::vector<ObjectId> query_ids;
  std::vector<std::vector<ObjectDistance>> rankings;
};

/// Identifies the dataset, query sample and Gamma a cache was built for.
std::string groundtruth_fingerprint(const RunConfig& cfg, const Dataset& data);
GroundTruth compute_groundtruth(const Dataset& data, const std::vector<QueryObject>& queries, double gamma,
                                std::string fingerprint);
void save_groundtruth(const GroundTruth& gt, const std::string& path);
GroundTruth load_groundtruth(const std::string& path);

/// Reuses `cfg.groundtruth_path` when its fingerprint matches, otherwise
/// computes (and writes it when a path is set). `reused` reports which.
GroundTruth load_or_compute_groundtruth(const RunConfig& cfg, const Dataset& data,
                                        const std::vector<QueryObject>& queries, bool* reused = nullptr);

/// Per query object, one ranked point list per query point, read from CSV
/// `query_object_id,query_point,rank,point_id` (1-based contiguous ranks,
/// optional header). Lets point retrievers outside this library be scored
/// through the same Borda aggregation.
using PointRankings = std::map<ObjectId, std::vector<std::vector<PointId>>>;
PointRankings load_point_rankings(const std::string& path);

std::vector<QueryObject> make_queries(const RunConfig& cfg, const Dataset& data);
QueryOptions query_options(const RunConfig& cfg, const Dataset& data, const FrequencyProfile* profile);

/// Measures the host cost of one algorithmic operation in ms.
double calibrate_alg_cost(const Dataset& data, const LshIndex& index, const QueryObject& query,
                          const QueryOptions& options);

BenchReport cmd_build(const RunConfig& cfg, std::ostream& log);
BenchReport cmd_groundtruth(const RunConfig& cfg, std::ostream& log);
BenchReport cmd_query(const RunConfig& cfg, std::ostream& log);
BenchReport cmd_compare(const RunConfig& cfg, std::ostream& log);
BenchReport cmd_buffer_sweep(const RunConfig& cfg, std::ostream& log);

}  // namespace mmlsh::bench
