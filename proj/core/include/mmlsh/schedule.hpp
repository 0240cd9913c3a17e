#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mmlsh/dataset.hpp"
#include "mmlsh/lsh.hpp"

namespace mmlsh {

enum class Strategy { NS1, NS2, MMLSH };

std::string to_string(Strategy s);
/// Accepts ns1, ns2, mmlsh (any case). Throws ParameterError otherwise.
Strategy parse_strategy(std::string_view name);

struct SchedulerConfig {
  Strategy strategy = Strategy::MMLSH;
  unsigned query_splits = 10;
  /// Criterion 1 window in ticks; 0 = number of resident buckets.
  std::uint64_t recency_window = 0;
  /// Criterion 2 threshold in base buckets; 0 = twice the per-query span.
  std::int64_t distance_threshold = 0;

  void validate() const;
};

/// A query point's position (base bucket) and its level range in one projection.
struct QueryRange {
  std::uint32_t query = 0;
  std::int64_t position = 0;
  BucketRange range;
};

/// Level ranges of every point of `query` in projection `table` at `radius`.
std::vector<QueryRange> query_ranges(const PointMatrix& query, const ProjectionTable& table, std::int64_t radius);

/// Process `range` on behalf of `query`.
struct PlanStep {
  std::uint32_t query = 0;
  BucketRange range;

  bool operator==(const PlanStep&) const = default;
};

/// Read `bucket` once and serve every listed query.
struct BucketStep {
  std::int64_t bucket = 0;
  std::vector<std::uint32_t> queries;

  bool operator==(const BucketStep&) const = default;
};

/// NS1: whole ranges, queries ordered left to right by position; ties keep
/// query order.
std::vector<PlanStep> schedule_ns1(std::span<const QueryRange> ranges);

/// NS2: every non-empty bucket any query needs, ascending, with its users.
std::vector<BucketStep> schedule_ns2(std::span<const QueryRange> ranges, const ProjectionTable& table);

/// Query splitting: each range is cut into `splits` contiguous segments
/// (one per bucket when the range is narrower) and segments are ordered by
/// start, then owner position, then owner, then segment index. splits = 1
/// reproduces schedule_ns1.
std::vector<PlanStep> split_queries(std::span<const QueryRange> ranges, unsigned splits);

/// Access counts of random level-1 point queries, per projection and
/// per non-empty bucket (indexed like ProjectionTable::buckets()).
struct ProfileFootprint {
  std::size_t query_count = 0;
  std::vector<std::vector<std::uint64_t>> bucket_accesses;
};

struct ProjectionProfile {
  BucketRange occupied;
  std::vector<double> region_mean;

  std::size_t region_of(std::int64_t bucket) const noexcept;
  double frequency(std::int64_t bucket) const noexcept { return region_mean[region_of(bucket)]; }

  bool operator==(const ProjectionProfile&) const = default;
};

/// Estimated per-bucket access frequency: every bucket takes the mean
/// footprint of the equal-width region of its projection that contains it.
struct FrequencyProfile {
  std::size_t query_count = 0;
  std::uint64_t seed = 0;
  std::vector<ProjectionProfile> projections;

  double frequency(std::size_t projection, std::int64_t bucket) const {
    return projections.at(projection).frequency(bucket);
  }

  bool operator==(const FrequencyProfile&) const = default;
};

/// Samples `num_queries` synthetic points uniformly from a box matching the
/// per-coordinate mean and variance of `data`, records their level-1 bucket
/// in every projection, and averages the counts over the non-empty buckets
/// of each region. The raw counts are returned through `footprint` when
/// given.
FrequencyProfile build_frequency_profile(const LshIndex& index, const Dataset& data, std::size_t num_queries,
                                         unsigned regions_per_projection, std::uint64_t seed,
                                         ProfileFootprint* footprint = nullptr);

}  // namespace mmlsh
