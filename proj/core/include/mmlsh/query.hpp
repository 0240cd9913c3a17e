#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mmlsh/buffer.hpp"
#include "mmlsh/dataset.hpp"
#include "mmlsh/gamma.hpp"
#include "mmlsh/lsh.hpp"
#include "mmlsh/schedule.hpp"

namespace mmlsh {

/// Modeled cost of one algorithmic operation (collision increment,
/// scheduling comparison or coordinate difference), in milliseconds.
inline constexpr double kDefaultAlgMsPerOp = 1e-6;

/// Bytes per stored point id; bucket size = entries * kEntryBytes * scale.
inline constexpr std::uint64_t kEntryBytes = 4;

std::uint64_t bucket_bytes(std::size_t entries, double index_scale) noexcept;

/// Collision counts and candidate bookkeeping for one running object query.
class CollisionState {
 public:
  CollisionState(const Dataset& data, std::size_t query_points, std::size_t projections, unsigned l,
                 const GammaParams& gamma);

  std::size_t query_points() const noexcept { return query_points_; }
  std::uint16_t count(std::size_t query_point, PointId point) const noexcept {
    return counts_[query_point * points_ + point];
  }

  /// Adds one collision for (query_point, e.point) per entry. Returns the
  /// number of increments.
  std::size_t apply(std::size_t query_point, std::span<const BucketEntry> entries);

  /// Pairs of object `object_index` whose count has reached l.
  std::uint64_t qualifying_pairs(std::size_t object_index) const noexcept { return qualifying_[object_index]; }
  double collision_index(std::size_t object_index) const noexcept;

  /// Object indices in the order they became candidates. Membership only grows.
  std::span<const std::uint32_t> candidates() const noexcept { return candidates_; }
  bool is_candidate(std::size_t object_index) const noexcept { return in_list_[object_index] != 0; }

  /// Range already counted for (query point, projection); empty before level 0.
  BucketRange covered(std::size_t query_point, std::size_t g) const noexcept {
    return covered_[query_point * projections_ + g];
  }
  void set_covered(std::size_t query_point, std::size_t g, BucketRange r) noexcept {
    covered_[query_point * projections_ + g] = r;
  }

  /// Memoised exact Gamma-distance of a candidate to the query.
  double gamma_distance_of(std::size_t object_index, const QueryObject& query);
  std::uint64_t distance_evaluations() const noexcept { return distance_evaluations_; }
  std::uint64_t distance_ops() const noexcept { return distance_ops_; }

  unsigned level = 0;  ///< numIter; the level radius is c^level

 private:
  const Dataset* data_;
  GammaParams gamma_;
  std::size_t query_points_;
  std::size_t points_;
  std::size_t projections_;
  unsigned l_;
  std::vector<std::uint16_t> counts_;
  std::vector<std::uint64_t> qualifying_;
  std::vector<std::uint32_t> candidates_;
  std::vector<std::uint8_t> in_list_;
  std::vector<BucketRange> covered_;
  std::vector<double> gdist_;
  std::uint64_t distance_evaluations_ = 0;
  std::uint64_t distance_ops_ = 0;
};

/// Buffer-side inputs for bucket reads.
struct AccessOptions {
  double index_scale = 1.0;
  const FrequencyProfile* profile = nullptr;
  std::size_t query_points = 1;
  std::int64_t distance_threshold = 0;  ///< 0 = 2 * radius
};

/// One projection's pass for one query point at level c^t: reads every
/// non-empty base bucket of the point's level range not yet counted at a
/// lower level, charges each read to `buffer` when given, and records the
/// range as covered. Returns the number of collision increments.
std::size_t count_collisions(CollisionState& state, const QueryObject& query, std::size_t query_point,
                             const LshIndex& index, std::size_t g, unsigned t, BufferState* buffer,
                             const AccessOptions& access = {});

/// |CL| >= k + beta * S.
bool check_t1(const CollisionState& state, std::size_t k, double beta, std::size_t object_count);

/// At least k candidates whose exact Gamma-distance is at most c * radius.
bool check_t2(CollisionState& state, const QueryObject& query, std::size_t k, int c, double radius);

/// sqrt(max(ln(1/delta) / ((epsilon-delta)^2 |Q| L), 2 ln(2/beta) / (beta^2 |Q| L))).
/// Throws ParameterError when epsilon <= delta or an input is out of range.
double gamma_min_bound(std::size_t query_size, std::size_t min_object_size, double delta, double epsilon,
                       double beta);

enum class StopCondition { T1, T2, Exhausted };
std::string to_string(StopCondition s);

struct ObjectDistance {
  ObjectId object_id = 0;
  double distance = 0.0;

  bool operator==(const ObjectDistance&) const = default;
};

struct QueryStats {
  std::uint64_t bucket_reads = 0;  ///< buffer accesses issued
  std::uint64_t collisions = 0;
  std::uint64_t schedule_ops = 0;
  std::uint64_t distance_evaluations = 0;
  std::uint64_t distance_ops = 0;
  IoStats io;  ///< delta of the buffer's counters over this query
  double alg_ms = 0.0;
  double index_io_ms = 0.0;
  double total_ms = 0.0;

  std::uint64_t alg_ops() const noexcept { return collisions + schedule_ops + distance_ops; }
  bool operator==(const QueryStats&) const = default;
};

struct QueryResult {
  std::vector<ObjectDistance> top_k;
  StopCondition stop = StopCondition::Exhausted;
  bool complete = false;  ///< false when fewer than k objects could be returned
  unsigned levels_used = 0;
  std::size_t candidate_count = 0;
  double gamma_bound = 0.0;
  bool gamma_bound_violated = false;
  QueryStats stats;
};

struct QueryOptions {
  GammaParams gamma;
  std::size_t k = 25;
  SchedulerConfig scheduler;
  /// Required for MMLSH eviction estimates; without it every estimate is 0.
  const FrequencyProfile* profile = nullptr;
  double index_scale = 1.0;
  double alg_ms_per_op = kDefaultAlgMsPerOp;
  /// Highest level exponent; 0 picks the level whose range spans every
  /// 32-bit bucket id.
  unsigned max_level = 0;
};

/// Object k-NN with collision counting and virtual rehashing. T2 is tested
/// at the start of each level, T1 after each projection pass; the result
/// is the k candidates of smallest exact Gamma-distance (ties by object
/// id). With `buffer` null a private unbounded buffer is used.
QueryResult knn_objects(const QueryObject& query, const Dataset& data, const LshIndex& index,
                        const QueryOptions& options, BufferState* buffer = nullptr);

}  // namespace mmlsh
