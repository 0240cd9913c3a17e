#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mmlsh/buffer.hpp"
#include "mmlsh/dataset.hpp"
#include "mmlsh/lsh.hpp"
#include "mmlsh/query.hpp"

namespace mmlsh {

/// Exact object k-NN by Gamma-distance: every object ranked ascending, ties
/// by object id, truncated to k (k = 0 keeps the full ranking).
std::vector<ObjectDistance> exact_knn_objects(const QueryObject& query, const Dataset& data, std::size_t k,
                                              double gamma);

struct PointDistance {
  PointId point = 0;
  double distance = 0.0;

  bool operator==(const PointDistance&) const = default;
};

/// Exact Euclidean top-k' points, ties by point id.
std::vector<PointDistance> point_knn_linear(std::span<const float> q, const Dataset& data, std::size_t k_prime);

struct PointQueryResult {
  std::vector<PointDistance> top;
  bool complete = false;
  unsigned levels_used = 0;
  std::uint64_t collisions = 0;
  std::uint64_t distance_ops = 0;
  std::uint64_t bucket_reads = 0;
};

/// Collision-counting point k'-NN over the object index. Points reaching l
/// collisions become candidates; the search stops once k' + beta * n
/// candidates exist (after a projection pass) or k' candidates lie within
/// c * R (start of a level). Bucket reads are charged to `buffer` when
/// given, in query order.
PointQueryResult point_knn_c2lsh(std::span<const float> q, const Dataset& data, const LshIndex& index,
                                 std::size_t k_prime, BufferState* buffer = nullptr, double index_scale = 1.0,
                                 unsigned max_level = 0);

struct BordaConfig {
  std::size_t k_prime = 50;
  std::size_t k = 25;

  void validate() const;
};

struct ObjectScore {
  ObjectId object_id = 0;
  std::uint64_t score = 0;

  bool operator==(const ObjectScore&) const = default;
};

/// Positional Borda count: the point at 1-based rank r of any ranking adds
/// k' - r + 1 to its owner. Objects sort by descending score then ascending
/// id; objects never retrieved score 0 and fill the tail when fewer than k
/// objects scored.
std::vector<ObjectScore> borda_aggregate(std::span<const std::vector<PointId>> rankings, const Dataset& data,
                                         const BordaConfig& config);

}  // namespace mmlsh
