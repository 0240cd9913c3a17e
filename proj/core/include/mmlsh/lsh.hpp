#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <utility>
#include <vector>

#include "mmlsh/dataset.hpp"

namespace mmlsh {

/// h(x) = floor((a . x + b) / w) with a ~ N(0, I) and b ~ U[0, w).
struct HashFunction {
  std::vector<double> a;
  double b = 0.0;
  double w = 1.0;

  double project(std::span<const float> x) const noexcept;

  bool operator==(const HashFunction&) const = default;
};

/// Base bucket id; floors toward negative infinity.
std::int64_t hash_point(const HashFunction& f, std::span<const float> x);

/// Floor division, the virtual-rehashing map from base bucket to level bucket.
constexpr std::int64_t floor_div(std::int64_t value, std::int64_t divisor) noexcept {
  const std::int64_t q = value / divisor;
  return (value % divisor != 0 && ((value < 0) != (divisor < 0))) ? q - 1 : q;
}

/// Inclusive range of base bucket ids.
struct BucketRange {
  std::int64_t lo = 0;
  std::int64_t hi = -1;

  bool empty() const noexcept { return hi < lo; }
  bool contains(std::int64_t b) const noexcept { return lo <= b && b <= hi; }
  std::int64_t width() const noexcept { return empty() ? 0 : hi - lo + 1; }

  bool operator==(const BucketRange&) const = default;
};

/// Base buckets coalesced into the level-`radius` bucket containing `base`.
constexpr BucketRange level_range(std::int64_t base, std::int64_t radius) noexcept {
  const std::int64_t first = floor_div(base, radius) * radius;
  return {first, first + radius - 1};
}

double standard_normal_cdf(double x) noexcept;

/// Probability that two points at distance s share a bucket of width w.
/// p(0) = 1 and p is strictly decreasing in s.
double collision_probability(double s, double w);

struct LshParams {
  int c = 2;
  double w = 2.184;
  double delta = 0.1;
  double beta = 0.1;
  double p1 = 0.0;
  double p2 = 0.0;
  double z = 0.0;
  double alpha = 0.0;
  unsigned m = 0;
  unsigned l = 0;

  /// Throws ParameterError if p1 <= p2, l > m, m == 0 or c < 2.
  void validate() const;

  bool operator==(const LshParams&) const = default;
};

/// z = sqrt(ln(2/beta) / ln(1/delta)). Kept separate so the convention can
/// be swapped without touching the rest of the derivation.
double z_factor(double delta, double beta);

/// p1 = p(1), p2 = p(c), m = ceil(ln(1/delta) / (2 (p1-p2)^2) * (1+z)^2),
/// alpha = (z p1 + p2) / (1 + z), l = ceil(alpha m).
LshParams derive_params(double delta, double beta, int c, double w);

struct BucketEntry {
  std::int32_t bucket = 0;
  PointId point = 0;

  auto operator<=>(const BucketEntry&) const = default;
};

/// One projection: the hash function and its (bucket, point) entries sorted
/// by bucket, with a directory of distinct buckets for range reads.
class ProjectionTable {
 public:
  ProjectionTable() = default;
  ProjectionTable(HashFunction fn, std::vector<BucketEntry> entries);

  const HashFunction& function() const noexcept { return fn_; }
  std::span<const BucketEntry> entries() const noexcept { return entries_; }

  /// Distinct non-empty base buckets in ascending order.
  std::span<const std::int32_t> buckets() const noexcept { return buckets_; }
  std::span<const BucketEntry> bucket_entries(std::size_t dir_index) const noexcept;
  std::size_t bucket_size(std::size_t dir_index) const noexcept {
    return offsets_[dir_index + 1] - offsets_[dir_index];
  }

  /// Directory positions [first, last) of the non-empty buckets in `range`.
  std::pair<std::size_t, std::size_t> directory_span(BucketRange range) const noexcept;

  /// Entries whose bucket lies in `range`; contiguous in the sorted table.
  std::span<const BucketEntry> range_entries(BucketRange range) const noexcept;

  /// Smallest range covering every occupied bucket.
  BucketRange occupied() const noexcept;

  bool operator==(const ProjectionTable& other) const {
    return fn_ == other.fn_ && entries_ == other.entries_;
  }

 private:
  HashFunction fn_;
  std::vector<BucketEntry> entries_;
  std::vector<std::int32_t> buckets_;
  std::vector<std::uint32_t> offsets_;
};

class LshIndex {
 public:
  LshIndex() = default;
  LshIndex(LshParams params, std::uint64_t seed, std::size_t dimension, std::size_t points,
           std::vector<ProjectionTable> tables);

  const LshParams& params() const noexcept { return params_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t point_count() const noexcept { return points_; }
  std::size_t projection_count() const noexcept { return tables_.size(); }
  const ProjectionTable& table(std::size_t g) const { return tables_.at(g); }

  bool operator==(const LshIndex&) const = default;

 private:
  LshParams params_;
  std::uint64_t seed_ = 0;
  std::size_t dimension_ = 0;
  std::size_t points_ = 0;
  std::vector<ProjectionTable> tables_;
};

/// Projection g draws its function from an independent sub-seed of `seed`,
/// so the index is reproducible whatever order projections are built in.
LshIndex build_index(const Dataset& data, const LshParams& params, std::uint64_t seed);

/// Draws the hash function for projection g without building tables.
HashFunction make_hash_function(std::size_t dimension, double w, std::uint64_t seed, std::size_t g);

void save_index(const LshIndex& index, const std::filesystem::path& path);

/// Throws FormatError on bad magic, version mismatch, truncation or checksum
/// failure.
LshIndex load_index(const std::filesystem::path& path);

}  // namespace mmlsh
