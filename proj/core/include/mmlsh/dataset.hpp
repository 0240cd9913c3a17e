#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace mmlsh {

using PointId = std::uint32_t;
using ObjectId = std::uint32_t;

inline constexpr ObjectId kUnassignedObject = std::numeric_limits<ObjectId>::max();

/// One d-dimensional feature vector and the object that owns it.
struct FeatureVector {
  PointId point_id = 0;
  ObjectId object_id = kUnassignedObject;
  std::vector<float> coords;

  bool operator==(const FeatureVector&) const = default;
};

/// Row-major block of points that share one dimension.
class PointMatrix {
 public:
  PointMatrix() = default;
  explicit PointMatrix(std::size_t dim) : dim_(dim) {}
  PointMatrix(std::size_t dim, std::vector<float> data);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t rows() const noexcept { return dim_ == 0 ? 0 : data_.size() / dim_; }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const float> row(std::size_t i) const noexcept {
    return {data_.data() + i * dim_, dim_};
  }
  std::span<const float> data() const noexcept { return data_; }

  void push_back(std::span<const float> coords);
  void reserve(std::size_t rows) { data_.reserve(rows * dim_); }

  bool operator==(const PointMatrix&) const = default;

 private:
  std::size_t dim_ = 0;
  std::vector<float> data_;
};

/// An object id plus the points associated with it. point_ids is ascending.
struct MultimediaObject {
  ObjectId object_id = 0;
  std::vector<PointId> point_ids;
};

/// A query object: its id (the source object when sampled from a dataset)
/// and its own points.
struct QueryObject {
  ObjectId object_id = 0;
  PointMatrix points;

  std::size_t size() const noexcept { return points.rows(); }
};

/// Immutable collection of points grouped into objects.
///
/// Points keep their positional ids. Objects are stored in ascending
/// object_id order and their points are additionally kept contiguous so
/// pairwise object computations can stream them.
class Dataset {
 public:
  Dataset() = default;

  /// Builds a dataset from points whose object_id fields are assigned.
  /// Throws MappingError if any point is unassigned, ContractError on
  /// dimension or point-id inconsistencies.
  Dataset(std::size_t dimension, std::span<const FeatureVector> points);

  std::size_t dimension() const noexcept { return points_.dim(); }
  std::size_t size() const noexcept { return points_.rows(); }
  std::size_t object_count() const noexcept { return objects_.size(); }

  std::span<const float> point(PointId id) const noexcept { return points_.row(id); }
  const PointMatrix& points() const noexcept { return points_; }

  /// Dense index (into objects()) of the object owning a point.
  std::uint32_t owner_index(PointId id) const noexcept { return owner_index_[id]; }
  ObjectId owner(PointId id) const noexcept { return objects_[owner_index_[id]].object_id; }

  const std::vector<MultimediaObject>& objects() const noexcept { return objects_; }
  const MultimediaObject& object(std::size_t index) const { return objects_.at(index); }
  const PointMatrix& object_points(std::size_t index) const { return object_points_.at(index); }
  std::optional<std::size_t> find_object(ObjectId id) const;

  /// Smallest object cardinality (L in the Gamma lower bound).
  std::size_t min_object_size() const noexcept;

  /// Query object built from all points of the object at `index`.
  QueryObject query_from_object(std::size_t index) const;

  std::vector<FeatureVector> to_feature_vectors() const;

 private:
  PointMatrix points_;
  std::vector<std::uint32_t> owner_index_;
  std::vector<MultimediaObject> objects_;
  std::vector<PointMatrix> object_points_;
  std::unordered_map<ObjectId, std::size_t> object_lookup_;
};

/// Reads the little-endian `int32 d, d x float32` record format. point_id is
/// assigned from file order; object ids are left unassigned.
std::vector<FeatureVector> load_feature_file(const std::filesystem::path& path);

void write_feature_file(const std::filesystem::path& path, std::span<const FeatureVector> vectors);

/// Reads `point_id,object_id` rows (optional header) and groups `points`.
Dataset load_object_map(const std::filesystem::path& path, std::span<const FeatureVector> points);

void write_object_map(const std::filesystem::path& path, const Dataset& data);

/// Per-object Gaussian clusters: centres ~ N(0, I), points ~ centre + spread * N(0, I).
Dataset synth_dataset(std::size_t objects, std::size_t points_per_object, std::size_t dimension,
                      double cluster_spread, std::uint64_t seed);

/// Picks `count` distinct objects as queries. When points_per_query is
/// non-zero and smaller than an object, its points are subsampled without
/// replacement.
std::vector<QueryObject> sample_queries(const Dataset& data, std::size_t count,
                                        std::size_t points_per_query, std::uint64_t seed);

}  // namespace mmlsh
