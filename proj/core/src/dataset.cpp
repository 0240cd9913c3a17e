#include "mmlsh/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>

#include "mmlsh/errors.hpp"
#include "mmlsh/random.hpp"

namespace mmlsh {

static_assert(std::endian::native == std::endian::little,
              "vector files are little-endian; big-endian hosts need byte swapping");

PointMatrix::PointMatrix(std::size_t dim, std::vector<float> data) : dim_(dim), data_(std::move(data)) {
  if (dim_ == 0 || data_.size() % dim_ != 0) {
    throw ContractError("point matrix data is not a multiple of its dimension");
  }
}

void PointMatrix::push_back(std::span<const float> coords) {
  if (coords.size() != dim_) throw ContractError("point dimension mismatch");
  data_.insert(data_.end(), coords.begin(), coords.end());
}

Dataset::Dataset(std::size_t dimension, std::span<const FeatureVector> points) : points_(dimension) {
  if (dimension == 0) throw ContractError("dataset dimension must be at least 1");
  points_.reserve(points.size());
  owner_index_.resize(points.size());

  std::map<ObjectId, std::vector<PointId>> groups;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (p.point_id != i) throw ContractError("point ids must be positional");
    if (p.coords.size() != dimension) {
      throw ContractError("point " + std::to_string(i) + " has dimension " +
                          std::to_string(p.coords.size()) + ", expected " + std::to_string(dimension));
    }
    if (p.object_id == kUnassignedObject) {
      throw MappingError("point " + std::to_string(i) + " is not mapped to an object");
    }
    points_.push_back(p.coords);
    groups[p.object_id].push_back(p.point_id);
  }

  objects_.reserve(groups.size());
  object_points_.reserve(groups.size());
  for (auto& [id, ids] : groups) {
    const auto index = static_cast<std::uint32_t>(objects_.size());
    PointMatrix block(dimension);
    block.reserve(ids.size());
    for (PointId pid : ids) {
      owner_index_[pid] = index;
      block.push_back(points_.row(pid));
    }
    object_lookup_.emplace(id, index);
    objects_.push_back({id, std::move(ids)});
    object_points_.push_back(std::move(block));
  }
}

std::optional<std::size_t> Dataset::find_object(ObjectId id) const {
  if (auto it = object_lookup_.find(id); it != object_lookup_.end()) return it->second;
  return std::nullopt;
}

std::size_t Dataset::min_object_size() const noexcept {
  std::size_t smallest = 0;
  for (const auto& obj : objects_) {
    if (smallest == 0 || obj.point_ids.size() < smallest) smallest = obj.point_ids.size();
  }
  return smallest;
}

QueryObject Dataset::query_from_object(std::size_t index) const {
  return {objects_.at(index).object_id, object_points_.at(index)};
}

std::vector<FeatureVector> Dataset::to_feature_vectors() const {
  std::vector<FeatureVector> out(size());
  for (PointId i = 0; i < size(); ++i) {
    auto row = point(i);
    out[i] = {i, owner(i), {row.begin(), row.end()}};
  }
  return out;
}

std::vector<FeatureVector> load_feature_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open vector file " + path.string());

  std::vector<FeatureVector> out;
  std::int32_t expected_dim = -1;
  for (std::size_t record = 0;; ++record) {
    std::int32_t dim = 0;
    in.read(reinterpret_cast<char*>(&dim), sizeof dim);
    if (in.gcount() == 0 && in.eof()) break;
    if (in.gcount() != sizeof dim) {
      throw FormatError("record " + std::to_string(record) + ": truncated dimension header");
    }
    if (dim <= 0) {
      throw FormatError("record " + std::to_string(record) + ": invalid dimension " + std::to_string(dim));
    }
    if (expected_dim < 0) expected_dim = dim;
    if (dim != expected_dim) {
      throw FormatError("record " + std::to_string(record) + ": dimension " + std::to_string(dim) +
                        " differs from dataset dimension " + std::to_string(expected_dim));
    }
    FeatureVector v;
    v.point_id = static_cast<PointId>(record);
    v.coords.resize(static_cast<std::size_t>(dim));
    const auto bytes = static_cast<std::streamsize>(sizeof(float) * v.coords.size());
    in.read(reinterpret_cast<char*>(v.coords.data()), bytes);
    if (in.gcount() != bytes) {
      throw FormatError("record " + std::to_string(record) + ": truncated payload");
    }
    out.push_back(std::move(v));
  }
  return out;
}

void write_feature_file(const std::filesystem::path& path, std::span<const FeatureVector> vectors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write vector file " + path.string());
  for (const auto& v : vectors) {
    const auto dim = static_cast<std::int32_t>(v.coords.size());
    out.write(reinterpret_cast<const char*>(&dim), sizeof dim);
    out.write(reinterpret_cast<const char*>(v.coords.data()),
              static_cast<std::streamsize>(sizeof(float) * v.coords.size()));
  }
  if (!out) throw FormatError("write failed for " + path.string());
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_int(std::string_view s, T& value) {
  s = trim(s);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

Dataset load_object_map(const std::filesystem::path& path, std::span<const FeatureVector> points) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open object map " + path.string());

  std::vector<FeatureVector> mapped(points.begin(), points.end());
  std::vector<bool> seen(points.size(), false);
  std::string line;
  for (std::size_t line_no = 1; std::getline(in, line); ++line_no) {
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto comma = text.find(',');
    if (comma == std::string_view::npos) {
      throw FormatError("object map line " + std::to_string(line_no) + ": expected point_id,object_id");
    }
    std::uint64_t pid = 0;
    std::uint32_t oid = 0;
    if (!parse_int(text.substr(0, comma), pid) || !parse_int(text.substr(comma + 1), oid)) {
      if (line_no == 1) continue;  // header
      throw FormatError("object map line " + std::to_string(line_no) + ": non-integer field");
    }
    if (pid >= points.size()) {
      throw MappingError("object map line " + std::to_string(line_no) + ": point " + std::to_string(pid) +
                         " does not exist");
    }
    if (seen[pid]) {
      throw MappingError("object map line " + std::to_string(line_no) + ": point " + std::to_string(pid) +
                         " mapped twice");
    }
    if (oid == kUnassignedObject) {
      throw MappingError("object map line " + std::to_string(line_no) + ": reserved object id");
    }
    seen[pid] = true;
    mapped[pid].object_id = oid;
  }
  for (std::size_t i = 0; i < seen.size(); ++i) {
    if (!seen[i]) throw MappingError("point " + std::to_string(i) + " is not mapped to an object");
  }
  const std::size_t dim = points.empty() ? 1 : points.front().coords.size();
  return Dataset(dim, mapped);
}

void write_object_map(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write object map " + path.string());
  out << "point_id,object_id\n";
  for (PointId i = 0; i < data.size(); ++i) out << i << ',' << data.owner(i) << '\n';
}

Dataset synth_dataset(std::size_t objects, std::size_t points_per_object, std::size_t dimension,
                      double cluster_spread, std::uint64_t seed) {
  if (objects == 0 || points_per_object == 0 || dimension == 0) {
    throw ContractError("synthetic dataset counts must be at least 1");
  }
  if (!(cluster_spread >= 0.0)) throw ContractError("cluster spread must be non-negative");

  Rng rng(seed);
  std::vector<FeatureVector> points;
  points.reserve(objects * points_per_object);
  std::vector<double> centre(dimension);
  for (std::size_t o = 0; o < objects; ++o) {
    for (auto& c : centre) c = rng.normal();
    for (std::size_t p = 0; p < points_per_object; ++p) {
      FeatureVector v;
      v.point_id = static_cast<PointId>(points.size());
      v.object_id = static_cast<ObjectId>(o);
      v.coords.resize(dimension);
      for (std::size_t j = 0; j < dimension; ++j) {
        v.coords[j] = static_cast<float>(centre[j] + cluster_spread * rng.normal());
      }
      points.push_back(std::move(v));
    }
  }
  return Dataset(dimension, points);
}

std::vector<QueryObject> sample_queries(const Dataset& data, std::size_t count, std::size_t points_per_query,
                                        std::uint64_t seed) {
  if (count > data.object_count()) {
    throw ContractError("cannot sample " + std::to_string(count) + " queries from " +
                        std::to_string(data.object_count()) + " objects");
  }
  Rng rng(seed);
  std::vector<std::size_t> order(data.object_count());
  std::iota(order.begin(), order.end(), std::size_t{0});
  // Partial Fisher-Yates: the first `count` slots are the sample.
  for (std::size_t i = 0; i < count; ++i) {
    std::swap(order[i], order[i + rng.below(order.size() - i)]);
  }

  std::vector<QueryObject> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const auto& block = data.object_points(order[i]);
    QueryObject q{data.object(order[i]).object_id, PointMatrix(data.dimension())};
    if (points_per_query == 0 || points_per_query >= block.rows()) {
      q.points = block;
    } else {
      std::vector<std::size_t> rows(block.rows());
      std::iota(rows.begin(), rows.end(), std::size_t{0});
      for (std::size_t j = 0; j < points_per_query; ++j) {
        std::swap(rows[j], rows[j + rng.below(rows.size() - j)]);
      }
      rows.resize(points_per_query);
      std::sort(rows.begin(), rows.end());
      for (auto r : rows) q.points.push_back(block.row(r));
    }
    out.push_back(std::move(q));
  }
  return out;
}

}  // namespace mmlsh
