#include "mmlsh/lsh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mmlsh/errors.hpp"
#include "mmlsh/random.hpp"

namespace mmlsh {

double HashFunction::project(std::span<const float> x) const noexcept {
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * static_cast<double>(x[i]);
  return dot;
}

std::int64_t hash_point(const HashFunction& f, std::span<const float> x) {
  if (x.size() != f.a.size()) throw ContractError("hash_point: dimension mismatch");
  return static_cast<std::int64_t>(std::floor((f.project(x) + f.b) / f.w));
}

double standard_normal_cdf(double x) noexcept { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double collision_probability(double s, double w) {
  if (!(w > 0.0)) throw ParameterError("bucket width must be positive");
  if (!(s >= 0.0)) throw ParameterError("distance must be non-negative");
  if (s == 0.0) return 1.0;
  const double ratio = w / s;
  const double tail = 2.0 * standard_normal_cdf(-ratio);
  const double body = 2.0 / (std::sqrt(2.0 * std::numbers::pi) * ratio) * (1.0 - std::exp(-ratio * ratio / 2.0));
  return 1.0 - tail - body;
}

void LshParams::validate() const {
  if (c < 2) throw ParameterError("approximation ratio c must be an integer >= 2");
  if (!(w > 0.0)) throw ParameterError("bucket width must be positive");
  if (!(p1 > p2)) throw ParameterError("degenerate hash family: p1 <= p2");
  if (m == 0) throw ParameterError("projection count m must be at least 1");
  if (l == 0 || l > m) throw ParameterError("collision threshold l must lie in [1, m]");
}

double z_factor(double delta, double beta) { return std::sqrt(std::log(2.0 / beta) / std::log(1.0 / delta)); }

LshParams derive_params(double delta, double beta, int c, double w) {
  if (!(delta > 0.0 && delta < 1.0)) throw ParameterError("delta must lie in (0, 1)");
  if (!(beta > 0.0 && beta < 1.0)) throw ParameterError("beta must lie in (0, 1)");
  if (c < 2) throw ParameterError("approximation ratio c must be an integer >= 2");
  if (!(w > 0.0)) throw ParameterError("bucket width must be positive");

  LshParams p;
  p.c = c;
  p.w = w;
  p.delta = delta;
  p.beta = beta;
  p.p1 = collision_probability(1.0, w);
  p.p2 = collision_probability(static_cast<double>(c), w);
  if (!(p.p1 > p.p2)) throw ParameterError("degenerate hash family: p1 <= p2");
  p.z = z_factor(delta, beta);
  const double gap = p.p1 - p.p2;
  p.m = static_cast<unsigned>(std::ceil(std::log(1.0 / delta) / (2.0 * gap * gap) * (1.0 + p.z) * (1.0 + p.z)));
  p.alpha = (p.z * p.p1 + p.p2) / (1.0 + p.z);
  p.l = static_cast<unsigned>(std::ceil(p.alpha * p.m));
  p.validate();
  return p;
}

ProjectionTable::ProjectionTable(HashFunction fn, std::vector<BucketEntry> entries)
    : fn_(std::move(fn)), entries_(std::move(entries)) {
  if (!std::is_sorted(entries_.begin(), entries_.end())) std::sort(entries_.begin(), entries_.end());
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i == 0 || entries_[i].bucket != entries_[i - 1].bucket) {
      buckets_.push_back(entries_[i].bucket);
      offsets_.push_back(static_cast<std::uint32_t>(i));
    }
  }
  offsets_.push_back(static_cast<std::uint32_t>(entries_.size()));
}

std::span<const BucketEntry> ProjectionTable::bucket_entries(std::size_t dir_index) const noexcept {
  return std::span<const BucketEntry>(entries_).subspan(offsets_[dir_index], bucket_size(dir_index));
}

std::pair<std::size_t, std::size_t> ProjectionTable::directory_span(BucketRange range) const noexcept {
  if (range.empty()) return {0, 0};
  auto first = std::lower_bound(buckets_.begin(), buckets_.end(), range.lo);
  auto last = std::upper_bound(first, buckets_.end(), range.hi);
  return {static_cast<std::size_t>(first - buckets_.begin()), static_cast<std::size_t>(last - buckets_.begin())};
}

std::span<const BucketEntry> ProjectionTable::range_entries(BucketRange range) const noexcept {
  auto [first, last] = directory_span(range);
  if (first == last) return {};
  return std::span<const BucketEntry>(entries_).subspan(offsets_[first], offsets_[last] - offsets_[first]);
}

BucketRange ProjectionTable::occupied() const noexcept {
  if (buckets_.empty()) return {};
  return {buckets_.front(), buckets_.back()};
}

LshIndex::LshIndex(LshParams params, std::uint64_t seed, std::size_t dimension, std::size_t points,
                   std::vector<ProjectionTable> tables)
    : params_(params), seed_(seed), dimension_(dimension), points_(points), tables_(std::move(tables)) {}

HashFunction make_hash_function(std::size_t dimension, double w, std::uint64_t seed, std::size_t g) {
  Rng rng(mix_seed(seed, g));
  HashFunction fn;
  fn.w = w;
  fn.a.resize(dimension);
  for (auto& v : fn.a) v = rng.normal();
  fn.b = rng.uniform() * w;
  return fn;
}

LshIndex build_index(const Dataset& data, const LshParams& params, std::uint64_t seed) {
  if (data.size() == 0) throw ContractError("cannot index an empty dataset");
  params.validate();

  std::vector<ProjectionTable> tables;
  tables.reserve(params.m);
  for (std::size_t g = 0; g < params.m; ++g) {
    auto fn = make_hash_function(data.dimension(), params.w, seed, g);
    std::vector<BucketEntry> entries(data.size());
    for (PointId i = 0; i < data.size(); ++i) {
      const auto bucket = hash_point(fn, data.point(i));
      if (bucket < std::numeric_limits<std::int32_t>::min() || bucket > std::numeric_limits<std::int32_t>::max()) {
        throw ParameterError("bucket id of point " + std::to_string(i) + " overflows 32 bits; rescale the data");
      }
      entries[i] = {static_cast<std::int32_t>(bucket), i};
    }
    std::sort(entries.begin(), entries.end());
    tables.emplace_back(std::move(fn), std::move(entries));
  }
  return LshIndex(params, seed, data.dimension(), data.size(), std::move(tables));
}

}  // namespace mmlsh
