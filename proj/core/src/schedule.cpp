#include "mmlsh/schedule.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <tuple>

#include "mmlsh/errors.hpp"
#include "mmlsh/random.hpp"

namespace mmlsh {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::NS1: return "NS1";
    case Strategy::NS2: return "NS2";
    case Strategy::MMLSH: return "MMLSH";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "ns1" || lower == "lru") return Strategy::NS1;
  if (lower == "ns2" || lower == "per-bucket") return Strategy::NS2;
  if (lower == "mmlsh") return Strategy::MMLSH;
  throw ParameterError("unknown strategy '" + std::string(name) + "' (expected ns1, ns2 or mmlsh)");
}

void SchedulerConfig::validate() const {
  if (query_splits == 0) throw ParameterError("query_splits must be at least 1");
  if (distance_threshold < 0) throw ParameterError("distance_threshold must be non-negative");
}

std::vector<QueryRange> query_ranges(const PointMatrix& query, const ProjectionTable& table, std::int64_t radius) {
  std::vector<QueryRange> out;
  out.reserve(query.rows());
  for (std::size_t i = 0; i < query.rows(); ++i) {
    const auto base = hash_point(table.function(), query.row(i));
    out.push_back({static_cast<std::uint32_t>(i), base, level_range(base, radius)});
  }
  return out;
}

std::vector<PlanStep> schedule_ns1(std::span<const QueryRange> ranges) {
  std::vector<QueryRange> order(ranges.begin(), ranges.end());
  std::stable_sort(order.begin(), order.end(),
                   [](const QueryRange& a, const QueryRange& b) { return a.position < b.position; });
  std::vector<PlanStep> plan;
  plan.reserve(order.size());
  for (const auto& r : order) plan.push_back({r.query, r.range});
  return plan;
}

std::vector<BucketStep> schedule_ns2(std::span<const QueryRange> ranges, const ProjectionTable& table) {
  // (bucket, query) demand pairs over non-empty buckets.
  std::vector<std::pair<std::int64_t, std::uint32_t>> demand;
  const auto buckets = table.buckets();
  for (const auto& r : ranges) {
    auto [first, last] = table.directory_span(r.range);
    for (auto d = first; d < last; ++d) demand.emplace_back(buckets[d], r.query);
  }
  std::sort(demand.begin(), demand.end());
  std::vector<BucketStep> plan;
  for (const auto& [bucket, query] : demand) {
    if (plan.empty() || plan.back().bucket != bucket) plan.push_back({bucket, {}});
    plan.back().queries.push_back(query);
  }
  return plan;
}

std::vector<PlanStep> split_queries(std::span<const QueryRange> ranges, unsigned splits) {
  if (splits == 0) throw ParameterError("splits must be at least 1");
  struct Segment {
    std::int64_t start;
    std::int64_t position;
    std::uint32_t query;
    unsigned index;
    BucketRange range;
  };
  std::vector<Segment> segments;
  for (const auto& r : ranges) {
    if (r.range.empty()) continue;
    const std::int64_t width = r.range.width();
    const std::int64_t parts = std::min<std::int64_t>(splits, width);
    for (std::int64_t s = 0; s < parts; ++s) {
      // Balanced partition: segment s covers [lo + s*W/P, lo + (s+1)*W/P).
      const std::int64_t lo = r.range.lo + s * width / parts;
      const std::int64_t hi = r.range.lo + (s + 1) * width / parts - 1;
      segments.push_back({lo, r.position, r.query, static_cast<unsigned>(s), {lo, hi}});
    }
  }
  std::sort(segments.begin(), segments.end(), [](const Segment& a, const Segment& b) {
    return std::tie(a.start, a.position, a.query, a.index) < std::tie(b.start, b.position, b.query, b.index);
  });
  std::vector<PlanStep> plan;
  plan.reserve(segments.size());
  for (const auto& s : segments) plan.push_back({s.query, s.range});
  return plan;
}

std::size_t ProjectionProfile::region_of(std::int64_t bucket) const noexcept {
  const std::size_t regions = region_mean.size();
  if (occupied.empty() || bucket <= occupied.lo) return 0;
  if (bucket >= occupied.hi) return regions - 1;
  const auto offset = static_cast<long double>(bucket - occupied.lo);
  const auto width = static_cast<long double>(occupied.width());
  const auto r = static_cast<std::size_t>(offset * regions / width);
  return std::min(r, regions - 1);
}

FrequencyProfile build_frequency_profile(const LshIndex& index, const Dataset& data, std::size_t num_queries,
                                         unsigned regions_per_projection, std::uint64_t seed,
                                         ProfileFootprint* footprint) {
  if (regions_per_projection == 0) throw ParameterError("regions per projection must be at least 1");
  if (data.dimension() != index.dimension()) throw ContractError("profile dataset does not match index");

  // Uniform box with the data's per-coordinate mean and variance.
  const std::size_t dim = data.dimension();
  std::vector<double> mean(dim, 0.0), half_width(dim, 0.0);
  for (PointId i = 0; i < data.size(); ++i) {
    auto p = data.point(i);
    for (std::size_t j = 0; j < dim; ++j) mean[j] += p[j];
  }
  for (auto& m : mean) m /= static_cast<double>(std::max<std::size_t>(1, data.size()));
  for (PointId i = 0; i < data.size(); ++i) {
    auto p = data.point(i);
    for (std::size_t j = 0; j < dim; ++j) half_width[j] += (p[j] - mean[j]) * (p[j] - mean[j]);
  }
  for (auto& h : half_width) h = std::sqrt(3.0 * h / static_cast<double>(std::max<std::size_t>(1, data.size())));

  Rng rng(seed);
  PointMatrix queries(dim);
  std::vector<float> q(dim);
  for (std::size_t i = 0; i < num_queries; ++i) {
    for (std::size_t j = 0; j < dim; ++j) q[j] = static_cast<float>(rng.uniform(mean[j] - half_width[j], mean[j] + half_width[j]));
    queries.push_back(q);
  }

  FrequencyProfile profile;
  profile.query_count = num_queries;
  profile.seed = seed;
  ProfileFootprint local;
  ProfileFootprint& fp = footprint != nullptr ? *footprint : local;
  fp.query_count = num_queries;
  fp.bucket_accesses.assign(index.projection_count(), {});

  for (std::size_t g = 0; g < index.projection_count(); ++g) {
    const auto& table = index.table(g);
    const auto buckets = table.buckets();
    auto& counts = fp.bucket_accesses[g];
    counts.assign(buckets.size(), 0);
    for (std::size_t i = 0; i < queries.rows(); ++i) {
      const auto b = hash_point(table.function(), queries.row(i));
      auto it = std::lower_bound(buckets.begin(), buckets.end(), b);
      if (it != buckets.end() && *it == b) ++counts[static_cast<std::size_t>(it - buckets.begin())];
    }

    ProjectionProfile proj;
    proj.occupied = table.occupied();
    proj.region_mean.assign(regions_per_projection, 0.0);
    std::vector<std::uint64_t> sums(regions_per_projection, 0), members(regions_per_projection, 0);
    for (std::size_t d = 0; d < buckets.size(); ++d) {
      const auto r = proj.region_of(buckets[d]);
      sums[r] += counts[d];
      ++members[r];
    }
    for (unsigned r = 0; r < regions_per_projection; ++r) {
      if (members[r] > 0) proj.region_mean[r] = static_cast<double>(sums[r]) / static_cast<double>(members[r]);
    }
    profile.projections.push_back(std::move(proj));
  }
  return profile;
}

}  // namespace mmlsh
