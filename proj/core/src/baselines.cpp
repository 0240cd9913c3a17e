#include "mmlsh/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mmlsh/errors.hpp"

namespace mmlsh {

namespace {

bool closer(const PointDistance& a, const PointDistance& b) {
  return a.distance != b.distance ? a.distance < b.distance : a.point < b.point;
}

}  // namespace

std::vector<ObjectDistance> exact_knn_objects(const QueryObject& query, const Dataset& data, std::size_t k,
                                              double gamma) {
  std::vector<ObjectDistance> all;
  all.reserve(data.object_count());
  for (std::size_t i = 0; i < data.object_count(); ++i) {
    all.push_back({data.object(i).object_id, gamma_distance(query.points, data.object_points(i), gamma)});
  }
  std::sort(all.begin(), all.end(), [](const ObjectDistance& a, const ObjectDistance& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.object_id < b.object_id;
  });
  if (k != 0 && all.size() > k) all.resize(k);
  return all;
}

std::vector<PointDistance> point_knn_linear(std::span<const float> q, const Dataset& data, std::size_t k_prime) {
  if (q.size() != data.dimension()) throw ContractError("query dimension mismatch");
  std::vector<PointDistance> all(data.size());
  for (PointId i = 0; i < data.size(); ++i) all[i] = {i, euclidean_distance(q, data.point(i))};
  const std::size_t keep = std::min(k_prime, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), closer);
  all.resize(keep);
  return all;
}

PointQueryResult point_knn_c2lsh(std::span<const float> q, const Dataset& data, const LshIndex& index,
                                 std::size_t k_prime, BufferState* buffer, double index_scale, unsigned max_level) {
  if (k_prime == 0) throw ParameterError("k' must be at least 1");
  if (q.size() != index.dimension()) throw ContractError("query dimension mismatch");
  const auto& params = index.params();
  const std::size_t n = data.size();
  const std::size_t m = index.projection_count();
  if (max_level == 0) {
    for (std::int64_t r = 1; r < (std::int64_t{1} << 32); r *= params.c) ++max_level;
  }

  PointQueryResult result;
  std::vector<std::uint16_t> counts(n, 0);
  std::vector<PointDistance> candidates;
  std::vector<BucketRange> covered(m);
  std::vector<std::int64_t> base(m);
  for (std::size_t g = 0; g < m; ++g) base[g] = hash_point(index.table(g).function(), q);
  const double t1_need = static_cast<double>(k_prime) + params.beta * static_cast<double>(n);

  bool stopped = false;
  std::int64_t radius = 1;
  for (unsigned t = 0; t <= max_level && !stopped; ++t, radius *= params.c) {
    const double limit = static_cast<double>(params.c) * static_cast<double>(radius);
    const auto within = std::count_if(candidates.begin(), candidates.end(),
                                      [&](const PointDistance& p) { return p.distance <= limit; });
    if (static_cast<std::size_t>(within) >= k_prime) {
      stopped = true;
      break;
    }
    result.levels_used = t + 1;

    bool saturated = true;
    for (std::size_t g = 0; g < m && !stopped; ++g) {
      const auto& table = index.table(g);
      const auto range = level_range(base[g], radius);
      auto [first, last] = table.directory_span(range);
      for (auto d = first; d < last; ++d) {
        const std::int64_t b = table.buckets()[d];
        if (covered[g].contains(b)) continue;
        ++result.bucket_reads;
        if (buffer != nullptr) {
          buffer->access({static_cast<std::uint32_t>(g), t, b}, bucket_bytes(table.bucket_size(d), index_scale));
        }
        for (const auto& e : table.bucket_entries(d)) {
          ++result.collisions;
          if (++counts[e.point] == params.l) {
            candidates.push_back({e.point, euclidean_distance(q, data.point(e.point))});
            result.distance_ops += data.dimension();
          }
        }
      }
      covered[g] = range;
      const auto occ = table.occupied();
      if (!(range.lo <= occ.lo && occ.hi <= range.hi)) saturated = false;
      if (static_cast<double>(candidates.size()) >= t1_need - 1e-9 * t1_need) stopped = true;
    }
    if (!stopped && saturated) break;
  }

  const std::size_t keep = std::min(k_prime, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                    closer);
  candidates.resize(keep);
  result.top = std::move(candidates);
  result.complete = stopped && result.top.size() == k_prime;
  return result;
}

void BordaConfig::validate() const {
  if (k == 0 || k_prime < k) throw ParameterError("Borda requires k' >= k >= 1");
}

std::vector<ObjectScore> borda_aggregate(std::span<const std::vector<PointId>> rankings, const Dataset& data,
                                         const BordaConfig& config) {
  config.validate();
  std::vector<std::uint64_t> score(data.object_count(), 0);
  for (const auto& ranking : rankings) {
    if (ranking.size() > config.k_prime) throw ContractError("ranking longer than k'");
    for (std::size_t r = 0; r < ranking.size(); ++r) {
      if (ranking[r] >= data.size()) throw ContractError("ranking names an unknown point");
      score[data.owner_index(ranking[r])] += config.k_prime - r;
    }
  }
  std::vector<ObjectScore> out;
  out.reserve(data.object_count());
  for (std::size_t i = 0; i < data.object_count(); ++i) out.push_back({data.object(i).object_id, score[i]});
  const std::size_t keep = std::min(config.k, out.size());
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(keep), out.end(),
                    [](const ObjectScore& a, const ObjectScore& b) {
                      return a.score != b.score ? a.score > b.score : a.object_id < b.object_id;
                    });
  out.resize(keep);
  return out;
}

}  // namespace mmlsh
