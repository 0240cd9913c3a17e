#include "mmlsh/query.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "mmlsh/errors.hpp"

namespace mmlsh {

std::uint64_t bucket_bytes(std::size_t entries, double index_scale) noexcept {
  return static_cast<std::uint64_t>(std::llround(static_cast<double>(entries * kEntryBytes) * index_scale));
}

CollisionState::CollisionState(const Dataset& data, std::size_t query_points, std::size_t projections, unsigned l,
                               const GammaParams& gamma)
    : data_(&data),
      gamma_(gamma),
      query_points_(query_points),
      points_(data.size()),
      projections_(projections),
      l_(l),
      counts_(query_points * data.size(), 0),
      qualifying_(data.object_count(), 0),
      in_list_(data.object_count(), 0),
      covered_(query_points * projections),
      gdist_(data.object_count(), std::numeric_limits<double>::quiet_NaN()) {
  if (projections > std::numeric_limits<std::uint16_t>::max()) throw ParameterError("too many projections");
  if (l == 0) throw ParameterError("collision threshold must be at least 1");
}

std::size_t CollisionState::apply(std::size_t query_point, std::span<const BucketEntry> entries) {
  auto* row = counts_.data() + query_point * points_;
  for (const auto& e : entries) {
    if (++row[e.point] != l_) continue;
    const auto obj = data_->owner_index(e.point);
    ++qualifying_[obj];
    if (in_list_[obj] == 0 && is_gamma_candidate(collision_index(obj), gamma_)) {
      in_list_[obj] = 1;
      candidates_.push_back(obj);
    }
  }
  return entries.size();
}

double CollisionState::collision_index(std::size_t object_index) const noexcept {
  const auto pairs = query_points_ * data_->object(object_index).point_ids.size();
  return static_cast<double>(qualifying_[object_index]) / static_cast<double>(pairs);
}

double CollisionState::gamma_distance_of(std::size_t object_index, const QueryObject& query) {
  double& slot = gdist_[object_index];
  if (std::isnan(slot)) {
    const auto& pts = data_->object_points(object_index);
    slot = gamma_distance(query.points, pts, gamma_.gamma);
    ++distance_evaluations_;
    distance_ops_ += query.size() * pts.rows() * data_->dimension();
  }
  return slot;
}

namespace {

std::uint64_t ceil_log2(std::uint64_t v) { return v <= 1 ? 0 : std::bit_width(v - 1); }

std::int64_t pow_level(int c, unsigned t) {
  std::int64_t r = 1;
  for (unsigned i = 0; i < t; ++i) r *= c;
  return r;
}

unsigned auto_max_level(int c) {
  unsigned t = 0;
  std::int64_t r = 1;
  while (r < (std::int64_t{1} << 32)) {
    r *= c;
    ++t;
  }
  return t;
}

struct Reader {
  CollisionState& state;
  const ProjectionTable& table;
  std::size_t g;
  unsigned t;
  std::int64_t radius;
  BufferState* buffer;
  const AccessOptions& access;
  std::uint64_t reads = 0;
  std::uint64_t collisions = 0;

  void touch(std::size_t dir, unsigned uses) {
    ++reads;
    if (buffer == nullptr) return;
    const std::int64_t b = table.buckets()[dir];
    AccessContext ctx;
    ctx.uses = uses;
    ctx.distance_threshold = access.distance_threshold > 0 ? access.distance_threshold : 2 * radius;
    if (access.profile != nullptr && access.profile->query_count > 0) {
      ctx.est_frequency = access.profile->frequency(g, b) * static_cast<double>(access.query_points) /
                          static_cast<double>(access.profile->query_count) * static_cast<double>(radius);
    }
    buffer->access({static_cast<std::uint32_t>(g), t, b}, bucket_bytes(table.bucket_size(dir), access.index_scale),
                   ctx);
  }

  // Reads the uncounted buckets of `range` for one query point.
  void read_range(std::size_t query_point, BucketRange range) {
    const auto done = state.covered(query_point, g);
    auto [first, last] = table.directory_span(range);
    for (auto d = first; d < last; ++d) {
      if (done.contains(table.buckets()[d])) continue;
      touch(d, 1);
      collisions += state.apply(query_point, table.bucket_entries(d));
    }
  }
};

}  // namespace

std::size_t count_collisions(CollisionState& state, const QueryObject& query, std::size_t query_point,
                             const LshIndex& index, std::size_t g, unsigned t, BufferState* buffer,
                             const AccessOptions& access) {
  const auto& table = index.table(g);
  const std::int64_t radius = pow_level(index.params().c, t);
  const auto range = level_range(hash_point(table.function(), query.points.row(query_point)), radius);
  Reader reader{state, table, g, t, radius, buffer, access};
  reader.read_range(query_point, range);
  state.set_covered(query_point, g, range);
  return reader.collisions;
}

bool check_t1(const CollisionState& state, std::size_t k, double beta, std::size_t object_count) {
  const double need = static_cast<double>(k) + beta * static_cast<double>(object_count);
  return static_cast<double>(state.candidates().size()) >= need - 1e-9 * need;
}

bool check_t2(CollisionState& state, const QueryObject& query, std::size_t k, int c, double radius) {
  const double limit = static_cast<double>(c) * radius;
  std::size_t within = 0;
  for (auto obj : state.candidates()) {
    if (state.gamma_distance_of(obj, query) <= limit && ++within >= k) return true;
  }
  return false;
}

double gamma_min_bound(std::size_t query_size, std::size_t min_object_size, double delta, double epsilon,
                       double beta) {
  if (query_size == 0 || min_object_size == 0) throw ParameterError("object sizes must be at least 1");
  for (double v : {delta, epsilon, beta}) {
    if (!(v > 0.0 && v < 1.0)) throw ParameterError("delta, epsilon and beta must lie in (0,1)");
  }
  if (epsilon <= delta) throw ParameterError("epsilon must exceed delta");
  const double ql = static_cast<double>(query_size) * static_cast<double>(min_object_size);
  const double a = std::log(1.0 / delta) / ((epsilon - delta) * (epsilon - delta) * ql);
  const double b = 2.0 * std::log(2.0 / beta) / (beta * beta * ql);
  return std::sqrt(std::max(a, b));
}

std::string to_string(StopCondition s) {
  switch (s) {
    case StopCondition::T1: return "T1";
    case StopCondition::T2: return "T2";
    case StopCondition::Exhausted: return "exhausted";
  }
  return "?";
}

QueryResult knn_objects(const QueryObject& query, const Dataset& data, const LshIndex& index,
                        const QueryOptions& options, BufferState* buffer) {
  if (options.k == 0) throw ParameterError("k must be at least 1");
  if (query.size() == 0) throw ParameterError("query object has no points");
  if (query.points.dim() != index.dimension() || data.dimension() != index.dimension()) {
    throw ContractError("query, dataset and index dimensions differ");
  }
  if (data.size() != index.point_count()) throw ContractError("index was built for a different dataset");
  options.gamma.validate();
  options.scheduler.validate();

  BufferState private_buffer(BufferState::kUnbounded);
  BufferState& buf = buffer != nullptr ? *buffer : private_buffer;
  const IoStats io_before = buf.io_stats();

  const auto& params = index.params();
  const std::size_t nq = query.size();
  const std::size_t m = index.projection_count();
  const unsigned max_level = options.max_level != 0 ? options.max_level : auto_max_level(params.c);

  QueryResult result;
  result.gamma_bound = gamma_min_bound(nq, data.min_object_size(), options.gamma.delta, options.gamma.epsilon,
                                       options.gamma.beta);
  result.gamma_bound_violated = options.gamma.gamma < result.gamma_bound;

  CollisionState state(data, nq, m, params.l, options.gamma);
  AccessOptions access{options.index_scale, options.profile, nq, options.scheduler.distance_threshold};
  QueryStats& stats = result.stats;
  bool stopped = false;

  for (unsigned t = 0; t <= max_level && !stopped; ++t) {
    const std::int64_t radius = pow_level(params.c, t);
    state.level = t;
    if (check_t2(state, query, options.k, params.c, static_cast<double>(radius))) {
      result.stop = StopCondition::T2;
      stopped = true;
      break;
    }
    result.levels_used = t + 1;

    bool saturated = true;
    for (std::size_t g = 0; g < m && !stopped; ++g) {
      const auto& table = index.table(g);
      const auto ranges = query_ranges(query.points, table, radius);
      Reader reader{state, table, g, t, radius, &buf, access};

      switch (options.scheduler.strategy) {
        case Strategy::NS1: {
          stats.schedule_ops += nq * ceil_log2(nq);
          for (const auto& step : schedule_ns1(ranges)) reader.read_range(step.query, step.range);
          break;
        }
        case Strategy::MMLSH: {
          const auto plan = split_queries(ranges, options.scheduler.query_splits);
          stats.schedule_ops += plan.size() * ceil_log2(plan.size());
          for (const auto& step : plan) reader.read_range(step.query, step.range);
          break;
        }
        case Strategy::NS2: {
          const auto plan = schedule_ns2(ranges, table);
          stats.schedule_ops += plan.size() * nq;
          std::vector<std::uint32_t> users;
          for (const auto& step : plan) {
            users.clear();
            for (auto qi : step.queries) {
              if (!state.covered(qi, g).contains(step.bucket)) users.push_back(qi);
            }
            if (users.empty()) continue;
            auto [d, end] = table.directory_span({step.bucket, step.bucket});
            reader.touch(d, static_cast<unsigned>(users.size()));
            for (auto qi : users) reader.collisions += state.apply(qi, table.bucket_entries(d));
          }
          break;
        }
      }
      stats.bucket_reads += reader.reads;
      stats.collisions += reader.collisions;

      const auto occupied = table.occupied();
      for (const auto& r : ranges) {
        state.set_covered(r.query, g, r.range);
        if (!(r.range.lo <= occupied.lo && occupied.hi <= r.range.hi)) saturated = false;
      }
      if (check_t1(state, options.k, options.gamma.beta, data.object_count())) {
        result.stop = StopCondition::T1;
        stopped = true;
      }
    }
    // Nothing new can be counted once every range covers its whole table.
    if (!stopped && saturated && state.candidates().size() < options.k) break;
  }

  // Top-k of the candidate list by exact Gamma-distance.
  std::vector<ObjectDistance> ranked;
  ranked.reserve(state.candidates().size());
  for (auto obj : state.candidates()) {
    ranked.push_back({data.object(obj).object_id, state.gamma_distance_of(obj, query)});
  }
  std::sort(ranked.begin(), ranked.end(), [](const ObjectDistance& a, const ObjectDistance& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.object_id < b.object_id;
  });
  if (ranked.size() > options.k) ranked.resize(options.k);
  result.top_k = std::move(ranked);
  result.complete = stopped && result.top_k.size() == options.k;
  result.candidate_count = state.candidates().size();

  stats.distance_evaluations = state.distance_evaluations();
  stats.distance_ops = state.distance_ops();
  const IoStats& io_after = buf.io_stats();
  stats.io = {io_after.seeks - io_before.seeks,
              io_after.bytes_read - io_before.bytes_read,
              io_after.buffer_hits - io_before.buffer_hits,
              io_after.buffer_misses - io_before.buffer_misses,
              io_after.evictions - io_before.evictions,
              io_after.io_ms - io_before.io_ms};
  stats.index_io_ms = stats.io.io_ms;
  stats.alg_ms = static_cast<double>(stats.alg_ops()) * options.alg_ms_per_op;
  stats.total_ms = stats.alg_ms + stats.index_io_ms;
  return result;
}

}  // namespace mmlsh
