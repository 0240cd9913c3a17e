#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace mmlsh {

/// HDD timing model: one seek per miss plus a linear transfer.
struct CostModel {
  double seek_ms = 8.5;
  double read_rate_mb_per_ms = 0.156;

  void validate() const;
  /// seek_ms + bytes / (read_rate * 1e6).
  double miss_ms(std::uint64_t bytes) const noexcept {
    return seek_ms + static_cast<double>(bytes) / (read_rate_mb_per_ms * 1e6);
  }
};

/// Cacheable unit: one base bucket of one projection, read while serving
/// one virtual-rehashing level. Units of different levels are distinct.
struct BucketKey {
  std::uint32_t projection = 0;
  std::uint32_t level = 0;  ///< exponent t of the level R = c^t
  std::int64_t bucket = 0;

  auto operator<=>(const BucketKey&) const = default;
  std::string to_string() const;
};

struct BucketKeyHash {
  std::size_t operator()(const BucketKey& k) const noexcept {
    std::size_t h = std::hash<std::int64_t>{}(k.bucket);
    h ^= (static_cast<std::size_t>(k.projection) << 20) ^ (static_cast<std::size_t>(k.level) << 52);
    return h * 0x9E3779B97F4A7C15ULL;
  }
};

enum class EvictionPolicy { Lru, Mmlsh };

struct ResidentEntry {
  std::uint64_t size_bytes = 0;
  std::uint64_t insert_tick = 0;
  std::uint64_t last_use_tick = 0;
  double est_frequency = 0.0;
};

struct IoStats {
  std::uint64_t seeks = 0;
  std::uint64_t bytes_read = 0;
  std::uint64_t buffer_hits = 0;
  std::uint64_t buffer_misses = 0;
  std::uint64_t evictions = 0;
  double io_ms = 0.0;

  std::uint64_t accesses() const noexcept { return buffer_hits + buffer_misses; }
  double hit_rate() const noexcept {
    return accesses() == 0 ? 0.0 : static_cast<double>(buffer_hits) / static_cast<double>(accesses());
  }
  bool operator==(const IoStats&) const = default;
};

/// Thresholds for the mmLSH eviction criteria. Zero selects the default:
/// recency window = resident bucket count, distance threshold supplied by
/// the caller per access.
struct EvictionConfig {
  std::uint64_t recency_window = 0;
};

/// Per-access information the mmLSH policy needs.
struct AccessContext {
  /// Estimated number of pending uses, assigned when the bucket is inserted.
  double est_frequency = 0.0;
  /// Query-bucket pairs this access completes; decrements est_frequency.
  unsigned uses = 1;
  /// Criterion 2 threshold in base buckets.
  std::int64_t distance_threshold = std::numeric_limits<std::int64_t>::max();
};

struct AccessResult {
  bool hit = false;
  double modeled_ms = 0.0;
  std::vector<BucketKey> evicted;
};

/// Byte-bounded bucket buffer over a modeled disk.
///
/// Every access advances the clock by one tick. Misses evict by the active
/// policy until the bucket fits; buckets larger than the capacity bypass
/// the buffer and are charged on every access.
class BufferState {
 public:
  static constexpr std::uint64_t kUnbounded = std::numeric_limits<std::uint64_t>::max();

  explicit BufferState(std::uint64_t capacity_bytes, EvictionPolicy policy = EvictionPolicy::Lru,
                       CostModel cost = {}, EvictionConfig config = {});

  AccessResult access(const BucketKey& key, std::uint64_t size_bytes, const AccessContext& ctx = {});

  /// NS1: removes the least recently used resident.
  BucketKey evict_lru();

  /// Criteria 1-3: among residents not inserted within the recency window
  /// and farther than `distance_threshold` from `current`, evict the lowest
  /// estimated frequency (ties: farther, then lower key). Criteria are
  /// relaxed in order (distance, then recency) when nobody qualifies.
  BucketKey evict_mmlsh(const BucketKey& current, std::int64_t distance_threshold);

  bool contains(const BucketKey& key) const { return resident_.contains(key); }
  const ResidentEntry* find(const BucketKey& key) const;

  std::uint64_t capacity_bytes() const noexcept { return capacity_; }
  std::uint64_t used_bytes() const noexcept { return used_; }
  std::size_t resident_count() const noexcept { return resident_.size(); }
  std::uint64_t clock() const noexcept { return clock_; }
  const IoStats& io_stats() const noexcept { return stats_; }
  EvictionPolicy policy() const noexcept { return policy_; }
  const CostModel& cost_model() const noexcept { return cost_; }

  /// Residents sorted by key.
  std::vector<std::pair<BucketKey, ResidentEntry>> residents() const;

  /// Streams `tick,projection,level,bucket,hit|miss,evicted` lines; the
  /// evicted column lists `projection:level:bucket` keys joined by ';'.
  void set_trace(std::ostream* out) noexcept { trace_ = out; }

 private:
  void remove(const BucketKey& key);

  std::uint64_t capacity_;
  EvictionPolicy policy_;
  CostModel cost_;
  EvictionConfig config_;
  std::uint64_t used_ = 0;
  std::uint64_t clock_ = 0;
  IoStats stats_;
  std::unordered_map<BucketKey, ResidentEntry, BucketKeyHash> resident_;
  std::map<std::uint64_t, BucketKey> by_last_use_;
  std::ostream* trace_ = nullptr;
};

}  // namespace mmlsh
