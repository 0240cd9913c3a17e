#include "mmlsh/buffer.hpp"

#include <algorithm>
#include <ostream>

#include "mmlsh/errors.hpp"

namespace mmlsh {

void CostModel::validate() const {
  if (!(seek_ms > 0.0) || !(read_rate_mb_per_ms > 0.0)) {
    throw ParameterError("seek time and read rate must be positive");
  }
}

std::string BucketKey::to_string() const {
  return std::to_string(projection) + ':' + std::to_string(level) + ':' + std::to_string(bucket);
}

BufferState::BufferState(std::uint64_t capacity_bytes, EvictionPolicy policy, CostModel cost, EvictionConfig config)
    : capacity_(capacity_bytes), policy_(policy), cost_(cost), config_(config) {
  cost_.validate();
}

const ResidentEntry* BufferState::find(const BucketKey& key) const {
  auto it = resident_.find(key);
  return it == resident_.end() ? nullptr : &it->second;
}

void BufferState::remove(const BucketKey& key) {
  auto it = resident_.find(key);
  by_last_use_.erase(it->second.last_use_tick);
  used_ -= it->second.size_bytes;
  resident_.erase(it);
  ++stats_.evictions;
}

BucketKey BufferState::evict_lru() {
  if (resident_.empty()) throw ContractError("evict from an empty buffer");
  const BucketKey victim = by_last_use_.begin()->second;
  remove(victim);
  return victim;
}

BucketKey BufferState::evict_mmlsh(const BucketKey& current, std::int64_t distance_threshold) {
  if (resident_.empty()) throw ContractError("evict from an empty buffer");

  const std::uint64_t window = config_.recency_window != 0 ? config_.recency_window : resident_.size();
  auto distance = [&](const BucketKey& k) -> std::int64_t {
    if (k.projection != current.projection || k.level != current.level) {
      return std::numeric_limits<std::int64_t>::max();
    }
    return k.bucket > current.bucket ? k.bucket - current.bucket : current.bucket - k.bucket;
  };
  auto recent = [&](const ResidentEntry& e) { return e.insert_tick + window > clock_; };

  std::uint64_t newest_tick = 0;
  for (const auto& [key, e] : resident_) newest_tick = std::max(newest_tick, e.insert_tick);

  const BucketKey* best = nullptr;
  const ResidentEntry* best_entry = nullptr;
  std::int64_t best_distance = 0;
  for (int stage = 0; stage < 3 && best == nullptr; ++stage) {
    for (const auto& [key, e] : resident_) {
      const auto dist = distance(key);
      if (stage == 0 && (recent(e) || dist <= distance_threshold)) continue;
      if (stage == 1 && recent(e)) continue;
      // Last resort still keeps the newest insertion while anything else remains.
      if (stage == 2 && e.insert_tick == newest_tick && resident_.size() > 1) continue;
      const bool better = best == nullptr || e.est_frequency < best_entry->est_frequency ||
                          (e.est_frequency == best_entry->est_frequency &&
                           (dist > best_distance || (dist == best_distance && key < *best)));
      if (better) {
        best = &key;
        best_entry = &e;
        best_distance = dist;
      }
    }
  }
  const BucketKey victim = *best;
  remove(victim);
  return victim;
}

AccessResult BufferState::access(const BucketKey& key, std::uint64_t size_bytes, const AccessContext& ctx) {
  const std::uint64_t tick = ++clock_;
  AccessResult result;

  if (auto it = resident_.find(key); it != resident_.end()) {
    auto& e = it->second;
    by_last_use_.erase(e.last_use_tick);
    e.last_use_tick = tick;
    by_last_use_.emplace(tick, key);
    e.est_frequency = std::max(0.0, e.est_frequency - ctx.uses);
    result.hit = true;
    ++stats_.buffer_hits;
  } else {
    result.modeled_ms = cost_.miss_ms(size_bytes);
    ++stats_.buffer_misses;
    ++stats_.seeks;
    stats_.bytes_read += size_bytes;
    stats_.io_ms += result.modeled_ms;
    if (size_bytes <= capacity_) {
      while (capacity_ - used_ < size_bytes) {
        result.evicted.push_back(policy_ == EvictionPolicy::Lru ? evict_lru()
                                                                : evict_mmlsh(key, ctx.distance_threshold));
      }
      ResidentEntry e{size_bytes, tick, tick, std::max(0.0, ctx.est_frequency - ctx.uses)};
      resident_.emplace(key, e);
      by_last_use_.emplace(tick, key);
      used_ += size_bytes;
    }
  }

  if (trace_ != nullptr) {
    *trace_ << tick << ',' << key.projection << ',' << key.level << ',' << key.bucket << ','
            << (result.hit ? "hit" : "miss") << ',';
    for (std::size_t i = 0; i < result.evicted.size(); ++i) {
      if (i > 0) *trace_ << ';';
      *trace_ << result.evicted[i].to_string();
    }
    *trace_ << '\n';
  }
  return result;
}

std::vector<std::pair<BucketKey, ResidentEntry>> BufferState::residents() const {
  std::vector<std::pair<BucketKey, ResidentEntry>> out(resident_.begin(), resident_.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

}  // namespace mmlsh
