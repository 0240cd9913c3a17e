#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mmlsh/buffer.hpp"
#include "mmlsh/query.hpp"
#include "mmlsh/schedule.hpp"

namespace mmlsh {

/// One strategy at one buffer size, summed over a query batch.
struct StrategyRow {
  Strategy strategy = Strategy::NS1;
  std::uint64_t buffer_bytes = 0;
  double total_ms = 0.0;
  double alg_ms = 0.0;
  double index_io_ms = 0.0;
  IoStats io;
  std::uint64_t alg_ops = 0;
};

/// Eviction policy paired with each strategy: LRU for NS1 and NS2, the
/// three-criteria policy for MMLSH.
EvictionPolicy policy_for(Strategy s) noexcept;

/// Runs every query in order against one cold buffer of `buffer_bytes`.
/// Per-query results are appended to `results` when given; `trace`
/// receives the buffer's access trace.
StrategyRow run_strategy(const Dataset& data, const LshIndex& index, std::span<const QueryObject> queries,
                         Strategy strategy, std::uint64_t buffer_bytes, const QueryOptions& options,
                         const CostModel& cost = {}, std::vector<QueryResult>* results = nullptr,
                         std::ostream* trace = nullptr);

/// Every (strategy, buffer size) combination, strategies outermost.
std::vector<StrategyRow> run_strategy_report(const Dataset& data, const LshIndex& index,
                                             std::span<const QueryObject> queries,
                                             std::span<const Strategy> strategies,
                                             std::span<const std::uint64_t> buffer_sizes,
                                             const QueryOptions& options, const CostModel& cost = {});

}  // namespace mmlsh
