#include "mmlsh/strategy_report.hpp"

namespace mmlsh {

EvictionPolicy policy_for(Strategy s) noexcept {
  return s == Strategy::MMLSH ? EvictionPolicy::Mmlsh : EvictionPolicy::Lru;
}

StrategyRow run_strategy(const Dataset& data, const LshIndex& index, std::span<const QueryObject> queries,
                         Strategy strategy, std::uint64_t buffer_bytes, const QueryOptions& options,
                         const CostModel& cost, std::vector<QueryResult>* results, std::ostream* trace) {
  QueryOptions opts = options;
  opts.scheduler.strategy = strategy;
  BufferState buffer(buffer_bytes, policy_for(strategy), cost, {options.scheduler.recency_window});
  buffer.set_trace(trace);

  StrategyRow row;
  row.strategy = strategy;
  row.buffer_bytes = buffer_bytes;
  for (const auto& q : queries) {
    auto r = knn_objects(q, data, index, opts, &buffer);
    row.alg_ms += r.stats.alg_ms;
    row.index_io_ms += r.stats.index_io_ms;
    row.alg_ops += r.stats.alg_ops();
    if (results != nullptr) results->push_back(std::move(r));
  }
  row.total_ms = row.alg_ms + row.index_io_ms;
  row.io = buffer.io_stats();
  return row;
}

std::vector<StrategyRow> run_strategy_report(const Dataset& data, const LshIndex& index,
                                             std::span<const QueryObject> queries,
                                             std::span<const Strategy> strategies,
                                             std::span<const std::uint64_t> buffer_sizes,
                                             const QueryOptions& options, const CostModel& cost) {
  std::vector<StrategyRow> rows;
  for (auto s : strategies) {
    for (auto size : buffer_sizes) rows.push_back(run_strategy(data, index, queries, s, size, options, cost));
  }
  return rows;
}

}  // namespace mmlsh
