#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace mmlsh::bench {

/// One (query, method) measurement.
struct QueryRow {
  std::uint64_t query_id = 0;
  std::string method;
  std::size_t k_prime = 0;  ///< 0 for methods without a point depth
  double object_ratio = 1.0;
  std::size_t infinite_terms = 0;
  double total_ms = 0.0;
  double alg_ms = 0.0;
  double index_io_ms = 0.0;
  double wall_ms = 0.0;
  std::string stop;
  unsigned levels = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  bool complete = true;
};

/// Mean and (population) standard deviation per method and k'.
struct SummaryRow {
  std::string method;
  std::size_t k_prime = 0;
  std::size_t queries = 0;
  double mean_ratio = 0.0;
  double std_ratio = 0.0;
  double mean_total_ms = 0.0;
  double std_total_ms = 0.0;
  double mean_alg_ms = 0.0;
  double mean_index_io_ms = 0.0;
  double mean_wall_ms = 0.0;
  std::size_t infinite_terms = 0;
};

struct SweepRow {
  double buffer_mb = 0.0;
  std::string strategy;
  double hit_rate = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t evictions = 0;
  double total_ms = 0.0;
  double alg_ms = 0.0;
  double index_io_ms = 0.0;
};

struct BenchReport {
  std::string command;
  nlohmann::json config;
  std::vector<std::string> notes;
  std::vector<QueryRow> rows;
  std::vector<SweepRow> sweep;

  /// Aggregates recomputed from `rows`, grouped in first-appearance order.
  std::vector<SummaryRow> summary() const;
};

void write_text(const BenchReport& report, std::ostream& out);
void write_csv(const BenchReport& report, const std::string& prefix);
void write_json(const BenchReport& report, const std::string& path);

/// Minimal aligned table: first row is the header; numeric-looking cells
/// are right aligned.
void print_table(std::ostream& out, const std::vector<std::vector<std::string>>& cells);

}  // namespace mmlsh::bench
