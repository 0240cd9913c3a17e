#include "mmlsh_bench/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

#include "mmlsh/errors.hpp"

namespace mmlsh::bench {

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.6g}", v);
}

std::string kp(std::size_t k_prime) { return k_prime == 0 ? "-" : std::to_string(k_prime); }

std::vector<std::vector<std::string>> row_cells(const BenchReport& r) {
  std::vector<std::vector<std::string>> cells{{"query", "method", "k_prime", "or_gamma", "inf_terms", "total_ms",
                                               "alg_ms", "index_io_ms", "wall_ms", "stop", "levels", "hits",
                                               "misses", "complete"}};
  for (const auto& q : r.rows) {
    cells.push_back({std::to_string(q.query_id), q.method, kp(q.k_prime), num(q.object_ratio),
                     std::to_string(q.infinite_terms), num(q.total_ms), num(q.alg_ms), num(q.index_io_ms),
                     num(q.wall_ms), q.stop, std::to_string(q.levels), std::to_string(q.hits),
                     std::to_string(q.misses), q.complete ? "yes" : "no"});
  }
  return cells;
}

std::vector<std::vector<std::string>> summary_cells(const BenchReport& r) {
  // std_* columns are an extension over plain means.
  std::vector<std::vector<std::string>> cells{{"method", "k_prime", "queries", "mean_or_gamma", "std_or_gamma",
                                               "mean_total_ms", "std_total_ms", "mean_alg_ms",
                                               "mean_index_io_ms", "mean_wall_ms", "inf_terms"}};
  for (const auto& s : r.summary()) {
    cells.push_back({s.method, kp(s.k_prime), std::to_string(s.queries), num(s.mean_ratio), num(s.std_ratio),
                     num(s.mean_total_ms), num(s.std_total_ms), num(s.mean_alg_ms), num(s.mean_index_io_ms),
                     num(s.mean_wall_ms), std::to_string(s.infinite_terms)});
  }
  return cells;
}

std::vector<std::vector<std::string>> sweep_cells(const BenchReport& r) {
  std::vector<std::vector<std::string>> cells{{"buffer_mb", "strategy", "hit_rate", "hits", "misses", "evictions",
                                               "total_ms", "alg_ms", "index_io_ms"}};
  for (const auto& s : r.sweep) {
    cells.push_back({num(s.buffer_mb), s.strategy, num(s.hit_rate), std::to_string(s.hits),
                     std::to_string(s.misses), std::to_string(s.evictions), num(s.total_ms), num(s.alg_ms),
                     num(s.index_io_ms)});
  }
  return cells;
}

bool numeric(const std::string& s) {
  return !s.empty() && (std::isdigit(static_cast<unsigned char>(s[0])) || s[0] == '-' || s == "inf") && s != "-";
}

void write_csv_file(const BenchReport& r, const std::string& path, const std::vector<std::vector<std::string>>& cells) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  out << "# mmlsh " << r.command << '\n';
  out << "# config " << r.config.dump() << '\n';
  for (const auto& n : r.notes) out << "# note " << n << '\n';
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  if (!std::isfinite(m)) return std::numeric_limits<double>::quiet_NaN();
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

std::vector<SummaryRow> BenchReport::summary() const {
  std::vector<std::pair<std::string, std::size_t>> groups;
  for (const auto& q : rows) {
    std::pair key{q.method, q.k_prime};
    if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
  }
  std::vector<SummaryRow> out;
  for (const auto& [method, k_prime] : groups) {
    std::vector<double> ratio, total, alg, io, wall;
    SummaryRow s{method, k_prime};
    for (const auto& q : rows) {
      if (q.method != method || q.k_prime != k_prime) continue;
      ratio.push_back(q.object_ratio);
      total.push_back(q.total_ms);
      alg.push_back(q.alg_ms);
      io.push_back(q.index_io_ms);
      wall.push_back(q.wall_ms);
      s.infinite_terms += q.infinite_terms;
    }
    s.queries = ratio.size();
    s.mean_ratio = mean(ratio);
    s.std_ratio = stddev(ratio);
    s.mean_total_ms = mean(total);
    s.std_total_ms = stddev(total);
    s.mean_alg_ms = mean(alg);
    s.mean_index_io_ms = mean(io);
    s.mean_wall_ms = mean(wall);
    out.push_back(s);
  }
  return out;
}

void print_table(std::ostream& out, const std::vector<std::vector<std::string>>& cells) {
  if (cells.empty()) return;
  std::vector<std::size_t> width(cells[0].size(), 0);
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  }
  for (std::size_t r = 0; r < cells.size(); ++r) {
    std::string line;
    for (std::size_t i = 0; i < cells[r].size(); ++i) {
      if (i) line += "  ";
      const auto& cell = cells[r][i];
      line += (r > 0 && numeric(cell)) ? fmt::format("{:>{}}", cell, width[i]) : fmt::format("{:<{}}", cell, width[i]);
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out << line << '\n';
  }
}

void write_text(const BenchReport& r, std::ostream& out) {
  out << "mmlsh " << r.command << '\n';
  for (const auto& n : r.notes) out << "note: " << n << '\n';
  if (!r.rows.empty()) {
    out << '\n';
    print_table(out, row_cells(r));
    out << '\n';
    print_table(out, summary_cells(r));
  }
  if (!r.sweep.empty()) {
    out << '\n';
    print_table(out, sweep_cells(r));
  }
}

void write_csv(const BenchReport& r, const std::string& prefix) {
  if (!r.rows.empty()) {
    write_csv_file(r, prefix + ".csv", row_cells(r));
    write_csv_file(r, prefix + "_summary.csv", summary_cells(r));
  }
  if (!r.sweep.empty()) write_csv_file(r, prefix + "_sweep.csv", sweep_cells(r));
}

void write_json(const BenchReport& r, const std::string& path) {
  nlohmann::json j;
  j["command"] = r.command;
  j["config"] = r.config;
  j["notes"] = r.notes;
  auto finite_or_null = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  for (const auto& q : r.rows) {
    j["rows"].push_back({{"query", q.query_id}, {"method", q.method}, {"k_prime", q.k_prime},
                         {"or_gamma", finite_or_null(q.object_ratio)}, {"inf_terms", q.infinite_terms},
                         {"total_ms", q.total_ms}, {"alg_ms", q.alg_ms}, {"index_io_ms", q.index_io_ms},
                         {"wall_ms", q.wall_ms}, {"stop", q.stop}, {"levels", q.levels}, {"hits", q.hits},
                         {"misses", q.misses}, {"complete", q.complete}});
  }
  for (const auto& s : r.summary()) {
    j["summary"].push_back({{"method", s.method}, {"k_prime", s.k_prime}, {"queries", s.queries},
                            {"mean_or_gamma", finite_or_null(s.mean_ratio)},
                            {"std_or_gamma", finite_or_null(s.std_ratio)}, {"mean_total_ms", s.mean_total_ms},
                            {"std_total_ms", s.std_total_ms}, {"mean_alg_ms", s.mean_alg_ms},
                            {"mean_index_io_ms", s.mean_index_io_ms}, {"mean_wall_ms", s.mean_wall_ms}});
  }
  for (const auto& s : r.sweep) {
    j["sweep"].push_back({{"buffer_mb", s.buffer_mb}, {"strategy", s.strategy}, {"hit_rate", s.hit_rate},
                          {"hits", s.hits}, {"misses", s.misses}, {"evictions", s.evictions},
                          {"total_ms", s.total_ms}, {"alg_ms", s.alg_ms}, {"index_io_ms", s.index_io_ms}});
  }
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path);
  out << j.dump(2) << '\n';
}

}  // namespace mmlsh::bench
