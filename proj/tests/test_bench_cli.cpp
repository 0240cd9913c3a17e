#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "mmlsh/errors.hpp"
#include "mmlsh_bench/commands.hpp"
#include "test_support.hpp"

using namespace mmlsh;
using namespace mmlsh::bench;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

RunConfig small_config(const std::string& tag) {
  RunConfig c;
  c.synth = {60, 10, 16, 0.25, 3};
  c.queries = 4;
  c.k = 5;
  c.k_primes = {10};
  c.profile_queries = 200;
  c.quiet = true;
  c.index_path = testing::temp_path(tag + ".idx").string();
  std::filesystem::remove(c.index_path);
  std::filesystem::remove(c.index_path + ".profile.json");
  return c;
}

bool has_note(const BenchReport& r, const std::string& needle) {
  for (const auto& n : r.notes) {
    if (n.find(needle) != std::string::npos) return true;
  }
  return false;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(MMLSH_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config JSON") {
  RunConfig c;
  c.gamma = 0.9;
  c.k_primes = {5, 7};
  c.synth.objects = 31;
  c.strategy = "ns2";
  c.index_path = "x.idx";
  const nlohmann::json j = c;
  RunConfig back;
  from_json(j, back);
  CHECK(nlohmann::json(back) == j);

  const auto path = testing::temp_path("cfg.json");
  std::ofstream(path) << R"({"gamma": 0.7, "synth": {"objects": 12}})";
  const auto loaded = load_config(path.string());
  CHECK(loaded.gamma == 0.7);
  CHECK(loaded.synth.objects == 12);
  CHECK(loaded.synth.dimension == 32);

  std::ofstream(path) << R"({"gama": 0.7})";
  CHECK_THROWS_AS(load_config(path.string()), FormatError);
  std::ofstream(path) << "{not json";
  CHECK_THROWS_AS(load_config(path.string()), FormatError);

  CHECK(preset("synth200").synth.objects == 200);
  CHECK(preset("workload").index_scale > 1.0);
  CHECK_THROWS_AS(preset("nope"), ParameterError);
  RunConfig bad;
  bad.k = 0;
  CHECK_THROWS_AS(bad.validate(), ParameterError);
}

TEST_CASE("resolved parameters") {
  RunConfig c;
  CHECK(c.resolved_beta(200) == 0.125);
  CHECK(c.resolved_epsilon() == doctest::Approx(0.2));
  const auto p = c.lsh_params(200);
  CHECK(p.m == 87);
  CHECK(p.l == 46);
  c.m = 10;
  CHECK(c.lsh_params(200).m == 10);
  CHECK(c.lsh_params(200).l <= 10);
  CHECK(RunConfig::mb_to_bytes(30) == 30000000);
}

TEST_CASE("build is reproducible") {
  auto c = small_config("build_a");
  std::ostringstream log;
  const auto r = cmd_build(c, log);
  const auto first = slurp(c.index_path);
  const auto first_profile = slurp(c.index_path + ".profile.json");
  cmd_build(c, log);
  CHECK(slurp(c.index_path) == first);
  CHECK(slurp(c.index_path + ".profile.json") == first_profile);
  const auto p = c.lsh_params(60);
  CHECK(has_note(r, "m=" + std::to_string(p.m) + " l=" + std::to_string(p.l)));

  const auto loaded = load_profile(c.index_path + ".profile.json");
  const auto data = load_dataset(c);
  const auto index = load_index(c.index_path);
  CHECK(loaded == build_frequency_profile(index, data, c.profile_queries, c.regions, c.profile_seed));

  auto none = c;
  none.index_path.clear();
  CHECK_THROWS_AS(cmd_build(none, log), ParameterError);
}

TEST_CASE("ground truth cache") {
  auto c = small_config("gt");
  c.groundtruth_path = testing::temp_path("gt.csv").string();
  std::filesystem::remove(c.groundtruth_path);
  std::ostringstream log;
  const auto first = cmd_groundtruth(c, log);
  CHECK(has_note(first, "written"));
  const auto second = cmd_groundtruth(c, log);
  CHECK(has_note(second, "reused"));

  const auto data = load_dataset(c);
  const auto queries = make_queries(c, data);
  const auto gt = load_groundtruth(c.groundtruth_path);
  REQUIRE(gt.query_ids.size() == queries.size());
  const auto exact = exact_knn_objects(queries[1], data, 0, c.gamma);
  CHECK(gt.rankings[1] == exact);
  CHECK(gt.fingerprint == groundtruth_fingerprint(c, data));

  auto other = c;
  other.gamma = 0.6;
  bool reused = true;
  load_or_compute_groundtruth(other, data, make_queries(other, data), &reused);
  CHECK_FALSE(reused);
}

TEST_CASE("query reports") {
  auto c = small_config("query");
  std::ostringstream log;
  const auto a = cmd_query(c, log);
  const auto b = cmd_query(c, log);
  REQUIRE(a.rows.size() == c.queries);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].query_id == b.rows[i].query_id);
    CHECK(a.rows[i].object_ratio == b.rows[i].object_ratio);
    CHECK(a.rows[i].total_ms == b.rows[i].total_ms);
    CHECK(a.rows[i].misses == b.rows[i].misses);
    CHECK(a.rows[i].object_ratio >= 1.0);
  }
  CHECK(a.config == b.config);
  CHECK(a.config.contains("gamma"));
  CHECK(has_note(a, "below the guarantee bound"));

  SUBCASE("aggregates recompute from rows") {
    const auto summary = a.summary();
    REQUIRE(summary.size() == 1);
    double sum = 0.0;
    for (const auto& r : a.rows) sum += r.object_ratio;
    CHECK(summary[0].mean_ratio == doctest::Approx(sum / static_cast<double>(a.rows.size())));
    CHECK(summary[0].queries == a.rows.size());
  }
  SUBCASE("exhaustive settings give exact answers") {
    auto ex = c;
    ex.w = 1000.0;
    ex.m = 3;
    std::filesystem::remove(ex.index_path);
    for (const auto& r : cmd_query(ex, log).rows) CHECK(r.object_ratio == 1.0);
  }
  SUBCASE("csv and json carry the resolved config") {
    const auto prefix = testing::temp_path("qreport").string();
    write_csv(a, prefix);
    write_json(a, prefix + ".json");
    std::ifstream in(prefix + ".csv");
    std::string l1, l2;
    std::getline(in, l1);
    std::getline(in, l2);
    CHECK(l1 == "# mmlsh query");
    CHECK(l2.rfind("# config {", 0) == 0);
    CHECK(nlohmann::json::parse(l2.substr(9)) == a.config);
    CHECK(std::filesystem::exists(prefix + "_summary.csv"));
    CHECK(nlohmann::json::parse(slurp(prefix + ".json"))["config"] == a.config);
  }
}

TEST_CASE("compare report") {
  auto c = small_config("compare");
  std::ostringstream log;
  const auto r = cmd_compare(c, log);
  std::vector<double> mm;
  for (const auto& row : r.rows) {
    if (row.method == "Linear-Borda") CHECK(row.index_io_ms == 0.0);
    if (row.method == "mmLSH") mm.push_back(row.object_ratio);
  }
  CHECK(mm.size() == c.queries);
  auto c2 = c;
  c2.k_primes = {20, 30};
  std::vector<double> mm2;
  for (const auto& row : cmd_compare(c2, log).rows) {
    if (row.method == "mmLSH") mm2.push_back(row.object_ratio);
  }
  CHECK(mm == mm2);
  CHECK(r.summary().size() == 3);
}

TEST_CASE("external rankings are scored like built-in ones") {
  auto c = small_config("external");
  const auto data = load_dataset(c);
  const auto queries = make_queries(c, data);
  const auto path = testing::temp_path("rankings.csv");
  {
    std::ofstream out(path);
    out << "query_object_id,query_point,rank,point_id\n";
    for (const auto& q : queries) {
      for (std::size_t p = 0; p < q.size(); ++p) {
        const auto top = point_knn_linear(q.points.row(p), data, 10);
        for (std::size_t r = 0; r < top.size(); ++r) out << q.object_id << ',' << p << ',' << r + 1 << ',' << top[r].point << '\n';
      }
    }
  }
  c.rankings_path = path.string();
  std::ostringstream log;
  const auto report = cmd_compare(c, log);
  std::vector<double> ext, lin;
  for (const auto& row : report.rows) {
    if (row.method == "External-Borda") ext.push_back(row.object_ratio);
    if (row.method == "Linear-Borda") lin.push_back(row.object_ratio);
  }
  CHECK(ext.size() == queries.size());
  CHECK(ext == lin);

  std::ofstream(path) << "query_object_id,query_point,rank,point_id\n999999,0,1,0\n";
  CHECK_THROWS_AS(cmd_compare(c, log), MappingError);
  std::ofstream(path) << "1,0,2,0\n";
  CHECK_THROWS_AS(load_point_rankings(path.string()), FormatError);
}

TEST_CASE("buffer sweep") {
  auto c = small_config("sweep");
  c.index_scale = 200.0;
  c.sweep_mb = {0.05, 0.1, 0.2, 0.4, 1e6};
  std::ostringstream log;
  const auto r = cmd_buffer_sweep(c, log);
  REQUIRE(r.sweep.size() == 15);
  double prev = -1.0;
  std::vector<std::uint64_t> huge;
  for (const auto& row : r.sweep) {
    if (row.strategy == "NS1") {
      CHECK(row.hit_rate >= prev);
      prev = row.hit_rate;
    }
    if (row.buffer_mb == 1e6) huge.push_back(row.misses);
  }
  REQUIRE(huge.size() == 3);
  CHECK(huge[0] == huge[1]);
  CHECK(huge[1] == huge[2]);
}

TEST_CASE("command line exit codes") {
  const auto dir = testing::temp_path("cli");
  std::filesystem::create_directories(dir);
  const std::string idx = (dir / "i.idx").string();
  const std::string small = " --objects 20 --points-per-object 5 --dim 8 --queries 2 -k 3 --quiet --out " +
                            (dir / "r").string();
  CHECK(run_cli("") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("query --no-such-flag") == 2);
  CHECK(run_cli("build" + small) == 2);
  CHECK(run_cli("query --strategy fifo" + small) == 2);
  CHECK(run_cli("query --gamma 0" + small) == 2);
  CHECK(run_cli("build --index " + idx + small) == 0);
  CHECK(run_cli("query --index " + idx + small) == 0);
  CHECK(std::filesystem::exists(dir / "r.csv"));
  CHECK(run_cli("query --features " + (dir / "missing.fvecs").string() + small) == 2);
  CHECK(run_cli("query --features " + (dir / "missing.fvecs").string() + " --object-map " +
                (dir / "missing.csv").string() + small) == 3);
  std::ofstream(dir / "junk.idx") << "garbage";
  CHECK(run_cli("query --index " + (dir / "junk.idx").string() + small) == 3);
  const auto cfg = dir / "bad.json";
  std::ofstream(cfg) << R"({"unknown_key": 1})";
  CHECK(run_cli("query --config " + cfg.string() + small) == 3);
}
