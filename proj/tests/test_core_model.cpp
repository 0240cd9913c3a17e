#include <doctest.h>

#include <cstring>
#include <fstream>
#include <set>

#include "mmlsh/dataset.hpp"
#include "mmlsh/errors.hpp"
#include "mmlsh/gamma.hpp"
#include "test_support.hpp"

using namespace mmlsh;

namespace {

void write_raw(const std::filesystem::path& p, const std::vector<std::pair<std::int32_t, std::vector<float>>>& recs) {
  std::ofstream out(p, std::ios::binary);
  for (const auto& [d, v] : recs) {
    out.write(reinterpret_cast<const char*>(&d), 4);
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * 4));
  }
}

void write_text(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

std::vector<FeatureVector> four_points() {
  std::vector<FeatureVector> v;
  for (PointId i = 0; i < 4; ++i) v.push_back({i, kUnassignedObject, {static_cast<float>(i), 0.0f}});
  return v;
}

}  // namespace

TEST_CASE("feature file decodes records in order") {
  const auto p = testing::temp_path("two.vec");
  write_raw(p, {{2, {0.0f, 1.0f}}, {2, {3.0f, 4.0f}}});
  const auto v = load_feature_file(p);
  REQUIRE(v.size() == 2);
  CHECK(v[0].point_id == 0);
  CHECK(v[1].point_id == 1);
  CHECK(v[1].coords == std::vector<float>{3.0f, 4.0f});
  CHECK(v[0].object_id == kUnassignedObject);
}

TEST_CASE("feature file rejects a record of another dimension and names it") {
  const auto p = testing::temp_path("mixed.vec");
  write_raw(p, {{2, {0.0f, 1.0f}}, {2, {1.0f, 1.0f}}, {3, {1.0f, 2.0f, 3.0f}}});
  try {
    (void)load_feature_file(p);
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("record 2") != std::string::npos);
  }
}

TEST_CASE("feature file edge cases") {
  SUBCASE("empty file is an empty list") {
    const auto p = testing::temp_path("empty.vec");
    write_text(p, "");
    CHECK(load_feature_file(p).empty());
  }
  SUBCASE("truncated payload") {
    const auto p = testing::temp_path("trunc.vec");
    write_raw(p, {{2, {0.0f, 1.0f}}});
    std::filesystem::resize_file(p, 10);
    CHECK_THROWS_AS(load_feature_file(p), FormatError);
  }
  SUBCASE("non-positive dimension") {
    const auto p = testing::temp_path("zero.vec");
    write_raw(p, {{0, {}}});
    CHECK_THROWS_AS(load_feature_file(p), FormatError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(load_feature_file(testing::temp_path("nope.vec")), FormatError); }
}

TEST_CASE("feature file round trip is bit exact") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<float> u(-1e6f, 1e6f);
  std::vector<FeatureVector> v;
  for (PointId i = 0; i < 100; ++i) {
    FeatureVector f{i, kUnassignedObject, std::vector<float>(17)};
    for (auto& x : f.coords) x = u(rng);
    v.push_back(f);
  }
  v[5].coords[0] = -0.0f;
  v[6].coords[1] = std::numeric_limits<float>::denorm_min();
  const auto p = testing::temp_path("roundtrip.vec");
  write_feature_file(p, v);
  const auto back = load_feature_file(p);
  REQUIRE(back.size() == v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    CHECK(back[i].point_id == v[i].point_id);
    CHECK(std::memcmp(back[i].coords.data(), v[i].coords.data(), v[i].coords.size() * 4) == 0);
  }
}

TEST_CASE("object map builds objects") {
  const auto p = testing::temp_path("map4.csv");
  write_text(p, "point_id,object_id\n0,0\n1,0\n2,1\n3,1\n");
  const auto data = load_object_map(p, four_points());
  CHECK(data.object_count() == 2);
  CHECK(data.size() == 4);
  CHECK(data.object(0).point_ids == std::vector<PointId>{0, 1});
  CHECK(data.object(1).point_ids == std::vector<PointId>{2, 3});
  CHECK(data.owner(3) == 1);
}

TEST_CASE("object map header is optional and ids are arbitrary") {
  const auto p = testing::temp_path("map_nohdr.csv");
  write_text(p, "0,70\n1,9\n2,70\n3,9\n");
  const auto data = load_object_map(p, four_points());
  REQUIRE(data.object_count() == 2);
  CHECK(data.object(0).object_id == 9);
  CHECK(data.object(1).object_id == 70);
  CHECK(data.find_object(70).value() == 1);
  CHECK_FALSE(data.find_object(5).has_value());
}

TEST_CASE("object map errors") {
  const auto pts = four_points();
  SUBCASE("missing point") {
    const auto p = testing::temp_path("map_missing.csv");
    write_text(p, "0,0\n1,0\n2,1\n");
    CHECK_THROWS_AS(load_object_map(p, pts), MappingError);
  }
  SUBCASE("dangling point") {
    const auto p = testing::temp_path("map_dangling.csv");
    write_text(p, "0,0\n1,0\n2,1\n3,1\n9,1\n");
    CHECK_THROWS_AS(load_object_map(p, pts), MappingError);
  }
  SUBCASE("duplicate row") {
    const auto p = testing::temp_path("map_dup.csv");
    write_text(p, "0,0\n1,0\n1,1\n2,1\n3,1\n");
    CHECK_THROWS_AS(load_object_map(p, pts), MappingError);
  }
  SUBCASE("malformed row") {
    const auto p = testing::temp_path("map_bad.csv");
    write_text(p, "0,0\n1;0\n");
    CHECK_THROWS_AS(load_object_map(p, pts), FormatError);
  }
}

TEST_CASE("object map write/read round trip") {
  const auto data = synth_dataset(5, 3, 2, 0.1, 1);
  const auto p = testing::temp_path("map_rt.csv");
  write_object_map(p, data);
  const auto again = load_object_map(p, data.to_feature_vectors());
  CHECK(again.object_count() == data.object_count());
  for (PointId i = 0; i < data.size(); ++i) CHECK(again.owner(i) == data.owner(i));
}

TEST_CASE("large collection shape: 695672 points in 1000 objects") {
  constexpr std::size_t n = 695'672;
  constexpr std::size_t S = 1000;
  std::vector<FeatureVector> pts(n);
  std::string map;
  map.reserve(n * 12);
  for (PointId i = 0; i < n; ++i) {
    pts[i] = {i, kUnassignedObject, {static_cast<float>(i)}};
    map += std::to_string(i) + ',' + std::to_string(i % S) + '\n';
  }
  const auto p = testing::temp_path("wang_shape.csv");
  write_text(p, map);
  const auto data = load_object_map(p, pts);
  CHECK(data.object_count() == S);
  CHECK(data.size() == n);
  std::size_t total = 0;
  for (const auto& o : data.objects()) total += o.point_ids.size();
  CHECK(total == n);
}

TEST_CASE("synthetic datasets are deterministic") {
  const auto a = synth_dataset(2, 3, 2, 0.1, 7);
  const auto b = synth_dataset(2, 3, 2, 0.1, 7);
  CHECK(a.size() == 6);
  CHECK(a.object_count() == 2);
  CHECK(a.points() == b.points());
  for (PointId i = 0; i < 6; ++i) CHECK(a.owner(i) == b.owner(i));
  CHECK_FALSE(synth_dataset(2, 3, 2, 0.1, 8).points() == a.points());
}

TEST_CASE("synthetic objects are tighter than the space between them") {
  const auto data = synth_dataset(200, 20, 32, 0.25, 42);
  double intra = 0.0, inter = 0.0;
  std::size_t n_intra = 0, n_inter = 0;
  for (PointId i = 0; i < data.size(); ++i) {
    for (PointId j = i + 1; j < data.size(); ++j) {
      const double d = euclidean_distance(data.point(i), data.point(j));
      if (data.owner(i) == data.owner(j)) {
        intra += d;
        ++n_intra;
      } else {
        inter += d;
        ++n_inter;
      }
    }
  }
  CHECK(intra / static_cast<double>(n_intra) < inter / static_cast<double>(n_inter));
}

TEST_CASE("dataset invariants and query sampling") {
  const auto data = synth_dataset(30, 4, 3, 0.2, 5);
  std::size_t total = 0;
  std::set<PointId> seen;
  for (std::size_t j = 0; j < data.object_count(); ++j) {
    const auto& o = data.object(j);
    CHECK_FALSE(o.point_ids.empty());
    total += o.point_ids.size();
    for (auto p : o.point_ids) CHECK(seen.insert(p).second);
    for (std::size_t r = 0; r < o.point_ids.size(); ++r) {
      CHECK(std::vector<float>(data.object_points(j).row(r).begin(), data.object_points(j).row(r).end()) ==
            std::vector<float>(data.point(o.point_ids[r]).begin(), data.point(o.point_ids[r]).end()));
    }
  }
  CHECK(total == data.size());
  CHECK(data.min_object_size() == 4);

  const auto q1 = sample_queries(data, 10, 0, 9);
  const auto q2 = sample_queries(data, 10, 0, 9);
  REQUIRE(q1.size() == 10);
  std::set<ObjectId> ids;
  for (std::size_t i = 0; i < q1.size(); ++i) {
    CHECK(q1[i].object_id == q2[i].object_id);
    CHECK(q1[i].points == q2[i].points);
    CHECK(q1[i].size() == 4);
    ids.insert(q1[i].object_id);
  }
  CHECK(ids.size() == 10);
  const auto sub = sample_queries(data, 3, 2, 9);
  for (const auto& q : sub) CHECK(q.size() == 2);
  CHECK_THROWS(sample_queries(data, 31, 0, 1));
}

TEST_CASE("dataset construction contracts") {
  std::vector<FeatureVector> v{{0, 0, {1.0f}}, {1, kUnassignedObject, {2.0f}}};
  CHECK_THROWS_AS(Dataset(1, v), MappingError);
  v[1].object_id = 0;
  v[1].coords.push_back(3.0f);
  CHECK_THROWS_AS(Dataset(1, v), ContractError);
}
