#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mmlsh/baselines.hpp"
#include "mmlsh/errors.hpp"
#include "mmlsh/query.hpp"
#include "test_support.hpp"

using namespace mmlsh;

namespace {

// One point per object, placed on the first axis.
Dataset line_dataset(const std::vector<float>& xs, std::size_t dim = 2) {
  std::vector<PointMatrix> objs;
  for (float x : xs) {
    PointMatrix m(dim);
    std::vector<float> row(dim, 0.0f);
    row[0] = x;
    m.push_back(row);
    objs.push_back(std::move(m));
  }
  return testing::make_dataset(objs);
}

QueryObject point_query(std::vector<float> coords) {
  QueryObject q;
  q.points = PointMatrix(coords.size());
  q.points.push_back(coords);
  return q;
}

std::vector<BucketEntry> entries_for(std::initializer_list<PointId> ids) {
  std::vector<BucketEntry> out;
  for (auto id : ids) out.push_back({0, id});
  return out;
}

}  // namespace

TEST_CASE("collision counting matches a brute-force count") {
  std::mt19937_64 rng(3);
  std::vector<PointMatrix> objs;
  for (int j = 0; j < 10; ++j) objs.push_back(testing::random_points(rng, 5, 6, 2.0));
  const auto data = testing::make_dataset(objs);
  auto params = derive_params(0.1, 0.1, 2, 2.184);
  params.m = 12;
  params.l = 6;
  const auto index = build_index(data, params, 9);
  const auto q = data.query_from_object(0);
  const auto gp = GammaParams::make(0.5, 0.1, 0.1);

  CollisionState state(data, q.size(), params.m, params.l, gp);
  for (unsigned t = 0; t < 4; ++t) {
    const std::int64_t radius = std::int64_t{1} << t;
    for (std::size_t g = 0; g < params.m; ++g) {
      for (std::size_t i = 0; i < q.size(); ++i) count_collisions(state, q, i, index, g, t, nullptr);
    }
    for (std::size_t i = 0; i < q.size(); ++i) {
      for (PointId p = 0; p < data.size(); ++p) {
        unsigned expected = 0;
        for (std::size_t g = 0; g < params.m; ++g) {
          const auto& fn = index.table(g).function();
          if (floor_div(hash_point(fn, q.points.row(i)), radius) == floor_div(hash_point(fn, data.point(p)), radius)) {
            ++expected;
          }
        }
        CHECK(state.count(i, p) == expected);
        CHECK(state.count(i, p) <= params.m);
      }
    }
    // Collision index recomputed from raw counts for every object.
    for (std::size_t obj = 0; obj < data.object_count(); ++obj) {
      const auto& ids = data.object(obj).point_ids;
      const double ci = collision_index(
          q.size(), ids.size(), [&](std::size_t i, std::size_t j) { return state.count(i, ids[j]); }, params.l);
      CHECK(state.collision_index(obj) == ci);
      if (is_gamma_candidate(ci, gp)) CHECK(state.is_candidate(obj));
    }
  }
}

TEST_CASE("count_collisions at level 0 reads only the base bucket") {
  const auto data = line_dataset({0.0f, 0.1f, 50.0f});
  auto params = derive_params(0.1, 0.1, 2, 2.184);
  params.m = 1;
  params.l = 1;
  const auto index = build_index(data, params, 1);
  const auto q = point_query({0.05f, 0.0f});
  CollisionState state(data, 1, 1, 1, GammaParams::make(0.5, 0.1, 0.1));
  BufferState buffer(BufferState::kUnbounded);
  count_collisions(state, q, 0, index, 0, 0, &buffer);
  const auto& fn = index.table(0).function();
  const auto qb = hash_point(fn, q.points.row(0));
  for (PointId p = 0; p < 3; ++p) CHECK(state.count(0, p) == (hash_point(fn, data.point(p)) == qb ? 1 : 0));
  CHECK(buffer.io_stats().accesses() <= 1);
  CHECK(state.covered(0, 0) == BucketRange{qb, qb});

  // Repeating the level reads nothing new.
  const auto again = count_collisions(state, q, 0, index, 0, 0, &buffer);
  CHECK(again == 0);
}

TEST_CASE("T1 threshold") {
  std::vector<float> xs(200);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<float>(i);
  const auto data = line_dataset(xs);
  const auto gp = GammaParams::make(0.5, 0.1, 0.125);
  auto fill = [&](std::size_t n) {
    CollisionState s(data, 1, 1, 1, gp);
    std::vector<BucketEntry> e;
    for (PointId p = 0; p < n; ++p) e.push_back({0, p});
    s.apply(0, e);
    return s;
  };
  CHECK(check_t1(fill(26), 1, 0.125, 200));
  CHECK_FALSE(check_t1(fill(25), 1, 0.125, 200));
  CHECK(check_t1(fill(40), 1, 0.125, 200));
  CHECK(fill(40).candidates().size() == 40);
}

TEST_CASE("T2 threshold") {
  const auto data = line_dataset({1.0f, 3.0f, 5.0f});
  const auto q = point_query({0.0f, 0.0f});
  CollisionState s(data, 1, 1, 1, GammaParams::make(0.5, 0.1, 0.1));
  s.apply(0, entries_for({0, 1, 2}));
  CHECK_FALSE(check_t2(s, q, 2, 2, 1.0));
  CHECK(check_t2(s, q, 2, 2, 2.0));
  CHECK(check_t2(s, q, 1, 2, 0.5));
  CHECK_FALSE(check_t2(s, q, 4, 2, 100.0));
  CHECK(s.distance_evaluations() == 3);
}

TEST_CASE("candidate list membership is monotone and thresholded") {
  const auto data = line_dataset({0.0f, 1.0f});
  CollisionState s(data, 1, 2, 2, GammaParams::make(0.5, 0.1, 0.1));
  s.apply(0, entries_for({0}));
  CHECK(s.candidates().empty());
  s.apply(0, entries_for({0}));
  CHECK(s.is_candidate(0));
  CHECK_FALSE(s.is_candidate(1));
  s.apply(0, entries_for({0}));
  CHECK(s.candidates().size() == 1);
  CHECK(s.qualifying_pairs(0) == 1);
}

TEST_CASE("gamma lower bound") {
  CHECK(gamma_min_bound(100, 100, 0.1, 0.2, 0.1) == doctest::Approx(0.244774683068).epsilon(1e-10));
  CHECK(gamma_min_bound(20, 20, 0.1, 0.2, 0.125) == doctest::Approx(0.941928018012).epsilon(1e-10));
  double prev = 10.0;
  for (std::size_t n : {5, 10, 20, 50, 100}) {
    const double b = gamma_min_bound(n, 20, 0.1, 0.2, 0.1);
    CHECK(b < prev);
    prev = b;
  }
  CHECK_THROWS_AS(gamma_min_bound(10, 10, 0.2, 0.2, 0.1), ParameterError);
  CHECK_THROWS_AS(gamma_min_bound(0, 10, 0.1, 0.2, 0.1), ParameterError);
  CHECK_THROWS_AS(gamma_min_bound(10, 10, 0.1, 0.2, 1.5), ParameterError);
}

TEST_CASE("object k-NN") {
  const auto data = synth_dataset(200, 20, 32, 0.25, 42);
  const auto params = derive_params(0.1, 0.125, 2, 2.184);
  const auto index = build_index(data, params, 1);
  QueryOptions opts;
  opts.gamma = GammaParams::make(0.3, 0.1, 0.125);
  opts.k = 25;

  SUBCASE("a dataset object finds itself first") {
    for (std::size_t i : {0u, 57u, 199u}) {
      const auto q = data.query_from_object(i);
      auto o = opts;
      o.k = 1;
      const auto r = knn_objects(q, data, index, o);
      REQUIRE(r.top_k.size() == 1);
      CHECK(r.top_k[0].object_id == q.object_id);
      CHECK(r.complete);
    }
  }

  SUBCASE("quality against exhaustive search") {
    const auto queries = sample_queries(data, 10, 0, 5);
    int good = 0;
    for (const auto& q : queries) {
      const auto r = knn_objects(q, data, index, opts);
      CHECK(r.top_k.size() == 25);
      CHECK(std::is_sorted(r.top_k.begin(), r.top_k.end(),
                           [](const auto& a, const auto& b) { return a.distance < b.distance; }));
      const auto truth = exact_knn_objects(q, data, 25, 0.3);
      std::vector<double> returned, exact;
      for (const auto& x : r.top_k) returned.push_back(x.distance);
      for (const auto& x : truth) exact.push_back(x.distance);
      const auto ratio = object_ratio(returned, exact);
      if (ratio.value <= 4.0) ++good;
      CHECK(r.candidate_count >= r.top_k.size());
    }
    CHECK(good >= 10);
  }

  SUBCASE("deterministic") {
    const auto q = data.query_from_object(12);
    const auto a = knn_objects(q, data, index, opts);
    const auto b = knn_objects(q, data, index, opts);
    CHECK(a.top_k == b.top_k);
    CHECK(a.stats == b.stats);
    CHECK(a.stop == b.stop);
  }

  SUBCASE("gamma bound flag") {
    const auto q = data.query_from_object(3);
    const auto r = knn_objects(q, data, index, opts);
    CHECK(r.gamma_bound == doctest::Approx(0.941928018012).epsilon(1e-9));
    CHECK(r.gamma_bound_violated);
    auto o = opts;
    o.gamma = GammaParams::make(0.95, 0.1, 0.125);
    CHECK_FALSE(knn_objects(q, data, index, o).gamma_bound_violated);
  }

  SUBCASE("argument errors") {
    auto o = opts;
    o.k = 0;
    CHECK_THROWS_AS(knn_objects(data.query_from_object(0), data, index, o), ParameterError);
    QueryObject wrong;
    wrong.points = PointMatrix(3);
    wrong.points.push_back(std::vector<float>{1, 2, 3});
    CHECK_THROWS_AS(knn_objects(wrong, data, index, opts), ContractError);
  }
}

TEST_CASE("fewer objects than k yields a partial result") {
  const auto data = synth_dataset(3, 4, 8, 0.2, 6);
  const auto params = derive_params(0.1, 0.1, 2, 2.184);
  const auto index = build_index(data, params, 2);
  QueryOptions opts;
  opts.gamma = GammaParams::make(0.5, 0.1, 0.1);
  opts.k = 5;
  const auto r = knn_objects(data.query_from_object(1), data, index, opts);
  CHECK_FALSE(r.complete);
  CHECK(r.stop == StopCondition::Exhausted);
  CHECK(r.top_k.size() <= 3);
  CHECK(r.top_k.size() >= 1);
}

TEST_CASE("stop condition names") {
  CHECK(to_string(StopCondition::T1) == "T1");
  CHECK(to_string(StopCondition::T2) == "T2");
  CHECK(to_string(StopCondition::Exhausted) == "exhausted");
}
