#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mmlsh/errors.hpp"
#include "mmlsh/gamma.hpp"
#include "test_support.hpp"

using namespace mmlsh;

namespace {

PointMatrix line(std::initializer_list<float> xs) {
  PointMatrix m(1);
  for (float x : xs) m.push_back(std::vector<float>{x});
  return m;
}

std::vector<double> sorted_pair_distances(const PointMatrix& q, const PointMatrix& x) {
  std::vector<double> d;
  for (std::size_t i = 0; i < q.rows(); ++i) {
    for (std::size_t j = 0; j < x.rows(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < q.dim(); ++k) {
        const double diff = static_cast<double>(q.row(i)[k]) - x.row(j)[k];
        s += diff * diff;
      }
      d.push_back(std::sqrt(s));
    }
  }
  std::sort(d.begin(), d.end());
  return d;
}

}  // namespace

TEST_CASE("r-object similarity examples") {
  CHECK(r_object_similarity(line({0}), line({0}), 0.0) == 1.0);
  CHECK(r_object_similarity(line({0, 1}), line({0}), 0.5) == 0.5);
  PointMatrix two(2);
  two.push_back(std::vector<float>{0, 0});
  CHECK_THROWS_AS(r_object_similarity(line({0}), two, 1.0), ContractError);
}

TEST_CASE("r-object similarity matches pair enumeration") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    const auto q = testing::random_points(rng, 5, 3);
    const auto x = testing::random_points(rng, 4, 3);
    const double radius = std::uniform_real_distribution<double>(0.0, 4.0)(rng);
    const auto d = sorted_pair_distances(q, x);
    const auto within = std::count_if(d.begin(), d.end(), [&](double v) { return v <= radius; });
    CHECK(r_object_similarity(q, x, radius) == static_cast<double>(within) / 20.0);
  }
}

TEST_CASE("gamma distance examples") {
  CHECK(gamma_distance(line({0, 1}), line({0}), 0.5) == 0.0);
  CHECK(gamma_distance(line({0, 1}), line({0}), 0.75) == 1.0);
}

TEST_CASE("gamma distance equals the order statistic") {
  std::mt19937_64 rng(12);
  const auto q = testing::random_points(rng, 6, 4);
  const auto x = testing::random_points(rng, 7, 4);
  const auto d = sorted_pair_distances(q, x);
  // ceil(0.3 * 42) = 13
  CHECK(gamma_rank(42, 0.3) == 13);
  CHECK(gamma_distance(q, x, 0.3) == doctest::Approx(d[12]).epsilon(1e-12));
}

TEST_CASE("gamma rank is the exact ceiling") {
  CHECK(gamma_rank(10, 0.3) == 3);
  CHECK(gamma_rank(10, 1.0) == 10);
  CHECK(gamma_rank(7, 1e-9) == 1);
  CHECK(gamma_rank(3, 2.0 / 3.0) == 2);
  CHECK_THROWS_AS(gamma_rank(5, 0.0), ParameterError);
}

TEST_CASE("gamma distance properties") {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> size(1, 9);
  for (int rep = 0; rep < 200; ++rep) {
    const auto q = testing::random_points(rng, size(rng), 3);
    const auto x = testing::random_points(rng, size(rng), 3);
    double prev = 0.0;
    for (double g : {0.1, 0.25, 0.5, 0.8, 1.0}) {
      const double gd = gamma_distance(q, x, g);
      CHECK(gd >= prev);
      prev = gd;
      // Compare pair counts; the similarity itself is a rounded fraction.
      const double pairs = static_cast<double>(q.rows() * x.rows());
      const auto rank = gamma_rank(q.rows() * x.rows(), g);
      CHECK(std::llround(r_object_similarity(q, x, gd) * pairs) >= static_cast<long long>(rank));
      const double below = std::nextafter(gd, -1.0);
      if (gd > 0.0) CHECK(std::llround(r_object_similarity(q, x, below) * pairs) < static_cast<long long>(rank));
    }
    CHECK(r_object_similarity(q, x, std::numeric_limits<double>::infinity()) == 1.0);
  }
}

TEST_CASE("collision index") {
  auto all = [](std::size_t, std::size_t) { return 5; };
  auto none = [](std::size_t, std::size_t) { return 1; };
  CHECK(collision_index(3, 3, all, 4) == 1.0);
  CHECK(collision_index(3, 3, none, 4) == 0.0);
  // Four of nine pairs qualify.
  auto four = [](std::size_t i, std::size_t j) { return (i * 3 + j) < 4 ? 9 : 0; };
  CHECK(collision_index(3, 3, four, 4) == doctest::Approx(4.0 / 9.0));

  std::mt19937_64 rng(14);
  std::vector<int> cc(30);
  for (auto& c : cc) c = static_cast<int>(rng() % 12);
  auto table = [&](std::size_t i, std::size_t j) { return cc[i * 6 + j]; };
  double prev = 2.0;
  for (unsigned l = 1; l <= 12; ++l) {
    const double ci = collision_index(5, 6, table, l);
    CHECK(ci <= prev);
    prev = ci;
  }
}

TEST_CASE("candidate and false-positive predicates") {
  const GammaParams p{0.5, 0.2, 0.1, 0.1};
  CHECK(is_gamma_candidate(0.5, p));
  CHECK_FALSE(is_gamma_candidate(0.39, p));
  CHECK(is_gamma_candidate(p.candidate_threshold(), p));
  CHECK_FALSE(is_gamma_candidate(std::nextafter(p.candidate_threshold(), 0.0), p));

  const double cR = 4.0;
  CHECK(is_gamma_false_positive(p.gamma + p.beta, 2 * cR, cR, p));
  CHECK_FALSE(is_gamma_false_positive(p.gamma + p.beta, cR, cR, p));
  CHECK_FALSE(is_gamma_false_positive(p.gamma, 2 * cR, cR, p));
}

TEST_CASE("gamma params validation") {
  CHECK_NOTHROW(GammaParams::make(0.5, 0.1, 0.1).validate());
  CHECK(GammaParams::make(0.5, 0.1, 0.1).epsilon == doctest::Approx(0.2));
  CHECK_THROWS_AS((GammaParams{0.5, 0.1, 0.1, 0.1}.validate()), ParameterError);
  CHECK_THROWS_AS((GammaParams{0.0, 0.2, 0.1, 0.1}.validate()), ParameterError);
  CHECK_THROWS_AS((GammaParams{0.5, 0.2, 1.0, 0.1}.validate()), ParameterError);
}

TEST_CASE("object ratio arithmetic") {
  const std::vector<double> truth{1.0, 2.0};
  CHECK(object_ratio(truth, truth).value == 1.0);
  const std::vector<double> ret{1.0, 3.0};
  CHECK(object_ratio(ret, truth).value == doctest::Approx(1.25));

  const std::vector<double> zero_truth{0.0, 2.0};
  const auto both_zero = object_ratio(std::vector<double>{0.0, 2.0}, zero_truth);
  CHECK(both_zero.value == 1.0);
  CHECK(both_zero.infinite_terms == 0);
  const auto inf = object_ratio(std::vector<double>{0.5, 2.0}, zero_truth);
  CHECK(std::isinf(inf.value));
  CHECK(inf.infinite_terms == 1);

  const auto partial = object_ratio(std::vector<double>{1.0}, truth);
  CHECK(partial.partial);
  CHECK(partial.value == 1.0);
}

TEST_CASE("object ratio over a dataset recomputes from brute force") {
  std::mt19937_64 rng(15);
  std::vector<PointMatrix> objs;
  for (int j = 0; j < 12; ++j) objs.push_back(testing::random_points(rng, 4, 3));
  const auto data = testing::make_dataset(objs);
  const auto query = data.query_from_object(3);
  const std::vector<ObjectId> returned{3, 5, 7};
  const std::vector<ObjectId> truth{3, 1, 2};
  double sum = 0.0;
  for (std::size_t r = 0; r < 3; ++r) {
    const auto a = sorted_pair_distances(query.points, objs[returned[r]])[gamma_rank(16, 0.5) - 1];
    const auto b = sorted_pair_distances(query.points, objs[truth[r]])[gamma_rank(16, 0.5) - 1];
    sum += a / b;
  }
  CHECK(object_ratio(data, query, returned, truth, 0.5).value == doctest::Approx(sum / 3.0).epsilon(1e-12));
}
