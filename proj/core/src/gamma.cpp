#include "mmlsh/gamma.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "mmlsh/errors.hpp"

namespace mmlsh {

void GammaParams::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ParameterError("gamma must lie in (0, 1]");
  for (auto [name, v] : {std::pair{"epsilon", epsilon}, {"beta", beta}, {"delta", delta}}) {
    if (!(v > 0.0 && v < 1.0)) throw ParameterError(std::string(name) + " must lie in (0, 1)");
  }
  if (!(epsilon > delta)) throw ParameterError("epsilon must exceed delta");
}

double squared_distance(std::span<const float> a, std::span<const float> b) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sum += diff * diff;
  }
  return sum;
}

double euclidean_distance(std::span<const float> a, std::span<const float> b) noexcept {
  return std::sqrt(squared_distance(a, b));
}

namespace {

void check_pair(const PointMatrix& query, const PointMatrix& object) {
  if (query.empty() || object.empty()) throw ContractError("object point sets must be non-empty");
  if (query.dim() != object.dim()) throw ContractError("object dimension mismatch");
}

}  // namespace

double r_object_similarity(const PointMatrix& query, const PointMatrix& object, double radius) {
  check_pair(query, object);
  std::size_t within = 0;
  for (std::size_t i = 0; i < query.rows(); ++i) {
    for (std::size_t j = 0; j < object.rows(); ++j) {
      // Compare rounded distances, not squares, so the result agrees exactly
      // with the values gamma_distance reports.
      if (euclidean_distance(query.row(i), object.row(j)) <= radius) ++within;
    }
  }
  return static_cast<double>(within) / static_cast<double>(query.rows() * object.rows());
}

std::size_t gamma_rank(std::size_t pairs, double gamma) {
  if (pairs == 0) throw ContractError("gamma rank over zero pairs");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ParameterError("gamma must lie in (0, 1]");
  const double n = static_cast<double>(pairs);
  auto rank = static_cast<std::size_t>(std::ceil(gamma * n));
  rank = std::clamp<std::size_t>(rank, 1, pairs);
  // gamma * n may round across an integer; fma gives the exact sign of
  // gamma * n - r, so rank ends as the true ceiling.
  while (rank > 1 && std::fma(gamma, n, -static_cast<double>(rank - 1)) <= 0.0) --rank;
  while (rank < pairs && std::fma(gamma, n, -static_cast<double>(rank)) > 0.0) ++rank;
  return rank;
}

double gamma_distance(const PointMatrix& query, const PointMatrix& object, double gamma) {
  check_pair(query, object);
  const std::size_t pairs = query.rows() * object.rows();
  const std::size_t rank = gamma_rank(pairs, gamma);
  std::vector<double> d2;
  d2.reserve(pairs);
  for (std::size_t i = 0; i < query.rows(); ++i) {
    for (std::size_t j = 0; j < object.rows(); ++j) d2.push_back(squared_distance(query.row(i), object.row(j)));
  }
  auto nth = d2.begin() + static_cast<std::ptrdiff_t>(rank - 1);
  std::nth_element(d2.begin(), nth, d2.end());
  return std::sqrt(*nth);
}

bool is_gamma_candidate(double collision_index, const GammaParams& params) noexcept {
  return collision_index >= params.candidate_threshold();
}

bool is_gamma_false_positive(double collision_index, double gamma_dist, double c_times_r,
                             const GammaParams& params) noexcept {
  return collision_index >= params.false_positive_threshold() && gamma_dist > c_times_r;
}

ObjectRatio object_ratio(std::span<const double> returned, std::span<const double> truth) {
  if (returned.size() > truth.size()) throw ContractError("more returned objects than ground-truth ranks");
  ObjectRatio out;
  out.partial = returned.size() < truth.size();
  if (returned.empty()) return out;
  double sum = 0.0;
  for (std::size_t i = 0; i < returned.size(); ++i) {
    if (truth[i] == 0.0) {
      if (returned[i] == 0.0) {
        sum += 1.0;
      } else {
        ++out.infinite_terms;
      }
    } else {
      sum += returned[i] / truth[i];
    }
  }
  out.value = out.infinite_terms > 0 ? std::numeric_limits<double>::infinity()
                                     : sum / static_cast<double>(returned.size());
  return out;
}

ObjectRatio object_ratio(const Dataset& data, const QueryObject& query, std::span<const ObjectId> returned,
                         std::span<const ObjectId> truth, double gamma) {
  auto distances = [&](std::span<const ObjectId> ids) {
    std::vector<double> out;
    out.reserve(ids.size());
    for (ObjectId id : ids) {
      auto index = data.find_object(id);
      if (!index) throw ContractError("unknown object id " + std::to_string(id));
      out.push_back(gamma_distance(query.points, data.object_points(*index), gamma));
    }
    return out;
  };
  const auto r = distances(returned);
  const auto t = distances(truth);
  return object_ratio(r, t);
}

}  // namespace mmlsh
