#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "mmlsh/dataset.hpp"

namespace mmlsh {

/// Object-level approximation parameters.
///
/// gamma is the fraction of cross pairs that must lie within the object
/// distance; epsilon widens the candidacy threshold to (1 - epsilon) * gamma;
/// beta * S is the tolerated number of false-positive objects; delta is the
/// per-pair collision-counting failure probability.
struct GammaParams {
  double gamma = 0.5;
  double epsilon = 0.2;
  double beta = 0.1;
  double delta = 0.1;

  /// epsilon defaults to 2 * delta.
  static GammaParams make(double gamma, double delta, double beta) {
    return {gamma, 2.0 * delta, beta, delta};
  }

  /// Throws ParameterError unless gamma in (0,1], the others in (0,1), and
  /// epsilon > delta.
  void validate() const;

  double candidate_threshold() const noexcept { return (1.0 - epsilon) * gamma; }
  double false_positive_threshold() const noexcept { return gamma + beta / 2.0; }
};

double squared_distance(std::span<const float> a, std::span<const float> b) noexcept;
double euclidean_distance(std::span<const float> a, std::span<const float> b) noexcept;

/// Fraction of cross pairs (q, x) with ||q - x|| <= radius.
double r_object_similarity(const PointMatrix& query, const PointMatrix& object, double radius);

/// 1-based rank of the order statistic that realises the Gamma-distance over
/// `pairs` cross pairs: the smallest r with r / pairs >= gamma.
std::size_t gamma_rank(std::size_t pairs, double gamma);

/// inf{R : sim(Q, X, R) >= gamma}, i.e. the gamma_rank-th smallest pairwise
/// Euclidean distance.
double gamma_distance(const PointMatrix& query, const PointMatrix& object, double gamma);

/// Fraction of the q_size * x_size pairs whose collision count reaches
/// `threshold`. `count(i, j)` returns the count for query point i and the
/// j-th point of the object; pairs it does not know about count as 0.
template <typename CountFn>
double collision_index(std::size_t q_size, std::size_t x_size, CountFn&& count, unsigned threshold) {
  std::size_t qualifying = 0;
  for (std::size_t i = 0; i < q_size; ++i) {
    for (std::size_t j = 0; j < x_size; ++j) {
      if (static_cast<unsigned>(count(i, j)) >= threshold) ++qualifying;
    }
  }
  return static_cast<double>(qualifying) / static_cast<double>(q_size * x_size);
}

bool is_gamma_candidate(double collision_index, const GammaParams& params) noexcept;

/// Candidate whose index clears gamma + beta/2 yet lies farther than c * R.
bool is_gamma_false_positive(double collision_index, double gamma_dist, double c_times_r,
                             const GammaParams& params) noexcept;

struct ObjectRatio {
  double value = 1.0;
  /// Ranks whose exact distance is zero while the returned one is not.
  std::size_t infinite_terms = 0;
  /// Returned list was shorter than the ground truth.
  bool partial = false;
};

/// Mean over ranks of returned / exact Gamma-distance. A zero exact distance
/// contributes 1 when the returned distance is also zero and +infinity
/// (flagged) otherwise.
ObjectRatio object_ratio(std::span<const double> returned, std::span<const double> truth);

ObjectRatio object_ratio(const Dataset& data, const QueryObject& query, std::span<const ObjectId> returned,
                         std::span<const ObjectId> truth, double gamma);

}  // namespace mmlsh
