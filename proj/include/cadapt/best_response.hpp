#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "cadapt/cost_model.hpp"
#include "cadapt/error.hpp"
#include "cadapt/linear_model.hpp"
#include "cadapt/taxonomy.hpp"

namespace cadapt {

/// Largest adaptation cost a rejected subject will pay: flipping -1 to +1
/// gains 2 units of utility.
inline constexpr double kMaxWorthwhileCost = 2.0;

struct BestResponseResult {
  FeatureVector adapted;
  double cost_incurred = 0.0;
  bool moved = false;
  Family family = Family::kActionable;
  double original_score = 0.0;
  double adapted_score = 0.0;
  bool accepted_before = false;

  /// A moved subject lands on the boundary and is accepted; an unmoved one
  /// keeps its original decision.
  bool accepted_after() const { return accepted_before || moved; }
};

/// Minimum cost for a rejected subject to reach the boundary,
/// |w^T x| / sqrt(C_F); +infinity when C_F = 0.
inline double FlipCost(double score, double effective_variance) {
  if (!(effective_variance > 0.0)) {
    return std::numeric_limits<double>::infinity();
  }
  return std::abs(score) / std::sqrt(effective_variance);
}

namespace detail {

inline void CheckAligned(const FeatureVector& x, const LinearModel& w,
                         const CostModel& model, const FeatureTaxonomy& tax) {
  model.CheckCompatible(tax);
  if (w.dim() != tax.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "model has " + std::to_string(w.dim()) +
                    " weights, taxonomy has " + std::to_string(tax.dim()) +
                    " features");
  }
  w.CheckDim(x);
}

inline BestResponseResult Unmoved(const FeatureVector& x, double score,
                                  bool accepted, Family family) {
  BestResponseResult r;
  r.adapted = x;
  r.family = family;
  r.original_score = score;
  r.adapted_score = score;
  r.accepted_before = accepted;
  return r;
}

}  // namespace detail

/// Closed-form F-best response against h(x) = sign(w^T x) under the
/// Mahalanobis cost. A rejected subject moves x_F to
///
///   x_F - (w^T x / C_F) S_F w_F
///
/// when the cost |w^T x| / sqrt(C_F) is at most 2, and stays put otherwise.
/// Cost exactly 2 moves. C_F = 0 means no move is possible.
inline BestResponseResult BestResponse(const FeatureVector& x,
                                       const LinearModel& w,
                                       const CostModel& model,
                                       const FeatureTaxonomy& tax,
                                       Family family) {
  detail::CheckAligned(x, w, model, tax);
  const double score = w.score(x);
  const bool accepted = w.accepts(x);
  if (accepted) return detail::Unmoved(x, score, true, family);

  const double c = EffectiveVariance(w, model, tax, family);
  const double flip_cost = FlipCost(score, c);
  if (!(flip_cost <= kMaxWorthwhileCost)) {
    return detail::Unmoved(x, score, false, family);
  }

  FeatureVector adapted = x;
  const double step = -score / c;
  auto move_block = [&](const std::vector<std::size_t>& idx,
                        const Eigen::MatrixXd& cov) {
    if (idx.empty()) return;
    const Eigen::VectorXd wf = detail::Gather(w.weights(), idx);
    detail::ScatterAdd(adapted, idx, cov * wf, step);
  };
  if (family != Family::kManipulable) {
    move_block(tax.improvable(), model.cov_improvable());
  }
  if (family != Family::kImprovable) {
    move_block(tax.manipulable(), model.cov_manipulable());
  }

  BestResponseResult r;
  r.adapted = std::move(adapted);
  r.cost_incurred = flip_cost;
  r.moved = true;
  r.family = family;
  r.original_score = score;
  r.adapted_score = w.score(r.adapted);
  r.accepted_before = false;
  return r;
}

}  // namespace cadapt
