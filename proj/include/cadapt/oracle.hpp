#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "cadapt/best_response.hpp"
#include "cadapt/cost_model.hpp"
#include "cadapt/linear_model.hpp"
#include "cadapt/taxonomy.hpp"

namespace cadapt {

/// Reference best response that never touches the closed form. It solves
///
///   min_{x'_F} (x_F - x'_F)^T S_F^-1 (x_F - x'_F)   s.t.  w^T x' = 0
///
/// through its (d_F + 1) x (d_F + 1) KKT system
///
///   [ 2 S_F^-1  w_F ] [ x'_F ]   [ 2 S_F^-1 x_F              ]
///   [ w_F^T     0   ] [ mu   ] = [ -(w^T x - w_F^T x_F)      ]
///
/// with a full-pivot LU, measures the cost with the quadratic form, and then
/// applies the cost <= 2 gate. A singular system (w_F = 0) means no move.
inline BestResponseResult OracleBestResponse(const FeatureVector& x,
                                             const LinearModel& w,
                                             const CostModel& model,
                                             const FeatureTaxonomy& tax,
                                             Family family) {
  detail::CheckAligned(x, w, model, tax);
  const double score = w.score(x);
  const bool accepted = w.accepts(x);
  if (accepted) return detail::Unmoved(x, score, true, family);

  const std::vector<std::size_t> idx = tax.indices(family);
  const auto n = static_cast<Eigen::Index>(idx.size());
  if (n == 0) return detail::Unmoved(x, score, false, family);

  const Eigen::MatrixXd a = model.inv_cov(family);
  const Eigen::VectorXd wf = detail::Gather(w.weights(), idx);
  const Eigen::VectorXd xf = detail::Gather(x, idx);
  const double rest = score - wf.dot(xf);

  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + 1, n + 1);
  kkt.topLeftCorner(n, n) = 2.0 * a;
  kkt.block(0, n, n, 1) = wf;
  kkt.block(n, 0, 1, n) = wf.transpose();
  Eigen::VectorXd rhs(n + 1);
  rhs.head(n) = 2.0 * a * xf;
  rhs[n] = -rest;

  Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
  if (!lu.isInvertible()) return detail::Unmoved(x, score, false, family);
  const Eigen::VectorXd sol = lu.solve(rhs);

  FeatureVector candidate = x;
  for (Eigen::Index k = 0; k < n; ++k) {
    candidate[static_cast<Eigen::Index>(idx[static_cast<std::size_t>(k)])] =
        sol[k];
  }
  const double cost = Cost(x, candidate, model, tax);
  if (!(cost <= kMaxWorthwhileCost)) {
    return detail::Unmoved(x, score, false, family);
  }

  BestResponseResult r;
  r.adapted = std::move(candidate);
  r.cost_incurred = cost;
  r.moved = true;
  r.family = family;
  r.original_score = score;
  r.adapted_score = w.score(r.adapted);
  r.accepted_before = false;
  return r;
}

}  // namespace cadapt
