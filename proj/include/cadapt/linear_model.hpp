#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cadapt/error.hpp"

namespace cadapt {

/// A feature vector aligned to a FeatureTaxonomy (no intercept coordinate).
using FeatureVector = Eigen::VectorXd;

/// Scores within this relative distance of the boundary count as accepted.
/// Best responses land on the hyperplane only up to rounding, so the
/// sign(0) = +1 convention needs a few ulps of slack to stay idempotent.
inline constexpr double kBoundaryRelTol = 1e-12;

namespace detail {

inline Eigen::VectorXd Gather(const Eigen::VectorXd& v,
                              const std::vector<std::size_t>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out[static_cast<Eigen::Index>(k)] = v[static_cast<Eigen::Index>(idx[k])];
  }
  return out;
}

inline void ScatterAdd(Eigen::VectorXd& target,
                       const std::vector<std::size_t>& idx,
                       const Eigen::VectorXd& values, double scale = 1.0) {
  for (std::size_t k = 0; k < idx.size(); ++k) {
    target[static_cast<Eigen::Index>(idx[k])] +=
        scale * values[static_cast<Eigen::Index>(k)];
  }
}

}  // namespace detail

/// h(x) = sign(w0 + w^T x) with sign(0) = +1.
class LinearModel {
 public:
  LinearModel() = default;

  LinearModel(double intercept, Eigen::VectorXd weights)
      : intercept_(intercept), weights_(std::move(weights)) {
    if (!std::isfinite(intercept_) || !weights_.allFinite()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "linear model has non-finite entries");
    }
  }

  /// Builds from the stacked parameter vector (intercept first).
  static LinearModel FromParameters(const Eigen::VectorXd& theta) {
    if (theta.size() < 1) {
      throw Error(ErrorCode::kInvalidArgument, "empty parameter vector");
    }
    return LinearModel(theta[0], theta.tail(theta.size() - 1));
  }

  Eigen::VectorXd parameters() const {
    Eigen::VectorXd theta(weights_.size() + 1);
    theta[0] = intercept_;
    theta.tail(weights_.size()) = weights_;
    return theta;
  }

  double intercept() const { return intercept_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  std::size_t dim() const { return static_cast<std::size_t>(weights_.size()); }

  double score(const FeatureVector& x) const {
    CheckDim(x);
    return intercept_ + weights_.dot(x);
  }

  /// Magnitude scale of the score's summands, used for the boundary slack.
  double score_scale(const FeatureVector& x) const {
    CheckDim(x);
    return std::abs(intercept_) + weights_.cwiseProduct(x).cwiseAbs().sum();
  }

  bool accepts(const FeatureVector& x) const {
    return score(x) >= -kBoundaryRelTol * score_scale(x);
  }

  int predict(const FeatureVector& x) const { return accepts(x) ? 1 : -1; }

  void CheckDim(const FeatureVector& x) const {
    if (x.size() != weights_.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "feature vector has " + std::to_string(x.size()) +
                      " entries, model expects " +
                      std::to_string(weights_.size()));
    }
  }

 private:
  double intercept_ = 0.0;
  Eigen::VectorXd weights_;
};

}  // namespace cadapt
