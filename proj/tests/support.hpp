#pragma once

#include <cmath>
#include <algorithm>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cadapt/cadapt.hpp"

namespace cadapt::testing {

inline FeatureTaxonomy MakeTaxonomy(std::size_t d_i, std::size_t d_m,
                                    std::size_t d_u = 0) {
  std::vector<Feature> f;
  for (std::size_t k = 0; k < d_i; ++k) {
    f.push_back({"i" + std::to_string(k), FeatureKind::kImprovable, 0});
  }
  for (std::size_t k = 0; k < d_m; ++k) {
    f.push_back({"m" + std::to_string(k), FeatureKind::kManipulable, 0});
  }
  for (std::size_t k = 0; k < d_u; ++k) {
    f.push_back({"u" + std::to_string(k), FeatureKind::kImmutable, 0});
  }
  return FeatureTaxonomy(std::move(f));
}

/// A A^T + d I with Gaussian A: dense, SPD, reasonably conditioned.
inline Eigen::MatrixXd RandomSpd(std::size_t d, std::mt19937_64& rng) {
  const auto n = static_cast<Eigen::Index>(d);
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < n; ++c) a(r, c) = g(rng);
  Eigen::MatrixXd s = a * a.transpose() / static_cast<double>(d) +
                      0.5 * Eigen::MatrixXd::Identity(n, n);
  return 0.5 * (s + s.transpose());
}

inline Eigen::VectorXd RandomVector(std::size_t d, std::mt19937_64& rng,
                                    double sd = 1.0) {
  std::normal_distribution<double> g(0.0, sd);
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = g(rng);
  return v;
}

inline Dataset SmallDataset(const FeatureTaxonomy& tax, std::size_t n,
                            std::mt19937_64& rng) {
  Dataset d;
  d.name = "random";
  d.taxonomy = tax;
  d.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(tax.dim()));
  d.y.resize(static_cast<Eigen::Index>(n));
  std::normal_distribution<double> g(0.0, 1.0);
  for (Eigen::Index r = 0; r < d.X.rows(); ++r) {
    for (Eigen::Index c = 0; c < d.X.cols(); ++c) d.X(r, c) = g(rng);
    d.y[r] = (d.X.row(r).sum() + g(rng) > 0.0) ? 1 : -1;
  }
  d.y[0] = 1;
  d.y[1] = -1;
  return d;
}

/// Central differences of f's loss, step h.
inline Eigen::VectorXd NumericGradient(const ObjectiveFn& f,
                                       const Eigen::VectorXd& theta,
                                       double h = 1e-5) {
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    Eigen::VectorXd up = theta, down = theta;
    up[k] += h;
    down[k] -= h;
    g[k] = (f(up).loss - f(down).loss) / (2.0 * h);
  }
  return g;
}

/// max_k |a_k - b_k| / max(|a_k|, |b_k|, floor)
inline double MaxRelError(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                          double floor = 1e-4) {
  double worst = 0.0;
  for (Eigen::Index k = 0; k < a.size(); ++k) {
    const double scale =
        std::max({std::abs(a[k]), std::abs(b[k]), floor});
    worst = std::max(worst, std::abs(a[k] - b[k]) / scale);
  }
  return worst;
}

/// True when theta sits within `margin` of a point where one of the
/// objectives is not differentiable: a score at the decision boundary, a
/// flip cost at the move threshold, or an active direction term at zero.
inline bool NearKink(const ObjectiveContext& ctx, const Eigen::VectorXd& theta,
                     double margin) {
  const Dataset& data = ctx.data();
  const auto& idx = ctx.indices(Family::kActionable);
  const Eigen::VectorXd wa = ObjectiveContext::GatherWeights(theta, idx);
  const Eigen::VectorXd sw = ctx.cov(Family::kActionable) * wa;
  const double c = wa.dot(sw);
  if (c < margin) return true;
  const Eigen::VectorXd& r = ctx.directions();
  for (std::size_t row = 0; row < data.size(); ++row) {
    const double s = ctx.Score(theta, row);
    if (std::abs(s) < margin) return true;
    if (std::abs(std::abs(s) / std::sqrt(c) - 2.0) < margin) return true;
    for (Eigen::Index k = 0; k < r.size(); ++k) {
      if (r[k] != 0.0 && std::abs(s / c * sw[k]) < margin) return true;
    }
  }
  return false;
}

}  // namespace cadapt::testing
