#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "cadapt/error.hpp"
#include "cadapt/linear_model.hpp"
#include "cadapt/taxonomy.hpp"

namespace cadapt {

/// Mahalanobis adaptation-cost geometry with block structure
///
///   S^-1 = [ S_I^-1    0    ]
///          [   0    S_M^-1  ]
///
/// Block coordinates follow the taxonomy order of improvable and
/// manipulable features respectively. Either block may be empty.
class CostModel {
 public:
  static constexpr double kSymmetryTol = 1e-12;

  CostModel() = default;

  static CostModel Build(const Eigen::MatrixXd& inv_cov_improvable,
                         const Eigen::MatrixXd& inv_cov_manipulable) {
    CostModel m;
    m.inv_cov_i_ = Validated(inv_cov_improvable, "inv_cov_improvable");
    m.inv_cov_m_ = Validated(inv_cov_manipulable, "inv_cov_manipulable");
    m.chol_i_ = Factor(m.inv_cov_i_, "inv_cov_improvable");
    m.chol_m_ = Factor(m.inv_cov_m_, "inv_cov_manipulable");
    m.cov_i_ = InverseFromCholesky(m.chol_i_);
    m.cov_m_ = InverseFromCholesky(m.chol_m_);
    return m;
  }

  /// s * I (d_I x d_I) and t * I (d_M x d_M).
  static CostModel Scaled(std::size_t d_improvable, double improvable_scale,
                          std::size_t d_manipulable, double manipulable_scale) {
    const auto di = static_cast<Eigen::Index>(d_improvable);
    const auto dm = static_cast<Eigen::Index>(d_manipulable);
    return Build(improvable_scale * Eigen::MatrixXd::Identity(di, di),
                 manipulable_scale * Eigen::MatrixXd::Identity(dm, dm));
  }

  std::size_t dim_improvable() const {
    return static_cast<std::size_t>(inv_cov_i_.rows());
  }
  std::size_t dim_manipulable() const {
    return static_cast<std::size_t>(inv_cov_m_.rows());
  }

  const Eigen::MatrixXd& inv_cov_improvable() const { return inv_cov_i_; }
  const Eigen::MatrixXd& inv_cov_manipulable() const { return inv_cov_m_; }
  const Eigen::MatrixXd& cov_improvable() const { return cov_i_; }
  const Eigen::MatrixXd& cov_manipulable() const { return cov_m_; }
  /// Lower Cholesky factors L with L L^T = S_F^-1.
  const Eigen::MatrixXd& chol_improvable() const { return chol_i_; }
  const Eigen::MatrixXd& chol_manipulable() const { return chol_m_; }

  /// S_F^-1 restricted to a family; the actionable family is the full block
  /// diagonal matrix.
  Eigen::MatrixXd inv_cov(Family family) const {
    switch (family) {
      case Family::kImprovable: return inv_cov_i_;
      case Family::kManipulable: return inv_cov_m_;
      case Family::kActionable: return BlockDiag(inv_cov_i_, inv_cov_m_);
    }
    return {};
  }

  Eigen::MatrixXd cov(Family family) const {
    switch (family) {
      case Family::kImprovable: return cov_i_;
      case Family::kManipulable: return cov_m_;
      case Family::kActionable: return BlockDiag(cov_i_, cov_m_);
    }
    return {};
  }

  void CheckCompatible(const FeatureTaxonomy& tax) const {
    if (tax.improvable().size() != dim_improvable() ||
        tax.manipulable().size() != dim_manipulable()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "cost model blocks are " + std::to_string(dim_improvable()) +
                      "x" + std::to_string(dim_manipulable()) +
                      " but taxonomy has " +
                      std::to_string(tax.improvable().size()) +
                      " improvable and " +
                      std::to_string(tax.manipulable().size()) +
                      " manipulable features");
    }
  }

  static Eigen::MatrixXd BlockDiag(const Eigen::MatrixXd& a,
                                   const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out =
        Eigen::MatrixXd::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    out.topLeftCorner(a.rows(), a.cols()) = a;
    out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
  }

 private:
  static Eigen::MatrixXd Validated(const Eigen::MatrixXd& a,
                                   const std::string& what) {
    if (a.rows() != a.cols()) {
      throw Error(ErrorCode::kDimensionMismatch, what + " is not square");
    }
    if (!a.allFinite()) {
      throw Error(ErrorCode::kInvalidArgument, what + " has non-finite entries");
    }
    if (a.size() == 0) return a;
    const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
    if (asym >= kSymmetryTol) {
      throw Error(ErrorCode::kNotSymmetric,
                  what + " deviates from symmetry by " + std::to_string(asym));
    }
    return 0.5 * (a + a.transpose());
  }

  static Eigen::MatrixXd Factor(const Eigen::MatrixXd& a,
                                const std::string& what) {
    if (a.size() == 0) return a;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorCode::kNotPositiveDefinite,
                  what + " has a non-positive Cholesky pivot");
    }
    return llt.matrixL();
  }

  static Eigen::MatrixXd InverseFromCholesky(const Eigen::MatrixXd& lower) {
    if (lower.size() == 0) return lower;
    const Eigen::Index n = lower.rows();
    // Solve L L^T X = I column by column.
    Eigen::MatrixXd x = Eigen::MatrixXd::Identity(n, n);
    lower.triangularView<Eigen::Lower>().solveInPlace(x);
    lower.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
    return 0.5 * (x + x.transpose());
  }

  Eigen::MatrixXd inv_cov_i_;
  Eigen::MatrixXd inv_cov_m_;
  Eigen::MatrixXd cov_i_;
  Eigen::MatrixXd cov_m_;
  Eigen::MatrixXd chol_i_;
  Eigen::MatrixXd chol_m_;
};

/// Mahalanobis cost of moving from x to x_prime; only actionable coordinates
/// contribute and immutable coordinates must agree.
inline double Cost(const FeatureVector& x, const FeatureVector& x_prime,
                   const CostModel& model, const FeatureTaxonomy& tax) {
  model.CheckCompatible(tax);
  const auto d = static_cast<Eigen::Index>(tax.dim());
  if (x.size() != d || x_prime.size() != d) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cost() inputs are not aligned to the taxonomy");
  }
  for (std::size_t k : tax.immutable()) {
    const auto i = static_cast<Eigen::Index>(k);
    if (std::abs(x[i] - x_prime[i]) > 1e-12) {
      throw Error(ErrorCode::kImmutableViolation,
                  "immutable feature '" + tax.feature(k).name + "' changed");
    }
  }
  const Eigen::VectorXd di = detail::Gather(x - x_prime, tax.improvable());
  const Eigen::VectorXd dm = detail::Gather(x - x_prime, tax.manipulable());
  double q = 0.0;
  if (di.size() > 0) q += di.dot(model.inv_cov_improvable() * di);
  if (dm.size() > 0) q += dm.dot(model.inv_cov_manipulable() * dm);
  return std::sqrt(std::max(q, 0.0));
}

/// C_F = w_F^T S_F w_F.
inline double EffectiveVariance(const LinearModel& w, const CostModel& model,
                                const FeatureTaxonomy& tax, Family family) {
  model.CheckCompatible(tax);
  if (w.dim() != tax.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "model dimension does not match taxonomy");
  }
  auto block = [&](const std::vector<std::size_t>& idx,
                   const Eigen::MatrixXd& cov) {
    if (idx.empty()) return 0.0;
    const Eigen::VectorXd wf = detail::Gather(w.weights(), idx);
    return wf.dot(cov * wf);
  };
  const double ci = block(tax.improvable(), model.cov_improvable());
  const double cm = block(tax.manipulable(), model.cov_manipulable());
  switch (family) {
    case Family::kImprovable: return ci;
    case Family::kManipulable: return cm;
    case Family::kActionable: return ci + cm;
  }
  return 0.0;
}

}  // namespace cadapt
