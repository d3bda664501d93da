#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cadapt/best_response.hpp"
#include "cadapt/cost_model.hpp"
#include "cadapt/dataset.hpp"
#include "cadapt/error.hpp"
#include "cadapt/linear_model.hpp"
#include "cadapt/taxonomy.hpp"

namespace cadapt {

/// Below this C_F the gradient of sqrt(C_F) is taken as 0.
inline constexpr double kSqrtGradFloor = 1e-18;

struct ObjectiveValue {
  double loss = 0.0;
  Eigen::VectorXd gradient;  // d + 1 entries, intercept first
};

using ObjectiveFn = std::function<ObjectiveValue(const Eigen::VectorXd&)>;

/// log(1 + e^-z), stable for both signs.
inline double LogisticLoss(double z) {
  return z >= 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

/// d/dz log(1 + e^-z) = -1 / (1 + e^z).
inline double LogisticLossDerivative(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return -e / (1.0 + e);
  }
  return -1.0 / (1.0 + std::exp(z));
}

/// Block geometry shared by every objective evaluation of one fit.
class ObjectiveContext {
 public:
  ObjectiveContext(const Dataset& data, const CostModel& model)
      : data_(&data),
        improvable_(data.taxonomy.improvable()),
        manipulable_(data.taxonomy.manipulable()),
        actionable_(data.taxonomy.actionable()),
        cov_i_(model.cov_improvable()),
        cov_m_(model.cov_manipulable()),
        cov_a_(model.cov(Family::kActionable)) {
    data.Validate();
    model.CheckCompatible(data.taxonomy);
    directions_.resize(static_cast<Eigen::Index>(actionable_.size()));
    for (std::size_t k = 0; k < actionable_.size(); ++k) {
      directions_[static_cast<Eigen::Index>(k)] =
          data.taxonomy.feature(actionable_[k]).direction;
    }
  }

  const Dataset& data() const { return *data_; }
  std::size_t num_params() const { return data_->dim() + 1; }

  const std::vector<std::size_t>& indices(Family f) const {
    switch (f) {
      case Family::kImprovable: return improvable_;
      case Family::kManipulable: return manipulable_;
      case Family::kActionable: return actionable_;
    }
    return actionable_;
  }
  const Eigen::MatrixXd& cov(Family f) const {
    switch (f) {
      case Family::kImprovable: return cov_i_;
      case Family::kManipulable: return cov_m_;
      case Family::kActionable: return cov_a_;
    }
    return cov_a_;
  }
  /// Prohibited directions in actionable coordinate order.
  const Eigen::VectorXd& directions() const { return directions_; }

  /// sqrt(C_F) and its gradient with respect to theta (zero intercept slot).
  double SqrtEffectiveVariance(const Eigen::VectorXd& theta, Family f,
                               Eigen::VectorXd* grad) const {
    const auto& idx = indices(f);
    grad->setZero(theta.size());
    if (idx.empty()) return 0.0;
    const Eigen::VectorXd wf = GatherWeights(theta, idx);
    const Eigen::VectorXd swf = cov(f) * wf;
    const double c = wf.dot(swf);
    const double root = std::sqrt(std::max(c, 0.0));
    if (c >= kSqrtGradFloor) {
      for (std::size_t k = 0; k < idx.size(); ++k) {
        (*grad)[static_cast<Eigen::Index>(idx[k] + 1)] =
            swf[static_cast<Eigen::Index>(k)] / root;
      }
    }
    return root;
  }

  static Eigen::VectorXd GatherWeights(const Eigen::VectorXd& theta,
                                       const std::vector<std::size_t>& idx) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      out[static_cast<Eigen::Index>(k)] =
          theta[static_cast<Eigen::Index>(idx[k] + 1)];
    }
    return out;
  }

  double Score(const Eigen::VectorXd& theta, std::size_t r) const {
    return theta[0] +
           data_->X.row(static_cast<Eigen::Index>(r))
               .dot(theta.tail(theta.size() - 1));
  }

  double ScoreScale(const Eigen::VectorXd& theta, std::size_t r) const {
    return std::abs(theta[0]) +
           data_->X.row(static_cast<Eigen::Index>(r))
               .cwiseProduct(theta.tail(theta.size() - 1).transpose())
               .cwiseAbs()
               .sum();
  }

 private:
  const Dataset* data_;
  std::vector<std::size_t> improvable_;
  std::vector<std::size_t> manipulable_;
  std::vector<std::size_t> actionable_;
  Eigen::MatrixXd cov_i_;
  Eigen::MatrixXd cov_m_;
  Eigen::MatrixXd cov_a_;
  Eigen::VectorXd directions_;
};

namespace detail {

inline void CheckParams(const ObjectiveContext& ctx,
                        const Eigen::VectorXd& theta) {
  if (static_cast<std::size_t>(theta.size()) != ctx.num_params()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "parameter vector has " + std::to_string(theta.size()) +
                    " entries, expected " + std::to_string(ctx.num_params()));
  }
}

/// (1/n) sum_i l(t_i (w^T x_i + 2 sqrt(C_F))) where t_i = y_i when
/// `use_labels` and 1 otherwise. `shift` selects F; nullptr means no shift.
inline ObjectiveValue ShiftedLogisticTerm(const ObjectiveContext& ctx,
                                          const Eigen::VectorXd& theta,
                                          const Family* shift,
                                          bool use_labels) {
  const Dataset& data = ctx.data();
  const std::size_t n = data.size();
  Eigen::VectorXd root_grad = Eigen::VectorXd::Zero(theta.size());
  const double root =
      shift ? ctx.SqrtEffectiveVariance(theta, *shift, &root_grad) : 0.0;

  ObjectiveValue out;
  out.gradient = Eigen::VectorXd::Zero(theta.size());
  double weighted_sum = 0.0;  // sum of l'(.) t_i
  const auto d = theta.size() - 1;
  for (std::size_t r = 0; r < n; ++r) {
    const double t = use_labels ? data.label(r) : 1.0;
    const double z = t * (ctx.Score(theta, r) + 2.0 * root);
    out.loss += LogisticLoss(z);
    const double dl = LogisticLossDerivative(z) * t;
    weighted_sum += dl;
    out.gradient[0] += dl;
    out.gradient.tail(d) +=
        dl * data.X.row(static_cast<Eigen::Index>(r)).transpose();
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.loss *= inv_n;
  out.gradient *= inv_n;
  out.gradient += 2.0 * weighted_sum * inv_n * root_grad;
  return out;
}

inline void AddL2(const Eigen::VectorXd& theta, double l2_reg,
                  ObjectiveValue* value) {
  if (l2_reg == 0.0) return;
  const auto d = theta.size() - 1;
  value->loss += l2_reg * theta.tail(d).squaredNorm();
  value->gradient.tail(d) += 2.0 * l2_reg * theta.tail(d);
}

inline void CheckFinite(const ObjectiveValue& v, const char* what) {
  if (!std::isfinite(v.loss) || !v.gradient.allFinite()) {
    throw Error(ErrorCode::kNonFiniteLoss,
                std::string(what) + " produced a non-finite value");
  }
}

}  // namespace detail

/// Directional penalty
///
///   (1/n) sum_i sum_k max(r_k (Delta(x_i) - x_i)_k, 0)
///
/// where Delta is the unconstrained best response under theta. For a moving
/// subject Delta(x)_A - x_A = -(s / C_A) S w_A with s = w^T x, so on an
/// active term the subgradient is
///
///   r_k [ -((S w)_k / C_A) x~  -  s (S_k. / C_A - 2 (S w)_k S w / C_A^2) ].
///
/// The move / no-move switch is treated as locally constant and inactive or
/// exactly-zero terms contribute a zero subgradient.
inline ObjectiveValue DirectionPenalty(const ObjectiveContext& ctx,
                                       const Eigen::VectorXd& theta) {
  detail::CheckParams(ctx, theta);
  ObjectiveValue out;
  out.gradient = Eigen::VectorXd::Zero(theta.size());
  const Eigen::VectorXd& r = ctx.directions();
  if (r.size() == 0 || r.cwiseAbs().sum() == 0.0) return out;

  const Dataset& data = ctx.data();
  const auto& idx = ctx.indices(Family::kActionable);
  const Eigen::MatrixXd& s_mat = ctx.cov(Family::kActionable);
  const Eigen::VectorXd wa = ObjectiveContext::GatherWeights(theta, idx);
  const Eigen::VectorXd sw = s_mat * wa;
  const double c = wa.dot(sw);
  if (!(c > 0.0)) return out;
  const double root = std::sqrt(c);
  const auto d = theta.size() - 1;

  for (std::size_t row = 0; row < data.size(); ++row) {
    const double s = ctx.Score(theta, row);
    if (s >= -kBoundaryRelTol * ctx.ScoreScale(theta, row)) continue;
    if (!(std::abs(s) / root <= kMaxWorthwhileCost)) continue;
    for (Eigen::Index k = 0; k < r.size(); ++k) {
      if (r[k] == 0.0) continue;
      const double delta = -(s / c) * sw[k];
      const double active = r[k] * delta;
      if (!(active > 0.0)) continue;
      out.loss += active;
      // d delta / d theta
      const double coef_x = -sw[k] / c;
      out.gradient[0] += r[k] * coef_x;
      out.gradient.tail(d) +=
          r[k] * coef_x *
          data.X.row(static_cast<Eigen::Index>(row)).transpose();
      const Eigen::VectorXd dw =
          -s * (s_mat.row(k).transpose() / c - 2.0 * sw[k] * sw / (c * c));
      for (std::size_t a = 0; a < idx.size(); ++a) {
        out.gradient[static_cast<Eigen::Index>(idx[a] + 1)] +=
            r[k] * dw[static_cast<Eigen::Index>(a)];
      }
    }
  }
  const double inv_n = 1.0 / static_cast<double>(data.size());
  out.loss *= inv_n;
  out.gradient *= inv_n;
  return out;
}

/// L2-regularized logistic regression on y w^T x.
inline ObjectiveValue StaticObjective(const ObjectiveContext& ctx,
                                      const Eigen::VectorXd& theta,
                                      double l2_reg) {
  detail::CheckParams(ctx, theta);
  ObjectiveValue v = detail::ShiftedLogisticTerm(ctx, theta, nullptr, true);
  detail::AddL2(theta, l2_reg, &v);
  detail::CheckFinite(v, "static objective");
  return v;
}

/// Logistic surrogate of the error after the unconstrained best response:
/// (1/n) sum_i l(y_i (w^T x_i + 2 sqrt(C_A))) + l2 ||w||^2.
inline ObjectiveValue ManipulationProofObjective(const ObjectiveContext& ctx,
                                                 const Eigen::VectorXd& theta,
                                                 double l2_reg) {
  detail::CheckParams(ctx, theta);
  const Family shift = Family::kActionable;
  ObjectiveValue v = detail::ShiftedLogisticTerm(ctx, theta, &shift, true);
  detail::AddL2(theta, l2_reg, &v);
  detail::CheckFinite(v, "manipulation-proof objective");
  return v;
}

/// Constructive-adaptation surrogate
///
///   (1/n) sum_i [ l(y_i (w^T x_i + 2 sqrt(C_M))) + lambda l(w^T x_i + 2 sqrt(C_I)) ]
///     + eta * DirectionPenalty + l2 ||w||^2
///
/// with l(z) = log(1 + e^-z). The first term is the surrogate of the error
/// after manipulation, the second rewards acceptance after improvement.
inline ObjectiveValue CaObjective(const ObjectiveContext& ctx,
                                  const Eigen::VectorXd& theta, double lambda,
                                  double eta, double l2_reg) {
  detail::CheckParams(ctx, theta);
  const Family manip = Family::kManipulable;
  const Family improv = Family::kImprovable;
  ObjectiveValue v = detail::ShiftedLogisticTerm(ctx, theta, &manip, true);
  if (lambda != 0.0) {
    const ObjectiveValue imp =
        detail::ShiftedLogisticTerm(ctx, theta, &improv, false);
    v.loss += lambda * imp.loss;
    v.gradient += lambda * imp.gradient;
  }
  if (eta != 0.0) {
    const ObjectiveValue pen = DirectionPenalty(ctx, theta);
    v.loss += eta * pen.loss;
    v.gradient += eta * pen.gradient;
  }
  detail::AddL2(theta, l2_reg, &v);
  detail::CheckFinite(v, "constructive-adaptation objective");
  return v;
}

/// Convenience overload binding a LinearModel to the dataset's taxonomy.
inline ObjectiveValue CaObjective(const LinearModel& w, const Dataset& data,
                                  const CostModel& model, double lambda,
                                  double eta, double l2_reg) {
  const ObjectiveContext ctx(data, model);
  return CaObjective(ctx, w.parameters(), lambda, eta, l2_reg);
}

inline ObjectiveValue DirectionPenalty(const LinearModel& w,
                                       const Dataset& data,
                                       const CostModel& model) {
  const ObjectiveContext ctx(data, model);
  return DirectionPenalty(ctx, w.parameters());
}

}  // namespace cadapt
