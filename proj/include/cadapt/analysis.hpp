#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "cadapt/best_response.hpp"
#include "cadapt/cost_model.hpp"
#include "cadapt/error.hpp"
#include "cadapt/linear_model.hpp"
#include "cadapt/taxonomy.hpp"

namespace cadapt {

// ---------------------------------------------------------------------------
// Improving vs unconstrained response.

struct DominanceReport {
  bool improving_feasible = false;
  bool unconstrained_feasible = false;
  double cost_improving = 0.0;      // +inf when C_I = 0
  double cost_unconstrained = 0.0;  // +inf when C_A = 0
};

/// Compares the flip costs of the improving and unconstrained responses.
/// Whenever C_M > 0 the unconstrained cost is strictly smaller.
inline DominanceReport CheckDominance(const FeatureVector& x,
                                      const LinearModel& w,
                                      const CostModel& model,
                                      const FeatureTaxonomy& tax) {
  detail::CheckAligned(x, w, model, tax);
  const double score = w.score(x);
  DominanceReport r;
  r.cost_improving =
      FlipCost(score, EffectiveVariance(w, model, tax, Family::kImprovable));
  r.cost_unconstrained =
      FlipCost(score, EffectiveVariance(w, model, tax, Family::kActionable));
  r.improving_feasible = r.cost_improving <= kMaxWorthwhileCost;
  r.unconstrained_feasible = r.cost_unconstrained <= kMaxWorthwhileCost;
  return r;
}

// ---------------------------------------------------------------------------
// Off-diagonal perturbations of the cost matrix.

struct PerturbationResult {
  Family block = Family::kImprovable;  // kImprovable or kManipulable
  std::size_t feature_i = 0;           // taxonomy indices
  std::size_t feature_j = 0;
  double tau = 0.0;
  CostModel perturbed;
  double effective_variance_before = 0.0;
  double effective_variance_after = 0.0;
  std::vector<std::size_t> sample_rows;  // rejected members of the sample
  std::vector<double> cost_before;
  std::vector<double> cost_after;
};

namespace detail {

inline int SignOf(double v) { return (v > 0.0) - (v < 0.0); }

struct PairCandidate {
  Family block;
  Eigen::Index i;  // block-local
  double weight_abs;
};

}  // namespace detail

/// Searches for a symmetric off-diagonal perturbation
///
///   S~^-1 = S^-1 + tau (e_i e_j^T + e_j e_i^T)
///
/// inside one block that raises C_A = w_A^T S w_A and therefore lowers the
/// unconstrained flip cost of every rejected sample member.
///
/// With T = [[1/tau + S_ij, S_jj], [S_ii, 1/tau + S_ij]] and
///   a = (S w)_i, b = (S w)_j,
///   E'  = -S_jj a^2 - S_ii b^2 + 2 S_ij a b,
///   E'' = 2 a b,
/// the drop in S is w^T (S - S~) w = (E' + E''/tau) / det(T), which is
/// negative once sign(det T) = -sign(E') and sign(tau) = -sign(det T)
/// sign(E''). det(T) > 0 holds for 0 < |tau| <= tau_max and det(T) < 0 for
/// |tau| >= tau_min, where
///   tau_max = 1 / (sqrt(S_ii S_jj) + |S_ij|),
///   tau_min = 1 / (sqrt(S_ii S_jj) - |S_ij|).
///
/// Pairs are scanned with |w_i| descending (improvable block first on ties),
/// j ascending; magnitudes tau_max / 2 then 2 tau_min; signs + then -.
/// Every accepted candidate is re-validated numerically: the perturbed block
/// must factor and every rejected sample must get strictly cheaper.
inline PerturbationResult FindCostReducingPerturbation(
    const CostModel& model, const LinearModel& w, const FeatureTaxonomy& tax,
    const std::vector<FeatureVector>& sample) {
  model.CheckCompatible(tax);
  if (w.dim() != tax.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "model dimension does not match taxonomy");
  }
  if (sample.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "perturbation sample is empty");
  }

  std::vector<std::size_t> rejected;
  std::vector<double> scores;
  for (std::size_t r = 0; r < sample.size(); ++r) {
    w.CheckDim(sample[r]);
    if (!w.accepts(sample[r])) {
      rejected.push_back(r);
      scores.push_back(w.score(sample[r]));
    }
  }
  if (rejected.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "perturbation sample has no rejected subjects");
  }

  const double c_before = EffectiveVariance(w, model, tax, Family::kActionable);
  const Eigen::VectorXd wi = detail::Gather(w.weights(), tax.improvable());
  const Eigen::VectorXd wm = detail::Gather(w.weights(), tax.manipulable());
  if (wi.cwiseAbs().sum() + wm.cwiseAbs().sum() == 0.0) {
    throw Error(ErrorCode::kInvalidArgument,
                "classifier has no nonzero actionable weight");
  }

  std::vector<detail::PairCandidate> candidates;
  for (Eigen::Index k = 0; k < wi.size(); ++k) {
    if (wi[k] != 0.0) {
      candidates.push_back({Family::kImprovable, k, std::abs(wi[k])});
    }
  }
  for (Eigen::Index k = 0; k < wm.size(); ++k) {
    if (wm[k] != 0.0) {
      candidates.push_back({Family::kManipulable, k, std::abs(wm[k])});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const detail::PairCandidate& a,
                      const detail::PairCandidate& b) {
                     return a.weight_abs > b.weight_abs;
                   });

  for (const detail::PairCandidate& cand : candidates) {
    const bool improvable = cand.block == Family::kImprovable;
    const Eigen::MatrixXd& s =
        improvable ? model.cov_improvable() : model.cov_manipulable();
    const Eigen::MatrixXd& s_inv =
        improvable ? model.inv_cov_improvable() : model.inv_cov_manipulable();
    const Eigen::VectorXd& wf = improvable ? wi : wm;
    const Eigen::VectorXd sw = s * wf;
    const Eigen::Index i = cand.i;

    for (Eigen::Index j = 0; j < s.rows(); ++j) {
      if (j == i) continue;
      const double sii = s(i, i);
      const double sjj = s(j, j);
      const double sij = s(i, j);
      const double a = sw[i];
      const double b = sw[j];
      const double e1 = -sjj * a * a - sii * b * b + 2.0 * sij * a * b;
      const double e2 = 2.0 * a * b;
      if (detail::SignOf(e1) == 0 && detail::SignOf(e2) == 0) continue;

      const double root = std::sqrt(sii * sjj);
      const double tau_max = 1.0 / (root + std::abs(sij));
      const double gap = root - std::abs(sij);
      const double tau_min =
          gap > 0.0 ? 1.0 / gap : std::numeric_limits<double>::infinity();

      for (double magnitude : {0.5 * tau_max, 2.0 * tau_min}) {
        if (!std::isfinite(magnitude)) continue;
        for (double sign : {1.0, -1.0}) {
          const double tau = sign * magnitude;
          const double t_diag = 1.0 / tau + sij;
          const double det_t = t_diag * t_diag - sii * sjj;
          if (detail::SignOf(det_t) != -detail::SignOf(e1)) continue;
          if (detail::SignOf(e2) != 0 &&
              detail::SignOf(tau) !=
                  -detail::SignOf(det_t) * detail::SignOf(e2)) {
            continue;
          }

          Eigen::MatrixXd perturbed_block = s_inv;
          perturbed_block(i, j) += tau;
          perturbed_block(j, i) += tau;
          CostModel perturbed;
          try {
            perturbed = improvable
                            ? CostModel::Build(perturbed_block,
                                               model.inv_cov_manipulable())
                            : CostModel::Build(model.inv_cov_improvable(),
                                               perturbed_block);
          } catch (const Error&) {
            continue;
          }
          const double c_after =
              EffectiveVariance(w, perturbed, tax, Family::kActionable);
          if (!(c_after > c_before)) continue;

          PerturbationResult out;
          out.block = cand.block;
          const auto& block_idx =
              improvable ? tax.improvable() : tax.manipulable();
          out.feature_i = block_idx[static_cast<std::size_t>(i)];
          out.feature_j = block_idx[static_cast<std::size_t>(j)];
          out.tau = tau;
          out.effective_variance_before = c_before;
          out.effective_variance_after = c_after;
          out.sample_rows = rejected;
          bool all_cheaper = true;
          for (double score : scores) {
            const double before = FlipCost(score, c_before);
            const double after = FlipCost(score, c_after);
            all_cheaper = all_cheaper && after < before;
            out.cost_before.push_back(before);
            out.cost_after.push_back(after);
          }
          if (!all_cheaper) continue;
          out.perturbed = std::move(perturbed);
          return out;
        }
      }
    }
  }
  throw Error(ErrorCode::kNoValidPerturbation,
              "no within-block (i, j, tau) lowers the unconstrained cost");
}

// ---------------------------------------------------------------------------
// Subgroups with different manipulation costs.

struct SubgroupCostGap {
  double cost_phi = 0.0;
  double cost_psi = 0.0;
};

/// Unconstrained flip costs of one profile under two cost models that share
/// the improvable block, where phi's manipulable block dominates psi's
/// (S_M,phi^-1 - S_M,psi^-1 positive definite, or zero).
inline SubgroupCostGap SubgroupCostGapFor(const FeatureVector& x,
                                          const LinearModel& w,
                                          const CostModel& phi,
                                          const CostModel& psi,
                                          const FeatureTaxonomy& tax) {
  detail::CheckAligned(x, w, phi, tax);
  detail::CheckAligned(x, w, psi, tax);
  if (phi.dim_improvable() > 0 &&
      (phi.inv_cov_improvable() - psi.inv_cov_improvable())
              .cwiseAbs()
              .maxCoeff() > 1e-12) {
    throw Error(ErrorCode::kOrderingViolation,
                "subgroup cost models must share the improvable block");
  }
  if (phi.dim_manipulable() > 0) {
    const Eigen::MatrixXd diff =
        phi.inv_cov_manipulable() - psi.inv_cov_manipulable();
    if (diff.cwiseAbs().maxCoeff() > 1e-12) {
      Eigen::LLT<Eigen::MatrixXd> llt(diff);
      if (llt.info() != Eigen::Success) {
        throw Error(ErrorCode::kOrderingViolation,
                    "phi's manipulable block does not dominate psi's");
      }
    }
  }
  const double score = w.score(x);
  SubgroupCostGap gap;
  gap.cost_phi =
      FlipCost(score, EffectiveVariance(w, phi, tax, Family::kActionable));
  gap.cost_psi =
      FlipCost(score, EffectiveVariance(w, psi, tax, Family::kActionable));
  return gap;
}

}  // namespace cadapt
