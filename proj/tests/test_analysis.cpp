#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"

namespace cadapt {
namespace {

using testing::MakeTaxonomy;
using testing::RandomSpd;
using testing::RandomVector;

// One improvable and one manipulable feature with S_I = S_M = I lets the test
// dial C_I = w_I^2 and C_M = w_M^2 directly.
struct Dial {
  FeatureTaxonomy tax = MakeTaxonomy(1, 1);
  CostModel model = CostModel::Scaled(1, 1.0, 1, 1.0);
};

TEST(Dominance, NoManipulableMass) {
  const Dial d;
  const LinearModel w(-1.0, Eigen::Vector2d(1.0, 0.0));
  const DominanceReport r =
      CheckDominance(Eigen::Vector2d(0.0, 5.0), w, d.model, d.tax);
  EXPECT_EQ(r.cost_improving, r.cost_unconstrained);
}

TEST(Dominance, UnitBlocks) {
  const Dial d;
  // C_I = 1, C_M = 1, w^T x = -2.
  const LinearModel w(-2.0, Eigen::Vector2d(1.0, 1.0));
  const DominanceReport r =
      CheckDominance(Eigen::Vector2d(0.0, 0.0), w, d.model, d.tax);
  EXPECT_DOUBLE_EQ(r.cost_improving, 2.0);
  EXPECT_DOUBLE_EQ(r.cost_unconstrained, std::sqrt(2.0));
  EXPECT_TRUE(r.improving_feasible);
  EXPECT_TRUE(r.unconstrained_feasible);
}

TEST(Dominance, UnconstrainedCostExactlyTwo) {
  const Dial d;
  // C_I = 1, C_M = 3, |w^T x| = 2 sqrt(C_A) = 4 (built from the computed
  // C_A so the unconstrained cost is exactly 2 in floating point).
  const Eigen::Vector2d wv(1.0, std::sqrt(3.0));
  const double c_a = EffectiveVariance(LinearModel(0.0, wv), d.model, d.tax,
                                       Family::kActionable);
  const LinearModel w(-2.0 * std::sqrt(c_a), wv);
  const DominanceReport r =
      CheckDominance(Eigen::Vector2d(0.0, 0.0), w, d.model, d.tax);
  EXPECT_NEAR(r.cost_improving, 4.0, 1e-14);
  EXPECT_EQ(r.cost_unconstrained, 2.0);
  EXPECT_FALSE(r.improving_feasible);
  EXPECT_TRUE(r.unconstrained_feasible);
}

TEST(Dominance, ZeroImprovableMassIsInfinite) {
  const Dial d;
  const LinearModel w(-1.0, Eigen::Vector2d(0.0, 1.0));
  const DominanceReport r =
      CheckDominance(Eigen::Vector2d(0.0, 0.0), w, d.model, d.tax);
  EXPECT_TRUE(std::isinf(r.cost_improving));
  EXPECT_FALSE(r.improving_feasible);
}

TEST(Dominance, RandomDraws) {
  std::mt19937_64 rng(77);
  const FeatureTaxonomy tax = MakeTaxonomy(3, 2);
  for (int t = 0; t < 100; ++t) {
    const CostModel m = CostModel::Build(RandomSpd(3, rng), RandomSpd(2, rng));
    const LinearModel w(0.3, RandomVector(5, rng));
    const FeatureVector x = RandomVector(5, rng);
    if (w.score(x) == 0.0) continue;
    const DominanceReport r = CheckDominance(x, w, m, tax);
    EXPECT_LT(r.cost_unconstrained, r.cost_improving);
  }
}

TEST(Perturbation, IdentityWithDenseWeights) {
  const FeatureTaxonomy tax = MakeTaxonomy(2, 0);
  const CostModel m = CostModel::Scaled(2, 1.0, 0, 1.0);
  const LinearModel w(-3.0, Eigen::Vector2d(1.0, 1.0));
  const PerturbationResult p = FindCostReducingPerturbation(
      m, w, tax, {Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(0.5, 0.2)});
  EXPECT_LT(p.tau, 0.0);
  EXPECT_GT(p.tau, -1.0);
  // Independent check: invert [[1, tau], [tau, 1]] and evaluate w^T S~ w.
  const double det = 1.0 - p.tau * p.tau;
  const double c_tilde = (1.0 + 1.0 - 2.0 * p.tau) / det;
  EXPECT_NEAR(p.effective_variance_after, c_tilde, 1e-12);
  EXPECT_GT(c_tilde, 2.0);
  EXPECT_EQ(p.effective_variance_before, 2.0);
  Eigen::LLT<Eigen::MatrixXd> llt(p.perturbed.inv_cov_improvable());
  EXPECT_EQ(llt.info(), Eigen::Success);
  ASSERT_EQ(p.cost_before.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) EXPECT_LT(p.cost_after[k], p.cost_before[k]);
}

TEST(Perturbation, RandomNegativesAllGetCheaper) {
  std::mt19937_64 rng(31);
  const FeatureTaxonomy tax = MakeTaxonomy(3, 3);
  const CostModel m = CostModel::Scaled(3, 1.0, 3, 1.0);
  for (int t = 0; t < 10; ++t) {
    const LinearModel w(-1.0, RandomVector(6, rng));
    std::vector<FeatureVector> sample;
    while (sample.size() < 20) {
      FeatureVector x = RandomVector(6, rng);
      if (!w.accepts(x)) sample.push_back(std::move(x));
    }
    const PerturbationResult p = FindCostReducingPerturbation(m, w, tax, sample);
    ASSERT_EQ(p.sample_rows.size(), 20u);
    for (std::size_t k = 0; k < sample.size(); ++k) {
      const double score = w.score(sample[k]);
      const double before =
          FlipCost(score, EffectiveVariance(w, m, tax, Family::kActionable));
      const double after = FlipCost(
          score, EffectiveVariance(w, p.perturbed, tax, Family::kActionable));
      EXPECT_LT(after, before);
    }
    EXPECT_NE(p.feature_i, p.feature_j);
    EXPECT_EQ(tax.feature(p.feature_i).kind, tax.feature(p.feature_j).kind);
  }
}

TEST(Perturbation, CorrelatedBlocks) {
  std::mt19937_64 rng(8);
  const FeatureTaxonomy tax = MakeTaxonomy(3, 2);
  int found = 0;
  for (int t = 0; t < 20; ++t) {
    const CostModel m = CostModel::Build(RandomSpd(3, rng), RandomSpd(2, rng));
    const LinearModel w(-2.0, RandomVector(5, rng));
    try {
      const PerturbationResult p = FindCostReducingPerturbation(
          m, w, tax, {FeatureVector::Zero(5)});
      EXPECT_GT(p.effective_variance_after, p.effective_variance_before);
      ++found;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kNoValidPerturbation);
    }
  }
  EXPECT_GT(found, 15);
}

TEST(Perturbation, SingleActionableFeatureHasNoPair) {
  const FeatureTaxonomy tax = MakeTaxonomy(1, 0, 1);
  const CostModel m = CostModel::Scaled(1, 1.0, 0, 1.0);
  const LinearModel w(-1.0, Eigen::Vector2d(1.0, 0.5));
  try {
    FindCostReducingPerturbation(m, w, tax, {Eigen::Vector2d(0.0, 0.0)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoValidPerturbation);
  }
}

TEST(Perturbation, PreconditionErrors) {
  const FeatureTaxonomy tax = MakeTaxonomy(2, 0);
  const CostModel m = CostModel::Scaled(2, 1.0, 0, 1.0);
  const LinearModel w(-1.0, Eigen::Vector2d(1.0, 1.0));
  EXPECT_THROW(FindCostReducingPerturbation(m, w, tax, {}), Error);
  EXPECT_THROW(
      FindCostReducingPerturbation(m, w, tax, {Eigen::Vector2d(5.0, 5.0)}),
      Error);
  EXPECT_THROW(FindCostReducingPerturbation(
                   m, LinearModel(-1.0, Eigen::Vector2d(0.0, 0.0)), tax,
                   {Eigen::Vector2d(0.0, 0.0)}),
               Error);
}

TEST(SubgroupGap, IdenticalModels) {
  const Dial d;
  const LinearModel w(-1.0, Eigen::Vector2d(1.0, 1.0));
  const SubgroupCostGap g = SubgroupCostGapFor(Eigen::Vector2d(0.0, 0.0), w,
                                               d.model, d.model, d.tax);
  EXPECT_EQ(g.cost_phi, g.cost_psi);
}

TEST(SubgroupGap, ScaledManipulableBlock) {
  const Dial d;
  const CostModel phi = CostModel::Scaled(1, 1.0, 1, 2.0);
  const LinearModel w(-1.0, Eigen::Vector2d(1.0, 1.0));
  const SubgroupCostGap g =
      SubgroupCostGapFor(Eigen::Vector2d(0.0, 0.0), w, phi, d.model, d.tax);
  EXPECT_NEAR(g.cost_phi, 1.0 / std::sqrt(1.5), 1e-15);
  EXPECT_NEAR(g.cost_psi, 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_GT(g.cost_phi, g.cost_psi);
}

TEST(SubgroupGap, ZeroManipulableWeights) {
  const Dial d;
  const CostModel phi = CostModel::Scaled(1, 1.0, 1, 7.0);
  const LinearModel w(-1.0, Eigen::Vector2d(1.0, 0.0));
  const SubgroupCostGap g =
      SubgroupCostGapFor(Eigen::Vector2d(0.0, 0.0), w, phi, d.model, d.tax);
  EXPECT_EQ(g.cost_phi, g.cost_psi);
}

TEST(SubgroupGap, OrderingViolation) {
  const Dial d;
  const CostModel phi = CostModel::Scaled(1, 1.0, 1, 0.5);
  const LinearModel w(-1.0, Eigen::Vector2d(1.0, 1.0));
  try {
    SubgroupCostGapFor(Eigen::Vector2d(0.0, 0.0), w, phi, d.model, d.tax);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kOrderingViolation);
  }
  const CostModel other_i = CostModel::Scaled(1, 3.0, 1, 2.0);
  EXPECT_THROW(SubgroupCostGapFor(Eigen::Vector2d(0.0, 0.0), w, other_i,
                                  d.model, d.tax),
               Error);
}

TEST(Propositions, ManipulableFeaturesAlwaysMove) {
  std::mt19937_64 rng(123);
  const FeatureTaxonomy tax = MakeTaxonomy(2, 2);
  const CostModel m = CostModel::Build(RandomSpd(2, rng), RandomSpd(2, rng));
  Eigen::VectorXd wv(4);
  wv << 0.8, -0.4, 0.6, 0.0;  // a single nonzero manipulable weight
  const LinearModel w(-0.5, wv);
  int checked = 0;
  while (checked < 100) {
    const FeatureVector x = RandomVector(4, rng);
    const BestResponseResult r = BestResponse(x, w, m, tax, Family::kActionable);
    if (!r.moved) continue;
    ++checked;
    EXPECT_NE(r.adapted.segment(2, 2), x.segment(2, 2));
  }
}

}  // namespace
}  // namespace cadapt
