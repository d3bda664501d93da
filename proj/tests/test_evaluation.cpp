#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "support.hpp"

namespace cadapt {
namespace {

using testing::MakeTaxonomy;
using testing::SmallDataset;

TEST(Evaluate, AlwaysAcceptModel) {
  std::mt19937_64 rng(1);
  const Dataset d = SmallDataset(MakeTaxonomy(2, 2), 50, rng);
  const CostModel m = CostModel::Scaled(2, 1.0, 2, 0.2);
  const EvalReport r = Evaluate(LinearModel(1.0, Eigen::VectorXd::Zero(4)), d, m);
  std::size_t negatives = 0;
  for (std::size_t k = 0; k < d.size(); ++k) negatives += d.label(k) == -1;
  EXPECT_DOUBLE_EQ(r.test_error, static_cast<double>(negatives) / 50.0);
  ASSERT_TRUE(r.improvement_rate.has_value());
  EXPECT_EQ(*r.improvement_rate, 1.0);
  EXPECT_EQ(r.n_eval, 50u);
}

TEST(Evaluate, NoManipulableWeightMeansNoDeploymentShift) {
  std::mt19937_64 rng(2);
  const Dataset d = SmallDataset(MakeTaxonomy(2, 2), 80, rng);
  const CostModel m = CostModel::Scaled(2, 1.0, 2, 0.2);
  Eigen::VectorXd w(4);
  w << 0.9, -0.3, 0.0, 0.0;
  const EvalReport r = Evaluate(LinearModel(0.1, w), d, m);
  EXPECT_EQ(r.deployment_error, r.test_error);
  ASSERT_TRUE(r.improvement_rate.has_value());
  EXPECT_GE(*r.improvement_rate, 0.0);
  EXPECT_LE(*r.improvement_rate, 1.0);
}

TEST(Evaluate, ImprovementRateAbsentWithoutNegatives) {
  std::mt19937_64 rng(3);
  Dataset d = SmallDataset(MakeTaxonomy(1, 1), 10, rng);
  d.y.setConstant(1);
  const EvalReport r = Evaluate(LinearModel(0.0, Eigen::Vector2d(1.0, 1.0)), d,
                                CostModel::Scaled(1, 1.0, 1, 1.0));
  EXPECT_FALSE(r.improvement_rate.has_value());
}

TEST(Evaluate, ConditioningVariants) {
  Dataset d;
  d.taxonomy = MakeTaxonomy(1, 0);
  d.X.resize(3, 1);
  d.X << -1.0, -5.0, 1.0;
  d.y.resize(3);
  d.y << 1, -1, -1;
  const CostModel m = CostModel::Scaled(1, 1.0, 0, 1.0);
  const LinearModel w(0.0, Eigen::VectorXd::Constant(1, 1.0));
  // y = -1 rows: x = -5 cannot reach, x = 1 is already accepted.
  EXPECT_DOUBLE_EQ(*Evaluate(w, d, m).improvement_rate, 0.5);
  // h(x) = -1 rows: x = -1 reaches the boundary, x = -5 does not.
  EvalOptions by_prediction;
  by_prediction.condition_on_prediction = true;
  EXPECT_DOUBLE_EQ(*Evaluate(w, d, m, by_prediction).improvement_rate, 0.5);
  d.X(0, 0) = -1.5;
  d.X(1, 0) = -0.5;
  EXPECT_DOUBLE_EQ(*Evaluate(w, d, m, by_prediction).improvement_rate, 1.0);
}

TEST(Evaluate, DeploymentResponseFamily) {
  Dataset d;
  d.taxonomy = MakeTaxonomy(1, 1);
  d.X.resize(1, 2);
  d.X << -1.0, -1.0;
  d.y = Eigen::VectorXi::Constant(1, -1);
  const CostModel m = CostModel::Scaled(1, 1.0, 1, 1.0);
  // Score -2: the manipulating response costs 2 (moves), the improving one
  // is impossible because the improvable weight is zero.
  const LinearModel w(0.0, Eigen::Vector2d(0.0, 2.0));
  EXPECT_EQ(Evaluate(w, d, m).deployment_error, 1.0);
  EvalOptions improving;
  improving.deployment_response = Family::kImprovable;
  EXPECT_EQ(Evaluate(w, d, m, improving).deployment_error, 0.0);
}

TEST(TrueImprovement, Basics) {
  const Dataset toy = GenerateToy(ToyParams{.n = 200});
  const CostModel m = CostModel::Scaled(2, 1.0, 2, 0.2);
  Eigen::VectorXd w(4);
  w << 0.0, 0.0, 1.0, 1.0;
  EXPECT_EQ(TrueImprovement(LinearModel(-0.5, w), toy, m), 0.0);
  w << 1.0, 1.0, 0.0, 0.0;
  EXPECT_GT(TrueImprovement(LinearModel(-0.5, w), toy, m), 0.0);
  // Nobody rejected: nothing to average.
  EXPECT_EQ(TrueImprovement(LinearModel(100.0, w), toy, m), 0.0);

  Dataset no_oracle = toy;
  no_oracle.true_label_oracle = nullptr;
  try {
    TrueImprovement(LinearModel(-0.5, w), no_oracle, m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoOracle);
  }
}

TEST(Summarize, SampleStd) {
  const MetricStats s = Summarize({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(5.0 / 3.0));
}

TEST(CrossValidate, DuplicatedHalvesGiveIdenticalFolds) {
  std::mt19937_64 rng(4);
  const Dataset half = SmallDataset(MakeTaxonomy(2, 1), 40, rng);
  Dataset d = half;
  d.X.resize(80, 3);
  d.X << half.X, half.X;
  d.y.resize(80);
  d.y << half.y, half.y;
  FoldPlan plan;
  plan.k = 2;
  plan.assignments.assign(80, 0);
  for (std::size_t r = 40; r < 80; ++r) plan.assignments[r] = 1;
  TrainConfig cfg;
  cfg.method = Method::kStatic;
  const CVSummary s = CrossValidate(d, CostModel::Scaled(2, 1.0, 1, 0.2), cfg, plan);
  ASSERT_EQ(s.folds.size(), 2u);
  EXPECT_EQ(s.folds[0].test_error, s.folds[1].test_error);
  EXPECT_EQ(s.folds[0].deployment_error, s.folds[1].deployment_error);
  EXPECT_EQ(s.test_error.std, 0.0);
  EXPECT_EQ(s.deployment_error.std, 0.0);
}

TEST(CrossValidate, DeterministicAndConsistentMeans) {
  const Dataset toy = GenerateToy(ToyParams{.n = 400, .seed = 9});
  const CostModel m = CostModel::Scaled(2, 1.0, 2, 0.2);
  const FoldPlan plan = MakeFolds(toy.size(), 4, 5);
  const TrainConfig cfg;
  const CVSummary a = CrossValidate(toy, m, cfg, plan);
  const CVSummary b = CrossValidate(toy, m, cfg, plan);
  ASSERT_EQ(a.folds.size(), 4u);
  double mean = 0.0;
  for (std::size_t f = 0; f < 4; ++f) {
    EXPECT_EQ(a.folds[f].test_error, b.folds[f].test_error);
    EXPECT_EQ(a.folds[f].deployment_error, b.folds[f].deployment_error);
    mean += a.folds[f].test_error / 4.0;
  }
  EXPECT_NEAR(a.test_error.mean, mean, 1e-12);
  EXPECT_EQ(a.method, "CA");
}

TEST(CrossValidate, FoldIndexIsAttachedToErrors) {
  Dataset d;
  d.taxonomy = MakeTaxonomy(1, 0);
  d.X.resize(4, 1);
  d.X << 1, 2, 3, 4;
  d.y.resize(4);
  d.y << 1, 1, 1, -1;
  FoldPlan plan;
  plan.k = 2;
  plan.assignments = {0, 0, 1, 1};  // fold 1 trains on rows 0-1: one class
  try {
    CrossValidate(d, CostModel::Scaled(1, 1.0, 0, 1.0), TrainConfig{}, plan);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingleClassData);
    EXPECT_NE(std::string(e.what()).find("fold 1"), std::string::npos);
  }
}

TEST(LambdaSweep, GridChecks) {
  EXPECT_THROW(CheckGrid({}), Error);
  EXPECT_THROW(CheckGrid({1.0, 1.0}), Error);
  EXPECT_THROW(CheckGrid({1.0, 0.5}), Error);
  EXPECT_THROW(CheckGrid({-1.0}), Error);
  EXPECT_NO_THROW(CheckGrid({0.01, 0.1, 1.0, 10.0}));
}

TEST(LambdaSweep, SingletonGridAndCsv) {
  const Dataset toy = GenerateToy(ToyParams{.n = 200, .seed = 2});
  const CostModel m = CostModel::Scaled(2, 1.0, 2, 0.2);
  const SweepResult s =
      LambdaSweep(toy, m, TrainConfig{}, {0.5}, MakeFolds(toy.size(), 2, 1));
  ASSERT_EQ(s.summaries.size(), 1u);
  EXPECT_EQ(s.summaries[0].lambda, 0.5);

  std::ostringstream folds, summary;
  WriteFoldCsvHeader(folds);
  WriteFoldCsvRows(folds, s.summaries[0]);
  WriteSummaryCsvHeader(summary);
  WriteSummaryCsvRow(summary, s.summaries[0]);
  std::istringstream in(folds.str());
  const auto rows = csv::Parse(in);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], std::vector<std::string>({"method", "lambda", "fold", "test_error",
                                               "deployment_error", "improvement_rate"}));
  EXPECT_EQ(rows[1][0], "CA");
  EXPECT_EQ(rows[2][2], "1");
  const std::string text = summary.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
}

}  // namespace
}  // namespace cadapt
