#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cadapt/best_response.hpp"
#include "cadapt/cost_model.hpp"
#include "cadapt/dataset.hpp"
#include "cadapt/error.hpp"
#include "cadapt/folds.hpp"
#include "cadapt/linear_model.hpp"
#include "cadapt/training.hpp"

namespace cadapt {

struct EvalOptions {
  /// Response played for the deployment error; the metric is defined on the
  /// manipulating response, the others are diagnostics.
  Family deployment_response = Family::kManipulable;
  /// Improvement rate conditions on y = -1 by default; set to condition on
  /// h(x) = -1 instead.
  bool condition_on_prediction = false;
};

struct EvalReport {
  double test_error = 0.0;
  double deployment_error = 0.0;
  std::optional<double> improvement_rate;  // absent without negatives
  std::size_t n_eval = 0;
  std::string method;
  double lambda = 0.0;
};

/// test error          mean 1[h(x) != y]
/// deployment error    mean 1[h(Delta_M(x)) != y]
/// improvement rate    mean over y = -1 of 1[h(Delta_I(x)) = +1]
inline EvalReport Evaluate(const LinearModel& w, const Dataset& data,
                           const CostModel& model,
                           const EvalOptions& opts = {}) {
  data.Validate();
  if (data.size() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "cannot evaluate on zero rows");
  }
  EvalReport rep;
  rep.n_eval = data.size();
  std::size_t test_wrong = 0, deploy_wrong = 0, cond = 0, improved = 0;
  for (std::size_t r = 0; r < data.size(); ++r) {
    const FeatureVector x = data.row(r);
    const int y = data.label(r);
    const bool accepted = w.accepts(x);
    if ((accepted ? 1 : -1) != y) ++test_wrong;

    const BestResponseResult dep =
        BestResponse(x, w, model, data.taxonomy, opts.deployment_response);
    if ((dep.accepted_after() ? 1 : -1) != y) ++deploy_wrong;

    const bool in_condition = opts.condition_on_prediction ? !accepted : y == -1;
    if (in_condition) {
      ++cond;
      const BestResponseResult imp =
          BestResponse(x, w, model, data.taxonomy, Family::kImprovable);
      if (imp.accepted_after()) ++improved;
    }
  }
  const double n = static_cast<double>(data.size());
  rep.test_error = static_cast<double>(test_wrong) / n;
  rep.deployment_error = static_cast<double>(deploy_wrong) / n;
  if (cond > 0) {
    rep.improvement_rate =
        static_cast<double>(improved) / static_cast<double>(cond);
  }
  return rep;
}

/// Average gain in P(Y = +1) from the improving best response over the
/// subjects the model rejects; 0 when nobody is rejected.
inline double TrueImprovement(const LinearModel& w, const Dataset& data,
                              const CostModel& model) {
  if (!data.true_label_oracle) {
    throw Error(ErrorCode::kNoOracle,
                "dataset '" + data.name + "' has no true-label oracle");
  }
  double gain = 0.0;
  std::size_t rejected = 0;
  for (std::size_t r = 0; r < data.size(); ++r) {
    const FeatureVector x = data.row(r);
    if (w.accepts(x)) continue;
    ++rejected;
    const BestResponseResult imp =
        BestResponse(x, w, model, data.taxonomy, Family::kImprovable);
    gain += data.true_label_oracle(imp.adapted) - data.true_label_oracle(x);
  }
  return rejected == 0 ? 0.0 : gain / static_cast<double>(rejected);
}

// ---------------------------------------------------------------------------
// Cross-validation and lambda sweeps.

struct MetricStats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (k - 1 divisor)
};

inline MetricStats Summarize(const std::vector<double>& values) {
  MetricStats s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

struct CVSummary {
  std::string method;
  double lambda = 0.0;
  MetricStats test_error;
  MetricStats deployment_error;
  std::optional<MetricStats> improvement_rate;
  std::vector<EvalReport> folds;
  std::vector<bool> fold_converged;
};

/// Trains on `train_data` and scores on `eval_data`, fold by fold. The two
/// datasets share rows and columns and may differ only in their taxonomy,
/// which is how misspecified training is assessed against the true
/// feature kinds.
inline CVSummary CrossValidate(const Dataset& train_data,
                               const CostModel& train_model,
                               const TrainConfig& cfg, const FoldPlan& folds,
                               const Dataset& eval_data,
                               const CostModel& eval_model,
                               const EvalOptions& opts = {}) {
  if (folds.assignments.size() != train_data.size() ||
      eval_data.size() != train_data.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "fold plan and datasets disagree on the row count");
  }
  CVSummary out;
  out.method = std::string(MethodName(cfg.method));
  out.lambda = cfg.lambda;
  std::vector<double> test, deploy, improve;
  for (std::size_t f = 0; f < folds.k; ++f) {
    try {
      const FitResult fit =
          Fit(train_data.Subset(folds.rows_out(f)), train_model, cfg);
      EvalReport rep = Evaluate(fit.model, eval_data.Subset(folds.rows_in(f)),
                                eval_model, opts);
      rep.method = out.method;
      rep.lambda = cfg.lambda;
      test.push_back(rep.test_error);
      deploy.push_back(rep.deployment_error);
      if (rep.improvement_rate) improve.push_back(*rep.improvement_rate);
      out.folds.push_back(rep);
      out.fold_converged.push_back(fit.converged);
    } catch (const Error& e) {
      throw Error(e.code(), "fold " + std::to_string(f) + ": " + e.what());
    }
  }
  out.test_error = Summarize(test);
  out.deployment_error = Summarize(deploy);
  if (!improve.empty()) out.improvement_rate = Summarize(improve);
  return out;
}

inline CVSummary CrossValidate(const Dataset& data, const CostModel& model,
                               const TrainConfig& cfg, const FoldPlan& folds,
                               const EvalOptions& opts = {}) {
  return CrossValidate(data, model, cfg, folds, data, model, opts);
}

struct SweepResult {
  std::vector<double> lambda_grid;
  std::vector<CVSummary> summaries;
};

inline void CheckGrid(const std::vector<double>& grid) {
  if (grid.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "lambda grid is empty");
  }
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!(grid[k] >= 0.0) || !std::isfinite(grid[k])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "lambda grid values must be finite and >= 0");
    }
    if (k > 0 && !(grid[k] > grid[k - 1])) {
      throw Error(ErrorCode::kInvalidArgument,
                  "lambda grid must be strictly ascending");
    }
  }
}

inline SweepResult LambdaSweep(const Dataset& data, const CostModel& model,
                               const TrainConfig& base_cfg,
                               const std::vector<double>& grid,
                               const FoldPlan& folds,
                               const EvalOptions& opts = {}) {
  CheckGrid(grid);
  SweepResult out;
  out.lambda_grid = grid;
  for (double lambda : grid) {
    TrainConfig cfg = base_cfg;
    cfg.lambda = lambda;
    out.summaries.push_back(CrossValidate(data, model, cfg, folds, opts));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Flat CSV output.

namespace detail {

inline std::string CsvNumber(double v) { return csv::FormatDouble(v); }

inline std::string CsvOptional(const std::optional<double>& v) {
  return v ? CsvNumber(*v) : std::string();
}

}  // namespace detail

inline void WriteFoldCsvHeader(std::ostream& out) {
  out << "method,lambda,fold,test_error,deployment_error,improvement_rate\n";
}

inline void WriteFoldCsvRows(std::ostream& out, const CVSummary& s) {
  for (std::size_t f = 0; f < s.folds.size(); ++f) {
    const EvalReport& r = s.folds[f];
    out << s.method << ',' << detail::CsvNumber(s.lambda) << ',' << f << ','
        << detail::CsvNumber(r.test_error) << ','
        << detail::CsvNumber(r.deployment_error) << ','
        << detail::CsvOptional(r.improvement_rate) << '\n';
  }
}

inline void WriteSummaryCsvHeader(std::ostream& out) {
  out << "method,lambda,folds,test_error_mean,test_error_std,"
         "deployment_error_mean,deployment_error_std,"
         "improvement_rate_mean,improvement_rate_std\n";
}

inline void WriteSummaryCsvRow(std::ostream& out, const CVSummary& s) {
  out << s.method << ',' << detail::CsvNumber(s.lambda) << ','
      << s.folds.size() << ',' << detail::CsvNumber(s.test_error.mean) << ','
      << detail::CsvNumber(s.test_error.std) << ','
      << detail::CsvNumber(s.deployment_error.mean) << ','
      << detail::CsvNumber(s.deployment_error.std) << ',';
  if (s.improvement_rate) {
    out << detail::CsvNumber(s.improvement_rate->mean) << ','
        << detail::CsvNumber(s.improvement_rate->std);
  } else {
    out << ',';
  }
  out << '\n';
}

}  // namespace cadapt
