#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "cadapt/cost_model.hpp"
#include "cadapt/dataset.hpp"
#include "cadapt/error.hpp"
#include "cadapt/linear_model.hpp"
#include "cadapt/objectives.hpp"
#include "cadapt/optimizer.hpp"
#include "cadapt/random.hpp"

namespace cadapt {

enum class Method { kStatic, kDropFeatures, kManipulationProof, kCA };

inline std::string_view MethodName(Method m) {
  switch (m) {
    case Method::kStatic: return "Static";
    case Method::kDropFeatures: return "DropFeatures";
    case Method::kManipulationProof: return "ManipulationProof";
    case Method::kCA: return "CA";
  }
  return "CA";
}

inline Method ParseMethod(std::string_view text) {
  for (Method m : {Method::kStatic, Method::kDropFeatures,
                   Method::kManipulationProof, Method::kCA}) {
    if (text == MethodName(m)) return m;
  }
  throw Error(ErrorCode::kConfigError,
              "field 'method': unknown method '" + std::string(text) +
                  "' (expected Static, DropFeatures, ManipulationProof or CA)");
}

struct TrainConfig {
  Method method = Method::kCA;
  double lambda = 1.0;  // CA only
  double eta = 0.0;     // CA only
  double l2_reg = 1e-3;
  int max_iters = 500;
  double grad_tol = 1e-6;
  int restarts = 3;
  std::uint64_t seed = 0;

  void Validate() const {
    auto nonneg = [](double v, const char* field) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::kConfigError,
                    std::string("field '") + field +
                        "' must be a finite value >= 0");
      }
    };
    nonneg(lambda, "lambda");
    nonneg(eta, "eta");
    nonneg(l2_reg, "l2_reg");
    if (max_iters < 1) {
      throw Error(ErrorCode::kConfigError, "field 'max_iters' must be >= 1");
    }
    if (!(grad_tol > 0.0)) {
      throw Error(ErrorCode::kConfigError, "field 'grad_tol' must be > 0");
    }
    if (restarts < 1) {
      throw Error(ErrorCode::kConfigError, "field 'restarts' must be >= 1");
    }
  }
};

struct FitResult {
  LinearModel model;
  double loss = 0.0;
  bool converged = false;  // false is a warning, not an error
  int iterations = 0;
  int best_restart = 0;
};

/// Objective minimized by `method` (DropFeatures uses the static objective
/// on the reduced dataset).
inline ObjectiveFn MakeObjective(const ObjectiveContext& ctx,
                                 const TrainConfig& cfg) {
  switch (cfg.method) {
    case Method::kStatic:
    case Method::kDropFeatures:
      return [&ctx, l2 = cfg.l2_reg](const Eigen::VectorXd& t) {
        return StaticObjective(ctx, t, l2);
      };
    case Method::kManipulationProof:
      return [&ctx, l2 = cfg.l2_reg](const Eigen::VectorXd& t) {
        return ManipulationProofObjective(ctx, t, l2);
      };
    case Method::kCA:
      return [&ctx, cfg](const Eigen::VectorXd& t) {
        return CaObjective(ctx, t, cfg.lambda, cfg.eta, cfg.l2_reg);
      };
  }
  throw Error(ErrorCode::kConfigError, "unknown method");
}

namespace detail {

/// Weight blocks whose sqrt(C_F) enters the objective. Each is a kink at
/// w_F = 0 where plain BFGS crawls along the nonsmooth ridge.
inline std::vector<Family> KinkFamilies(Method m) {
  switch (m) {
    case Method::kManipulationProof: return {Family::kActionable};
    case Method::kCA: return {Family::kManipulable, Family::kImprovable};
    default: return {};
  }
}

/// Minimizes over the parameters outside `frozen`, which stay at zero.
inline BfgsResult MinimizeWithZeros(const ObjectiveFn& f,
                                    const Eigen::VectorXd& start,
                                    const std::vector<bool>& frozen,
                                    const BfgsOptions& opt) {
  std::vector<Eigen::Index> free;
  for (std::size_t k = 0; k < frozen.size(); ++k) {
    if (!frozen[k]) free.push_back(static_cast<Eigen::Index>(k));
  }
  const auto n_free = static_cast<Eigen::Index>(free.size());
  auto expand = [&](const Eigen::VectorXd& z) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(start.size());
    for (Eigen::Index k = 0; k < n_free; ++k) full[free[k]] = z[k];
    return full;
  };
  const ObjectiveFn reduced = [&](const Eigen::VectorXd& z) {
    ObjectiveValue v = f(expand(z));
    Eigen::VectorXd g(n_free);
    for (Eigen::Index k = 0; k < n_free; ++k) g[k] = v.gradient[free[k]];
    v.gradient = std::move(g);
    return v;
  };
  Eigen::VectorXd z0(n_free);
  for (Eigen::Index k = 0; k < n_free; ++k) z0[k] = start[free[k]];
  BfgsResult run = MinimizeBfgs(reduced, z0, opt);
  run.x = expand(run.x);
  run.gradient = f(run.x).gradient;
  return run;
}

/// Pins every kink block that the run drove to (numerically) zero at exact
/// zero and re-optimizes the rest; keeps whichever result is lower.
inline BfgsResult PolishKinks(const ObjectiveFn& f, const ObjectiveContext& ctx,
                              Method method, BfgsResult run,
                              const BfgsOptions& opt) {
  std::vector<bool> frozen(ctx.num_params(), false);
  bool any = false;
  const double tol = 1e-6 * (1.0 + run.x.lpNorm<Eigen::Infinity>());
  for (Family fam : KinkFamilies(method)) {
    const auto& idx = ctx.indices(fam);
    if (idx.empty()) continue;
    const Eigen::VectorXd wf = ObjectiveContext::GatherWeights(run.x, idx);
    if (wf.lpNorm<Eigen::Infinity>() >= tol) continue;
    for (std::size_t k : idx) frozen[k + 1] = true;
    any = true;
  }
  if (!any) return run;
  BfgsResult polished = MinimizeWithZeros(f, run.x, frozen, opt);
  if (!(polished.value < run.value)) return run;
  polished.iterations += run.iterations;
  return polished;
}

inline FitResult FitWithRestarts(const Dataset& data, const CostModel& model,
                                 const TrainConfig& cfg) {
  const ObjectiveContext ctx(data, model);
  const ObjectiveFn objective = MakeObjective(ctx, cfg);
  BfgsOptions opt;
  opt.max_iters = cfg.max_iters;
  opt.grad_tol = cfg.grad_tol;

  std::mt19937_64 rng(DeriveSeed(cfg.seed, SeedStream::kInit));
  std::normal_distribution<double> init(0.0, 0.01);
  const auto p = static_cast<Eigen::Index>(ctx.num_params());

  std::vector<Eigen::VectorXd> starts;
  for (int restart = 0; restart < cfg.restarts; ++restart) {
    Eigen::VectorXd theta0(p);
    for (Eigen::Index k = 0; k < p; ++k) theta0[k] = init(rng);
    starts.push_back(std::move(theta0));
  }
  // The strategic objectives are non-convex and every random start sits
  // near w = 0, which is also where their sqrt(C_F) kinks are. Two warm
  // starts come from logistic fits: on all features, and on the improvable
  // block alone.
  if (cfg.method == Method::kManipulationProof || cfg.method == Method::kCA) {
    const ObjectiveFn plain = [&ctx, l2 = cfg.l2_reg](const Eigen::VectorXd& t) {
      return StaticObjective(ctx, t, l2);
    };
    starts.push_back(MinimizeBfgs(plain, starts.front(), opt).x);
    std::vector<bool> frozen(ctx.num_params(), true);
    frozen[0] = false;
    for (std::size_t k : ctx.indices(Family::kImprovable)) frozen[k + 1] = false;
    starts.push_back(MinimizeWithZeros(plain, starts.front(), frozen, opt).x);
  }

  FitResult best;
  best.loss = std::numeric_limits<double>::infinity();
  for (std::size_t restart = 0; restart < starts.size(); ++restart) {
    const BfgsResult run =
        PolishKinks(objective, ctx, cfg.method,
                    MinimizeBfgs(objective, starts[restart], opt), opt);
    if (run.value < best.loss) {
      best.model = LinearModel::FromParameters(run.x);
      best.loss = run.value;
      best.converged = run.converged;
      best.iterations = run.iterations;
      best.best_restart = static_cast<int>(restart);
    }
  }
  return best;
}

}  // namespace detail

/// Trains a linear classifier with the configured method. All methods run
/// BFGS from `restarts` seeded N(0, 0.01^2) initializations (plus two
/// logistic warm starts for the strategic objectives) and keep the lowest
/// objective value.
inline FitResult Fit(const Dataset& data, const CostModel& model,
                     const TrainConfig& cfg) {
  cfg.Validate();
  data.Validate();
  model.CheckCompatible(data.taxonomy);
  if (data.size() == 0) {
    throw Error(ErrorCode::kSingleClassData, "training data is empty");
  }
  if (!data.has_both_labels()) {
    throw Error(ErrorCode::kSingleClassData,
                "training data contains a single label");
  }
  if (cfg.method != Method::kDropFeatures) {
    return detail::FitWithRestarts(data, model, cfg);
  }

  // Fit on the non-manipulable columns, then re-embed with zero weights.
  std::vector<std::size_t> kept;
  std::vector<Feature> kept_features;
  for (std::size_t k = 0; k < data.dim(); ++k) {
    if (data.taxonomy.feature(k).kind != FeatureKind::kManipulable) {
      kept.push_back(k);
      kept_features.push_back(data.taxonomy.feature(k));
    }
  }
  Dataset reduced;
  reduced.name = data.name;
  reduced.taxonomy = FeatureTaxonomy(std::move(kept_features));
  reduced.y = data.y;
  reduced.X.resize(data.X.rows(), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    reduced.X.col(static_cast<Eigen::Index>(k)) =
        data.X.col(static_cast<Eigen::Index>(kept[k]));
  }
  const CostModel reduced_model = CostModel::Build(
      model.inv_cov_improvable(), Eigen::MatrixXd(0, 0));
  FitResult fit = detail::FitWithRestarts(reduced, reduced_model, cfg);

  Eigen::VectorXd weights = Eigen::VectorXd::Zero(data.X.cols());
  for (std::size_t k = 0; k < kept.size(); ++k) {
    weights[static_cast<Eigen::Index>(kept[k])] =
        fit.model.weights()[static_cast<Eigen::Index>(k)];
  }
  fit.model = LinearModel(fit.model.intercept(), std::move(weights));
  return fit;
}

}  // namespace cadapt
