#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "cadapt/analysis.hpp"
#include "cadapt/cost_model.hpp"
#include "cadapt/error.hpp"
#include "cadapt/evaluation.hpp"
#include "cadapt/flipset.hpp"
#include "cadapt/linear_model.hpp"
#include "cadapt/taxonomy.hpp"
#include "cadapt/toy.hpp"
#include "cadapt/training.hpp"

namespace cadapt {

using json = nlohmann::json;

namespace detail {

inline json ReadJsonFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kConfigError,
                "'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "failed writing '" + path + "'");
}

inline void RejectUnknownKeys(const json& j, const std::set<std::string>& known,
                              const std::string& what) {
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) {
      throw Error(ErrorCode::kConfigError,
                  what + ": unknown field '" + item.key() + "'");
    }
  }
}

template <typename T>
T Field(const json& j, const std::string& key, const std::string& what) {
  if (!j.contains(key)) {
    throw Error(ErrorCode::kConfigError,
                what + ": missing field '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kConfigError,
                what + ": field '" + key + "' has the wrong type");
  }
}

template <typename T>
T FieldOr(const json& j, const std::string& key, T fallback,
          const std::string& what) {
  return j.contains(key) ? Field<T>(j, key, what) : fallback;
}

inline Eigen::MatrixXd MatrixFromJson(const json& j, const std::string& what) {
  if (!j.is_array()) {
    throw Error(ErrorCode::kConfigError, what + " must be an array of rows");
  }
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(rows, rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows) {
      throw Error(ErrorCode::kDimensionMismatch, what + " is not square");
    }
    for (Eigen::Index c = 0; c < rows; ++c) {
      const json& v = row[static_cast<std::size_t>(c)];
      if (!v.is_number()) {
        throw Error(ErrorCode::kConfigError, what + " has a non-numeric entry");
      }
      m(r, c) = v.get<double>();
    }
  }
  return m;
}

inline json MatrixToJson(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

inline json VectorToJson(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

inline json StatsToJson(const MetricStats& s) {
  return {{"mean", s.mean}, {"std", s.std}};
}

}  // namespace detail

// --- taxonomy --------------------------------------------------------------

inline FeatureTaxonomy TaxonomyFromJson(const json& j) {
  if (!j.is_array()) {
    throw Error(ErrorCode::kConfigError, "taxonomy must be a JSON array");
  }
  std::vector<Feature> features;
  for (const json& item : j) {
    if (!item.is_object()) {
      throw Error(ErrorCode::kConfigError, "taxonomy entries must be objects");
    }
    detail::RejectUnknownKeys(item, {"name", "kind", "direction"},
                              "taxonomy entry");
    Feature f;
    f.name = detail::Field<std::string>(item, "name", "taxonomy entry");
    f.kind = ParseKind(detail::Field<std::string>(item, "kind", f.name));
    f.direction = detail::FieldOr<int>(item, "direction", 0, f.name);
    features.push_back(std::move(f));
  }
  return FeatureTaxonomy(std::move(features));
}

inline json ToJson(const FeatureTaxonomy& tax) {
  json out = json::array();
  for (const Feature& f : tax.features()) {
    out.push_back({{"name", f.name},
                   {"kind", std::string(KindName(f.kind))},
                   {"direction", f.direction}});
  }
  return out;
}

inline FeatureTaxonomy LoadTaxonomy(const std::string& path) {
  return TaxonomyFromJson(detail::ReadJsonFile(path));
}

// --- cost model ------------------------------------------------------------

/// Accepts explicit blocks {"inv_cov_improvable", "inv_cov_manipulable"} or
/// the shorthand {"improvable_scale": s, "manipulable_scale": t}, which
/// expands to s I and t I sized by the taxonomy.
inline CostModel CostModelFromJson(const json& j, const FeatureTaxonomy& tax) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kConfigError, "cost config must be a JSON object");
  }
  CostModel model;
  if (j.contains("improvable_scale") || j.contains("manipulable_scale")) {
    detail::RejectUnknownKeys(j, {"improvable_scale", "manipulable_scale"},
                              "cost config");
    model = CostModel::Scaled(
        tax.improvable().size(),
        detail::Field<double>(j, "improvable_scale", "cost config"),
        tax.manipulable().size(),
        detail::Field<double>(j, "manipulable_scale", "cost config"));
  } else {
    detail::RejectUnknownKeys(j, {"inv_cov_improvable", "inv_cov_manipulable"},
                              "cost config");
    if (!j.contains("inv_cov_improvable") ||
        !j.contains("inv_cov_manipulable")) {
      throw Error(ErrorCode::kConfigError,
                  "cost config needs inv_cov_improvable and "
                  "inv_cov_manipulable, or the *_scale shorthand");
    }
    model = CostModel::Build(
        detail::MatrixFromJson(j.at("inv_cov_improvable"), "inv_cov_improvable"),
        detail::MatrixFromJson(j.at("inv_cov_manipulable"),
                               "inv_cov_manipulable"));
  }
  model.CheckCompatible(tax);
  return model;
}

inline json ToJson(const CostModel& model) {
  return {{"inv_cov_improvable", detail::MatrixToJson(model.inv_cov_improvable())},
          {"inv_cov_manipulable",
           detail::MatrixToJson(model.inv_cov_manipulable())}};
}

inline CostModel LoadCostModel(const std::string& path,
                               const FeatureTaxonomy& tax) {
  return CostModelFromJson(detail::ReadJsonFile(path), tax);
}

// --- training config -------------------------------------------------------

inline TrainConfig TrainConfigFromJson(const json& j) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kConfigError, "train config must be a JSON object");
  }
  const std::string what = "train config";
  detail::RejectUnknownKeys(j,
                            {"method", "lambda", "eta", "l2_reg", "max_iters",
                             "grad_tol", "restarts", "seed"},
                            what);
  TrainConfig cfg;
  cfg.method = ParseMethod(detail::Field<std::string>(j, "method", what));
  cfg.lambda = detail::FieldOr(j, "lambda", cfg.lambda, what);
  cfg.eta = detail::FieldOr(j, "eta", cfg.eta, what);
  cfg.l2_reg = detail::FieldOr(j, "l2_reg", cfg.l2_reg, what);
  cfg.max_iters = detail::FieldOr(j, "max_iters", cfg.max_iters, what);
  cfg.grad_tol = detail::FieldOr(j, "grad_tol", cfg.grad_tol, what);
  cfg.restarts = detail::FieldOr(j, "restarts", cfg.restarts, what);
  cfg.seed = detail::FieldOr<std::uint64_t>(j, "seed", cfg.seed, what);
  cfg.Validate();
  return cfg;
}

inline json ToJson(const TrainConfig& cfg) {
  return {{"method", std::string(MethodName(cfg.method))},
          {"lambda", cfg.lambda},
          {"eta", cfg.eta},
          {"l2_reg", cfg.l2_reg},
          {"max_iters", cfg.max_iters},
          {"grad_tol", cfg.grad_tol},
          {"restarts", cfg.restarts},
          {"seed", cfg.seed}};
}

inline TrainConfig LoadTrainConfig(const std::string& path) {
  return TrainConfigFromJson(detail::ReadJsonFile(path));
}

// --- toy parameters --------------------------------------------------------

inline ToyParams ToyParamsFromJson(const json& j) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kConfigError, "toy params must be a JSON object");
  }
  const std::string what = "toy params";
  detail::RejectUnknownKeys(
      j,
      {"n", "noise_x2", "label_weights", "label_noise", "m1_coupling",
       "m2_coupling_x2", "m2_coupling_y", "m_noise", "seed"},
      what);
  ToyParams p;
  p.n = detail::FieldOr<std::size_t>(j, "n", p.n, what);
  p.noise_x2 = detail::FieldOr(j, "noise_x2", p.noise_x2, what);
  if (j.contains("label_weights")) {
    const auto b = detail::Field<std::vector<double>>(j, "label_weights", what);
    if (b.size() != 2) {
      throw Error(ErrorCode::kConfigError,
                  what + ": field 'label_weights' must hold two numbers");
    }
    p.b1 = b[0];
    p.b2 = b[1];
  }
  p.label_noise = detail::FieldOr(j, "label_noise", p.label_noise, what);
  p.m1_coupling = detail::FieldOr(j, "m1_coupling", p.m1_coupling, what);
  p.m2_coupling_x2 = detail::FieldOr(j, "m2_coupling_x2", p.m2_coupling_x2, what);
  p.m2_coupling_y = detail::FieldOr(j, "m2_coupling_y", p.m2_coupling_y, what);
  p.m_noise = detail::FieldOr(j, "m_noise", p.m_noise, what);
  p.seed = detail::FieldOr<std::uint64_t>(j, "seed", p.seed, what);
  p.Validate();
  return p;
}

inline json ToJson(const ToyParams& p) {
  return {{"n", p.n},
          {"noise_x2", p.noise_x2},
          {"label_weights", {p.b1, p.b2}},
          {"label_noise", p.label_noise},
          {"m1_coupling", p.m1_coupling},
          {"m2_coupling_x2", p.m2_coupling_x2},
          {"m2_coupling_y", p.m2_coupling_y},
          {"m_noise", p.m_noise},
          {"seed", p.seed}};
}

// --- trained models --------------------------------------------------------

struct ModelFile {
  LinearModel model;
  FeatureTaxonomy taxonomy;
  TrainConfig config;
  bool converged = true;
};

inline json ModelToJson(const LinearModel& w, const FeatureTaxonomy& tax,
                        const TrainConfig& cfg, bool converged) {
  return {{"intercept", w.intercept()},
          {"weights", detail::VectorToJson(w.weights())},
          {"taxonomy_hash", tax.hash_hex()},
          {"taxonomy", ToJson(tax)},
          {"method", std::string(MethodName(cfg.method))},
          {"config", ToJson(cfg)},
          {"converged", converged}};
}

inline ModelFile ModelFromJson(const json& j) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kConfigError, "model file must be a JSON object");
  }
  const std::string what = "model file";
  ModelFile mf;
  mf.taxonomy = TaxonomyFromJson(j.contains("taxonomy") ? j.at("taxonomy")
                                                        : json::array());
  const std::string hash = detail::Field<std::string>(j, "taxonomy_hash", what);
  if (hash != mf.taxonomy.hash_hex()) {
    throw Error(ErrorCode::kConfigError,
                what + ": taxonomy_hash does not match the embedded taxonomy");
  }
  const auto weights = detail::Field<std::vector<double>>(j, "weights", what);
  if (weights.size() != mf.taxonomy.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                what + ": weight count differs from the taxonomy size");
  }
  mf.model = LinearModel(
      detail::Field<double>(j, "intercept", what),
      Eigen::Map<const Eigen::VectorXd>(weights.data(),
                                        static_cast<Eigen::Index>(weights.size())));
  if (j.contains("config")) mf.config = TrainConfigFromJson(j.at("config"));
  mf.converged = detail::FieldOr(j, "converged", true, what);
  return mf;
}

inline ModelFile LoadModel(const std::string& path) {
  return ModelFromJson(detail::ReadJsonFile(path));
}

// --- reports ---------------------------------------------------------------

inline json ToJson(const EvalReport& r) {
  json out = {{"test_error", r.test_error},
              {"deployment_error", r.deployment_error},
              {"improvement_rate", nullptr},
              {"n_eval", r.n_eval},
              {"method", r.method},
              {"lambda", r.lambda}};
  if (r.improvement_rate) out["improvement_rate"] = *r.improvement_rate;
  return out;
}

inline json ToJson(const CVSummary& s) {
  json folds = json::array();
  for (const EvalReport& r : s.folds) folds.push_back(ToJson(r));
  json out = {{"method", s.method},
              {"lambda", s.lambda},
              {"test_error", detail::StatsToJson(s.test_error)},
              {"deployment_error", detail::StatsToJson(s.deployment_error)},
              {"improvement_rate", nullptr},
              {"folds", std::move(folds)}};
  if (s.improvement_rate) {
    out["improvement_rate"] = detail::StatsToJson(*s.improvement_rate);
  }
  return out;
}

inline json ToJson(const SweepResult& s) {
  json out = {{"lambda_grid", s.lambda_grid}, {"summaries", json::array()}};
  for (const CVSummary& c : s.summaries) out["summaries"].push_back(ToJson(c));
  return out;
}

inline json ToJson(const Flipset& fs) {
  json rows = json::array();
  for (const FlipsetRow& r : fs.rows) {
    rows.push_back({{"feature", r.feature},
                    {"kind", std::string(KindName(r.kind))},
                    {"original", r.original},
                    {"adapted", r.adapted},
                    {"delta_direction", std::string(DirectionName(r.direction))}});
  }
  return {{"family", std::string(FamilyName(fs.family))},
          {"predicted_before", fs.predicted_before},
          {"predicted_after", fs.predicted_after},
          {"cost", fs.cost},
          {"rows", std::move(rows)}};
}

inline json ToJson(const PerturbationResult& p, const FeatureTaxonomy& tax) {
  json samples = json::array();
  for (std::size_t k = 0; k < p.sample_rows.size(); ++k) {
    samples.push_back({{"row", p.sample_rows[k]},
                       {"cost_before", p.cost_before[k]},
                       {"cost_after", p.cost_after[k]}});
  }
  return {{"block", std::string(FamilyName(p.block))},
          {"i", p.feature_i},
          {"j", p.feature_j},
          {"feature_i", tax.feature(p.feature_i).name},
          {"feature_j", tax.feature(p.feature_j).name},
          {"tau", p.tau},
          {"effective_variance_before", p.effective_variance_before},
          {"effective_variance_after", p.effective_variance_after},
          {"samples", std::move(samples)},
          {"perturbed_cost", ToJson(p.perturbed)}};
}

}  // namespace cadapt
