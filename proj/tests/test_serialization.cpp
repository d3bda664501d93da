#include <cstdio>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "support.hpp"

namespace cadapt {
namespace {

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kInvalidArgument;
}

TEST(Json, TaxonomyRoundTrip) {
  const json j = json::parse(R"([
    {"name": "X1", "kind": "improvable", "direction": 1},
    {"name": "M1", "kind": "manipulable"},
    {"name": "age", "kind": "immutable", "direction": 0}])");
  const FeatureTaxonomy tax = TaxonomyFromJson(j);
  EXPECT_EQ(tax.dim(), 3u);
  EXPECT_EQ(tax.feature(0).direction, 1);
  EXPECT_EQ(tax.feature(1).direction, 0);
  EXPECT_EQ(TaxonomyFromJson(ToJson(tax)), tax);
  EXPECT_EQ(CodeOf([] { TaxonomyFromJson(json::parse(R"([{"name":"a","kind":"other"}])")); }),
            ErrorCode::kConfigError);
  EXPECT_EQ(CodeOf([] { TaxonomyFromJson(json::parse(R"([{"name":"a","kind":"improvable","dir":1}])")); }),
            ErrorCode::kConfigError);
}

TEST(Json, CostModelForms) {
  const FeatureTaxonomy tax = testing::MakeTaxonomy(2, 1);
  const CostModel scaled = CostModelFromJson(
      json::parse(R"({"improvable_scale": 1, "manipulable_scale": 0.2})"), tax);
  EXPECT_DOUBLE_EQ(scaled.cov_manipulable()(0, 0), 5.0);
  const CostModel full = CostModelFromJson(
      json::parse(R"({"inv_cov_improvable": [[2, 1], [1, 2]],
                      "inv_cov_manipulable": [[0.2]]})"),
      tax);
  EXPECT_NEAR(full.cov_improvable()(0, 1), -1.0 / 3.0, 1e-15);
  const CostModel back = CostModelFromJson(ToJson(full), tax);
  EXPECT_EQ(back.inv_cov_improvable(), full.inv_cov_improvable());

  EXPECT_EQ(CodeOf([&] {
              CostModelFromJson(json::parse(R"({"inv_cov_improvable": [[1, 2], [2, 1]],
                                                "inv_cov_manipulable": [[1]]})"), tax);
            }),
            ErrorCode::kNotPositiveDefinite);
  EXPECT_EQ(CodeOf([&] {
              CostModelFromJson(json::parse(R"({"inv_cov_improvable": [[1]],
                                                "inv_cov_manipulable": [[1]]})"), tax);
            }),
            ErrorCode::kDimensionMismatch);
}

TEST(Json, TrainConfig) {
  const TrainConfig cfg = TrainConfigFromJson(
      json::parse(R"({"method": "ManipulationProof", "lambda": 2, "seed": 7})"));
  EXPECT_EQ(cfg.method, Method::kManipulationProof);
  EXPECT_EQ(cfg.lambda, 2.0);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.max_iters, 500);
  const TrainConfig back = TrainConfigFromJson(ToJson(cfg));
  EXPECT_EQ(back.method, cfg.method);
  EXPECT_EQ(back.l2_reg, cfg.l2_reg);

  try {
    TrainConfigFromJson(json::parse(R"({"method": "CAA"})"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfigError);
    EXPECT_NE(std::string(e.what()).find("'method'"), std::string::npos);
  }
  try {
    TrainConfigFromJson(json::parse(R"({"method": "CA", "lamda": 1})"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("'lamda'"), std::string::npos);
  }
  EXPECT_EQ(CodeOf([] { TrainConfigFromJson(json::parse(R"({"method": "CA", "eta": "x"})")); }),
            ErrorCode::kConfigError);
  EXPECT_EQ(CodeOf([] { TrainConfigFromJson(json::parse(R"({"method": "CA", "restarts": 0})")); }),
            ErrorCode::kConfigError);
}

TEST(Json, ToyParamsMirrorStruct) {
  const ToyParams p = ToyParamsFromJson(json::parse(
      R"({"n": 10, "noise_x2": 0.1, "label_weights": [2, 3], "label_noise": 0.5,
          "m1_coupling": 1.5, "m2_coupling_x2": 0.2, "m2_coupling_y": 0.3,
          "m_noise": 0.4, "seed": 8})"));
  EXPECT_EQ(p.n, 10u);
  EXPECT_EQ(p.b1, 2.0);
  EXPECT_EQ(p.b2, 3.0);
  EXPECT_EQ(p.seed, 8u);
  const json back = ToJson(p);
  EXPECT_EQ(ToyParamsFromJson(back).m_noise, 0.4);
  EXPECT_EQ(CodeOf([] { ToyParamsFromJson(json::parse(R"({"n": 5})")); }),
            ErrorCode::kConfigError);
  EXPECT_EQ(CodeOf([] { ToyParamsFromJson(json::parse(R"({"label_weights": [1]})")); }),
            ErrorCode::kConfigError);
}

TEST(Json, ModelRoundTripIsExact) {
  const FeatureTaxonomy tax = ToyTaxonomy();
  Eigen::VectorXd w(4);
  w << 0.1, -1.0 / 3.0, 2.5e-17, 1e10;
  const LinearModel model(-0.7, w);
  TrainConfig cfg;
  cfg.method = Method::kStatic;
  const json j = ModelToJson(model, tax, cfg, true);
  EXPECT_EQ(j.at("taxonomy_hash"), tax.hash_hex());
  EXPECT_EQ(j.at("method"), "Static");
  const ModelFile back = ModelFromJson(json::parse(j.dump()));
  EXPECT_EQ(back.model.parameters(), model.parameters());
  EXPECT_EQ(back.taxonomy, tax);
  EXPECT_EQ(back.config.method, Method::kStatic);

  json tampered = j;
  tampered["taxonomy"][0]["kind"] = "manipulable";
  EXPECT_EQ(CodeOf([&] { ModelFromJson(tampered); }), ErrorCode::kConfigError);
  json short_w = j;
  short_w["weights"].erase(0);
  EXPECT_EQ(CodeOf([&] { ModelFromJson(short_w); }), ErrorCode::kDimensionMismatch);
}

TEST(Json, ReportsSerialize) {
  EvalReport r;
  r.test_error = 0.25;
  r.n_eval = 4;
  r.method = "CA";
  EXPECT_TRUE(ToJson(r).at("improvement_rate").is_null());
  r.improvement_rate = 0.5;
  EXPECT_EQ(ToJson(r).at("improvement_rate"), 0.5);

  const FeatureTaxonomy tax = testing::MakeTaxonomy(2, 0);
  const Flipset fs =
      MakeFlipset(Eigen::Vector2d(-1.0, 0.0), LinearModel(0.0, Eigen::Vector2d(1.0, 1.0)),
                  CostModel::Scaled(2, 1.0, 0, 1.0), tax, Family::kImprovable);
  const json jf = ToJson(fs);
  EXPECT_EQ(jf.at("rows").size(), 2u);
  EXPECT_EQ(jf.at("rows")[0].at("delta_direction"), "up");
  EXPECT_EQ(jf.at("predicted_after"), 1);
}

TEST(Manifest, HashesTrackInputs) {
  const auto path = std::filesystem::temp_directory_path() / "cadapt_manifest_input.txt";
  {
    std::ofstream(path) << "abc";
  }
  RunManifest m = StartManifest("train", 5);
  m.AddInput(path.string());
  EXPECT_EQ(m.input_hashes[0].second, Fnv1aHex("abc"));
  EXPECT_EQ(Fnv1aHex(""), "cbf29ce484222325");
  EXPECT_TRUE(m.Verify());
  {
    std::ofstream(path) << "abd";
  }
  EXPECT_FALSE(m.Verify());
  const json j = m.ToJson();
  EXPECT_EQ(j.at("command"), "train");
  EXPECT_EQ(j.at("seed"), 5u);
  EXPECT_EQ(j.at("tool_version"), kToolVersion);
  EXPECT_FALSE(j.at("timestamp").get<std::string>().empty());
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace cadapt
