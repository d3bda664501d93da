// cadapt command-line tool.
//
//   cadapt [--seed N] [--json] [--manifest PATH] <command> ...
//
// Exit codes: 0 success, 2 usage / configuration / input errors, 3 runtime
// failures (training, non-finite losses, analyses with no answer).
// CADAPT_LOG=off|error|warn|info|debug sets stderr verbosity (default warn).

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "cadapt/cadapt.hpp"

namespace cadapt::cli {
namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSingleClassData:
    case ErrorCode::kNonFiniteLoss:
    case ErrorCode::kNoValidPerturbation:
    case ErrorCode::kSingularKKT:
      return kExitRuntime;
    default:
      return kExitUsage;
  }
}

struct Globals {
  std::optional<std::uint64_t> seed;
  bool json = false;
  std::string manifest_path;
};

// ---------------------------------------------------------------------------
// Shared plumbing.

struct DataArgs {
  std::string data_path;
  std::string label_column = "y";
  std::string positive_label = "1";
};

void AddDataOptions(CLI::App* cmd, DataArgs& a) {
  cmd->add_option("--data", a.data_path, "CSV with a header row")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--label", a.label_column, "label column name")
      ->capture_default_str();
  cmd->add_option("--positive", a.positive_label,
                  "label value mapped to +1 (a single other value maps to -1)")
      ->capture_default_str();
}

Dataset LoadData(const DataArgs& a, const FeatureTaxonomy& tax) {
  spdlog::debug("loading {}", a.data_path);
  return LoadCsv(a.data_path, tax, a.label_column, a.positive_label);
}

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::kIoError, "failed writing '" + path + "'");
}

/// Writes the manifest to --manifest, else next to `primary_output`, else as
/// one JSON line on stderr.
void EmitManifest(const Globals& g, const RunManifest& m,
                  const std::string& primary_output) {
  if (!g.manifest_path.empty()) {
    m.Write(g.manifest_path);
  } else if (!primary_output.empty()) {
    m.Write(primary_output + ".manifest.json");
  } else {
    spdlog::info("manifest {}", m.ToJson().dump());
  }
}

std::string Percent(double v) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(2);
  s << 100.0 * v << '%';
  return s.str();
}

std::string PercentOpt(const std::optional<double>& v) {
  return v ? Percent(*v) : std::string("n/a (no negatives)");
}

std::string MeanStd(const MetricStats& s) {
  return Percent(s.mean) + " +- " + Percent(s.std);
}

void PrintReport(const EvalReport& r) {
  std::cout << "method            " << r.method << '\n'
            << "lambda            " << csv::FormatDouble(r.lambda) << '\n'
            << "n_eval            " << r.n_eval << '\n'
            << "test_error        " << Percent(r.test_error) << '\n'
            << "deployment_error  " << Percent(r.deployment_error) << '\n'
            << "improvement_rate  " << PercentOpt(r.improvement_rate) << '\n';
}

void PrintSummaryTable(const std::vector<CVSummary>& rows) {
  std::cout << "method             lambda    folds  test_error          "
               "deployment_error    improvement_rate\n";
  for (const CVSummary& s : rows) {
    std::string method = s.method;
    method.resize(18, ' ');
    std::string lambda = csv::FormatDouble(s.lambda);
    lambda.resize(9, ' ');
    std::string test = MeanStd(s.test_error);
    test.resize(19, ' ');
    std::string dep = MeanStd(s.deployment_error);
    dep.resize(19, ' ');
    std::cout << method << ' ' << lambda << ' ' << s.folds.size() << "      "
              << test << ' ' << dep << ' '
              << (s.improvement_rate ? MeanStd(*s.improvement_rate) : "n/a")
              << '\n';
  }
}

// ---------------------------------------------------------------------------
// generate-toy

struct GenerateArgs {
  std::string params_path;
  std::string out_csv;
  std::string out_taxonomy;
  std::optional<std::size_t> n;
};

int RunGenerate(const Globals& g, const GenerateArgs& a) {
  ToyParams p;
  RunManifest m = StartManifest("generate-toy", 0);
  if (!a.params_path.empty()) {
    p = ToyParamsFromJson(detail::ReadJsonFile(a.params_path));
    m.config_paths.push_back(a.params_path);
    m.AddInput(a.params_path);
  }
  if (a.n) p.n = *a.n;
  if (g.seed) p.seed = *g.seed;
  m.seed = p.seed;
  const Dataset data = GenerateToy(p);

  SaveCsv(a.out_csv, data, "y");
  WriteText(a.out_taxonomy, ToJson(data.taxonomy).dump(2) + "\n");
  // The oracle is P(Y = +1 | x) = sigmoid((b1 X1 + b2 X2) / label_noise).
  const json oracle = {{"oracle", "logistic"},
                       {"features", {"X1", "X2"}},
                       {"label_weights", {p.b1, p.b2}},
                       {"label_noise", p.label_noise},
                       {"params", ToJson(p)}};
  WriteText(a.out_csv + ".oracle.json", oracle.dump(2) + "\n");
  EmitManifest(g, m, a.out_csv);

  if (g.json) {
    std::cout << json{{"rows", data.size()},
                      {"csv", a.out_csv},
                      {"taxonomy", a.out_taxonomy},
                      {"seed", p.seed}}
                     .dump(2)
              << '\n';
  } else {
    std::cout << "wrote " << data.size() << " rows to " << a.out_csv << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  DataArgs data;
  std::string taxonomy_path;
  std::string cost_path;
  std::string config_path;
  std::string out_model;
};

int RunTrain(const Globals& g, const TrainArgs& a) {
  const FeatureTaxonomy tax = LoadTaxonomy(a.taxonomy_path);
  const CostModel model = LoadCostModel(a.cost_path, tax);
  TrainConfig cfg = LoadTrainConfig(a.config_path);
  if (g.seed) cfg.seed = *g.seed;
  const Dataset data = LoadData(a.data, tax);

  RunManifest m = StartManifest("train", cfg.seed);
  m.config_paths = {a.taxonomy_path, a.cost_path, a.config_path};
  for (const std::string& p :
       {a.data.data_path, a.taxonomy_path, a.cost_path, a.config_path}) {
    m.AddInput(p);
  }

  spdlog::info("training {} on {} rows", MethodName(cfg.method), data.size());
  const FitResult fit = Fit(data, model, cfg);
  if (!fit.converged) {
    spdlog::warn("optimizer stopped after {} iterations without meeting "
                 "grad_tol",
                 fit.iterations);
  }
  const json out = ModelToJson(fit.model, tax, cfg, fit.converged);
  WriteText(a.out_model, out.dump(2) + "\n");
  EmitManifest(g, m, a.out_model);

  if (g.json) {
    std::cout << json{{"model", a.out_model},
                      {"loss", fit.loss},
                      {"converged", fit.converged},
                      {"iterations", fit.iterations}}
                     .dump(2)
              << '\n';
  } else {
    std::cout << "trained " << MethodName(cfg.method) << " (loss "
              << csv::FormatDouble(fit.loss)
              << (fit.converged ? "" : ", not converged") << ") -> "
              << a.out_model << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string model_path;
  DataArgs data;
  std::string cost_path;
  std::string response = "M";
  std::size_t cv = 0;
  bool condition_on_prediction = false;
  std::string out_csv;
};

int RunEval(const Globals& g, const EvalArgs& a) {
  const ModelFile mf = LoadModel(a.model_path);
  const CostModel model = LoadCostModel(a.cost_path, mf.taxonomy);
  const Dataset data = LoadData(a.data, mf.taxonomy);
  EvalOptions opts;
  opts.deployment_response = ParseFamily(a.response);
  opts.condition_on_prediction = a.condition_on_prediction;

  TrainConfig cfg = mf.config;
  if (g.seed) cfg.seed = *g.seed;
  RunManifest m = StartManifest("eval", cfg.seed);
  m.config_paths = {a.model_path, a.cost_path};
  for (const std::string& p : {a.model_path, a.data.data_path, a.cost_path}) {
    m.AddInput(p);
  }

  if (a.cv == 0) {
    EvalReport r = Evaluate(mf.model, data, model, opts);
    r.method = std::string(MethodName(mf.config.method));
    r.lambda = mf.config.lambda;
    if (!a.out_csv.empty()) {
      CVSummary single;
      single.method = r.method;
      single.lambda = r.lambda;
      single.folds = {r};
      std::ostringstream csv_out;
      WriteFoldCsvHeader(csv_out);
      WriteFoldCsvRows(csv_out, single);
      WriteText(a.out_csv, csv_out.str());
    }
    if (g.json) {
      std::cout << ToJson(r).dump(2) << '\n';
    } else {
      PrintReport(r);
    }
  } else {
    const FoldPlan folds =
        MakeFolds(data.size(), a.cv, DeriveSeed(cfg.seed, SeedStream::kFolds));
    const CVSummary s = CrossValidate(data, model, cfg, folds, opts);
    for (std::size_t f = 0; f < s.fold_converged.size(); ++f) {
      if (!s.fold_converged[f]) spdlog::warn("fold {} did not converge", f);
    }
    if (!a.out_csv.empty()) {
      std::ostringstream csv_out;
      WriteFoldCsvHeader(csv_out);
      WriteFoldCsvRows(csv_out, s);
      WriteText(a.out_csv, csv_out.str());
    }
    if (g.json) {
      std::cout << ToJson(s).dump(2) << '\n';
    } else {
      PrintSummaryTable({s});
    }
  }
  EmitManifest(g, m, a.out_csv);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// flipset

struct FlipsetArgs {
  std::string model_path;
  DataArgs data;
  std::string cost_path;
  std::size_t row = 0;
  std::string family = "A";
  bool round = false;
};

int RunFlipset(const Globals& g, const FlipsetArgs& a) {
  const ModelFile mf = LoadModel(a.model_path);
  const CostModel model = LoadCostModel(a.cost_path, mf.taxonomy);
  const Dataset data = LoadData(a.data, mf.taxonomy);
  if (a.row >= data.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "row " + std::to_string(a.row) + " is out of range (dataset has " +
                    std::to_string(data.size()) + " rows)");
  }
  const Flipset fs = MakeFlipset(data.row(a.row), mf.model, model,
                                 mf.taxonomy, ParseFamily(a.family));
  RunManifest m = StartManifest("flipset", mf.config.seed);
  m.config_paths = {a.model_path, a.cost_path};
  for (const std::string& p : {a.model_path, a.data.data_path, a.cost_path}) {
    m.AddInput(p);
  }
  if (g.json) {
    json out = ToJson(fs);
    out["row"] = a.row;
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << ToMarkdown(fs, a.round);
  }
  EmitManifest(g, m, "");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// perturb

struct PerturbArgs {
  std::string model_path;
  std::string cost_path;
  DataArgs data;
  std::size_t samples = 20;
};

int RunPerturb(const Globals& g, const PerturbArgs& a) {
  const ModelFile mf = LoadModel(a.model_path);
  const CostModel model = LoadCostModel(a.cost_path, mf.taxonomy);
  const Dataset data = LoadData(a.data, mf.taxonomy);
  const std::uint64_t seed = g.seed.value_or(mf.config.seed);

  // Seeded sample of rejected rows, kept in row order.
  std::vector<std::size_t> rejected;
  for (std::size_t r = 0; r < data.size(); ++r) {
    if (!mf.model.accepts(data.row(r))) rejected.push_back(r);
  }
  if (rejected.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "the model rejects no row of the dataset");
  }
  std::mt19937_64 rng(DeriveSeed(seed, SeedStream::kSample));
  for (std::size_t i = rejected.size() - 1; i > 0; --i) {
    std::swap(rejected[i], rejected[UniformIndex(rng, i + 1)]);
  }
  if (rejected.size() > a.samples) rejected.resize(a.samples);
  std::sort(rejected.begin(), rejected.end());
  std::vector<FeatureVector> sample;
  for (std::size_t r : rejected) sample.push_back(data.row(r));

  RunManifest m = StartManifest("perturb", seed);
  m.config_paths = {a.model_path, a.cost_path};
  for (const std::string& p : {a.model_path, a.data.data_path, a.cost_path}) {
    m.AddInput(p);
  }

  const PerturbationResult p =
      FindCostReducingPerturbation(model, mf.model, mf.taxonomy, sample);
  // The returned block must itself pass validation.
  const CostModel validated =
      CostModel::Build(p.perturbed.inv_cov_improvable(),
                       p.perturbed.inv_cov_manipulable());
  (void)validated;

  if (g.json) {
    json out = ToJson(p, mf.taxonomy);
    for (std::size_t k = 0; k < p.sample_rows.size(); ++k) {
      out["samples"][k]["row"] = rejected[p.sample_rows[k]];
    }
    std::cout << out.dump(2) << '\n';
  } else {
    const auto& tax = mf.taxonomy;
    std::cout << "block " << FamilyName(p.block) << ", i = "
              << tax.feature(p.feature_i).name << ", j = "
              << tax.feature(p.feature_j).name
              << ", tau = " << csv::FormatDouble(p.tau) << '\n'
              << "C_A " << csv::FormatDouble(p.effective_variance_before)
              << " -> " << csv::FormatDouble(p.effective_variance_after)
              << '\n'
              << "row  cost_before  cost_after\n";
    for (std::size_t k = 0; k < p.sample_rows.size(); ++k) {
      std::cout << rejected[p.sample_rows[k]] << "  "
                << csv::FormatDouble(p.cost_before[k]) << "  "
                << csv::FormatDouble(p.cost_after[k]) << '\n';
    }
    std::cout << "perturbed cost matrix\n"
              << ToJson(p.perturbed).dump(2) << '\n';
  }
  EmitManifest(g, m, "");
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  DataArgs data;
  std::string taxonomy_path;
  std::string cost_path;
  std::string config_path;
  std::string grid;
  std::size_t folds = 5;
  std::string out_csv;
  std::string fold_csv;
};

std::vector<double> ParseGrid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::string_view cell = csv::Trim(item);
    if (cell.empty()) continue;
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
      throw Error(ErrorCode::kConfigError,
                  "--grid entry '" + std::string(cell) + "' is not a number");
    }
    grid.push_back(v);
  }
  CheckGrid(grid);
  return grid;
}

int RunSweep(const Globals& g, const SweepArgs& a) {
  const std::vector<double> grid = ParseGrid(a.grid);
  const FeatureTaxonomy tax = LoadTaxonomy(a.taxonomy_path);
  const CostModel model = LoadCostModel(a.cost_path, tax);
  TrainConfig cfg = LoadTrainConfig(a.config_path);
  if (g.seed) cfg.seed = *g.seed;
  const Dataset data = LoadData(a.data, tax);

  RunManifest m = StartManifest("sweep", cfg.seed);
  m.config_paths = {a.taxonomy_path, a.cost_path, a.config_path};
  for (const std::string& p :
       {a.data.data_path, a.taxonomy_path, a.cost_path, a.config_path}) {
    m.AddInput(p);
  }

  const FoldPlan folds =
      MakeFolds(data.size(), a.folds, DeriveSeed(cfg.seed, SeedStream::kFolds));
  const SweepResult sweep = LambdaSweep(data, model, cfg, grid, folds);

  std::ostringstream summary;
  WriteSummaryCsvHeader(summary);
  for (const CVSummary& s : sweep.summaries) WriteSummaryCsvRow(summary, s);
  if (!a.out_csv.empty()) WriteText(a.out_csv, summary.str());
  if (!a.fold_csv.empty()) {
    std::ostringstream fold_rows;
    WriteFoldCsvHeader(fold_rows);
    for (const CVSummary& s : sweep.summaries) WriteFoldCsvRows(fold_rows, s);
    WriteText(a.fold_csv, fold_rows.str());
  }

  if (g.json) {
    std::cout << ToJson(sweep).dump(2) << '\n';
  } else if (a.out_csv.empty()) {
    std::cout << summary.str();
  } else {
    PrintSummaryTable(sweep.summaries);
  }
  EmitManifest(g, m, a.out_csv);
  return kExitOk;
}

void ConfigureLogging() {
  auto logger = spdlog::stderr_logger_st("cadapt");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("CADAPT_LOG")) {
    const spdlog::level::level_enum lvl = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only honour names it knows.
    if (lvl != spdlog::level::off || std::string(env) == "off") {
      spdlog::set_level(lvl);
    }
  }
}

}  // namespace

int Main(int argc, char** argv) {
  ConfigureLogging();
  CLI::App app{"Strategic classification with constructive adaptation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  Globals g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value,
                                  "seed overriding the ones in config files");
  app.add_flag("--json", g.json, "machine-readable JSON on stdout");
  app.add_option("--manifest", g.manifest_path, "where to write the run manifest");

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate-toy", "write the synthetic toy dataset");
  gen_cmd->add_option("--params", gen.params_path, "toy parameter JSON")
      ->check(CLI::ExistingFile);
  gen_cmd->add_option("--out-csv", gen.out_csv, "dataset CSV")->required();
  gen_cmd->add_option("--out-taxonomy", gen.out_taxonomy, "taxonomy JSON")
      ->required();
  gen_cmd->add_option("--n", gen.n, "row count overriding the params file");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "fit a classifier");
  AddDataOptions(train_cmd, train.data);
  train_cmd->add_option("--taxonomy", train.taxonomy_path)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--cost", train.cost_path)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--config", train.config_path)->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train.out_model, "model JSON")->required();

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "test error, deployment error, improvement rate");
  eval_cmd->add_option("--model", ev.model_path)->required()->check(CLI::ExistingFile);
  AddDataOptions(eval_cmd, ev.data);
  eval_cmd->add_option("--cost", ev.cost_path)->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--response", ev.response,
                       "response family for the deployment error (I, M or A)")
      ->check(CLI::IsMember({"I", "M", "A"}))
      ->capture_default_str();
  eval_cmd->add_option("--cv", ev.cv,
                       "k-fold cross-validation retraining with the model's config")
      ->check(CLI::Range(2, 1000000));
  eval_cmd->add_flag("--condition-on-prediction", ev.condition_on_prediction,
                     "improvement rate over h(x) = -1 instead of y = -1");
  eval_cmd->add_option("--out-csv", ev.out_csv, "per-fold CSV");

  FlipsetArgs fl;
  auto* flip_cmd = app.add_subcommand("flipset", "best-response table for one row");
  flip_cmd->add_option("--model", fl.model_path)->required()->check(CLI::ExistingFile);
  AddDataOptions(flip_cmd, fl.data);
  flip_cmd->add_option("--cost", fl.cost_path)->required()->check(CLI::ExistingFile);
  flip_cmd->add_option("--row", fl.row, "0-based data row")->required();
  flip_cmd->add_option("--family", fl.family, "I, M or A")
      ->check(CLI::IsMember({"I", "M", "A"}))
      ->capture_default_str();
  flip_cmd->add_flag("--round", fl.round, "show values rounded to integers");

  PerturbArgs pe;
  auto* pert_cmd = app.add_subcommand("perturb", "search a cost-reducing correlation");
  pert_cmd->add_option("--model", pe.model_path)->required()->check(CLI::ExistingFile);
  pert_cmd->add_option("--cost", pe.cost_path)->required()->check(CLI::ExistingFile);
  AddDataOptions(pert_cmd, pe.data);
  pert_cmd->add_option("--samples", pe.samples, "rejected rows to sample")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  SweepArgs sw;
  auto* sweep_cmd = app.add_subcommand("sweep", "cross-validated lambda sweep");
  AddDataOptions(sweep_cmd, sw.data);
  sweep_cmd->add_option("--taxonomy", sw.taxonomy_path)->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--cost", sw.cost_path)->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--config", sw.config_path)->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--grid", sw.grid, "comma-separated ascending lambdas")->required();
  sweep_cmd->add_option("--folds", sw.folds)->check(CLI::Range(2, 1000000))->capture_default_str();
  sweep_cmd->add_option("--out-csv", sw.out_csv, "summary CSV");
  sweep_cmd->add_option("--fold-csv", sw.fold_csv, "per-fold CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (*seed_opt) g.seed = seed_value;

  try {
    if (*gen_cmd) return RunGenerate(g, gen);
    if (*train_cmd) return RunTrain(g, train);
    if (*eval_cmd) return RunEval(g, ev);
    if (*flip_cmd) return RunFlipset(g, fl);
    if (*pert_cmd) return RunPerturb(g, pe);
    if (*sweep_cmd) return RunSweep(g, sw);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return ExitCodeFor(e.code());
  } catch (const nlohmann::json::exception& e) {
    spdlog::error("malformed JSON: {}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace cadapt::cli

int main(int argc, char** argv) { return cadapt::cli::Main(argc, argv); }
