// Library walkthrough on the toy data: train CA and Static, compare their
// metrics, print a flipset for one rejected subject.

#include <iomanip>
#include <iostream>

#include "cadapt/cadapt.hpp"

int main() {
  using namespace cadapt;

  ToyParams params;
  params.n = 2000;
  params.seed = 7;
  const Dataset data = GenerateToy(params);
  const CostModel cost = CostModel::Scaled(2, 1.0, 2, 0.2);

  TrainConfig ca;
  ca.method = Method::kCA;
  ca.lambda = 1.0;
  TrainConfig plain;
  plain.method = Method::kStatic;

  std::cout << std::fixed << std::setprecision(4);
  LinearModel ca_model;
  for (const TrainConfig& cfg : {plain, ca}) {
    const FitResult fit = Fit(data, cost, cfg);
    const EvalReport r = Evaluate(fit.model, data, cost);
    std::cout << MethodName(cfg.method) << ": test " << r.test_error
              << ", deployment " << r.deployment_error << ", improvement "
              << r.improvement_rate.value_or(0.0) << '\n';
    if (cfg.method == Method::kCA) ca_model = fit.model;
  }

  for (std::size_t r = 0; r < data.size(); ++r) {
    const FeatureVector x = data.row(r);
    if (ca_model.accepts(x)) continue;
    const Flipset fs =
        MakeFlipset(x, ca_model, cost, data.taxonomy, Family::kImprovable);
    if (fs.predicted_after != 1) continue;
    std::cout << "\nrow " << r << '\n' << ToMarkdown(fs, false);
    break;
  }
  return 0;
}
