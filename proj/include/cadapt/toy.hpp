#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>

#include "cadapt/dataset.hpp"
#include "cadapt/error.hpp"
#include "cadapt/taxonomy.hpp"

namespace cadapt {

/// Structural equations of the synthetic causal graph
///
///   Z1, Z2 ~ N(0, 1)
///   X1 = Z1,  X2 = Z2 + N(0, noise_x2^2)
///   P(Y = +1 | X) = sigmoid((b1 X1 + b2 X2) / label_noise)
///   M1 = m1_coupling Y + N(0, m_noise^2)
///   M2 = m2_coupling_x2 X2 + m2_coupling_y Y + N(0, m_noise^2)
///
/// Observed columns are X1, X2 (improvable) and M1, M2 (manipulable).
/// label_noise = 0 gives the hard threshold Y = sign(b1 X1 + b2 X2).
struct ToyParams {
  std::size_t n = 5000;
  double noise_x2 = 0.5;
  double b1 = 1.5;
  double b2 = 1.5;
  double label_noise = 1.0;
  double m1_coupling = 1.0;
  double m2_coupling_x2 = 0.5;
  double m2_coupling_y = 0.5;
  double m_noise = 0.5;
  std::uint64_t seed = 0;

  void Validate() const {
    if (n < 10) throw Error(ErrorCode::kConfigError, "toy n must be >= 10");
    auto check = [](double v, const char* what) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw Error(ErrorCode::kConfigError,
                    std::string(what) + " must be a finite value >= 0");
      }
    };
    check(noise_x2, "noise_x2");
    check(label_noise, "label_noise");
    check(m_noise, "m_noise");
    for (double v : {b1, b2, m1_coupling, m2_coupling_x2, m2_coupling_y}) {
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::kConfigError, "toy coefficients must be finite");
      }
    }
  }
};

inline FeatureTaxonomy ToyTaxonomy() {
  return FeatureTaxonomy({{"X1", FeatureKind::kImprovable, 0},
                          {"X2", FeatureKind::kImprovable, 0},
                          {"M1", FeatureKind::kManipulable, 0},
                          {"M2", FeatureKind::kManipulable, 0}});
}

/// P(Y = +1 | x) for toy feature vectors; reads only X1 and X2.
inline TrueLabelOracle ToyOracle(const ToyParams& p) {
  return [b1 = p.b1, b2 = p.b2, scale = p.label_noise](const FeatureVector& x) {
    const double logit = b1 * x[0] + b2 * x[1];
    if (scale == 0.0) return logit >= 0.0 ? 1.0 : 0.0;
    return 1.0 / (1.0 + std::exp(-logit / scale));
  };
}

inline Dataset GenerateToy(const ToyParams& p) {
  p.Validate();
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const TrueLabelOracle oracle = ToyOracle(p);

  Dataset data;
  data.name = "toy";
  data.taxonomy = ToyTaxonomy();
  data.true_label_oracle = oracle;
  const auto n = static_cast<Eigen::Index>(p.n);
  data.X.resize(n, 4);
  data.y.resize(n);
  FeatureVector x(4);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double z1 = normal(rng);
    const double z2 = normal(rng);
    const double x1 = z1;
    const double x2 = z2 + p.noise_x2 * normal(rng);
    x << x1, x2, 0.0, 0.0;
    const double u = uniform(rng);
    const int y = u < oracle(x) ? 1 : -1;
    const double m1 = p.m1_coupling * y + p.m_noise * normal(rng);
    const double m2 =
        p.m2_coupling_x2 * x2 + p.m2_coupling_y * y + p.m_noise * normal(rng);
    data.X.row(r) << x1, x2, m1, m2;
    data.y[r] = y;
  }
  return data;
}

}  // namespace cadapt
