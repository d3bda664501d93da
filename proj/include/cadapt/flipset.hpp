#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cadapt/best_response.hpp"
#include "cadapt/cost_model.hpp"
#include "cadapt/linear_model.hpp"
#include "cadapt/taxonomy.hpp"

namespace cadapt {

enum class DeltaDirection { kUp, kDown, kUnchanged };

inline constexpr double kDirectionTol = 1e-9;

inline DeltaDirection DirectionOf(double original, double adapted) {
  const double delta = adapted - original;
  if (delta > kDirectionTol) return DeltaDirection::kUp;
  if (delta < -kDirectionTol) return DeltaDirection::kDown;
  return DeltaDirection::kUnchanged;
}

inline std::string_view DirectionName(DeltaDirection d) {
  switch (d) {
    case DeltaDirection::kUp: return "up";
    case DeltaDirection::kDown: return "down";
    case DeltaDirection::kUnchanged: return "unchanged";
  }
  return "unchanged";
}

struct FlipsetRow {
  std::string feature;
  FeatureKind kind = FeatureKind::kImmutable;
  double original = 0.0;
  double adapted = 0.0;
  DeltaDirection direction = DeltaDirection::kUnchanged;
};

struct Flipset {
  std::vector<FlipsetRow> rows;
  int predicted_before = -1;
  int predicted_after = -1;
  double cost = 0.0;
  Family family = Family::kActionable;
};

/// Per-feature before/after view of a subject's F-best response.
inline Flipset MakeFlipset(const FeatureVector& x, const LinearModel& w,
                           const CostModel& model, const FeatureTaxonomy& tax,
                           Family family) {
  const BestResponseResult br = BestResponse(x, w, model, tax, family);
  Flipset fs;
  fs.family = family;
  fs.cost = br.cost_incurred;
  fs.predicted_before = br.accepted_before ? 1 : -1;
  fs.predicted_after = br.accepted_after() ? 1 : -1;
  fs.rows.reserve(tax.dim());
  for (std::size_t k = 0; k < tax.dim(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    FlipsetRow row;
    row.feature = tax.feature(k).name;
    row.kind = tax.feature(k).kind;
    row.original = x[i];
    row.adapted = br.adapted[i];
    row.direction = DirectionOf(row.original, row.adapted);
    fs.rows.push_back(std::move(row));
  }
  return fs;
}

namespace detail {

inline std::string FormatNumber(double v, bool round) {
  if (round) v = std::nearbyint(v);
  if (v == 0.0) v = 0.0;  // drop negative zero
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string FormatLabel(int label) { return label > 0 ? "+1" : "-1"; }

}  // namespace detail

/// Markdown table with columns Feature | Type | Original | Adapted, followed
/// by the prediction row. With `round` the values are shown as the nearest
/// integer; arrows always follow the unrounded change.
inline std::string ToMarkdown(const Flipset& fs, bool round = false) {
  std::string out = "| Feature | Type | Original | Adapted |\n";
  out += "|---|---|---|---|\n";
  for (const FlipsetRow& row : fs.rows) {
    out += "| " + row.feature + " | " + std::string(KindTag(row.kind)) +
           " | " + detail::FormatNumber(row.original, round) + " | " +
           detail::FormatNumber(row.adapted, round);
    if (row.direction == DeltaDirection::kUp) out += " ↑";
    if (row.direction == DeltaDirection::kDown) out += " ↓";
    out += " |\n";
  }
  out += "| Prediction | - | " + detail::FormatLabel(fs.predicted_before) +
         " | " + detail::FormatLabel(fs.predicted_after);
  if (fs.predicted_after > fs.predicted_before) out += " ↑";
  out += " |\n";
  return out;
}

}  // namespace cadapt
