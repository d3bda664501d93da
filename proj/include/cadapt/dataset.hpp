#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cadapt/error.hpp"
#include "cadapt/linear_model.hpp"
#include "cadapt/taxonomy.hpp"

namespace cadapt {

/// Maps a feature vector to P(Y = +1 | x); only synthetic data has one.
using TrueLabelOracle = std::function<double(const FeatureVector&)>;

struct Dataset {
  std::string name;
  Eigen::MatrixXd X;  // n x d, columns in taxonomy order
  Eigen::VectorXi y;  // entries in {-1, +1}
  FeatureTaxonomy taxonomy;
  TrueLabelOracle true_label_oracle;

  std::size_t size() const { return static_cast<std::size_t>(X.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(X.cols()); }

  FeatureVector row(std::size_t r) const {
    return X.row(static_cast<Eigen::Index>(r)).transpose();
  }
  int label(std::size_t r) const { return y[static_cast<Eigen::Index>(r)]; }

  void Validate() const {
    if (X.rows() != y.size()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "dataset has " + std::to_string(X.rows()) + " rows but " +
                      std::to_string(y.size()) + " labels");
    }
    if (static_cast<std::size_t>(X.cols()) != taxonomy.dim()) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "dataset has " + std::to_string(X.cols()) +
                      " columns but taxonomy has " +
                      std::to_string(taxonomy.dim()) + " features");
    }
    for (Eigen::Index r = 0; r < y.size(); ++r) {
      if (y[r] != 1 && y[r] != -1) {
        throw Error(ErrorCode::kInvalidArgument,
                    "label at row " + std::to_string(r) + " is not +-1");
      }
    }
  }

  Dataset Subset(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.name = name;
    out.taxonomy = taxonomy;
    out.true_label_oracle = true_label_oracle;
    out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto dst = static_cast<Eigen::Index>(k);
      const auto src = static_cast<Eigen::Index>(rows[k]);
      out.X.row(dst) = X.row(src);
      out.y[dst] = y[src];
    }
    return out;
  }

  bool has_both_labels() const {
    bool pos = false, neg = false;
    for (Eigen::Index r = 0; r < y.size(); ++r) {
      pos = pos || y[r] == 1;
      neg = neg || y[r] == -1;
    }
    return pos && neg;
  }
};

/// Reassigns feature kinds by name; X, y and the oracle are untouched.
/// Moving a feature to immutable clears its direction constraint.
inline Dataset Misspecify(
    const Dataset& data,
    const std::vector<std::pair<std::string, FeatureKind>>& swaps) {
  std::vector<Feature> features = data.taxonomy.features();
  for (const auto& [name, kind] : swaps) {
    const auto idx = data.taxonomy.find(name);
    if (!idx) {
      throw Error(ErrorCode::kUnknownFeature, "no feature named '" + name + "'");
    }
    features[*idx].kind = kind;
    if (kind == FeatureKind::kImmutable) features[*idx].direction = 0;
  }
  Dataset out = data;
  out.taxonomy = FeatureTaxonomy(std::move(features));
  return out;
}

// ---------------------------------------------------------------------------
// CSV (RFC 4180: header row, quoted fields with "" escapes, LF or CRLF).

namespace csv {

inline std::vector<std::vector<std::string>> Parse(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  char c;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
  };
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field_started && field.empty()) {
          in_quotes = true;
          field_started = true;
        } else {
          field.push_back(c);
        }
        break;
      case ',': end_field(); break;
      case '\r':
        if (in.peek() == '\n') in.get(c);
        end_row();
        break;
      case '\n': end_row(); break;
      default:
        field.push_back(c);
        field_started = true;
    }
  }
  if (in_quotes) {
    throw Error(ErrorCode::kIoError, "unterminated quoted CSV field");
  }
  if (field_started || !field.empty() || !row.empty()) end_row();
  return rows;
}

inline std::string Quote(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(s);
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

inline std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  return s;
}

/// Shortest decimal that round-trips to the same double.
inline std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace csv

/// Reads a numeric CSV whose non-label columns are exactly the taxonomy
/// features (any column order). Labels equal to `positive_label` map to +1
/// and a single other value maps to -1.
inline Dataset LoadCsv(std::istream& in, const FeatureTaxonomy& taxonomy,
                       const std::string& label_column,
                       const std::string& positive_label,
                       std::string name = "dataset") {
  const auto rows = csv::Parse(in);
  if (rows.empty()) throw Error(ErrorCode::kIoError, "CSV has no header row");
  const std::vector<std::string>& header = rows.front();

  std::map<std::string, std::size_t> column_of;
  for (std::size_t c = 0; c < header.size(); ++c) {
    column_of[std::string(csv::Trim(header[c]))] = c;
  }
  auto require = [&](const std::string& col) {
    auto it = column_of.find(col);
    if (it == column_of.end()) {
      throw Error(ErrorCode::kMissingColumn, "CSV has no column '" + col + "'");
    }
    return it->second;
  };
  const std::size_t label_col = require(label_column);
  std::vector<std::size_t> feature_cols;
  for (const Feature& f : taxonomy.features()) {
    feature_cols.push_back(require(f.name));
  }
  for (const auto& [col, idx] : column_of) {
    if (idx != label_col && !taxonomy.find(col)) {
      throw Error(ErrorCode::kUnknownFeature,
                  "CSV column '" + col + "' is not in the taxonomy");
    }
  }

  Dataset data;
  data.name = std::move(name);
  data.taxonomy = taxonomy;
  const auto n = static_cast<Eigen::Index>(rows.size() - 1);
  const auto d = static_cast<Eigen::Index>(taxonomy.dim());
  data.X.resize(n, d);
  data.y.resize(n);
  std::string negative_label;
  bool have_negative = false;
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& cells = rows[static_cast<std::size_t>(r + 1)];
    const std::string line = std::to_string(r + 2);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::kIoError, "CSV line " + line + " has " +
                                           std::to_string(cells.size()) +
                                           " fields, header has " +
                                           std::to_string(header.size()));
    }
    for (Eigen::Index k = 0; k < d; ++k) {
      const std::size_t col = feature_cols[static_cast<std::size_t>(k)];
      const std::string_view cell = csv::Trim(cells[col]);
      double value = 0.0;
      const auto res =
          std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (cell.empty() || res.ec != std::errc() ||
          res.ptr != cell.data() + cell.size()) {
        throw Error(ErrorCode::kNonNumericCell,
                    "line " + line + ", column '" + header[col] + "': '" +
                        std::string(cell) + "'");
      }
      data.X(r, k) = value;
    }
    const std::string label(csv::Trim(cells[label_col]));
    if (label == positive_label) {
      data.y[r] = 1;
    } else if (!have_negative || label == negative_label) {
      negative_label = label;
      have_negative = true;
      data.y[r] = -1;
    } else {
      throw Error(ErrorCode::kUnknownLabelValue,
                  "line " + line + ": label '" + label +
                      "' is neither the positive label '" + positive_label +
                      "' nor the negative label '" + negative_label + "'");
    }
  }
  return data;
}

inline Dataset LoadCsv(const std::string& path, const FeatureTaxonomy& taxonomy,
                       const std::string& label_column,
                       const std::string& positive_label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open '" + path + "'");
  return LoadCsv(in, taxonomy, label_column, positive_label, path);
}

/// Writes features in taxonomy order plus a trailing label column holding
/// 1 / -1. Values use the shortest round-trip representation.
inline void SaveCsv(std::ostream& out, const Dataset& data,
                    const std::string& label_column = "y") {
  data.Validate();
  for (const Feature& f : data.taxonomy.features()) {
    out << csv::Quote(f.name) << ',';
  }
  out << csv::Quote(label_column) << '\n';
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (std::size_t k = 0; k < data.dim(); ++k) {
      out << csv::FormatDouble(data.X(static_cast<Eigen::Index>(r),
                                      static_cast<Eigen::Index>(k)))
          << ',';
    }
    out << data.label(r) << '\n';
  }
}

inline void SaveCsv(const std::string& path, const Dataset& data,
                    const std::string& label_column = "y") {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write '" + path + "'");
  SaveCsv(out, data, label_column);
  if (!out) throw Error(ErrorCode::kIoError, "failed writing '" + path + "'");
}

}  // namespace cadapt
