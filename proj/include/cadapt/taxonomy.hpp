#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cadapt/error.hpp"

namespace cadapt {

enum class FeatureKind { kImprovable, kManipulable, kImmutable };

/// Which actionable features a best response may alter.
enum class Family { kImprovable, kManipulable, kActionable };

inline std::string_view KindName(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kImprovable: return "improvable";
    case FeatureKind::kManipulable: return "manipulable";
    case FeatureKind::kImmutable: return "immutable";
  }
  return "immutable";
}

/// Single-letter tag used in flipset tables (I / M / U).
inline std::string_view KindTag(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kImprovable: return "I";
    case FeatureKind::kManipulable: return "M";
    case FeatureKind::kImmutable: return "U";
  }
  return "U";
}

inline FeatureKind ParseKind(std::string_view text) {
  if (text == "improvable" || text == "I") return FeatureKind::kImprovable;
  if (text == "manipulable" || text == "M") return FeatureKind::kManipulable;
  if (text == "immutable" || text == "U" || text == "IM") {
    return FeatureKind::kImmutable;
  }
  throw Error(ErrorCode::kConfigError,
              "unknown feature kind '" + std::string(text) + "'");
}

inline std::string_view FamilyName(Family family) {
  switch (family) {
    case Family::kImprovable: return "I";
    case Family::kManipulable: return "M";
    case Family::kActionable: return "A";
  }
  return "A";
}

inline Family ParseFamily(std::string_view text) {
  if (text == "I" || text == "improvable") return Family::kImprovable;
  if (text == "M" || text == "manipulable") return Family::kManipulable;
  if (text == "A" || text == "actionable") return Family::kActionable;
  throw Error(ErrorCode::kConfigError,
              "unknown response family '" + std::string(text) + "'");
}

struct Feature {
  std::string name;
  FeatureKind kind = FeatureKind::kImmutable;
  // Prohibited direction of change: +1 forbids increases, -1 forbids
  // decreases, 0 is unconstrained.
  int direction = 0;
};

/// Ordered feature list with its induced improvable / manipulable /
/// immutable index sets. Immutable after construction.
class FeatureTaxonomy {
 public:
  FeatureTaxonomy() = default;

  explicit FeatureTaxonomy(std::vector<Feature> features)
      : features_(std::move(features)) {
    std::unordered_set<std::string> seen;
    for (std::size_t k = 0; k < features_.size(); ++k) {
      const Feature& f = features_[k];
      if (f.name.empty()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "feature " + std::to_string(k) + " has an empty name");
      }
      if (!seen.insert(f.name).second) {
        throw Error(ErrorCode::kInvalidArgument,
                    "duplicate feature name '" + f.name + "'");
      }
      if (f.direction < -1 || f.direction > 1) {
        throw Error(ErrorCode::kInvalidArgument,
                    "direction of '" + f.name + "' must be -1, 0 or 1");
      }
      if (f.kind == FeatureKind::kImmutable && f.direction != 0) {
        throw Error(ErrorCode::kInvalidArgument,
                    "immutable feature '" + f.name +
                        "' cannot carry a direction constraint");
      }
      switch (f.kind) {
        case FeatureKind::kImprovable: improvable_.push_back(k); break;
        case FeatureKind::kManipulable: manipulable_.push_back(k); break;
        case FeatureKind::kImmutable: immutable_.push_back(k); break;
      }
    }
  }

  std::size_t dim() const { return features_.size(); }
  const std::vector<Feature>& features() const { return features_; }
  const Feature& feature(std::size_t k) const { return features_.at(k); }

  const std::vector<std::size_t>& improvable() const { return improvable_; }
  const std::vector<std::size_t>& manipulable() const { return manipulable_; }
  const std::vector<std::size_t>& immutable() const { return immutable_; }

  /// Improvable indices followed by manipulable indices; this is the
  /// coordinate order of the block cost matrix.
  std::vector<std::size_t> actionable() const {
    std::vector<std::size_t> out = improvable_;
    out.insert(out.end(), manipulable_.begin(), manipulable_.end());
    return out;
  }

  std::vector<std::size_t> indices(Family family) const {
    switch (family) {
      case Family::kImprovable: return improvable_;
      case Family::kManipulable: return manipulable_;
      case Family::kActionable: return actionable();
    }
    return {};
  }

  std::optional<std::size_t> find(std::string_view name) const {
    for (std::size_t k = 0; k < features_.size(); ++k) {
      if (features_[k].name == name) return k;
    }
    return std::nullopt;
  }

  bool has_directions() const {
    return std::any_of(features_.begin(), features_.end(),
                       [](const Feature& f) { return f.direction != 0; });
  }

  /// Stable 64-bit FNV-1a digest over names, kinds and directions, rendered
  /// as 16 hex digits. Used to bind trained models to their taxonomy.
  std::string hash_hex() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::string_view bytes) {
      for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
      }
    };
    for (const Feature& f : features_) {
      mix(f.name);
      mix("\x1f");
      mix(KindName(f.kind));
      mix("\x1f");
      mix(std::to_string(f.direction));
      mix("\x1e");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
      out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
      h >>= 4;
    }
    return out;
  }

  friend bool operator==(const FeatureTaxonomy& a, const FeatureTaxonomy& b) {
    if (a.features_.size() != b.features_.size()) return false;
    for (std::size_t k = 0; k < a.features_.size(); ++k) {
      const Feature& fa = a.features_[k];
      const Feature& fb = b.features_[k];
      if (fa.name != fb.name || fa.kind != fb.kind ||
          fa.direction != fb.direction) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<Feature> features_;
  std::vector<std::size_t> improvable_;
  std::vector<std::size_t> manipulable_;
  std::vector<std::size_t> immutable_;
};

}  // namespace cadapt
