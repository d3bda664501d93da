#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cadapt {

enum class ErrorCode {
  kInvalidArgument,
  kDimensionMismatch,
  kNotSymmetric,
  kNotPositiveDefinite,
  kImmutableViolation,
  kSingularKKT,
  kNoValidPerturbation,
  kOrderingViolation,
  kNonFiniteLoss,
  kSingleClassData,
  kMissingColumn,
  kNonNumericCell,
  kUnknownLabelValue,
  kUnknownFeature,
  kTooFewRows,
  kNoOracle,
  kConfigError,
  kIoError,
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNotSymmetric: return "NotSymmetric";
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kImmutableViolation: return "ImmutableViolation";
    case ErrorCode::kSingularKKT: return "SingularKKT";
    case ErrorCode::kNoValidPerturbation: return "NoValidPerturbation";
    case ErrorCode::kOrderingViolation: return "OrderingViolation";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kSingleClassData: return "SingleClassData";
    case ErrorCode::kMissingColumn: return "MissingColumn";
    case ErrorCode::kNonNumericCell: return "NonNumericCell";
    case ErrorCode::kUnknownLabelValue: return "UnknownLabelValue";
    case ErrorCode::kUnknownFeature: return "UnknownFeature";
    case ErrorCode::kTooFewRows: return "TooFewRows";
    case ErrorCode::kNoOracle: return "NoOracle";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above; the
/// message is prefixed with the code name so it reads well when printed.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cadapt
