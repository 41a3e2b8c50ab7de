#include "ivdep/error.hpp"

namespace ivdep {

ErrorCategory category(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::DimensionMismatch:
      return ErrorCategory::Config;
    case ErrorCode::SingularFactorBlock:
    case ErrorCode::NonPositiveThreshold:
    case ErrorCode::SingularFactorQuadCov:
    case ErrorCode::NonpositiveDiagonal:
    case ErrorCode::ZeroDenominator:
    case ErrorCode::SingularSigma:
      return ErrorCategory::Numeric;
    default:
      return ErrorCategory::Data;
  }
}

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::PanelTooShort: return "PanelTooShort";
    case ErrorCode::PathTooShort: return "PathTooShort";
    case ErrorCode::MaskRangeError: return "MaskRangeError";
    case ErrorCode::BlockTooShort: return "BlockTooShort";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::EmptySession: return "EmptySession";
    case ErrorCode::NonmonotoneTimestamps: return "NonmonotoneTimestamps";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::SingularFactorBlock: return "SingularFactorBlock";
    case ErrorCode::NonPositiveThreshold: return "NonPositiveThreshold";
    case ErrorCode::SingularFactorQuadCov: return "SingularFactorQuadCov";
    case ErrorCode::NonpositiveDiagonal: return "NonpositiveDiagonal";
    case ErrorCode::ZeroDenominator: return "ZeroDenominator";
    case ErrorCode::SingularSigma: return "SingularSigma";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace ivdep
