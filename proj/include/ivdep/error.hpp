#pragma once

#include <stdexcept>
#include <string>

namespace ivdep {

enum class ErrorCode {
  // configuration
  ConfigError,
  DimensionMismatch,
  // data
  DomainError,
  TooFewObservations,
  PanelTooShort,
  PathTooShort,
  MaskRangeError,
  BlockTooShort,
  GridMismatch,
  EmptySession,
  NonmonotoneTimestamps,
  ParseError,
  IoError,
  // numeric validity
  SingularFactorBlock,
  NonPositiveThreshold,
  SingularFactorQuadCov,
  NonpositiveDiagonal,
  ZeroDenominator,
  SingularSigma,
};

enum class ErrorCategory { Config, Data, Numeric };

ErrorCategory category(ErrorCode code) noexcept;
const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ivdep
