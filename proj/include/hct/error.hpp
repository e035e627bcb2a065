#pragma once

#include <stdexcept>
#include <string>

namespace hct {

// Numeric values are part of the C ABI (see hct.h); append only.
enum class ErrorCode : int {
  Ok = 0,
  InvalidArgument = 1,
  ShapeMismatch = 2,
  NotSymmetric = 3,
  NotPositiveDefinite = 4,
  BasisNotOrthonormal = 5,
  ComplexPropertyViolated = 6,
  NoReducedPart = 7,
  DecompositionResidualTooLarge = 8,
  NotExact = 9,
  DecompositionMismatch = 10,
  NotAPreBasis = 11,
  NonManifold = 12,
  InvertedCell = 13,
  DuplicateCell = 14,
  NonSPDMass = 15,
  WrongDimension = 16,
  UnknownGenerator = 17,
  BadParams = 18,
  SizeLimitExceeded = 19,
  InvalidWeight = 20,
  ConfigError = 21,
  ParseError = 22,
  IoError = 23,
  Internal = 24,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace hct
