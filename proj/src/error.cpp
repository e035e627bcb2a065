#include "hct/error.hpp"

namespace hct {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Ok: return "Ok";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::BasisNotOrthonormal: return "BasisNotOrthonormal";
    case ErrorCode::ComplexPropertyViolated: return "ComplexPropertyViolated";
    case ErrorCode::NoReducedPart: return "NoReducedPart";
    case ErrorCode::DecompositionResidualTooLarge: return "DecompositionResidualTooLarge";
    case ErrorCode::NotExact: return "NotExact";
    case ErrorCode::DecompositionMismatch: return "DecompositionMismatch";
    case ErrorCode::NotAPreBasis: return "NotAPreBasis";
    case ErrorCode::NonManifold: return "NonManifold";
    case ErrorCode::InvertedCell: return "InvertedCell";
    case ErrorCode::DuplicateCell: return "DuplicateCell";
    case ErrorCode::NonSPDMass: return "NonSPDMass";
    case ErrorCode::WrongDimension: return "WrongDimension";
    case ErrorCode::UnknownGenerator: return "UnknownGenerator";
    case ErrorCode::BadParams: return "BadParams";
    case ErrorCode::SizeLimitExceeded: return "SizeLimitExceeded";
    case ErrorCode::InvalidWeight: return "InvalidWeight";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace hct
