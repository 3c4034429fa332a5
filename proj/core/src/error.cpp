#include "graspeq/error.hpp"

namespace graspeq {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidNormal: return "InvalidNormal";
    case ErrorCode::EmptyObject: return "EmptyObject";
    case ErrorCode::EmptyHand: return "EmptyHand";
    case ErrorCode::InvalidBinCount: return "InvalidBinCount";
    case ErrorCode::InvalidSpread: return "InvalidSpread";
    case ErrorCode::InvalidForce: return "InvalidForce";
    case ErrorCode::InvalidTemperature: return "InvalidTemperature";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::SolverError: return "SolverError";
    case ErrorCode::InvalidPart: return "InvalidPart";
    case ErrorCode::InvalidShape: return "InvalidShape";
    case ErrorCode::StyleInfeasible: return "StyleInfeasible";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace graspeq
