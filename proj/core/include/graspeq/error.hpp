#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace graspeq {

enum class ErrorCode {
  InvalidArgument,
  InvalidNormal,
  EmptyObject,
  EmptyHand,
  InvalidBinCount,
  InvalidSpread,
  InvalidForce,
  InvalidTemperature,
  ShapeError,
  SolverError,
  InvalidPart,
  InvalidShape,
  StyleInfeasible,
  ParseError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every validation and solver failure raised by the library.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace graspeq
