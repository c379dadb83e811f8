#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bibeta {

/// Failure categories surfaced by the library. The CLI maps these onto
/// exit codes and machine-readable error objects.
enum class ErrorKind {
  InvalidArgument,
  InfeasibleVariance,
  DegenerateDenominator,
  UndefinedDensity,
  QuadratureFailure,
  ZeroVariance,
  OptimizerFailure,
  ChainFailure,
  DegenerateVariance,
  CholeskyFailure,
  ParseError,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace bibeta
