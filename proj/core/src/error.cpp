#include "bibeta/error.hpp"

namespace bibeta {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InfeasibleVariance: return "InfeasibleVariance";
    case ErrorKind::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorKind::UndefinedDensity: return "UndefinedDensity";
    case ErrorKind::QuadratureFailure: return "QuadratureFailure";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::OptimizerFailure: return "OptimizerFailure";
    case ErrorKind::ChainFailure: return "ChainFailure";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::CholeskyFailure: return "CholeskyFailure";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace bibeta
