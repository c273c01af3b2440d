#include "newton_imbed/error.hpp"

namespace newton_imbed {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::non_convergence: return "NonConvergence";
    case ErrorCode::negative_coefficient: return "NegativeCoefficient";
    case ErrorCode::contraction_failure: return "ContractionFailure";
    case ErrorCode::newton_non_convergence: return "NewtonNonConvergence";
    case ErrorCode::step_collapse: return "StepCollapse";
    case ErrorCode::insufficient_data: return "InsufficientData";
    case ErrorCode::delta_too_small: return "DeltaTooSmall";
    case ErrorCode::io_error: return "IoError";
  }
  return "Unknown";
}

}  // namespace newton_imbed
