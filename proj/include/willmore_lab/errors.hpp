#pragma once

#include <stdexcept>
#include <string>

namespace willmore_lab {

enum class ErrorCode {
  invalid_argument,
  non_positive_definite,
  catalog_derivative_missing,
  extrapolation_diverged,
  step_floor,
  not_star_shaped,
  degenerate_immersion,
  orientation_ambiguous,
  curvature_order_missing,
  center_too_close,
  fit_ill_conditioned,
  newton_diverged,
  no_contraction,
  step_limit,
  s_null,
  config,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::non_positive_definite: return "NonPositiveDefinite";
    case ErrorCode::catalog_derivative_missing: return "CatalogDerivativeMissing";
    case ErrorCode::extrapolation_diverged: return "ExtrapolationDiverged";
    case ErrorCode::step_floor: return "StepFloor";
    case ErrorCode::not_star_shaped: return "NotStarShaped";
    case ErrorCode::degenerate_immersion: return "DegenerateImmersion";
    case ErrorCode::orientation_ambiguous: return "OrientationAmbiguous";
    case ErrorCode::curvature_order_missing: return "CurvatureOrderMissing";
    case ErrorCode::center_too_close: return "CenterTooClose";
    case ErrorCode::fit_ill_conditioned: return "FitIllConditioned";
    case ErrorCode::newton_diverged: return "NewtonDiverged";
    case ErrorCode::no_contraction: return "NoContraction";
    case ErrorCode::step_limit: return "StepLimit";
    case ErrorCode::s_null: return "SNull";
    case ErrorCode::config: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace willmore_lab
