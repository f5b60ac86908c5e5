#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace skewfib {

enum class ErrorCode {
  invalid_input,
  rank_deficient,
  convergence_failure,
  not_in_chart,
  singular_y_column,
  no_convergence,
  singular_system,
  blend_failure,
  equator_point,
  dimension_mismatch,
  real_eigenvalue,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_input: return "InvalidInput";
    case ErrorCode::rank_deficient: return "RankDeficient";
    case ErrorCode::convergence_failure: return "ConvergenceFailure";
    case ErrorCode::not_in_chart: return "NotInChart";
    case ErrorCode::singular_y_column: return "SingularYColumn";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::singular_system: return "SingularSystem";
    case ErrorCode::blend_failure: return "BlendFailure";
    case ErrorCode::equator_point: return "EquatorPoint";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::real_eigenvalue: return "RealEigenvalue";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace skewfib
