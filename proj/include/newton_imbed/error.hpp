#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace newton_imbed {

enum class ErrorCode {
  invalid_argument,
  non_convergence,
  negative_coefficient,
  contraction_failure,
  newton_non_convergence,
  step_collapse,
  insufficient_data,
  delta_too_small,
  io_error,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Conjugate gradients hit its iteration cap. Carries the initial relative
/// residual and the one after every iteration.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, std::vector<double> history)
      : Error(ErrorCode::non_convergence, what), history_(std::move(history)) {}
  const std::vector<double>& residual_history() const noexcept { return history_; }

 private:
  std::vector<double> history_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::invalid_argument, what);
}

}  // namespace newton_imbed
