#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "newton_imbed/elliptic.hpp"
#include "newton_imbed/grid.hpp"
#include "newton_imbed/nonlinearity.hpp"

namespace newton_imbed {

/// Continuation times 0 = t_0 < t_1 < ... < t_J = 1.
class Schedule {
 public:
  /// Validates the list; max_dt defaults to the widest interval.
  explicit Schedule(std::vector<double> times, double max_dt = 0.0);
  static Schedule uniform(int steps);

  const std::vector<double>& times() const noexcept { return times_; }
  double max_dt() const noexcept { return max_dt_; }
  std::size_t steps() const noexcept { return times_.size() - 1; }

 private:
  std::vector<double> times_;
  double max_dt_;
};

struct NewtonConfig {
  double newton_tol = 1e-6;     // stop once ||u_{m+1} - u_m||_{H2} < newton_tol
  int max_newton_iters = 30;
  double linear_tol = 1e-11;
  int linear_max_iter = 20000;
  bool jacobi = false;
  bool adapt = true;            // halve an interval whose Newton iteration fails
  int max_halvings = 20;
};

/// One Newton iterate at one continuation time. `m` indexes the increment
/// u_{m+1} - u_m.
struct TraceRow {
  std::size_t j = 0;
  double t = 0.0;
  int m = 0;
  double diff_h1 = 0.0;
  double diff_h2 = 0.0;
  double contraction_ratio = 0.0;  // diff_h2(m) / diff_h2(m-1)^2, NaN for m = 0
  double a_estimate = 0.0;         // t_j K_j ||u_1 - u_0||_{H2}, K_j the largest ratio / t_j in this attempt
  int cg_iters = 0;
  bool halved = false;             // row belongs to an attempt that was abandoned
  bool resolved = true;            // diff_h2 above the roundoff floor of u_{m+1}; others are left out of K
  double taylor_residual = 0.0;    // NaN for m = 0
};

struct StepRecord {
  std::size_t j = 0;
  double t = 0.0;
  double dt = 0.0;
  bool accepted = false;
  int newton_iters = 0;
  double residual = 0.0;           // ||-Δ_h u - t_j f(u)||_{L2}, accepted steps only
  std::string failure;             // reason for an abandoned attempt
};

struct HomotopyTrace {
  std::vector<TraceRow> rows;
  std::vector<StepRecord> steps;

  int halvings() const;
};

/// u_{m+1} from the linear problem with q = -t f'(u_m) and
/// g = t (f(u_m) - f'(u_m) u_m).
struct NewtonStep {
  Field next;
  SolveReport report;
};
NewtonStep newton_step(double t, const Field& u, const Nonlinearity& nl, const NewtonConfig& cfg);

struct TimeSolve {
  Field solution;
  std::vector<TraceRow> rows;
  double residual = 0.0;
};

/// Newton iterations at a fixed time from `u_init` until the H2 increment
/// drops below cfg.newton_tol. Throws ContractionFailure when the increment
/// grows twice in a row (or turns non-finite) and NewtonNonConvergence when
/// the iteration cap is reached. Rows carry j = 0 and a_estimate = 0; run()
/// fills both in.
TimeSolve solve_at_time(double t, const Field& u_init, const Nonlinearity& nl, const NewtonConfig& cfg);

struct HomotopyResult {
  Field solution;
  HomotopyTrace trace;
  Schedule schedule;  // the schedule actually used, including inserted midpoints
};

/// Marches the schedule from u(., 0) = 0 to t = 1, initializing every time
/// with the previous solution. A step also fails (ContractionFailure) when its
/// a_estimate is not below 1. With cfg.adapt, a failed interval is halved and
/// retried; StepCollapse after cfg.max_halvings halvings.
HomotopyResult run(const Nonlinearity& nl, const Grid& grid, const Schedule& schedule, const NewtonConfig& cfg);

struct Constants {
  double K_est = 0.0;
  double A_est = 0.0;
  double dt_recommendation = 0.0;  // 1 / (K_est A_est); +inf when K_est A_est = 0
};

/// Empirical stand-ins for the contraction constant K, the first-increment
/// constant A, and the admissible width 1 / (K A). Uses accepted steps only.
Constants estimate_constants(const HomotopyTrace& trace);

/// Pilot run on {0, 0.25}, then a uniform schedule of width
/// min(0.25, dt_recommendation / 2). A pilot that converges in a single Newton
/// iteration has no contraction data (the problem is affine in u) and yields
/// the single interval {0, 1}.
Schedule auto_schedule(const Nonlinearity& nl, const Grid& grid, const NewtonConfig& cfg);

/// ||-Δ_h u - t f(u)||_{L2}.
double semilinear_residual(const Field& u, double t, const Nonlinearity& nl);

/// Relative L2 mismatch between the Newton difference right-hand side
/// t (f(u_m) - f(u_{m-1}) - f'(u_{m-1}) (u_m - u_{m-1})) and its Taylor form
/// t (u_m - u_{m-1})^2 ∫_0^1 f''(τ u_m + (1 - τ) u_{m-1}) (1 - τ) dτ
/// (16-point Gauss-Legendre in τ).
double taylor_residual(double t, const Field& u_prev, const Field& u_curr, const Nonlinearity& nl);

/// Trace CSV with columns j,t,m,diff_h1,diff_h2,contraction_ratio,a_estimate,cg_iters,halved.
void write_trace_csv(const HomotopyTrace& trace, const std::string& path);

}  // namespace newton_imbed
