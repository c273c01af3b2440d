#include "newton_imbed/homotopy.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <sstream>

#include "newton_imbed/error.hpp"

namespace newton_imbed {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Increments within this many ulps of the iterate's H2 norm are rounding noise.
constexpr double kRoundoffUlps = 256.0;

struct Attempt {
  Field solution;
  std::vector<TraceRow> rows;
  bool ok = false;
  ErrorCode code = ErrorCode::contraction_failure;
  std::string message;
  double residual = 0.0;
};

Attempt attempt_time(double t, const Field& u_init, const Nonlinearity& nl, const NewtonConfig& cfg) {
  Attempt out{u_init, {}, false, ErrorCode::contraction_failure, {}, 0.0};
  Field u = u_init;
  Field u_prev = u_init;

  for (int m = 0; m < cfg.max_newton_iters; ++m) {
    NewtonStep step = newton_step(t, u, nl, cfg);
    const Field diff = step.next - u;

    TraceRow row;
    row.t = t;
    row.m = m;
    row.diff_h1 = norm_h1(diff);
    row.diff_h2 = norm_h2(diff);
    row.cg_iters = step.report.cg_iterations;
    row.resolved = row.diff_h2 > kRoundoffUlps * std::numeric_limits<double>::epsilon() * norm_h2(step.next);
    row.contraction_ratio = kNaN;
    row.taylor_residual = kNaN;
    if (m > 0) {
      const double prev = out.rows.back().diff_h2;
      row.contraction_ratio = prev > 0.0 ? row.diff_h2 / (prev * prev) : kNaN;
      row.taylor_residual = taylor_residual(t, u_prev, u, nl);
    }
    out.rows.push_back(row);

    if (!std::isfinite(row.diff_h2) || !step.next.all_finite()) {
      out.message = "Newton increment became non-finite at t = " + std::to_string(t);
      return out;
    }
    const std::size_t k = out.rows.size();
    if (k >= 3 && out.rows[k - 1].diff_h2 > out.rows[k - 2].diff_h2 &&
        out.rows[k - 2].diff_h2 > out.rows[k - 3].diff_h2) {
      std::ostringstream msg;
      msg << "H2 increment grew for two consecutive iterations at t = " << t << " (m = " << m
          << ", diff_h2 = " << row.diff_h2 << ")";
      out.message = msg.str();
      return out;
    }

    u_prev = std::move(u);
    u = std::move(step.next);
    if (row.diff_h2 < cfg.newton_tol) {
      out.ok = true;
      out.residual = semilinear_residual(u, t, nl);
      out.solution = std::move(u);
      return out;
    }
  }
  std::ostringstream msg;
  msg << "Newton iteration did not reach ||du||_H2 < " << cfg.newton_tol << " in " << cfg.max_newton_iters
      << " iterations at t = " << t;
  out.code = ErrorCode::newton_non_convergence;
  out.message = msg.str();
  return out;
}

double max_pair_ratio(const std::vector<TraceRow>& rows, std::size_t begin, std::size_t end) {
  double K = 0.0;
  for (std::size_t i = begin + 1; i < end; ++i) {
    const double prev = rows[i - 1].diff_h2;
    if (prev > 0.0 && rows[i].resolved && rows[i].t > 0.0 && rows[i].j == rows[i - 1].j) {
      K = std::max(K, rows[i].diff_h2 / (prev * prev) / rows[i].t);
    }
  }
  return K;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

// Schedule -------------------------------------------------------------------

Schedule::Schedule(std::vector<double> times, double max_dt) : times_(std::move(times)), max_dt_(max_dt) {
  require(times_.size() >= 2, "schedule needs at least the times 0 and 1");
  require(times_.front() == 0.0 && times_.back() == 1.0, "schedule must start at t = 0 and end at t = 1");
  double widest = 0.0;
  for (std::size_t j = 1; j < times_.size(); ++j) {
    require(times_[j] > times_[j - 1], "schedule times must be strictly increasing");
    widest = std::max(widest, times_[j] - times_[j - 1]);
  }
  if (max_dt_ <= 0.0) max_dt_ = widest;
  require(widest <= max_dt_ * (1.0 + 1e-12), "schedule interval exceeds max_dt");
}

Schedule Schedule::uniform(int steps) {
  require(steps >= 1, "uniform schedule needs at least one step");
  std::vector<double> times(static_cast<std::size_t>(steps) + 1);
  for (int j = 0; j <= steps; ++j) times[static_cast<std::size_t>(j)] = static_cast<double>(j) / steps;
  times.back() = 1.0;
  return Schedule(std::move(times), 1.0 / steps);
}

int HomotopyTrace::halvings() const {
  return static_cast<int>(std::count_if(steps.begin(), steps.end(), [](const StepRecord& s) { return !s.accepted; }));
}

// Newton ---------------------------------------------------------------------

NewtonStep newton_step(double t, const Field& u, const Nonlinearity& nl, const NewtonConfig& cfg) {
  require(t >= 0.0 && t <= 1.0, "continuation time must lie in [0, 1]");
  const Grid& grid = u.grid();
  Field q(grid);
  Field g(grid);
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double fp = nl.fp(u[i]);
    q[i] = -t * fp;
    g[i] = t * (nl.f(u[i]) - fp * u[i]);
  }
  SolveOptions opts;
  opts.tol = cfg.linear_tol;
  opts.max_iter = cfg.linear_max_iter;
  opts.jacobi = cfg.jacobi;
  SolveReport report = solve_linear(LinearProblem{std::move(q), std::move(g)}, opts, u);
  Field next = report.solution;
  return NewtonStep{std::move(next), std::move(report)};
}

TimeSolve solve_at_time(double t, const Field& u_init, const Nonlinearity& nl, const NewtonConfig& cfg) {
  Attempt a = attempt_time(t, u_init, nl, cfg);
  if (!a.ok) fail(a.code, a.message);
  return TimeSolve{std::move(a.solution), std::move(a.rows), a.residual};
}

double semilinear_residual(const Field& u, double t, const Nonlinearity& nl) {
  Field r = laplacian(u);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = -r[i] - t * nl.f(u[i]);
  return norm_lp(r, 2.0);
}

double taylor_residual(double t, const Field& u_prev, const Field& u_curr, const Nonlinearity& nl) {
  require_same_grid(u_prev, u_curr);
  using Rule = boost::math::quadrature::gauss<double, 16>;
  const auto& abscissa = Rule::abscissa();
  const auto& weights = Rule::weights();

  const Grid& grid = u_prev.grid();
  Field direct(grid);
  Field taylor(grid);
  for (std::size_t i = 0; i < u_prev.size(); ++i) {
    const double a = u_prev[i];
    const double b = u_curr[i];
    const Extended ea(a);
    const Extended d = Extended(b) - ea;
    direct[i] = static_cast<double>(t * (nl.f_extended(b) - nl.f_extended(ea) - nl.fp_extended(ea) * d));

    // Boost stores the non-negative half of the symmetric rule on [-1, 1].
    const double dd = b - a;
    double integral = 0.0;
    for (std::size_t k = 0; k < abscissa.size(); ++k) {
      for (int sign : {1, -1}) {
        if (sign < 0 && abscissa[k] == 0.0) continue;
        const double tau = 0.5 * (1.0 + sign * abscissa[k]);
        integral += 0.5 * weights[k] * nl.fpp(a + tau * dd) * (1.0 - tau);
      }
    }
    taylor[i] = t * dd * dd * integral;
  }
  const double scale = norm_lp(direct, 2.0);
  const double mismatch = norm_lp(direct - taylor, 2.0);
  if (scale == 0.0) return mismatch == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return mismatch / scale;
}

// Continuation -----------------------------------------------------------------

namespace {

struct March {
  Field solution;
  HomotopyTrace trace;
  std::vector<double> times;
};

// Continuation over an arbitrary increasing list starting at 0.
March march(const Nonlinearity& nl, const Grid& grid, std::vector<double> times, const NewtonConfig& cfg) {
  require(cfg.newton_tol > 0.0 && cfg.linear_tol > 0.0, "Newton tolerances must be positive");
  require(cfg.max_newton_iters >= 1, "max_newton_iters must be at least 1");
  HomotopyTrace trace;
  Field u(grid);
  int halvings = 0;

  std::size_t j = 1;
  while (j < times.size()) {
    const double t = times[j];
    const double dt = t - times[j - 1];
    Attempt a = attempt_time(t, u, nl, cfg);

    const std::size_t first = trace.rows.size();
    for (TraceRow& row : a.rows) row.j = j;
    trace.rows.insert(trace.rows.end(), a.rows.begin(), a.rows.end());
    // K is measured inside this attempt; the certificate a = t K ||u_1 - u_0||
    // then bounds the recorded increments by induction on m. A converged
    // iteration that fails it is treated as a contraction failure.
    const double K = max_pair_ratio(trace.rows, first, trace.rows.size());
    const double a_est = t * K * trace.rows[first].diff_h2;
    if (a.ok && !(a_est < 1.0)) {
      a.ok = false;
      a.code = ErrorCode::contraction_failure;
      std::ostringstream msg;
      msg << "contraction certificate t K ||u_1 - u_0||_H2 = " << a_est << " >= 1 at t = " << t;
      a.message = msg.str();
    }
    for (std::size_t i = first; i < trace.rows.size(); ++i) {
      trace.rows[i].a_estimate = a_est;
      trace.rows[i].halved = !a.ok;
    }

    StepRecord rec;
    rec.j = j;
    rec.t = t;
    rec.dt = dt;
    rec.newton_iters = static_cast<int>(a.rows.size());

    if (a.ok) {
      rec.accepted = true;
      rec.residual = a.residual;
      trace.steps.push_back(rec);
      u = std::move(a.solution);
      ++j;
      continue;
    }

    rec.failure = std::string(to_string(a.code)) + ": " + a.message;
    trace.steps.push_back(rec);
    if (!cfg.adapt) fail(a.code, a.message);
    if (halvings >= cfg.max_halvings) {
      std::ostringstream msg;
      msg << cfg.max_halvings << " interval halvings exhausted at t = " << t
          << " (last failure: " << rec.failure << ")";
      fail(ErrorCode::step_collapse, msg.str());
    }
    ++halvings;
    times.insert(times.begin() + static_cast<std::ptrdiff_t>(j), times[j - 1] + 0.5 * dt);
  }

  return March{std::move(u), std::move(trace), std::move(times)};
}

}  // namespace

HomotopyResult run(const Nonlinearity& nl, const Grid& grid, const Schedule& schedule, const NewtonConfig& cfg) {
  March m = march(nl, grid, schedule.times(), cfg);
  double widest = 0.0;
  for (std::size_t i = 1; i < m.times.size(); ++i) widest = std::max(widest, m.times[i] - m.times[i - 1]);
  return HomotopyResult{std::move(m.solution), std::move(m.trace), Schedule(std::move(m.times), widest)};
}

Constants estimate_constants(const HomotopyTrace& trace) {
  Constants c;
  bool enough = false;
  std::size_t begin = 0;
  while (begin < trace.rows.size()) {
    std::size_t end = begin + 1;
    while (end < trace.rows.size() && trace.rows[end].j == trace.rows[begin].j &&
           trace.rows[end].halved == trace.rows[begin].halved && trace.rows[end].m > trace.rows[end - 1].m) {
      ++end;
    }
    const TraceRow& head = trace.rows[begin];
    if (!head.halved) {
      const auto step = std::find_if(trace.steps.begin(), trace.steps.end(),
                                     [&](const StepRecord& s) { return s.accepted && s.j == head.j && s.t == head.t; });
      if (step != trace.steps.end() && step->dt > 0.0) c.A_est = std::max(c.A_est, head.diff_h2 / step->dt);
      c.K_est = std::max(c.K_est, max_pair_ratio(trace.rows, begin, end));
      if (end - begin >= 2) enough = true;
    }
    begin = end;
  }
  if (!enough) fail(ErrorCode::insufficient_data, "trace has no accepted step with two or more Newton iterations");
  const double KA = c.K_est * c.A_est;
  c.dt_recommendation = KA > 0.0 ? 1.0 / KA : std::numeric_limits<double>::infinity();
  return c;
}

Schedule auto_schedule(const Nonlinearity& nl, const Grid& grid, const NewtonConfig& cfg) {
  constexpr double pilot_dt = 0.25;
  constexpr int max_steps = 100000;
  const March pilot = march(nl, grid, {0.0, pilot_dt}, cfg);
  Constants c;
  try {
    c = estimate_constants(pilot.trace);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::insufficient_data) throw;
    return Schedule({0.0, 1.0});
  }
  const double dt = std::min(pilot_dt, 0.5 * c.dt_recommendation);
  const double steps = std::ceil(1.0 / dt - 1e-9);
  if (!(steps <= max_steps)) {
    std::ostringstream msg;
    msg << "recommended width " << dt << " needs more than " << max_steps << " steps";
    fail(ErrorCode::step_collapse, msg.str());
  }
  return Schedule::uniform(static_cast<int>(steps));
}

void write_trace_csv(const HomotopyTrace& trace, const std::string& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> out(std::fopen(path.c_str(), "w"), &std::fclose);
  if (!out) fail(ErrorCode::io_error, "cannot open '" + path + "' for writing");
  std::fputs("j,t,m,diff_h1,diff_h2,contraction_ratio,a_estimate,cg_iters,halved\n", out.get());
  for (const TraceRow& r : trace.rows) {
    std::fprintf(out.get(), "%zu,%s,%d,%s,%s,%s,%s,%d,%d\n", r.j, format_double(r.t).c_str(), r.m,
                 format_double(r.diff_h1).c_str(), format_double(r.diff_h2).c_str(),
                 format_double(r.contraction_ratio).c_str(), format_double(r.a_estimate).c_str(), r.cg_iters,
                 r.halved ? 1 : 0);
  }
  if (std::ferror(out.get())) fail(ErrorCode::io_error, "write to '" + path + "' failed");
}

}  // namespace newton_imbed
