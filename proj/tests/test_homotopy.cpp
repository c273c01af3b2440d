#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "newton_imbed/error.hpp"
#include "newton_imbed/homotopy.hpp"
#include "oracles/radial_newton.hpp"

using namespace newton_imbed;

namespace {

Field from_vector(const Grid& g, const std::vector<double>& v) { return Field(g, v); }

TraceRow row(std::size_t j, double t, int m, double diff) {
  TraceRow r;
  r.j = j;
  r.t = t;
  r.m = m;
  r.diff_h2 = diff;
  return r;
}

NewtonConfig tight() {
  NewtonConfig cfg;
  cfg.newton_tol = 1e-10;
  cfg.linear_tol = 1e-12;
  return cfg;
}

}  // namespace

TEST_CASE("schedule validation") {
  const Schedule u = Schedule::uniform(4);
  REQUIRE(u.times().size() == 5);
  CHECK(u.times().front() == 0.0);
  CHECK(u.times().back() == 1.0);
  CHECK(u.max_dt() == doctest::Approx(0.25));
  CHECK_THROWS_AS(Schedule({0.0, 0.5}), Error);
  CHECK_THROWS_AS(Schedule({0.1, 1.0}), Error);
  CHECK_THROWS_AS(Schedule({0.0, 0.5, 0.5, 1.0}), Error);
  CHECK_THROWS_AS(Schedule({0.0, 1.0}, 0.5), Error);
  CHECK_THROWS_AS(Schedule::uniform(0), Error);
}

TEST_CASE("newton_step") {
  const Grid g(DomainSpec::ball(3, 1.0), 64);
  const Nonlinearity nl = make_arccot(1, 0, 1, 0);
  Field u(g);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = 0.3 * (1 - g.radius(i));
  CHECK(newton_step(0.0, u, nl, {}).next.is_zero());

  const NewtonStep one = newton_step(1.0, Field(g), make_constant(1.0), tight());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g.radius(i);
    CHECK(one.next[i] == doctest::Approx((1 - r * r) / 6).epsilon(1e-10));
  }

  // A discrete solution is a fixed point.
  const double t = 0.6;
  const oracle::RadialSolution ref = oracle::damped_newton_radial(
      [&](double x) { return t * nl.f(x); }, [&](double x) { return t * nl.fp(x); }, 3, 1.0, 64);
  const Field star = from_vector(g, ref.u);
  const NewtonStep fixed = newton_step(t, star, nl, tight());
  CHECK(norm_lp(fixed.next - star, 2.0) <= 10 * 1e-12 * std::max(1.0, norm_lp(star, 2.0)));

  Nonlinearity increasing = make_linear(1.0, 1.0);
  try {
    newton_step(0.5, Field(g), increasing, {});
    FAIL("expected NegativeCoefficient");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::negative_coefficient);
  }
}

TEST_CASE("solve_at_time matches the damped Newton oracle") {
  const Grid g(DomainSpec::ball(3, 1.0), 127);
  const Nonlinearity nl = make_arccot(1, 0, 1, 0);
  const TimeSolve zero = solve_at_time(0.0, Field(g), nl, {});
  CHECK(zero.solution.is_zero());
  CHECK(zero.rows.size() == 1);

  const TimeSolve s = solve_at_time(0.25, Field(g), nl, tight());
  const oracle::RadialSolution ref = oracle::damped_newton_radial(
      [&](double x) { return 0.25 * nl.f(x); }, [&](double x) { return 0.25 * nl.fp(x); }, 3, 1.0, 127);
  CHECK(norm_h1(s.solution - from_vector(g, ref.u)) <= 1e-8);
  CHECK(s.residual <= 1e-9);
  REQUIRE(s.rows.size() >= 3);
  double K = 0.0;
  for (std::size_t m = 1; m < s.rows.size(); ++m) {
    if (s.rows[m].resolved) K = std::max(K, s.rows[m].contraction_ratio);
  }
  for (std::size_t m = 1; m < s.rows.size(); ++m) {
    if (!s.rows[m].resolved) continue;
    CHECK(s.rows[m].diff_h2 <= K * std::pow(s.rows[m - 1].diff_h2, 2) * (1 + 1e-12));
    CHECK(s.rows[m].diff_h2 < s.rows[m - 1].diff_h2);
  }
}

TEST_CASE("contraction failure and newton cap") {
  const Grid g(DomainSpec::ball(3, 1.0), 127);
  NewtonConfig cfg;
  cfg.adapt = false;
  const Nonlinearity stiff = make_arccot(50, 0, 1e-3, 0);
  try {
    run(stiff, g, Schedule({0.0, 1.0}), cfg);
    FAIL("expected ContractionFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::contraction_failure);
  }
  NewtonConfig capped;
  capped.max_newton_iters = 2;
  capped.newton_tol = 1e-14;
  try {
    solve_at_time(1.0, Field(g), make_arccot(1, 0, 1, 0), capped);
    FAIL("expected NewtonNonConvergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::newton_non_convergence);
  }
}

TEST_CASE("run end to end") {
  const Grid g(DomainSpec::ball(3, 1.0), 127);
  const Nonlinearity nl = make_arccot(1, 0, 1, 0);
  const HomotopyResult r = run(nl, g, Schedule::uniform(4), tight());
  CHECK(r.trace.halvings() == 0);
  CHECK(semilinear_residual(r.solution, 1.0, nl) <= 1e-8);
  const oracle::RadialSolution ref = oracle::damped_newton_radial(nl.f, nl.fp, 3, 1.0, 127);
  CHECK(norm_h1(r.solution - from_vector(g, ref.u)) <= 1e-7);

  const Constants c = estimate_constants(r.trace);
  CHECK(c.K_est > 0.0);
  CHECK(c.A_est > 0.0);
  CHECK(c.dt_recommendation == doctest::Approx(1 / (c.K_est * c.A_est)));
  CHECK(semilinear_residual(r.solution, 1.0, nl) <= 10 * tight().newton_tol * (1 + c.K_est));
  for (const TraceRow& row : r.trace.rows) {
    if (row.halved) continue;
    CHECK(row.a_estimate < 1.0);
    if (row.m > 1) CHECK(row.taylor_residual <= 1e-10);
  }

  // Uniqueness across schedules.
  const HomotopyResult fine = run(nl, g, Schedule::uniform(16), tight());
  CHECK(norm_h1(fine.solution - r.solution) <= 100 * tight().newton_tol);

  // Rerun at half the recommended width: no halvings.
  const int steps = static_cast<int>(std::ceil(2.0 / std::min(c.dt_recommendation, 2.0)));
  CHECK(run(nl, g, Schedule::uniform(steps), {}).trace.halvings() == 0);
}

TEST_CASE("zero nonlinearity gives the zero field bitwise") {
  const Grid g(DomainSpec::ball(3, 1.0), 63);
  const HomotopyResult r = run(make_constant(0.0), g, Schedule({0.0, 1.0}), {});
  CHECK(r.solution.is_zero());
  CHECK(r.trace.steps.size() == 1);
}

TEST_CASE("adaptive halving rescues a stiff single step") {
  const Grid g(DomainSpec::ball(3, 1.0), 127);
  const Nonlinearity stiff = make_arccot(50, 0, 1e-3, 0);
  const HomotopyResult r = run(stiff, g, Schedule({0.0, 1.0}), {});
  CHECK(r.trace.halvings() >= 1);
  CHECK(r.schedule.times().size() > 2);
  CHECK(semilinear_residual(r.solution, 1.0, stiff) <= 1e-6);

  NewtonConfig few;
  few.max_halvings = 2;
  try {
    run(stiff, g, Schedule({0.0, 1.0}), few);
    FAIL("expected StepCollapse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::step_collapse);
  }
}

TEST_CASE("estimate_constants arithmetic") {
  HomotopyTrace trace;
  trace.rows = {row(1, 1.0, 0, 1e-1), row(1, 1.0, 1, 1e-3), row(1, 1.0, 2, 1e-7)};
  trace.steps.push_back({1, 1.0, 1.0, true, 3, 0.0, ""});
  CHECK(estimate_constants(trace).K_est == doctest::Approx(0.1));

  HomotopyTrace a;
  a.rows = {row(1, 0.25, 0, 0.05), row(1, 0.25, 1, 1e-4)};
  a.steps.push_back({1, 0.25, 0.25, true, 2, 0.0, ""});
  CHECK(estimate_constants(a).A_est == doctest::Approx(0.2));

  HomotopyTrace thin;
  thin.rows = {row(1, 1.0, 0, 0.1)};
  thin.steps.push_back({1, 1.0, 1.0, true, 1, 0.0, ""});
  try {
    estimate_constants(thin);
    FAIL("expected InsufficientData");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::insufficient_data);
  }
}

TEST_CASE("auto schedule") {
  const Grid g(DomainSpec::ball(3, 1.0), 127);
  const Schedule s = auto_schedule(make_arccot(1, 0, 1, 0), g, {});
  CHECK(s.max_dt() <= 0.25);
  CHECK(run(make_arccot(1, 0, 1, 0), g, s, {}).trace.halvings() == 0);
  CHECK(auto_schedule(make_constant(0.0), g, {}).times().size() == 2);
}

TEST_CASE("taylor residual and trace csv") {
  const Grid g(DomainSpec::ball(3, 1.0), 32);
  const Nonlinearity nl = make_arccot(1, 0, 1, 0);
  Field a(g), b(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    a[i] = 0.4 * (1 - g.radius(i));
    b[i] = a[i] + 1e-4 * std::sin(static_cast<double>(i));
  }
  CHECK(taylor_residual(1.0, a, b, nl) <= 1e-12);

  const HomotopyResult r = run(nl, g, Schedule::uniform(2), {});
  const std::string path = "test_homotopy_trace.csv";
  write_trace_csv(r.trace, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("j,t,m,diff_h1,diff_h2,contraction_ratio,a_estimate,cg_iters,halved", 0) == 0);
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line);) ++lines;
  CHECK(lines == r.trace.rows.size());
}
