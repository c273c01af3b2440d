#include "newton_imbed/newton_imbed.h"

#include <cmath>
#include <limits>
#include <new>
#include <string>
#include <vector>

#include "newton_imbed/bump.hpp"
#include "newton_imbed/elliptic.hpp"
#include "newton_imbed/error.hpp"
#include "newton_imbed/grid.hpp"
#include "newton_imbed/homotopy.hpp"
#include "newton_imbed/mesa.hpp"
#include "newton_imbed/nonlinearity.hpp"

using namespace newton_imbed;

struct ni_grid {
  Grid grid;
};

struct ni_field {
  Field field;
};

struct ni_nonlinearity {
  Nonlinearity nl;
};

struct ni_result {
  HomotopyResult result;
};

namespace {

thread_local std::string last_error;

ni_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return NI_INVALID_ARGUMENT;
    case ErrorCode::non_convergence: return NI_NON_CONVERGENCE;
    case ErrorCode::negative_coefficient: return NI_NEGATIVE_COEFFICIENT;
    case ErrorCode::contraction_failure: return NI_CONTRACTION_FAILURE;
    case ErrorCode::newton_non_convergence: return NI_NEWTON_NON_CONVERGENCE;
    case ErrorCode::step_collapse: return NI_STEP_COLLAPSE;
    case ErrorCode::insufficient_data: return NI_INSUFFICIENT_DATA;
    case ErrorCode::delta_too_small: return NI_DELTA_TOO_SMALL;
    case ErrorCode::io_error: return NI_IO_ERROR;
  }
  return NI_INTERNAL_ERROR;
}

template <class Body>
ni_status guard(Body&& body) {
  try {
    body();
    last_error.clear();
    return NI_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return NI_INTERNAL_ERROR;
  } catch (const std::exception& e) {
    last_error = e.what();
    return NI_INTERNAL_ERROR;
  } catch (...) {
    last_error = "unknown exception";
    return NI_INTERNAL_ERROR;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) fail(ErrorCode::invalid_argument, std::string(what) + " must not be null");
}

NewtonConfig to_config(const ni_newton_config* cfg) {
  NewtonConfig out;
  if (cfg == nullptr) return out;
  out.newton_tol = cfg->newton_tol;
  out.max_newton_iters = cfg->max_newton_iters;
  out.linear_tol = cfg->linear_tol;
  out.linear_max_iter = cfg->linear_max_iter;
  out.jacobi = cfg->jacobi != 0;
  out.adapt = cfg->adapt != 0;
  out.max_halvings = cfg->max_halvings;
  return out;
}

MesaSpec to_mesa(const ni_mesa_spec* spec) {
  need(spec, "mesa spec");
  MesaSpec out;
  out.a = spec->a;
  out.b = spec->b;
  out.T = spec->T;
  out.alpha = spec->alpha;
  out.n = spec->n;
  out.depth = spec->depth;
  validate(out);
  return out;
}

}  // namespace

extern "C" {

const char* ni_version(void) { return "1.0.0"; }

const char* ni_status_name(ni_status status) {
  switch (status) {
    case NI_OK: return "Ok";
    case NI_INTERNAL_ERROR: return "InternalError";
    case NI_INVALID_ARGUMENT: return "InvalidArgument";
    case NI_NON_CONVERGENCE: return "NonConvergence";
    case NI_NEGATIVE_COEFFICIENT: return "NegativeCoefficient";
    case NI_CONTRACTION_FAILURE: return "ContractionFailure";
    case NI_NEWTON_NON_CONVERGENCE: return "NewtonNonConvergence";
    case NI_STEP_COLLAPSE: return "StepCollapse";
    case NI_INSUFFICIENT_DATA: return "InsufficientData";
    case NI_DELTA_TOO_SMALL: return "DeltaTooSmall";
    case NI_IO_ERROR: return "IoError";
  }
  return "Unknown";
}

const char* ni_last_error(void) { return last_error.c_str(); }

// Grids ------------------------------------------------------------------------

ni_status ni_grid_create_box(int n, double side, int res, ni_grid** out) {
  return guard([&] {
    need(out, "out");
    *out = new ni_grid{Grid(DomainSpec::box(n, side), res)};
  });
}

ni_status ni_grid_create_ball(int n, double radius, int res, ni_grid** out) {
  return guard([&] {
    need(out, "out");
    *out = new ni_grid{Grid(DomainSpec::ball(n, radius), res)};
  });
}

void ni_grid_destroy(ni_grid* grid) { delete grid; }

size_t ni_grid_size(const ni_grid* grid) { return grid ? grid->grid.size() : 0; }

double ni_grid_spacing(const ni_grid* grid) { return grid ? grid->grid.spacing() : 0.0; }

int ni_grid_is_radial(const ni_grid* grid) { return grid && grid->grid.radial() ? 1 : 0; }

ni_status ni_grid_node(const ni_grid* grid, size_t i, double coords[3]) {
  return guard([&] {
    need(grid, "grid");
    need(coords, "coords");
    require(i < grid->grid.size(), "node index out of range");
    const Point p = grid->grid.node(i);
    for (int k = 0; k < 3; ++k) coords[k] = p[static_cast<std::size_t>(k)];
  });
}

// Fields -----------------------------------------------------------------------

ni_status ni_field_create(const ni_grid* grid, const double* values, size_t count, ni_field** out) {
  return guard([&] {
    need(grid, "grid");
    need(out, "out");
    if (values == nullptr) {
      *out = new ni_field{Field(grid->grid)};
      return;
    }
    require(count == grid->grid.size(), "field value count does not match the grid");
    *out = new ni_field{Field(grid->grid, std::vector<double>(values, values + count))};
  });
}

void ni_field_destroy(ni_field* field) { delete field; }

size_t ni_field_size(const ni_field* field) { return field ? field->field.size() : 0; }

const double* ni_field_data(const ni_field* field) { return field ? field->field.values().data() : nullptr; }

ni_status ni_field_norm_lp(const ni_field* field, double p, double* out) {
  return guard([&] {
    need(field, "field");
    need(out, "out");
    *out = norm_lp(field->field, p);
  });
}

ni_status ni_field_norm_h1(const ni_field* field, double* out) {
  return guard([&] {
    need(field, "field");
    need(out, "out");
    *out = norm_h1(field->field);
  });
}

ni_status ni_field_norm_h2(const ni_field* field, double* out) {
  return guard([&] {
    need(field, "field");
    need(out, "out");
    *out = norm_h2(field->field);
  });
}

ni_status ni_field_h1_distance(const ni_field* a, const ni_field* b, double* out) {
  return guard([&] {
    need(a, "field a");
    need(b, "field b");
    need(out, "out");
    *out = norm_h1(a->field - b->field);
  });
}

ni_status ni_field_write(const ni_field* field, const char* path) {
  return guard([&] {
    need(field, "field");
    need(path, "path");
    write_field(field->field, path);
  });
}

ni_status ni_field_read(const char* path, ni_field** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new ni_field{read_field(path)};
  });
}

ni_status ni_solve_linear(const ni_field* q, const ni_field* g, double tol, int max_iter, int jacobi,
                          ni_field** solution, ni_linear_report* report) {
  return guard([&] {
    need(q, "q");
    need(g, "g");
    need(solution, "solution");
    SolveOptions opts;
    opts.tol = tol;
    opts.max_iter = max_iter;
    opts.jacobi = jacobi != 0;
    SolveReport r = solve_linear(LinearProblem{q->field, g->field}, opts);
    if (report) *report = ni_linear_report{r.cg_iterations, r.final_residual, r.h1_norm, r.h2_norm};
    *solution = new ni_field{std::move(r.solution)};
  });
}

// Nonlinearities -----------------------------------------------------------------

ni_status ni_nonlinearity_parse(const char* spec, ni_nonlinearity** out) {
  return guard([&] {
    need(spec, "spec");
    need(out, "out");
    *out = new ni_nonlinearity{parse_nonlinearity(spec)};
  });
}

void ni_nonlinearity_destroy(ni_nonlinearity* nl) { delete nl; }

const char* ni_nonlinearity_name(const ni_nonlinearity* nl) { return nl ? nl->nl.name.c_str() : ""; }

double ni_nonlinearity_bound(const ni_nonlinearity* nl) { return nl ? nl->nl.bound_M : 0.0; }

ni_status ni_nonlinearity_eval(const ni_nonlinearity* nl, double x, double* f, double* fp, double* fpp) {
  return guard([&] {
    need(nl, "nonlinearity");
    if (f) *f = nl->nl.f(x);
    if (fp) *fp = nl->nl.fp(x);
    if (fpp) *fpp = nl->nl.fpp(x);
  });
}

ni_status ni_nonlinearity_check(const ni_nonlinearity* nl, double lo, double hi, int samples, size_t* violations) {
  return guard([&] {
    need(nl, "nonlinearity");
    need(violations, "violations");
    *violations = check_assumptions(nl->nl, lo, hi, samples).violations.size();
  });
}

ni_status ni_semilinear_residual(const ni_field* u, double t, const ni_nonlinearity* nl, double* out) {
  return guard([&] {
    need(u, "field");
    need(nl, "nonlinearity");
    need(out, "out");
    *out = semilinear_residual(u->field, t, nl->nl);
  });
}

// Continuation ---------------------------------------------------------------------

void ni_newton_config_default(ni_newton_config* cfg) {
  if (cfg == nullptr) return;
  const NewtonConfig d;
  *cfg = ni_newton_config{d.newton_tol, d.max_newton_iters, d.linear_tol, d.linear_max_iter,
                          d.jacobi ? 1 : 0, d.adapt ? 1 : 0, d.max_halvings};
}

ni_status ni_run(const ni_nonlinearity* nl, const ni_grid* grid, const double* times, size_t count,
                 const ni_newton_config* cfg, ni_result** out) {
  return guard([&] {
    need(nl, "nonlinearity");
    need(grid, "grid");
    need(times, "times");
    need(out, "out");
    const Schedule schedule(std::vector<double>(times, times + count));
    *out = new ni_result{run(nl->nl, grid->grid, schedule, to_config(cfg))};
  });
}

ni_status ni_run_auto(const ni_nonlinearity* nl, const ni_grid* grid, const ni_newton_config* cfg, ni_result** out) {
  return guard([&] {
    need(nl, "nonlinearity");
    need(grid, "grid");
    need(out, "out");
    const NewtonConfig c = to_config(cfg);
    const Schedule schedule = auto_schedule(nl->nl, grid->grid, c);
    *out = new ni_result{run(nl->nl, grid->grid, schedule, c)};
  });
}

void ni_result_destroy(ni_result* result) { delete result; }

ni_status ni_result_solution(const ni_result* result, ni_field** out) {
  return guard([&] {
    need(result, "result");
    need(out, "out");
    *out = new ni_field{result->result.solution};
  });
}

size_t ni_result_schedule_size(const ni_result* result) {
  return result ? result->result.schedule.times().size() : 0;
}

const double* ni_result_schedule(const ni_result* result) {
  return result ? result->result.schedule.times().data() : nullptr;
}

size_t ni_result_trace_size(const ni_result* result) { return result ? result->result.trace.rows.size() : 0; }

ni_status ni_result_trace_row(const ni_result* result, size_t i, ni_trace_row* out) {
  return guard([&] {
    need(result, "result");
    need(out, "out");
    require(i < result->result.trace.rows.size(), "trace row index out of range");
    const TraceRow& r = result->result.trace.rows[i];
    *out = ni_trace_row{r.j, r.t, r.m, r.diff_h1, r.diff_h2, r.contraction_ratio, r.a_estimate, r.cg_iters,
                        r.halved ? 1 : 0, r.taylor_residual, r.resolved ? 1 : 0};
  });
}

size_t ni_result_step_count(const ni_result* result) { return result ? result->result.trace.steps.size() : 0; }

ni_status ni_result_step(const ni_result* result, size_t i, ni_step_record* out) {
  return guard([&] {
    need(result, "result");
    need(out, "out");
    require(i < result->result.trace.steps.size(), "step index out of range");
    const StepRecord& s = result->result.trace.steps[i];
    *out = ni_step_record{s.j, s.t, s.dt, s.accepted ? 1 : 0, s.newton_iters, s.residual};
  });
}

int ni_result_halvings(const ni_result* result) { return result ? result->result.trace.halvings() : 0; }

ni_status ni_result_constants(const ni_result* result, ni_constants* out) {
  return guard([&] {
    need(result, "result");
    need(out, "out");
    const Constants c = estimate_constants(result->result.trace);
    *out = ni_constants{c.K_est, c.A_est, c.dt_recommendation};
  });
}

ni_status ni_result_write_trace(const ni_result* result, const char* path) {
  return guard([&] {
    need(result, "result");
    need(path, "path");
    write_trace_csv(result->result.trace, path);
  });
}

// Mesa -------------------------------------------------------------------------------

void ni_mesa_spec_default(ni_mesa_spec* spec) {
  if (spec == nullptr) return;
  const MesaSpec d;
  *spec = ni_mesa_spec{d.a, d.b, d.T, d.alpha, d.n, d.depth};
}

ni_status ni_mesa_value(const ni_mesa_spec* spec, double r, double* out) {
  return guard([&] {
    need(out, "out");
    const MesaSpec s = to_mesa(spec);
    *out = mesa_value(s, build_partition(s), r);
  });
}

ni_status ni_mesa_norms(const ni_mesa_spec* spec, ni_mesa_summary* out, const char* partition_csv,
                        const char* levels_csv) {
  return guard([&] {
    need(out, "out");
    const MesaSpec s = to_mesa(spec);
    const MesaNorms norms = mesa_h1_norm_sq(s, s.depth);
    const std::vector<double> ratios = increment_ratios(norms);
    ni_mesa_summary sum{};
    sum.l2_part = norms.l2_part;
    sum.grad_part = norms.grad_part;
    sum.outer_grad = norms.outer_grad;
    sum.last_ratio = ratios.empty() ? std::numeric_limits<double>::quiet_NaN() : ratios.back();
    sum.max_ratio = ratios.empty() ? std::numeric_limits<double>::quiet_NaN() : ratios.front();
    for (double r : ratios) sum.max_ratio = std::max(sum.max_ratio, r);
    switch (classify(norms)) {
      case MesaVerdict::convergent: sum.verdict = NI_MESA_CONVERGENT; break;
      case MesaVerdict::divergent: sum.verdict = NI_MESA_DIVERGENT; break;
      case MesaVerdict::undecided: sum.verdict = NI_MESA_UNDECIDED; break;
    }
    sum.subcritical = s.subcritical() ? 1 : 0;
    if (partition_csv) write_partition_csv(build_partition(s), partition_csv);
    if (levels_csv) write_levels_csv(norms, levels_csv);
    *out = sum;
  });
}

ni_status ni_mesa_weak_derivative(const ni_mesa_spec* spec, const ni_weak_test_function* test, int resolution,
                                  ni_weak_report* out) {
  return guard([&] {
    need(out, "out");
    const MesaSpec s = to_mesa(spec);
    WeakTestFunction psi;
    if (test) psi = WeakTestFunction{test->amplitude, test->radius, test->power};
    const WeakDerivativeReport r = weak_derivative_check(s, s.depth, psi, resolution);
    *out = ni_weak_report{r.lhs, r.rhs, r.residual, r.boundary_bound, r.quadrature_error, r.inner_radius};
  });
}

ni_status ni_oscillation_probe(const ni_nonlinearity* nl, const ni_mesa_spec* spec, const double* deltas,
                               size_t count, ni_oscillation_row* out, const char* csv) {
  return guard([&] {
    need(nl, "nonlinearity");
    need(deltas, "deltas");
    need(out, "out");
    const MesaSpec s = to_mesa(spec);
    const std::vector<OscillationRow> rows =
        oscillation_probe(nl->nl.f, s, build_partition(s), std::vector<double>(deltas, deltas + count));
    if (csv) write_oscillation_csv(rows, csv);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out[i] = ni_oscillation_row{rows[i].delta, rows[i].max, rows[i].min, rows[i].oscillation, rows[i].level};
    }
  });
}

ni_status ni_bump_probe(const ni_nonlinearity* nl, const ni_grid* grid, const double* y0, double r, const double* xs,
                        size_t count, double p, ni_bump_row* out, const char* csv) {
  return guard([&] {
    need(nl, "nonlinearity");
    need(grid, "grid");
    need(y0, "y0");
    need(xs, "xs");
    need(out, "out");
    Point centre{};
    for (int i = 0; i < grid->grid.dim(); ++i) centre[static_cast<std::size_t>(i)] = y0[i];
    const std::vector<BumpRow> rows =
        bump_sequence_probe(nl->nl.f, grid->grid, centre, r, std::vector<double>(xs, xs + count), p);
    if (csv) write_bump_csv(rows, csv);
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = ni_bump_row{rows[i].x, rows[i].norm, rows[i].lower_bound};
  });
}

}  // extern "C"
