#ifndef NEWTON_IMBED_H
#define NEWTON_IMBED_H

#include <stddef.h>

#if defined(_WIN32)
#define NI_API __declspec(dllexport)
#else
#define NI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as the command-line exit codes. */
typedef enum ni_status {
  NI_OK = 0,
  NI_INTERNAL_ERROR = 1,
  NI_INVALID_ARGUMENT = 2,
  NI_NON_CONVERGENCE = 3,
  NI_NEGATIVE_COEFFICIENT = 4,
  NI_CONTRACTION_FAILURE = 5,
  NI_NEWTON_NON_CONVERGENCE = 6,
  NI_STEP_COLLAPSE = 7,
  NI_INSUFFICIENT_DATA = 8,
  NI_DELTA_TOO_SMALL = 9,
  NI_IO_ERROR = 10
} ni_status;

NI_API const char* ni_version(void);
NI_API const char* ni_status_name(ni_status status);
/* Message of the last failed call on this thread; "" when none. */
NI_API const char* ni_last_error(void);

typedef struct ni_grid ni_grid;
typedef struct ni_field ni_field;
typedef struct ni_nonlinearity ni_nonlinearity;
typedef struct ni_result ni_result;

/* Grids ------------------------------------------------------------------- */

NI_API ni_status ni_grid_create_box(int n, double side, int res, ni_grid** out);
NI_API ni_status ni_grid_create_ball(int n, double radius, int res, ni_grid** out);
NI_API void ni_grid_destroy(ni_grid* grid);
NI_API size_t ni_grid_size(const ni_grid* grid);
NI_API double ni_grid_spacing(const ni_grid* grid);
NI_API int ni_grid_is_radial(const ni_grid* grid);
/* Box: coordinates of node i (n entries). Ball: radius in coords[0]. */
NI_API ni_status ni_grid_node(const ni_grid* grid, size_t i, double coords[3]);

/* Fields ------------------------------------------------------------------ */

/* values may be NULL for the zero field. */
NI_API ni_status ni_field_create(const ni_grid* grid, const double* values, size_t count, ni_field** out);
NI_API void ni_field_destroy(ni_field* field);
NI_API size_t ni_field_size(const ni_field* field);
NI_API const double* ni_field_data(const ni_field* field);
/* p >= 1, or HUGE_VAL for the max norm. */
NI_API ni_status ni_field_norm_lp(const ni_field* field, double p, double* out);
NI_API ni_status ni_field_norm_h1(const ni_field* field, double* out);
NI_API ni_status ni_field_norm_h2(const ni_field* field, double* out);
NI_API ni_status ni_field_h1_distance(const ni_field* a, const ni_field* b, double* out);
NI_API ni_status ni_field_write(const ni_field* field, const char* path);
NI_API ni_status ni_field_read(const char* path, ni_field** out);

/* Linear solves: -Δ_h u + q u = g. */
typedef struct ni_linear_report {
  int cg_iterations;
  double final_residual;
  double h1_norm;
  double h2_norm;
} ni_linear_report;

NI_API ni_status ni_solve_linear(const ni_field* q, const ni_field* g, double tol, int max_iter, int jacobi,
                                 ni_field** solution, ni_linear_report* report);

/* Nonlinearities ---------------------------------------------------------- */

/* "arccot:A,h,eps,k", "heaviside-approx:eps", "const:c[,slope]", "linear:s,o". */
NI_API ni_status ni_nonlinearity_parse(const char* spec, ni_nonlinearity** out);
NI_API void ni_nonlinearity_destroy(ni_nonlinearity* nl);
NI_API const char* ni_nonlinearity_name(const ni_nonlinearity* nl);
NI_API double ni_nonlinearity_bound(const ni_nonlinearity* nl);
/* Any of f, fp, fpp may be NULL. */
NI_API ni_status ni_nonlinearity_eval(const ni_nonlinearity* nl, double x, double* f, double* fp, double* fpp);
/* Number of violated assumptions in samples of [lo, hi]. */
NI_API ni_status ni_nonlinearity_check(const ni_nonlinearity* nl, double lo, double hi, int samples,
                                       size_t* violations);
NI_API ni_status ni_semilinear_residual(const ni_field* u, double t, const ni_nonlinearity* nl, double* out);

/* Continuation ------------------------------------------------------------ */

typedef struct ni_newton_config {
  double newton_tol;
  int max_newton_iters;
  double linear_tol;
  int linear_max_iter;
  int jacobi;
  int adapt;
  int max_halvings;
} ni_newton_config;

NI_API void ni_newton_config_default(ni_newton_config* cfg);

typedef struct ni_trace_row {
  size_t j;
  double t;
  int m;
  double diff_h1;
  double diff_h2;
  double contraction_ratio;
  double a_estimate;
  int cg_iters;
  int halved;
  double taylor_residual;
  int resolved; /* 0: increment at the rounding floor, not used for K */
} ni_trace_row;

typedef struct ni_step_record {
  size_t j;
  double t;
  double dt;
  int accepted;
  int newton_iters;
  double residual;
} ni_step_record;

typedef struct ni_constants {
  double K_est;
  double A_est;
  double dt_recommendation;
} ni_constants;

/* times: 0 = t_0 < ... < t_J = 1. cfg may be NULL for the defaults. */
NI_API ni_status ni_run(const ni_nonlinearity* nl, const ni_grid* grid, const double* times, size_t count,
                        const ni_newton_config* cfg, ni_result** out);
/* Pilot-based schedule, then ni_run. */
NI_API ni_status ni_run_auto(const ni_nonlinearity* nl, const ni_grid* grid, const ni_newton_config* cfg,
                             ni_result** out);
NI_API void ni_result_destroy(ni_result* result);
NI_API ni_status ni_result_solution(const ni_result* result, ni_field** out);
NI_API size_t ni_result_schedule_size(const ni_result* result);
NI_API const double* ni_result_schedule(const ni_result* result);
NI_API size_t ni_result_trace_size(const ni_result* result);
NI_API ni_status ni_result_trace_row(const ni_result* result, size_t i, ni_trace_row* out);
NI_API size_t ni_result_step_count(const ni_result* result);
NI_API ni_status ni_result_step(const ni_result* result, size_t i, ni_step_record* out);
NI_API int ni_result_halvings(const ni_result* result);
NI_API ni_status ni_result_constants(const ni_result* result, ni_constants* out);
NI_API ni_status ni_result_write_trace(const ni_result* result, const char* path);

/* Mesa functions ---------------------------------------------------------- */

typedef struct ni_mesa_spec {
  double a;
  double b;
  double T;
  double alpha;
  int n;
  int depth;
} ni_mesa_spec;

typedef enum ni_mesa_verdict { NI_MESA_CONVERGENT = 0, NI_MESA_DIVERGENT = 1, NI_MESA_UNDECIDED = 2 } ni_mesa_verdict;

typedef struct ni_mesa_summary {
  double l2_part;
  double grad_part;
  double outer_grad;
  double last_ratio;  /* grad of level N over level N-1, NaN for depth 1 */
  double max_ratio;
  ni_mesa_verdict verdict;
  int subcritical;
} ni_mesa_summary;

typedef struct ni_weak_test_function {
  double amplitude;
  double radius; /* 0 means T */
  int power;
} ni_weak_test_function;

typedef struct ni_weak_report {
  double lhs;
  double rhs;
  double residual;
  double boundary_bound;
  double quadrature_error;
  double inner_radius;
} ni_weak_report;

typedef struct ni_oscillation_row {
  double delta;
  double max;
  double min;
  double oscillation;
  int level;
} ni_oscillation_row;

typedef struct ni_bump_row {
  double x;
  double norm;
  double lower_bound;
} ni_bump_row;

NI_API void ni_mesa_spec_default(ni_mesa_spec* spec);
NI_API ni_status ni_mesa_value(const ni_mesa_spec* spec, double r, double* out);
/* Optional CSV paths may be NULL. */
NI_API ni_status ni_mesa_norms(const ni_mesa_spec* spec, ni_mesa_summary* out, const char* partition_csv,
                               const char* levels_csv);
/* test may be NULL for amplitude 1, radius T, power 4. */
NI_API ni_status ni_mesa_weak_derivative(const ni_mesa_spec* spec, const ni_weak_test_function* test, int resolution,
                                         ni_weak_report* out);
/* out holds count rows. */
NI_API ni_status ni_oscillation_probe(const ni_nonlinearity* nl, const ni_mesa_spec* spec, const double* deltas,
                                      size_t count, ni_oscillation_row* out, const char* csv);
/* grid must be a box; y0 has n entries. p may be HUGE_VAL. out holds count rows. */
NI_API ni_status ni_bump_probe(const ni_nonlinearity* nl, const ni_grid* grid, const double* y0, double r,
                               const double* xs, size_t count, double p, ni_bump_row* out, const char* csv);

#ifdef __cplusplus
}
#endif

#endif
