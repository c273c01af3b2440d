#include "newton_imbed/elliptic.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "newton_imbed/error.hpp"

namespace newton_imbed {

namespace {

using Vec = std::vector<double>;

struct CgOutcome {
  int iterations = 0;
  bool converged = false;
  Vec history;  // relative residual after each iteration (entry 0: initial)
};

// Preconditioned CG in an arbitrary inner product. `apply` must be
// self-adjoint and positive definite in `dot`; `inv_diag` may be empty.
template <class Apply, class Dot>
CgOutcome conjugate_gradient(const Apply& apply, const Dot& dot, const Vec& inv_diag, const Vec& b,
                             Vec& x, double threshold, double scale, int max_iter) {
  const std::size_t n = b.size();
  CgOutcome out;
  Vec r(n), z(n), p(n), ap(n);

  auto residual = [&] {
    apply(x, ap);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  };
  auto precondition = [&] {
    if (inv_diag.empty()) {
      z = r;
    } else {
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    }
  };

  residual();
  double rnorm = std::sqrt(dot(r, r));
  out.history.push_back(rnorm / scale);
  if (rnorm <= threshold) {
    out.converged = true;
    return out;
  }
  precondition();
  p = z;
  double rz = dot(r, z);

  for (int it = 1; it <= max_iter; ++it) {
    apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    out.iterations = it;
    rnorm = std::sqrt(dot(r, r));
    out.history.push_back(rnorm / scale);

    if (rnorm <= threshold) {
      // Confirm against the true residual; the recurrence drifts.
      residual();
      rnorm = std::sqrt(dot(r, r));
      out.history.back() = rnorm / scale;
      if (rnorm <= threshold) {
        out.converged = true;
        return out;
      }
      precondition();
      p = z;
      rz = dot(r, z);
      continue;
    }

    precondition();
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return out;
}

void check_inputs(const LinearProblem& p) {
  require_same_grid(p.q, p.g);
  require(p.q.all_finite() && p.g.all_finite(), "linear problem has non-finite coefficients");
  for (std::size_t i = 0; i < p.q.size(); ++i) {
    if (p.q[i] < 0.0) {
      std::ostringstream msg;
      msg << "zeroth-order coefficient q = " << p.q[i] << " < 0 at node " << i;
      fail(ErrorCode::negative_coefficient, msg.str());
    }
  }
}

[[noreturn]] void throw_non_convergence(const CgOutcome& cg, int max_iter) {
  std::ostringstream msg;
  msg << "conjugate gradients did not converge in " << max_iter
      << " iterations (relative residual " << cg.history.back() << ")";
  throw NonConvergence(msg.str(), cg.history);
}

// Box grids: the plain Euclidean inner product already makes A symmetric.
int solve_box(const LinearProblem& p, const SolveOptions& opt, double g_norm, Field& u) {
  const Grid& grid = u.grid();
  const double w = grid.weight(0);
  const std::size_t n = u.size();

  auto apply = [&](const Vec& x, Vec& y) {
    const Field xf(grid, x);
    const Field yf = operator_apply(p.q, xf);
    y.assign(yf.values().begin(), yf.values().end());
  };
  auto dot = [w](const Vec& a, const Vec& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc * w;
  };

  Vec inv_diag;
  if (opt.jacobi) {
    const double h2 = grid.spacing() * grid.spacing();
    inv_diag.resize(n);
    for (std::size_t i = 0; i < n; ++i) inv_diag[i] = 1.0 / (2.0 * grid.dim() / h2 + p.q[i]);
  }

  Vec b(p.g.values().begin(), p.g.values().end());
  Vec x(u.values().begin(), u.values().end());
  const CgOutcome cg = conjugate_gradient(apply, dot, inv_diag, b, x, opt.tol * g_norm, g_norm, opt.max_iter);
  if (!cg.converged) throw_non_convergence(cg, opt.max_iter);
  std::copy(x.begin(), x.end(), u.values().begin());
  return cg.iterations;
}

// Radial grids: unknowns 1 .. m-1 after eliminating the origin through its
// own row, u_0 = alpha u_1 + beta. The remaining tridiagonal operator is
// self-adjoint in the weights r_i^{n-1}.
int solve_radial(const LinearProblem& p, const SolveOptions& opt, double g_norm, Field& u) {
  const Grid& grid = u.grid();
  const int dim = grid.dim();
  const double h2 = grid.spacing() * grid.spacing();
  const std::size_t m = u.size();
  const std::size_t k = m - 1;

  const double denom0 = 2.0 * dim + p.q[0] * h2;
  const double alpha0 = 2.0 * dim / denom0;
  const double beta0 = p.g[0] * h2 / denom0;
  const double lower1 = 1.0 - (dim - 1) / 2.0;  // coefficient of u_0 in row 1

  std::vector<double> plus(m), minus(m);
  for (std::size_t i = 1; i < m; ++i) {
    const double c = (dim - 1) / (2.0 * static_cast<double>(i));
    plus[i] = 1.0 + c;
    minus[i] = 1.0 - c;
  }

  // Reduced vector index j corresponds to node j + 1.
  auto apply = [&](const Vec& x, Vec& y) {
    y.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t i = j + 1;
      const double right = j + 1 < k ? x[j + 1] : 0.0;
      const double left = j > 0 ? minus[i] * x[j - 1] : lower1 * alpha0 * x[j];
      y[j] = -(plus[i] * right - 2.0 * x[j] + left) / h2 + p.q[i] * x[j];
    }
  };
  Vec weights(k);
  for (std::size_t j = 0; j < k; ++j) weights[j] = grid.weight(j + 1);
  auto dot = [&weights](const Vec& a, const Vec& b) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) acc += weights[j] * a[j] * b[j];
    return acc;
  };

  Vec inv_diag;
  if (opt.jacobi) {
    inv_diag.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      double diag = 2.0 / h2 + p.q[j + 1];
      if (j == 0) diag -= lower1 * alpha0 / h2;
      inv_diag[j] = 1.0 / diag;
    }
  }

  Vec b(k);
  for (std::size_t j = 0; j < k; ++j) b[j] = p.g[j + 1];
  b[0] += lower1 * beta0 / h2;
  Vec x(u.values().begin() + 1, u.values().end());

  const CgOutcome cg = conjugate_gradient(apply, dot, inv_diag, b, x, opt.tol * g_norm, g_norm, opt.max_iter);
  if (!cg.converged) throw_non_convergence(cg, opt.max_iter);
  std::copy(x.begin(), x.end(), u.values().begin() + 1);
  u[0] = alpha0 * u[1] + beta0;
  return cg.iterations;
}

}  // namespace

Field operator_apply(const Field& q, const Field& u) {
  require_same_grid(q, u);
  Field out = laplacian(u);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -out[i] + q[i] * u[i];
  return out;
}

SolveReport solve_linear(const LinearProblem& problem, const SolveOptions& options,
                         const std::optional<Field>& initial_guess) {
  require(options.tol > 0.0, "solve tolerance must be positive");
  require(options.max_iter >= 1, "max_iter must be at least 1");
  check_inputs(problem);
  const Grid& grid = problem.g.grid();

  SolveReport report{Field(grid)};
  report.g_l2_norm = norm_lp(problem.g, 2.0);
  if (problem.g.is_zero()) return report;

  Field u(grid);
  if (initial_guess) {
    require(initial_guess->grid() == grid, "initial guess lives on a different grid");
    u = *initial_guess;
  }
  report.cg_iterations = grid.radial() ? solve_radial(problem, options, report.g_l2_norm, u)
                                       : solve_box(problem, options, report.g_l2_norm, u);
  if (!u.all_finite()) fail(ErrorCode::non_convergence, "linear solve produced non-finite values");

  const Field r = problem.g - operator_apply(problem.q, u);
  report.final_residual = norm_lp(r, 2.0) / report.g_l2_norm;
  report.h1_norm = norm_h1(u);
  report.h2_norm = norm_h2(u);
  report.solution = std::move(u);
  return report;
}

}  // namespace newton_imbed
