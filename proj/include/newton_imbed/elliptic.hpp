#pragma once

#include <optional>

#include "newton_imbed/grid.hpp"

namespace newton_imbed {

/// -Δu + q u = g with u = 0 on the boundary.
struct LinearProblem {
  Field q;
  Field g;
};

struct SolveOptions {
  double tol = 1e-12;     // relative residual in discrete L2
  int max_iter = 20000;
  bool jacobi = false;    // diagonal preconditioner
};

struct SolveReport {
  Field solution;
  int cg_iterations = 0;
  double final_residual = 0.0;
  double h1_norm = 0.0;
  double h2_norm = 0.0;
  double g_l2_norm = 0.0;
};

/// -Δ_h u + q u on the interior nodes.
Field operator_apply(const Field& q, const Field& u);

/// Matrix-free conjugate gradients on the symmetric positive definite
/// operator -Δ_h + diag(q). Radial grids are solved in the quadrature-weighted
/// inner product, which makes the radial stencil self-adjoint; the origin
/// unknown is eliminated first and recovered from its row afterwards.
///
/// Throws NegativeCoefficient (ErrorCode::negative_coefficient) if q < 0 at
/// some node and NonConvergence if max_iter is reached.
SolveReport solve_linear(const LinearProblem& problem, const SolveOptions& options,
                         const std::optional<Field>& initial_guess = std::nullopt);

}  // namespace newton_imbed
