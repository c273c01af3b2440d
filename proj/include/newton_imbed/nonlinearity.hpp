#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "newton_imbed/extended.hpp"
#include "newton_imbed/grid.hpp"

namespace newton_imbed {

/// A C^2 scalar nonlinearity with its first two derivatives and a claimed
/// uniform bound M on |f|, |f'| and |f''|.
struct Nonlinearity {
  using Fn = std::function<double(double)>;
  using ExtendedFn = std::function<Extended(const Extended&)>;

  std::string name;
  Fn f;
  Fn fp;
  Fn fpp;
  double bound_M = 0.0;
  // Optional extended-precision f and f' for diagnostics that difference
  // nearby values of f. Without them the double versions are promoted.
  ExtendedFn f_ext;
  ExtendedFn fp_ext;

  Extended f_extended(const Extended& x) const;
  Extended fp_extended(const Extended& x) const;
};

/// arccot on the branch with range (0, pi), continuous at 0.
double arccot(double y);
Extended arccot(const Extended& y);

/// A arccot((x - h) / eps) + k, A > 0, eps > 0.
Nonlinearity make_arccot(double A, double h, double eps, double k);
/// arccot(x / eps) / pi - 1.
Nonlinearity make_heaviside_approx(double eps);
/// f = c, f' = -slope. slope = 0 gives the plain constant.
Nonlinearity make_constant(double c, double slope = 0.0);
/// f = slope x + offset. Unbounded unless slope = 0; bound_M is +inf.
Nonlinearity make_linear(double slope, double offset);

/// Parses `arccot:A,h,eps,k`, `heaviside-approx:eps`, `const:c[,slope]` and
/// `linear:slope,offset`.
Nonlinearity parse_nonlinearity(std::string_view spec);

/// Pointwise compositions f(u), f'(u), f''(u).
Field compose(const Nonlinearity::Fn& fn, const Field& u);

struct AssumptionViolation {
  enum class Kind { bound_f, bound_fp, bound_fpp, sign_fp, derivative_fp, derivative_fpp, non_finite };
  Kind kind;
  double x;
  double value;
  double limit;
};

const char* to_string(AssumptionViolation::Kind kind) noexcept;

struct AssumptionReport {
  std::vector<AssumptionViolation> violations;
  int samples_checked = 0;

  bool ok() const noexcept { return violations.empty(); }
  std::size_t count(AssumptionViolation::Kind kind) const;
};

/// Samples [lo, hi] uniformly (plus the endpoints and 0 when inside) and
/// checks the bounds |f|, |f'|, |f''| <= M, the sign f' < 0, and central
/// differences of f and f' (step 1e-5) against f' and f''. Never throws on
/// violations; they are collected in the report.
AssumptionReport check_assumptions(const Nonlinearity& nl, double lo, double hi, int samples);

}  // namespace newton_imbed
