#pragma once

// Direct solver for -Δ_h u = f(u) on the radial ball grid: damped Newton on the
// full system, each step a tridiagonal (Thomas) solve in long double. Shares
// nothing with the library except the stencil it is meant to reproduce.

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

struct RadialSolution {
  std::vector<double> u;
  int iterations = 0;
  double residual_max = 0.0;
};

inline std::vector<long double> thomas(std::vector<long double> lower, std::vector<long double> diag,
                                       std::vector<long double> upper, std::vector<long double> rhs) {
  const std::size_t m = diag.size();
  for (std::size_t i = 1; i < m; ++i) {
    const long double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<long double> x(m);
  x[m - 1] = rhs[m - 1] / diag[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
  return x;
}

// Nodes r_i = i h, h = R / res, u(R) = 0; origin row uses Δu(0) = 2n (u_1 - u_0) / h^2.
inline RadialSolution damped_newton_radial(const std::function<double(double)>& f,
                                           const std::function<double(double)>& fp, int n, double R, int res,
                                           double tol = 1e-13, int max_iter = 100) {
  const std::size_t m = static_cast<std::size_t>(res);
  const long double h = static_cast<long double>(R) / res;
  const long double h2 = h * h;
  std::vector<long double> u(m, 0.0L);

  auto residual = [&](const std::vector<long double>& v) {
    std::vector<long double> F(m);
    auto at = [&](std::size_t i) { return i < m ? v[i] : 0.0L; };
    F[0] = -2.0L * n * (at(1) - v[0]) / h2 - f(static_cast<double>(v[0]));
    for (std::size_t i = 1; i < m; ++i) {
      const long double c = (n - 1) / (2.0L * i);
      F[i] = -((1 + c) * at(i + 1) - 2 * v[i] + (1 - c) * v[i - 1]) / h2 - f(static_cast<double>(v[i]));
    }
    return F;
  };
  auto max_abs = [](const std::vector<long double>& v) {
    long double a = 0;
    for (long double x : v) a = std::max(a, std::fabs(x));
    return a;
  };

  RadialSolution out;
  std::vector<long double> F = residual(u);
  long double fnorm = max_abs(F);
  for (int it = 0; it < max_iter && fnorm > tol; ++it) {
    std::vector<long double> lo(m, 0), di(m), up(m, 0), rhs(m);
    di[0] = 2.0L * n / h2 - fp(static_cast<double>(u[0]));
    if (m > 1) up[0] = -2.0L * n / h2;
    for (std::size_t i = 1; i < m; ++i) {
      const long double c = (n - 1) / (2.0L * i);
      lo[i] = -(1 - c) / h2;
      di[i] = 2 / h2 - fp(static_cast<double>(u[i]));
      if (i + 1 < m) up[i] = -(1 + c) / h2;
    }
    for (std::size_t i = 0; i < m; ++i) rhs[i] = -F[i];
    const std::vector<long double> step = thomas(lo, di, up, rhs);

    long double lambda = 1;
    for (;;) {
      std::vector<long double> trial = u;
      for (std::size_t i = 0; i < m; ++i) trial[i] += lambda * step[i];
      std::vector<long double> Ft = residual(trial);
      const long double tn = max_abs(Ft);
      if (tn < fnorm || lambda < 1e-6L) {
        u = std::move(trial);
        F = std::move(Ft);
        fnorm = tn;
        break;
      }
      lambda /= 2;
    }
    out.iterations = it + 1;
  }
  if (!(fnorm <= tol)) throw std::runtime_error("damped Newton oracle did not converge");
  out.u.assign(u.begin(), u.end());
  out.residual_max = static_cast<double>(fnorm);
  return out;
}

}  // namespace oracle
