#include "newton_imbed/bump.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>

#include "newton_imbed/error.hpp"

namespace newton_imbed {

namespace {

double psi(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

double distance(const Grid& grid, const Point& x, const Point& y0) {
  double d2 = 0.0;
  for (int i = 0; i < grid.dim(); ++i) {
    const double d = x[static_cast<std::size_t>(i)] - y0[static_cast<std::size_t>(i)];
    d2 += d * d;
  }
  return std::sqrt(d2);
}

}  // namespace

double smooth_step(double s) {
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  const double left = psi(1.0 - s);
  return left / (left + psi(s));
}

double cutoff(double rho, double r) { return smooth_step((rho - 0.5 * r) / (0.5 * r)); }

Field cutoff_field(const Grid& grid, const Point& y0, double r) {
  require(!grid.radial(), "bump sequence needs a box grid");
  require(r > 0.0 && std::isfinite(r), "cutoff radius must be positive");
  const double L = grid.domain().extent;
  for (int i = 0; i < grid.dim(); ++i) {
    const double c = y0[static_cast<std::size_t>(i)];
    require(c - r > 0.0 && c + r < L, "B(y0, r) must lie strictly inside the box");
  }
  return Field::sample(grid, [&](const Point& x) { return cutoff(distance(grid, x, y0), r); });
}

std::vector<BumpRow> bump_sequence_probe(const Nonlinearity::Fn& f, const Grid& grid, const Point& y0, double r,
                                         const std::vector<double>& xs, double p) {
  require(p >= 1.0, "L^p exponent must be at least 1");
  const Field gamma = cutoff_field(grid, y0, r);

  double inner_measure = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (distance(grid, grid.node(i), y0) <= 0.5 * r) inner_measure += grid.weight(i);
  }

  std::vector<BumpRow> out;
  for (double x : xs) {
    require(std::isfinite(x), "bump amplitudes must be finite");
    BumpRow row;
    row.x = x;
    row.norm = norm_lp(compose(f, x * gamma), p);
    const double fx = std::abs(f(x));
    row.lower_bound = std::isinf(p) ? fx : fx * std::pow(inner_measure, 1.0 / p);
    out.push_back(row);
  }
  return out;
}

void write_bump_csv(const std::vector<BumpRow>& rows, const std::string& path) {
  std::unique_ptr<std::FILE, int (*)(std::FILE*)> out(std::fopen(path.c_str(), "w"), &std::fclose);
  if (!out) fail(ErrorCode::io_error, "cannot open '" + path + "' for writing");
  std::fputs("x,norm,lower_bound\n", out.get());
  for (const BumpRow& r : rows) std::fprintf(out.get(), "%.17g,%.17g,%.17g\n", r.x, r.norm, r.lower_bound);
  if (std::ferror(out.get())) fail(ErrorCode::io_error, "write to '" + path + "' failed");
}

}  // namespace newton_imbed
