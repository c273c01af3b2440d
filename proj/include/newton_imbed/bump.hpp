#pragma once

#include <string>
#include <vector>

#include "newton_imbed/grid.hpp"
#include "newton_imbed/nonlinearity.hpp"

namespace newton_imbed {

/// C-infinity step: 1 for s <= 0, 0 for s >= 1, built from exp(-1/t).
double smooth_step(double s);

/// Radial cutoff of radius r: 1 on rho <= r/2, 0 on rho >= r, values in [0, 1].
double cutoff(double rho, double r);

/// gamma(|x - y0|) on the nodes of a box grid; B(y0, r) must lie strictly
/// inside the box.
Field cutoff_field(const Grid& grid, const Point& y0, double r);

struct BumpRow {
  double x = 0.0;
  double norm = 0.0;         // ||f(x gamma)||_{L^p}
  double lower_bound = 0.0;  // |f(x)| |B(y0, r/2)|_h^{1/p}, |f(x)| for p = inf
};

/// Norms of f(u_k), u_k = x_k gamma, for each x_k.
std::vector<BumpRow> bump_sequence_probe(const Nonlinearity::Fn& f, const Grid& grid, const Point& y0, double r,
                                         const std::vector<double>& xs, double p);

/// Table x,norm,lower_bound.
void write_bump_csv(const std::vector<BumpRow>& rows, const std::string& path);

}  // namespace newton_imbed
