#pragma once

#include <string>
#include <vector>

#include "newton_imbed/extended.hpp"

namespace newton_imbed {

/// Radially symmetric step function on B(c, T) that alternates between the
/// plateau values a and b on annuli shrinking towards c, joined by r^-alpha
/// ramps. Only `depth` levels are materialized; U is frozen at a inside the
/// last one.
struct MesaSpec {
  double a = 0.0;
  double b = 1.0;
  double T = 1.0;
  double alpha = 0.2;
  std::vector<double> c;  // center, empty means the origin; otherwise n entries
  int n = 3;
  int depth = 8;

  /// alpha < (n - 2) / 2, the regime in which the r^-alpha majorant is in H1.
  bool subcritical() const noexcept { return alpha < 0.5 * (n - 2); }
};

/// Throws InvalidArgument unless a <= b, T > 0, 0 < alpha < n - 1, n >= 3,
/// depth >= 1 and c has 0 or n entries. a = b is accepted (no ramps).
void validate(const MesaSpec& spec);

/// Radii per level m = 1..N (index m - 1), plus core = r_{N+1}^+.
template <class Real>
struct BasicPartition {
  std::vector<Real> r_plus;
  std::vector<Real> s_plus;
  std::vector<Real> s_minus;
  std::vector<Real> r_minus;
  Real core = 0;

  int depth() const noexcept { return static_cast<int>(r_plus.size()); }
};

using MesaPartition = BasicPartition<double>;

/// r_1^+ = T/2, s^+ = (b - a + (r^+)^-alpha)^(-1/alpha), s^- = s^+/2,
/// r^- = (b - a + (s^-)^-alpha)^(-1/alpha), next r^+ = r^-/2.
template <class Real>
BasicPartition<Real> build_partition_as(const MesaSpec& spec);

MesaPartition build_partition(const MesaSpec& spec);
BasicPartition<Extended> build_partition_extended(const MesaSpec& spec);

/// U(r), with the common limit at junctions.
double mesa_value(const MesaSpec& spec, const MesaPartition& part, double r);
/// dU/dr; at a junction the piece on the inner side wins.
double mesa_radial_derivative(const MesaSpec& spec, const MesaPartition& part, double r);
/// DU at x (n coordinates). Zero at the center.
std::vector<double> mesa_gradient(const MesaSpec& spec, const MesaPartition& part, const std::vector<double>& x);

/// One annulus on which U is given by a single formula.
struct MesaPiece {
  enum class Kind { outer_ramp, down_ramp, plateau_b, up_ramp, plateau_a, core };
  Kind kind;
  int level;  // 0 for outer_ramp and core
  double lo;
  double hi;
};

const char* to_string(MesaPiece::Kind kind) noexcept;

/// Pieces of [0, T] from the outside in.
std::vector<MesaPiece> mesa_pieces(const MesaSpec& spec, const MesaPartition& part);

/// Closed-form ∫ |DU|^2 dx and ∫ U^2 dx over the annulus of one piece.
double piece_gradient_energy(const MesaSpec& spec, const MesaPiece& piece);
double piece_l2(const MesaSpec& spec, const MesaPiece& piece);

struct MesaLevel {
  int m = 0;
  double grad = 0.0;  // both ramps of level m
  double l2 = 0.0;    // all four annuli of level m
};

struct MesaNorms {
  double l2_part = 0.0;
  double grad_part = 0.0;
  double outer_grad = 0.0;
  double outer_l2 = 0.0;
  double core_l2 = 0.0;
  std::vector<MesaLevel> levels;
  std::vector<double> grad_partial_sums;  // outer ramp plus levels 1..m
};

/// ||U||_{L2}^2 and ||DU||_{L2}^2 of the depth-N mesa, per level.
MesaNorms mesa_h1_norm_sq(const MesaSpec& spec, int depth);

/// levels[m].grad / levels[m-1].grad for m = 1 .. N-1.
std::vector<double> increment_ratios(const MesaNorms& norms);

enum class MesaVerdict { convergent, divergent, undecided };
const char* to_string(MesaVerdict verdict) noexcept;

/// Reads the tail of the increment ratios: convergent when the last ratio is
/// below 1, divergent when it is above 1. Needs depth >= 2.
MesaVerdict classify(const MesaNorms& norms);

/// psi(x) = amplitude (x - c)_1 (1 - |x - c|^2 / radius^2)^power on B(c, radius).
struct WeakTestFunction {
  double amplitude = 1.0;
  double radius = 0.0;  // 0 means T
  int power = 4;
};

struct WeakDerivativeReport {
  double lhs = 0.0;               // ∫ U psi_{x_1} over r > r_{N+1}^+
  double rhs = 0.0;               // -∫ U_{x_1} psi over the same set
  double residual = 0.0;          // |lhs - rhs|
  double boundary_bound = 0.0;    // M (r_{N+1}^+)^{n-1}, M = sup|U| sup|psi| omega_{n-1}
  double quadrature_error = 0.0;  // change when the resolution is doubled
  double inner_radius = 0.0;      // r_{N+1}^+
};

/// Integration by parts of U against psi on B(c, T) minus B(c, r_{N+1}^+),
/// reduced to radial integrals and evaluated in 50-digit arithmetic with
/// 30-point Gauss-Legendre panels, `resolution` panels per halving of r.
WeakDerivativeReport weak_derivative_check(const MesaSpec& spec, int depth, const WeakTestFunction& psi,
                                           int resolution = 1);

struct OscillationRow {
  double delta = 0.0;
  double max = 0.0;
  double min = 0.0;
  double oscillation = 0.0;
  int level = 0;  // deepest level whose plateaus were sampled
};

/// max and min of f(U) over the plateaus inside B(c, delta). DeltaTooSmall
/// when B(c, delta) does not reach the b plateau of level N.
template <class F>
std::vector<OscillationRow> oscillation_probe(const F& f, const MesaSpec& spec, const MesaPartition& part,
                                              const std::vector<double>& deltas);

/// Plateau sample radii inside B(c, delta), from the outside in; used by
/// oscillation_probe.
std::vector<std::pair<int, double>> plateau_samples(const MesaSpec& spec, const MesaPartition& part, double delta);

/// Tables: m,r_plus,s_plus,s_minus,r_minus and m,grad,l2,grad_partial_sum,ratio.
void write_partition_csv(const MesaPartition& part, const std::string& path);
void write_levels_csv(const MesaNorms& norms, const std::string& path);
void write_oscillation_csv(const std::vector<OscillationRow>& rows, const std::string& path);

template <class F>
std::vector<OscillationRow> oscillation_probe(const F& f, const MesaSpec& spec, const MesaPartition& part,
                                              const std::vector<double>& deltas) {
  std::vector<OscillationRow> out;
  out.reserve(deltas.size());
  for (double delta : deltas) {
    OscillationRow row;
    row.delta = delta;
    bool first = true;
    for (const auto& [level, r] : plateau_samples(spec, part, delta)) {
      const double v = f(mesa_value(spec, part, r));
      row.max = first ? v : std::max(row.max, v);
      row.min = first ? v : std::min(row.min, v);
      row.level = level;
      first = false;
    }
    row.oscillation = row.max - row.min;
    out.push_back(row);
  }
  return out;
}

}  // namespace newton_imbed
