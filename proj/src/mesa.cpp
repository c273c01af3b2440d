#include "newton_imbed/mesa.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <sstream>

#include "newton_imbed/error.hpp"
#include "newton_imbed/grid.hpp"

namespace newton_imbed {

namespace {

using boost::multiprecision::exp;
using boost::multiprecision::expm1;
using boost::multiprecision::log;
using boost::multiprecision::pow;
using std::exp;
using std::expm1;
using std::log;
using std::pow;

double radius_of(const MesaSpec& spec, const std::vector<double>& x) {
  double r2 = 0.0;
  for (int i = 0; i < spec.n; ++i) {
    const double d = x[static_cast<std::size_t>(i)] - (spec.c.empty() ? 0.0 : spec.c[static_cast<std::size_t>(i)]);
    r2 += d * d;
  }
  return std::sqrt(r2);
}

// (r^k - s^k) / k for 0 < s <= r, the log when k = 0.
template <class Real>
Real power_difference(const Real& r, const Real& s, const Real& k) {
  const Real ratio = log(s / r);
  if (k == 0) return Real(-ratio);
  return Real(-pow(r, k) * expm1(k * ratio) / k);
}

// Which formula applies at radius r. Intervals are (lo, hi] so that a
// junction belongs to the inner piece.
template <class Real>
MesaPiece::Kind locate(const BasicPartition<Real>& p, const Real& r, int& level) {
  using K = MesaPiece::Kind;
  level = 0;
  if (r > p.r_plus[0]) return K::outer_ramp;
  for (int m = 0; m < p.depth(); ++m) {
    level = m + 1;
    const auto i = static_cast<std::size_t>(m);
    if (r > p.s_plus[i]) return K::down_ramp;
    if (r > p.s_minus[i]) return K::plateau_b;
    if (r > p.r_minus[i]) return K::up_ramp;
    const Real next = m + 1 < p.depth() ? p.r_plus[i + 1] : p.core;
    if (r > next) return K::plateau_a;
  }
  level = 0;
  return K::core;
}

template <class Real>
Real value_on(const MesaSpec& spec, const BasicPartition<Real>& p, MesaPiece::Kind kind, int level, const Real& r) {
  using K = MesaPiece::Kind;
  const Real a(spec.a), b(spec.b), T(spec.T), alpha(spec.alpha);
  const auto i = static_cast<std::size_t>(std::max(level - 1, 0));
  switch (kind) {
    case K::outer_ramp: return Real(2 * a * (1 - r / T));
    case K::down_ramp: return Real(pow(r, -alpha) - pow(p.r_plus[i], -alpha) + a);
    case K::plateau_b: return b;
    case K::up_ramp: return Real(b - (pow(r, -alpha) - pow(p.s_minus[i], -alpha)));
    case K::plateau_a:
    case K::core: return a;
  }
  return a;
}

template <class Real>
Real derivative_on(const MesaSpec& spec, MesaPiece::Kind kind, const Real& r) {
  using K = MesaPiece::Kind;
  const Real alpha(spec.alpha);
  switch (kind) {
    case K::outer_ramp: return Real(-2 * Real(spec.a) / Real(spec.T));
    case K::down_ramp: return Real(-alpha * pow(r, -alpha - 1));
    case K::up_ramp: return Real(alpha * pow(r, -alpha - 1));
    default: return Real(0);
  }
}

template <class Real>
Real value_at(const MesaSpec& spec, const BasicPartition<Real>& p, const Real& r) {
  if (r >= Real(spec.T)) return Real(0);
  int level = 0;
  const MesaPiece::Kind kind = locate(p, r, level);
  return value_on(spec, p, kind, level, r);
}

std::string level_file_error(const std::string& path) { return "cannot open '" + path + "' for writing"; }

using FilePtr = std::unique_ptr<std::FILE, int (*)(std::FILE*)>;

FilePtr open_out(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "w"), &std::fclose);
  if (!f) fail(ErrorCode::io_error, level_file_error(path));
  return f;
}

void finish(const FilePtr& f, const std::string& path) {
  if (std::ferror(f.get())) fail(ErrorCode::io_error, "write to '" + path + "' failed");
}

}  // namespace

void validate(const MesaSpec& spec) {
  require(spec.n >= 3, "mesa functions need n >= 3");
  require(std::isfinite(spec.a) && std::isfinite(spec.b) && spec.a <= spec.b, "mesa needs finite a <= b");
  require(spec.T > 0.0 && std::isfinite(spec.T), "mesa needs T > 0");
  require(spec.alpha > 0.0 && spec.alpha < spec.n - 1, "mesa needs 0 < alpha < n - 1");
  require(spec.depth >= 1, "mesa depth must be at least 1");
  require(spec.c.empty() || spec.c.size() == static_cast<std::size_t>(spec.n), "mesa center must have n coordinates");
}

template <class Real>
BasicPartition<Real> build_partition_as(const MesaSpec& spec) {
  validate(spec);
  const Real jump = Real(spec.b) - Real(spec.a);
  const Real alpha(spec.alpha);
  auto inner = [&](const Real& r) { return Real(pow(jump + pow(r, -alpha), -1 / alpha)); };

  BasicPartition<Real> p;
  Real r = Real(spec.T) / 2;
  for (int m = 0; m < spec.depth; ++m) {
    const Real s_plus = inner(r);
    const Real s_minus = s_plus / 2;
    const Real r_minus = inner(s_minus);
    p.r_plus.push_back(r);
    p.s_plus.push_back(s_plus);
    p.s_minus.push_back(s_minus);
    p.r_minus.push_back(r_minus);
    r = r_minus / 2;
  }
  p.core = r;
  return p;
}

template BasicPartition<double> build_partition_as<double>(const MesaSpec&);
template BasicPartition<Extended> build_partition_as<Extended>(const MesaSpec&);

MesaPartition build_partition(const MesaSpec& spec) { return build_partition_as<double>(spec); }

BasicPartition<Extended> build_partition_extended(const MesaSpec& spec) { return build_partition_as<Extended>(spec); }

double mesa_value(const MesaSpec& spec, const MesaPartition& part, double r) {
  require(r >= 0.0, "mesa radius must be non-negative");
  return value_at(spec, part, r);
}

double mesa_radial_derivative(const MesaSpec& spec, const MesaPartition& part, double r) {
  require(r >= 0.0, "mesa radius must be non-negative");
  if (r > spec.T) return 0.0;
  int level = 0;
  return derivative_on(spec, locate(part, r, level), r);
}

std::vector<double> mesa_gradient(const MesaSpec& spec, const MesaPartition& part, const std::vector<double>& x) {
  require(x.size() == static_cast<std::size_t>(spec.n), "mesa gradient needs a point with n coordinates");
  std::vector<double> out(x.size(), 0.0);
  const double r = radius_of(spec, x);
  if (r == 0.0) return out;
  const double dr = mesa_radial_derivative(spec, part, r);
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = dr * (x[i] - (spec.c.empty() ? 0.0 : spec.c[i])) / r;
  }
  return out;
}

const char* to_string(MesaPiece::Kind kind) noexcept {
  using K = MesaPiece::Kind;
  switch (kind) {
    case K::outer_ramp: return "outer_ramp";
    case K::down_ramp: return "down_ramp";
    case K::plateau_b: return "plateau_b";
    case K::up_ramp: return "up_ramp";
    case K::plateau_a: return "plateau_a";
    case K::core: return "core";
  }
  return "unknown";
}

std::vector<MesaPiece> mesa_pieces(const MesaSpec& spec, const MesaPartition& part) {
  using K = MesaPiece::Kind;
  std::vector<MesaPiece> out;
  out.push_back({K::outer_ramp, 0, part.r_plus[0], spec.T});
  for (int m = 0; m < part.depth(); ++m) {
    const auto i = static_cast<std::size_t>(m);
    const double next = m + 1 < part.depth() ? part.r_plus[i + 1] : part.core;
    out.push_back({K::down_ramp, m + 1, part.s_plus[i], part.r_plus[i]});
    out.push_back({K::plateau_b, m + 1, part.s_minus[i], part.s_plus[i]});
    out.push_back({K::up_ramp, m + 1, part.r_minus[i], part.s_minus[i]});
    out.push_back({K::plateau_a, m + 1, next, part.r_minus[i]});
  }
  out.push_back({K::core, 0, 0.0, part.core});
  return out;
}

double piece_gradient_energy(const MesaSpec& spec, const MesaPiece& piece) {
  using K = MesaPiece::Kind;
  const double omega = unit_sphere_area(spec.n);
  const double n = spec.n;
  switch (piece.kind) {
    case K::outer_ramp: {
      const double slope = 2.0 * spec.a / spec.T;
      return omega * slope * slope * (std::pow(piece.hi, n) - std::pow(piece.lo, n)) / n;
    }
    case K::down_ramp:
    case K::up_ramp: {
      if (piece.hi <= piece.lo) return 0.0;
      const double k = n - 2.0 * spec.alpha - 2.0;
      return omega * spec.alpha * spec.alpha * power_difference(piece.hi, piece.lo, k);
    }
    default: return 0.0;
  }
}

double piece_l2(const MesaSpec& spec, const MesaPiece& piece) {
  // U is a + A (r^-alpha - R^-alpha) on each ramp, and the shifted powers
  // cancel badly at deep levels, so this runs in Extended.
  using K = MesaPiece::Kind;
  using R = Extended;
  if (piece.hi <= piece.lo) return 0.0;
  const R omega(unit_sphere_area(spec.n));
  const R n(spec.n), a(spec.a), b(spec.b), alpha(spec.alpha), T(spec.T);
  const R hi(piece.hi), lo(piece.lo);
  auto moment = [&](const R& k) {  // ∫_lo^hi r^{k-1} dr
    return power_difference(hi, lo, k);
  };
  auto ramp = [&](const R& base, const R& sign, const R& anchor) {
    // U = base + sign (r^-alpha - anchor^-alpha)
    const R c0 = base - sign * pow(anchor, -alpha);
    return R(c0 * c0 * moment(n) + 2 * c0 * sign * moment(n - alpha) + moment(n - 2 * alpha));
  };
  R out = 0;
  switch (piece.kind) {
    case K::outer_ramp: {
      // U = 2a (1 - r/T); integrate 4a^2 (1 - 2r/T + r^2/T^2) r^{n-1}.
      out = 4 * a * a * (moment(n) - 2 * moment(n + 1) / T + moment(n + 2) / (T * T));
      break;
    }
    case K::down_ramp: out = ramp(a, R(1), hi); break;
    case K::up_ramp: out = ramp(b, R(-1), hi); break;
    case K::plateau_b: out = b * b * moment(n); break;
    case K::plateau_a:
    case K::core:
      out = piece.lo == 0.0 ? R(a * a * pow(hi, n) / n) : R(a * a * moment(n));
      break;
  }
  return static_cast<double>(omega * out);
}

MesaNorms mesa_h1_norm_sq(const MesaSpec& spec, int depth) {
  MesaSpec s = spec;
  s.depth = depth;
  const MesaPartition part = build_partition(s);
  MesaNorms out;
  out.levels.resize(static_cast<std::size_t>(depth));
  for (int m = 0; m < depth; ++m) out.levels[static_cast<std::size_t>(m)].m = m + 1;
  for (const MesaPiece& piece : mesa_pieces(s, part)) {
    const double g = piece_gradient_energy(s, piece);
    const double l = piece_l2(s, piece);
    if (piece.kind == MesaPiece::Kind::outer_ramp) {
      out.outer_grad = g;
      out.outer_l2 = l;
    } else if (piece.kind == MesaPiece::Kind::core) {
      out.core_l2 = l;
    } else {
      MesaLevel& lvl = out.levels[static_cast<std::size_t>(piece.level - 1)];
      lvl.grad += g;
      lvl.l2 += l;
    }
  }
  double grad = out.outer_grad;
  double l2 = out.outer_l2 + out.core_l2;
  for (const MesaLevel& lvl : out.levels) {
    grad += lvl.grad;
    l2 += lvl.l2;
    out.grad_partial_sums.push_back(grad);
  }
  out.grad_part = grad;
  out.l2_part = l2;
  return out;
}

std::vector<double> increment_ratios(const MesaNorms& norms) {
  std::vector<double> out;
  for (std::size_t m = 1; m < norms.levels.size(); ++m) {
    const double prev = norms.levels[m - 1].grad;
    out.push_back(prev > 0.0 ? norms.levels[m].grad / prev : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

const char* to_string(MesaVerdict verdict) noexcept {
  switch (verdict) {
    case MesaVerdict::convergent: return "convergent";
    case MesaVerdict::divergent: return "divergent";
    case MesaVerdict::undecided: return "undecided";
  }
  return "unknown";
}

MesaVerdict classify(const MesaNorms& norms) {
  const std::vector<double> ratios = increment_ratios(norms);
  if (ratios.empty() || !std::isfinite(ratios.back())) return MesaVerdict::undecided;
  if (ratios.back() < 1.0) return MesaVerdict::convergent;
  if (ratios.back() > 1.0) return MesaVerdict::divergent;
  return MesaVerdict::undecided;
}

// Weak derivative --------------------------------------------------------------

namespace {

struct Sides {
  Extended lhs = 0;
  Extended rhs = 0;
};

// With psi = phi(r) (x - c)_1 the two sides reduce to
//   ∫ U psi_{x_1} = omega/n ∫ U (n phi + r phi') r^{n-1} dr
//   ∫ U_{x_1} psi = omega/n ∫ U' phi r^n dr.
Sides integrate_sides(const MesaSpec& spec, const BasicPartition<Extended>& p, const WeakTestFunction& psi,
                      int resolution) {
  using R = Extended;
  using Rule = boost::math::quadrature::gauss<R, 30>;
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  const R n(spec.n), amp(psi.amplitude), support(psi.radius > 0.0 ? psi.radius : spec.T);
  const int k = psi.power;

  auto phi = [&](const R& r) {
    const R v = 1 - (r / support) * (r / support);
    return R(amp * pow(v, k));
  };
  auto dphi = [&](const R& r) {
    const R v = 1 - (r / support) * (r / support);
    return R(-amp * k * pow(v, k - 1) * 2 * r / (support * support));
  };

  // Breakpoints: every junction above the core, the support radius and T.
  std::vector<R> cuts{p.core};
  for (int m = p.depth() - 1; m >= 0; --m) {
    const auto i = static_cast<std::size_t>(m);
    cuts.insert(cuts.end(), {p.r_minus[i], p.s_minus[i], p.s_plus[i], p.r_plus[i]});
  }
  cuts.push_back(R(spec.T));
  std::vector<R> bounded;
  for (const R& c : cuts) {
    if (c < support) bounded.push_back(c);
  }
  bounded.push_back(support);

  Sides out;
  for (std::size_t piece = 0; piece + 1 < bounded.size(); ++piece) {
    const R lo = bounded[piece];
    const R hi = bounded[piece + 1];
    if (!(hi > lo)) continue;
    const R mid = (lo + hi) / 2;
    int level = 0;
    const MesaPiece::Kind kind = locate(p, mid, level);
    const int panels = std::max(1, static_cast<int>(std::ceil(static_cast<double>(log(hi / lo) / log(R(2)))) * resolution));
    const R ratio = pow(hi / lo, R(1) / panels);
    R a = lo;
    for (int q = 0; q < panels; ++q) {
      const R b = q + 1 == panels ? hi : R(a * ratio);
      const R half = (b - a) / 2, centre = (a + b) / 2;
      for (std::size_t j = 0; j < x.size(); ++j) {
        for (int sign : {1, -1}) {
          if (sign < 0 && x[j] == 0) continue;
          const R r = centre + sign * half * x[j];
          const R u = value_on(spec, p, kind, level, r);
          const R du = derivative_on(spec, kind, r);
          const R rn1 = pow(r, spec.n - 1);
          out.lhs += half * w[j] * u * (n * phi(r) + r * dphi(r)) * rn1;
          out.rhs += half * w[j] * du * phi(r) * rn1 * r;
        }
      }
      a = b;
    }
  }
  const R scale = R(unit_sphere_area(spec.n)) / n;
  out.lhs *= scale;
  out.rhs *= -scale;
  return out;
}

}  // namespace

WeakDerivativeReport weak_derivative_check(const MesaSpec& spec, int depth, const WeakTestFunction& psi,
                                           int resolution) {
  MesaSpec s = spec;
  s.depth = depth;
  validate(s);
  require(psi.power >= 2, "test function power must be at least 2");
  require(resolution >= 1, "quadrature resolution must be at least 1");
  const double support = psi.radius > 0.0 ? psi.radius : s.T;
  require(support <= s.T, "test function must be supported in B(c, T)");

  const BasicPartition<Extended> p = build_partition_extended(s);
  const Sides coarse = integrate_sides(s, p, psi, resolution);
  const Sides fine = integrate_sides(s, p, psi, 2 * resolution);

  WeakDerivativeReport out;
  out.lhs = static_cast<double>(fine.lhs);
  out.rhs = static_cast<double>(fine.rhs);
  using boost::multiprecision::abs;
  out.residual = static_cast<double>(abs(fine.lhs - fine.rhs));
  const Extended drift = std::max(Extended(abs(fine.lhs - coarse.lhs)), Extended(abs(fine.rhs - coarse.rhs)));
  out.quadrature_error = static_cast<double>(drift);
  out.inner_radius = static_cast<double>(p.core);

  // sup |r phi(r)| sits at r = support / sqrt(2 power + 1).
  const double k = psi.power;
  const double r_star = support / std::sqrt(2.0 * k + 1.0);
  const double sup_psi = std::abs(psi.amplitude) * r_star * std::pow(1.0 - 1.0 / (2.0 * k + 1.0), k);
  const double sup_u = std::max(2.0 * std::abs(s.a), std::abs(s.b));
  const double M = sup_u * sup_psi * unit_sphere_area(s.n);
  out.boundary_bound = static_cast<double>(Extended(M) * pow(p.core, s.n - 1));
  return out;
}

// Oscillation -------------------------------------------------------------------

std::vector<std::pair<int, double>> plateau_samples(const MesaSpec& spec, const MesaPartition& part, double delta) {
  require(delta > 0.0 && delta <= spec.T, "oscillation radius must lie in (0, T]");
  const auto N = static_cast<std::size_t>(part.depth());
  if (!(delta > part.s_minus[N - 1])) {
    std::ostringstream msg;
    msg << "B(c, " << delta << ") does not contain a b plateau of the depth-" << N
        << " mesa (innermost at r = " << part.s_minus[N - 1] << "); increase the depth";
    fail(ErrorCode::delta_too_small, msg.str());
  }
  std::vector<std::pair<int, double>> out;
  for (std::size_t i = 0; i < N; ++i) {
    const int level = static_cast<int>(i) + 1;
    const double next = i + 1 < N ? part.r_plus[i + 1] : part.core;
    if (part.s_minus[i] < delta) out.emplace_back(level, 0.5 * (part.s_minus[i] + std::min(part.s_plus[i], delta)));
    if (next < delta) out.emplace_back(level, 0.5 * (next + std::min(part.r_minus[i], delta)));
  }
  return out;
}

// CSV ------------------------------------------------------------------------------

void write_partition_csv(const MesaPartition& part, const std::string& path) {
  const FilePtr f = open_out(path);
  std::fputs("m,r_plus,s_plus,s_minus,r_minus\n", f.get());
  for (int m = 0; m < part.depth(); ++m) {
    const auto i = static_cast<std::size_t>(m);
    std::fprintf(f.get(), "%d,%.17g,%.17g,%.17g,%.17g\n", m + 1, part.r_plus[i], part.s_plus[i], part.s_minus[i],
                 part.r_minus[i]);
  }
  finish(f, path);
}

void write_levels_csv(const MesaNorms& norms, const std::string& path) {
  const FilePtr f = open_out(path);
  std::fputs("m,grad,l2,grad_partial_sum,ratio\n", f.get());
  for (std::size_t i = 0; i < norms.levels.size(); ++i) {
    const MesaLevel& lvl = norms.levels[i];
    if (i == 0) {
      std::fprintf(f.get(), "%d,%.17g,%.17g,%.17g,\n", lvl.m, lvl.grad, lvl.l2, norms.grad_partial_sums[i]);
    } else {
      std::fprintf(f.get(), "%d,%.17g,%.17g,%.17g,%.17g\n", lvl.m, lvl.grad, lvl.l2, norms.grad_partial_sums[i],
                   lvl.grad / norms.levels[i - 1].grad);
    }
  }
  finish(f, path);
}

void write_oscillation_csv(const std::vector<OscillationRow>& rows, const std::string& path) {
  const FilePtr f = open_out(path);
  std::fputs("delta,max,min,oscillation,level\n", f.get());
  for (const OscillationRow& r : rows) {
    std::fprintf(f.get(), "%.17g,%.17g,%.17g,%.17g,%d\n", r.delta, r.max, r.min, r.oscillation, r.level);
  }
  finish(f, path);
}

}  // namespace newton_imbed
