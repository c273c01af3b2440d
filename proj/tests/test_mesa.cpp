#include <doctest.h>

#include <cmath>
#include <numbers>

#include "newton_imbed/error.hpp"
#include "newton_imbed/mesa.hpp"
#include "newton_imbed/nonlinearity.hpp"
#include "oracles/bisection.hpp"
#include "oracles/simpson.hpp"

using namespace newton_imbed;
using std::numbers::pi;

namespace {

MesaSpec spec_with(double alpha, int depth, double a = 0.0, double b = 1.0) {
  MesaSpec s;
  s.alpha = alpha;
  s.depth = depth;
  s.a = a;
  s.b = b;
  return s;
}

// Simpson oracle for ∫|DU|^2 over both ramps of level m (index k).
long double simpson_level_grad(const MesaSpec& s, const MesaPartition& p, std::size_t k) {
  const long double w = oracle::sphere_area(s.n), al = s.alpha;
  auto g = [&](long double r) { return w * al * al * std::pow(r, -2 * al - 2) * std::pow(r, s.n - 1); };
  return oracle::simpson_log(g, p.s_plus[k], p.r_plus[k], 400) + oracle::simpson_log(g, p.r_minus[k], p.s_minus[k], 400);
}

}  // namespace

TEST_CASE("spec validation") {
  CHECK_NOTHROW(validate(spec_with(0.2, 4)));
  CHECK_NOTHROW(validate(spec_with(0.2, 4, 1.0, 1.0)));
  CHECK_THROWS_AS(validate(spec_with(0.2, 4, 2.0, 1.0)), Error);
  CHECK_THROWS_AS(validate(spec_with(0.0, 4)), Error);
  CHECK_THROWS_AS(validate(spec_with(2.0, 4)), Error);
  CHECK_THROWS_AS(validate(spec_with(0.2, 0)), Error);
  MesaSpec two = spec_with(0.2, 4);
  two.n = 2;
  CHECK_THROWS_AS(validate(two), Error);
  CHECK(spec_with(0.49, 2).subcritical());
  CHECK_FALSE(spec_with(0.5, 2).subcritical());
}

TEST_CASE("partition closed form against bisection") {
  const MesaPartition p = build_partition(spec_with(0.25, 1));
  CHECK(p.r_plus[0] == 0.5);
  CHECK(p.s_plus[0] == doctest::Approx(std::pow(1 + std::pow(2.0, 0.25), -4.0)).epsilon(1e-14));
  CHECK(p.s_plus[0] == doctest::Approx(0.04354).epsilon(1e-3));

  for (double alpha : {0.2, 0.25, 0.4, 0.8}) {
    for (double gap : {1.0, 0.3}) {
      const MesaSpec s = spec_with(alpha, 6, 0.5, 0.5 + gap);
      const MesaPartition part = build_partition(s);
      const oracle::Radii ref = oracle::bisection_partition(s.a, s.b, s.T, s.alpha, s.depth);
      auto rel = [](double x, long double y) { return static_cast<double>(std::fabs(x - y) / y); };
      for (int m = 0; m < s.depth; ++m) {
        CHECK(rel(part.r_plus[m], ref.r_plus[m]) <= 1e-12);
        CHECK(rel(part.s_plus[m], ref.s_plus[m]) <= 1e-12);
        CHECK(rel(part.s_minus[m], ref.s_minus[m]) <= 1e-12);
        CHECK(rel(part.r_minus[m], ref.r_minus[m]) <= 1e-12);
      }
    }
  }
}

TEST_CASE("partition invariants") {
  for (double alpha : {0.2, 0.4, 0.8, 1.5}) {
    const MesaSpec s = spec_with(alpha, 12);
    const MesaPartition p = build_partition(s);
    double prev = s.T;
    for (int m = 0; m < s.depth; ++m) {
      for (double r : {p.r_plus[m], p.s_plus[m], p.s_minus[m], p.r_minus[m]}) {
        CHECK(r < prev);
        CHECK(r > 0.0);
        prev = r;
      }
      CHECK(p.s_minus[m] == p.s_plus[m] * 0.5);
      if (m + 1 < s.depth) {
        CHECK(p.r_plus[m + 1] == p.r_minus[m] * 0.5);
        CHECK(p.r_plus[m + 1] <= s.T / std::pow(2.0, m + 2));
      }
    }
    CHECK(p.core == p.r_minus.back() * 0.5);

    // The defining equations, checked in 50 digits.
    const BasicPartition<Extended> e = build_partition_extended(s);
    const Extended gap = Extended(s.b) - Extended(s.a), al = Extended(s.alpha);
    for (int m = 0; m < s.depth; ++m) {
      const Extended up = pow(e.s_plus[m], -al) - pow(e.r_plus[m], -al);
      const Extended down = pow(e.r_minus[m], -al) - pow(e.s_minus[m], -al);
      CHECK(static_cast<double>(abs(up - gap) / gap) <= 1e-12);
      CHECK(static_cast<double>(abs(down - gap) / gap) <= 1e-12);
    }
  }
  // In double the identity holds directly for moderate depth.
  const MesaSpec s = spec_with(0.4, 4);
  const MesaPartition p = build_partition(s);
  for (int m = 0; m < s.depth; ++m) {
    CHECK(std::pow(p.s_plus[m], -s.alpha) - std::pow(p.r_plus[m], -s.alpha) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("mesa values, continuity and range") {
  for (double a : {0.0, 0.5}) {
    const MesaSpec s = spec_with(0.3, 6, a, a + 1.0);
    const MesaPartition p = build_partition(s);
    CHECK(mesa_value(s, p, s.T) == 0.0);
    CHECK(mesa_value(s, p, 2 * s.T) == 0.0);
    CHECK(mesa_value(s, p, p.s_minus[0]) == doctest::Approx(s.b).epsilon(1e-12));
    CHECK(mesa_value(s, p, p.r_minus[0]) == doctest::Approx(s.a).scale(1).epsilon(1e-12));
    CHECK(mesa_value(s, p, 0.0) == s.a);

    std::vector<double> junctions{s.T, p.core};
    for (int m = 0; m < s.depth; ++m) {
      junctions.insert(junctions.end(), {p.r_plus[m], p.s_plus[m], p.s_minus[m], p.r_minus[m]});
    }
    for (double rho : junctions) {
      const double lo = mesa_value(s, p, rho * (1 - 1e-13));
      const double hi = mesa_value(s, p, rho * (1 + 1e-13));
      CHECK(std::abs(lo - hi) <= 1e-9 * (std::abs(s.a) + std::abs(s.b) + 1));
    }

    const double top = a > 0 ? std::max(2 * a, s.b) : s.b;
    for (int i = 0; i <= 1000000; ++i) {
      const double r = s.T * i / 1e6;
      const double u = mesa_value(s, p, r);
      if (r <= p.r_plus[0]) {
        if (!(u >= s.a - 1e-12 && u <= s.b + 1e-12)) FAIL("inner range violated at r = " << r);
      }
      if (!(u >= -1e-12 && u <= top + 1e-12)) FAIL("range violated at r = " << r);
    }
  }
}

TEST_CASE("mesa gradient") {
  const MesaSpec s = spec_with(0.3, 5, 0.5, 1.5);
  const MesaPartition p = build_partition(s);
  const double r_ramp = std::sqrt(p.s_plus[1] * p.r_plus[1]);
  const std::vector<double> x{r_ramp * 0.6, r_ramp * 0.8, 0.0};
  const std::vector<double> g = mesa_gradient(s, p, x);
  const double expected = -s.alpha * std::pow(r_ramp, -s.alpha - 2);
  CHECK(g[0] == doctest::Approx(expected * x[0]).epsilon(1e-12));
  CHECK(g[1] == doctest::Approx(expected * x[1]).epsilon(1e-12));
  CHECK(g[2] == 0.0);

  // Plateau b and the outer linear ramp.
  const double r_plateau = 0.5 * (p.s_minus[1] + p.s_plus[1]);
  CHECK(mesa_radial_derivative(s, p, r_plateau) == 0.0);
  CHECK(mesa_radial_derivative(s, p, 0.75) == doctest::Approx(-2 * s.a / s.T));
  CHECK(mesa_gradient(s, p, {0.0, 0.0, 0.0}) == std::vector<double>{0.0, 0.0, 0.0});

  // Against a centered difference of the value.
  for (int m = 0; m < s.depth; ++m) {
    for (double r : {std::sqrt(p.s_plus[m] * p.r_plus[m]), std::sqrt(p.r_minus[m] * p.s_minus[m])}) {
      const double d = 1e-7 * r;
      const double fd = (mesa_value(s, p, r + d) - mesa_value(s, p, r - d)) / (2 * d);
      CHECK(mesa_radial_derivative(s, p, r) == doctest::Approx(fd).epsilon(1e-5));
    }
  }

  // |DU| <= |D r^-alpha| off the outer ramp; on a = 0 specs everywhere.
  for (double a : {0.0, 0.5}) {
    const MesaSpec t = spec_with(0.3, 5, a, a + 1.0);
    const MesaPartition q = build_partition(t);
    for (int i = 1; i < 100000; ++i) {
      const double r = t.T * i / 1e5;
      if (a != 0.0 && r > q.r_plus[0]) continue;
      const double bound = t.alpha * std::pow(r, -t.alpha - 1);
      if (!(std::abs(mesa_radial_derivative(t, q, r)) <= bound * (1 + 1e-12))) FAIL("|DU| > |Du| at r = " << r);
    }
  }
}

TEST_CASE("per-annulus closed forms against Simpson") {
  for (double alpha : {0.2, 0.4, 0.6, 0.8}) {
    const MesaSpec s = spec_with(alpha, 10);
    const MesaPartition p = build_partition(s);
    const MesaNorms norms = mesa_h1_norm_sq(s, s.depth);
    REQUIRE(norms.levels.size() == 10);
    for (std::size_t k = 0; k < norms.levels.size(); ++k) {
      const long double ref = simpson_level_grad(s, p, k);
      CHECK(static_cast<double>(std::fabs(norms.levels[k].grad - ref) / ref) <= 1e-8);
    }
    // L2 per piece from the point values.
    for (const MesaPiece& piece : mesa_pieces(s, p)) {
      if (piece.hi <= piece.lo) continue;
      const long double w = oracle::sphere_area(s.n);
      auto g = [&](long double r) {
        const double u = mesa_value(s, p, static_cast<double>(r));
        return w * u * u * std::pow(r, s.n - 1);
      };
      const long double ref = piece.lo > 0 ? oracle::simpson_log(g, piece.lo, piece.hi, 400)
                                           : oracle::simpson(g, 0.0L, piece.hi, 400);
      const double got = piece_l2(s, piece);
      if (ref == 0) {
        CHECK(got == 0.0);
      } else {
        CHECK(static_cast<double>(std::fabs(got - ref) / ref) <= 1e-8);
      }
    }
  }
}

TEST_CASE("mesa norms and membership threshold") {
  // Plateau-only mesa: just the outer ramp contributes gradient energy.
  const MesaNorms flat = mesa_h1_norm_sq(spec_with(0.2, 6, 1.0, 1.0), 6);
  CHECK(flat.grad_part == doctest::Approx(flat.outer_grad));
  CHECK(flat.outer_grad == doctest::Approx(4 * pi * 4 * 7.0 / 24).epsilon(1e-12));

  const MesaNorms sub = mesa_h1_norm_sq(spec_with(0.2, 16), 16);
  for (double r : increment_ratios(sub)) CHECK(r < 0.75);
  CHECK(classify(sub) == MesaVerdict::convergent);
  for (std::size_t m = 1; m < sub.grad_partial_sums.size(); ++m) {
    CHECK(sub.grad_partial_sums[m] >= sub.grad_partial_sums[m - 1]);
  }
  const double tail = sub.grad_partial_sums.back() - sub.grad_partial_sums[sub.grad_partial_sums.size() - 2];
  CHECK(tail < 1e-6 * sub.grad_part);
  CHECK(sub.grad_part == doctest::Approx(sub.grad_partial_sums.back()));
  CHECK(sub.l2_part > 0.0);

  // The tail ratio settles at 4^-(n - 2 - alpha).
  for (double alpha : {0.2, 0.4, 0.6, 0.8}) {
    const std::vector<double> ratios = increment_ratios(mesa_h1_norm_sq(spec_with(alpha, 24), 24));
    CHECK(ratios.back() == doctest::Approx(std::pow(4.0, -(1 - alpha))).epsilon(1e-3));
  }
}

TEST_CASE("weak derivative identity") {
  MesaSpec s = spec_with(0.2, 12, 1.0, 2.0);
  const WeakDerivativeReport zero = weak_derivative_check(s, 12, {0.0, 0.0, 4}, 1);
  CHECK(zero.residual == 0.0);

  double prev = INFINITY;
  for (int depth : {4, 8, 12}) {
    const WeakDerivativeReport r = weak_derivative_check(s, depth, {}, 2);
    CHECK(r.residual <= r.quadrature_error + r.boundary_bound);
    CHECK(r.residual < prev);
    CHECK(r.inner_radius == doctest::Approx(build_partition(spec_with(0.2, depth, 1.0, 2.0)).core));
    prev = r.residual;
  }
}

TEST_CASE("oscillation probe") {
  const MesaSpec s = spec_with(0.2, 16);
  const MesaPartition p = build_partition(s);
  const Nonlinearity nl = make_arccot(1, 0, 1, 0);
  const std::vector<OscillationRow> rows = oscillation_probe(nl.f, s, p, {0.5, 0.05, 0.005});
  REQUIRE(rows.size() == 3);
  for (const OscillationRow& r : rows) {
    CHECK(r.oscillation == doctest::Approx(pi / 4).epsilon(1e-12));
    CHECK(r.oscillation == rows[0].oscillation);
    CHECK(r.max == nl.f(0.0));
    CHECK(r.min == nl.f(1.0));
  }
  CHECK(rows[0].level == s.depth);

  const auto flat = oscillation_probe([](double) { return 3.0; }, s, p, {0.5, 0.05});
  for (const OscillationRow& r : flat) CHECK(r.oscillation == 0.0);

  try {
    oscillation_probe(nl.f, s, p, {p.s_minus.back() * 0.5});
    FAIL("expected DeltaTooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::delta_too_small);
  }
  CHECK_THROWS_AS(oscillation_probe(nl.f, s, p, {-1.0}), Error);
}
