#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "newton_imbed/error.hpp"
#include "newton_imbed/nonlinearity.hpp"

using namespace newton_imbed;
using std::numbers::pi;
using Kind = AssumptionViolation::Kind;

TEST_CASE("arccot branch") {
  CHECK(arccot(0.0) == doctest::Approx(pi / 2));
  CHECK(arccot(1.0) == doctest::Approx(pi / 4));
  CHECK(arccot(-1.0) == doctest::Approx(3 * pi / 4));
  CHECK(arccot(1e300) > 0.0);
  CHECK(arccot(-1e300) <= pi);
  CHECK(arccot(-1e8) < pi);
  // Continuous and decreasing across 0.
  CHECK(arccot(-1e-12) > arccot(0.0));
  CHECK(arccot(0.0) > arccot(1e-12));
  CHECK(arccot(-1e-12) - arccot(1e-12) == doctest::Approx(2e-12).epsilon(1e-6));
  const Extended e = arccot(Extended(100));
  CHECK(static_cast<double>(e) == doctest::Approx(arccot(100.0)).epsilon(1e-15));
}

TEST_CASE("make_arccot values and bound") {
  const Nonlinearity nl = make_arccot(1, 0, 1, 0);
  CHECK(nl.f(0.0) == doctest::Approx(pi / 2));
  CHECK(nl.fp(0.0) == doctest::Approx(-1.0));
  CHECK(nl.fpp(0.0) == 0.0);
  for (double x : {-1e3, 0.0, 1e3}) CHECK(nl.fp(x) < 0.0);
  CHECK(nl.bound_M == doctest::Approx(pi));

  const Nonlinearity sharp = make_arccot(1, 0, 0.1, 0);
  CHECK(sharp.fp(0.0) == doctest::Approx(-10.0));
  const double expected = std::max({pi, 10.0, 2 * (3 * std::sqrt(3.0) / 16) / 0.01});
  CHECK(sharp.bound_M == doctest::Approx(expected));

  const Nonlinearity shifted = make_arccot(2, 1, 0.5, -3);
  CHECK(shifted.f(1.0) == doctest::Approx(2 * pi / 2 - 3));
  CHECK(shifted.fp(2.0) == doctest::Approx(-2 * 0.5 / (0.25 + 1)));
  CHECK(shifted.fpp(2.0) == doctest::Approx(2 * 2 * 0.5 * 1 / std::pow(1.25, 2)));

  CHECK_THROWS_AS(make_arccot(0, 0, 1, 0), Error);
  CHECK_THROWS_AS(make_arccot(1, 0, -1, 0), Error);
}

TEST_CASE("heaviside approximation") {
  for (double eps : {1.0, 0.1, 0.01}) {
    const Nonlinearity nl = make_heaviside_approx(eps);
    CHECK(nl.f(0.0) == doctest::Approx(-0.5));
    CHECK(nl.fp(0.3) == doctest::Approx(-eps / (pi * (eps * eps + 0.09))));
    CHECK(nl.f(-1e9) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(nl.f(1e9) == doctest::Approx(-1.0).epsilon(1e-6));
  }
  CHECK(make_heaviside_approx(0.01).f(1.0) == doctest::Approx(-0.99682).epsilon(1e-5));
  CHECK_THROWS_AS(make_heaviside_approx(0.0), Error);
}

TEST_CASE("parse_nonlinearity") {
  const Nonlinearity a = parse_nonlinearity("arccot:1,0,1,0");
  CHECK(a.f(0.0) == doctest::Approx(pi / 2));
  const Nonlinearity h = parse_nonlinearity("heaviside-approx:0.1");
  CHECK(h.f(0.0) == doctest::Approx(-0.5));
  const Nonlinearity c = parse_nonlinearity("const:2.5");
  CHECK(c.f(7.0) == 2.5);
  CHECK(c.fp(7.0) == 0.0);
  const Nonlinearity l = parse_nonlinearity("linear:1,0");
  CHECK(l.f(3.0) == 3.0);
  for (const char* bad : {"", "arccot", "arccot:1,0,1", "arccot:1,0,x,0", "nope:1", "const:", "linear:1"}) {
    CHECK_THROWS_AS(parse_nonlinearity(bad), Error);
  }
}

TEST_CASE("check_assumptions") {
  const AssumptionReport good = check_assumptions(make_arccot(1, 0, 1, 0), -1e6, 1e6, 10000);
  CHECK(good.ok());
  CHECK(good.samples_checked >= 10000);
  CHECK(check_assumptions(make_heaviside_approx(0.1), -100, 100, 2001).ok());

  // f(x) = x claiming M = 10 escapes the bound.
  Nonlinearity identity = make_linear(1.0, 0.0);
  identity.bound_M = 10.0;
  const AssumptionReport id = check_assumptions(identity, -1e3, 1e3, 1000);
  CHECK(id.count(Kind::bound_f) > 0);
  CHECK(id.count(Kind::sign_fp) > 0);

  Nonlinearity flipped = make_arccot(1, 0, 1, 0);
  const auto fp = flipped.fp;
  flipped.fp = [fp](double x) { return -fp(x); };
  const AssumptionReport fl = check_assumptions(flipped, -10, 10, 200);
  CHECK(fl.count(Kind::sign_fp) == static_cast<std::size_t>(fl.samples_checked));
  CHECK(fl.count(Kind::derivative_fp) > 0);

  CHECK_THROWS_AS(check_assumptions(good.ok() ? make_arccot(1, 0, 1, 0) : identity, 0, 1, 1), Error);
}

TEST_CASE("derivative consistency, boundedness, monotonicity") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> dist(-20.0, 20.0);
  const Nonlinearity nl = make_arccot(1.5, 0.5, 0.7, 0.2);
  const double d = 1e-5;
  for (int i = 0; i < 500; ++i) {
    const double x = dist(rng);
    CHECK(std::abs((nl.f(x + d) - nl.f(x - d)) / (2 * d) - nl.fp(x)) <= 1e-8);
    CHECK(std::abs((nl.fp(x + d) - nl.fp(x - d)) / (2 * d) - nl.fpp(x)) <= 1e-8);
    const double y = dist(rng);
    if (x < y) CHECK(nl.f(x) > nl.f(y));
  }

  const Grid g(DomainSpec::box(2, 1.0), 9);
  Field u(g);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = 1e4 * dist(rng);
  CHECK(norm_lp(compose(nl.f, u), INFINITY) <= nl.bound_M);
}
