#include "newton_imbed/nonlinearity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "newton_imbed/error.hpp"

namespace newton_imbed {

namespace {

std::string format_args(std::initializer_list<double> args) {
  std::ostringstream out;
  out.precision(17);
  bool first = true;
  for (double a : args) {
    if (!first) out << ',';
    out << a;
    first = false;
  }
  return out.str();
}

std::vector<double> parse_numbers(std::string_view text, std::string_view spec) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string item(text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (item.empty() || used != item.size()) {
      fail(ErrorCode::invalid_argument, "bad number '" + item + "' in nonlinearity '" + std::string(spec) + "'");
    }
    out.push_back(value);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

Extended Nonlinearity::f_extended(const Extended& x) const {
  return f_ext ? f_ext(x) : Extended(f(static_cast<double>(x)));
}

Extended Nonlinearity::fp_extended(const Extended& x) const {
  return fp_ext ? fp_ext(x) : Extended(fp(static_cast<double>(x)));
}

double arccot(double y) {
  // atan(1/y) avoids the cancellation in pi/2 - atan(y) for large y.
  return y > 1.0 ? std::atan(1.0 / y) : 0.5 * std::numbers::pi - std::atan(y);
}

Extended arccot(const Extended& y) {
  using boost::multiprecision::atan;
  return y > 1 ? Extended(atan(1 / y)) : Extended(boost::math::constants::half_pi<Extended>() - atan(y));
}

Nonlinearity make_arccot(double A, double h, double eps, double k) {
  require(A > 0.0 && std::isfinite(A), "arccot family requires A > 0");
  require(eps > 0.0 && std::isfinite(eps), "arccot family requires eps > 0");
  require(std::isfinite(h) && std::isfinite(k), "arccot family requires finite h and k");

  Nonlinearity nl;
  nl.name = "arccot:" + format_args({A, h, eps, k});
  nl.f = [=](double x) { return A * arccot((x - h) / eps) + k; };
  nl.fp = [=](double x) {
    const double s = x - h;
    return -A * eps / (eps * eps + s * s);
  };
  nl.fpp = [=](double x) {
    const double s = x - h;
    const double d = eps * eps + s * s;
    return 2.0 * A * eps * s / (d * d);
  };
  // A h eps k are doubles, hence exact in Extended.
  nl.f_ext = [=](const Extended& x) { return Extended(A * arccot(Extended((x - h) / eps)) + k); };
  nl.fp_ext = [=](const Extended& x) {
    const Extended s = x - h;
    return Extended(-A * eps / (Extended(eps) * eps + s * s));
  };
  // Exact suprema of |f|, |f'| and |f''| over the real line.
  const double sup_fpp = 2.0 * A * (3.0 * std::sqrt(3.0) / 16.0) / (eps * eps);
  nl.bound_M = std::max({A * std::numbers::pi + std::abs(k), A / eps, sup_fpp});
  return nl;
}

Nonlinearity make_heaviside_approx(double eps) {
  require(eps > 0.0 && std::isfinite(eps), "heaviside approximation requires eps > 0");
  Nonlinearity nl = make_arccot(1.0 / std::numbers::pi, 0.0, eps, -1.0);
  nl.name = "heaviside-approx:" + format_args({eps});
  return nl;
}

Nonlinearity make_constant(double c, double slope) {
  require(std::isfinite(c) && std::isfinite(slope), "constant nonlinearity requires finite values");
  Nonlinearity nl;
  nl.name = slope == 0.0 ? "const:" + format_args({c}) : "const:" + format_args({c, slope});
  nl.f = [c](double) { return c; };
  nl.fp = [slope](double) { return -slope; };
  nl.fpp = [](double) { return 0.0; };
  nl.bound_M = std::max({std::abs(c), std::abs(slope), std::numeric_limits<double>::min()});
  return nl;
}

Nonlinearity make_linear(double slope, double offset) {
  require(std::isfinite(slope) && std::isfinite(offset), "linear nonlinearity requires finite values");
  Nonlinearity nl;
  nl.name = "linear:" + format_args({slope, offset});
  nl.f = [=](double x) { return slope * x + offset; };
  nl.fp = [slope](double) { return slope; };
  nl.fpp = [](double) { return 0.0; };
  nl.bound_M = slope == 0.0 ? std::max(std::abs(offset), std::numeric_limits<double>::min())
                            : std::numeric_limits<double>::infinity();
  return nl;
}

Nonlinearity parse_nonlinearity(std::string_view spec) {
  const std::size_t colon = spec.find(':');
  require(colon != std::string_view::npos, "nonlinearity '" + std::string(spec) + "' must look like name:args");
  const std::string_view kind = spec.substr(0, colon);
  const std::vector<double> args = parse_numbers(spec.substr(colon + 1), spec);
  auto expect = [&](std::size_t lo, std::size_t hi) {
    require(args.size() >= lo && args.size() <= hi,
            "wrong number of arguments in nonlinearity '" + std::string(spec) + "'");
  };
  if (kind == "arccot") {
    expect(4, 4);
    return make_arccot(args[0], args[1], args[2], args[3]);
  }
  if (kind == "heaviside-approx") {
    expect(1, 1);
    return make_heaviside_approx(args[0]);
  }
  if (kind == "const") {
    expect(1, 2);
    return make_constant(args[0], args.size() > 1 ? args[1] : 0.0);
  }
  if (kind == "linear") {
    expect(2, 2);
    return make_linear(args[0], args[1]);
  }
  fail(ErrorCode::invalid_argument, "unknown nonlinearity '" + std::string(kind) + "'");
}

Field compose(const Nonlinearity::Fn& fn, const Field& u) {
  Field out(u.grid());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = fn(u[i]);
  return out;
}

const char* to_string(AssumptionViolation::Kind kind) noexcept {
  using K = AssumptionViolation::Kind;
  switch (kind) {
    case K::bound_f: return "|f| > M";
    case K::bound_fp: return "|f'| > M";
    case K::bound_fpp: return "|f''| > M";
    case K::sign_fp: return "f' >= 0";
    case K::derivative_fp: return "f' inconsistent with f";
    case K::derivative_fpp: return "f'' inconsistent with f'";
    case K::non_finite: return "non-finite value";
  }
  return "unknown";
}

std::size_t AssumptionReport::count(AssumptionViolation::Kind kind) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [kind](const auto& v) { return v.kind == kind; }));
}

AssumptionReport check_assumptions(const Nonlinearity& nl, double lo, double hi, int samples) {
  require(samples >= 2, "check_assumptions needs at least 2 samples");
  require(lo < hi && std::isfinite(lo) && std::isfinite(hi), "sample range must be a finite interval");
  using K = AssumptionViolation::Kind;

  std::vector<double> xs;
  xs.reserve(static_cast<std::size_t>(samples) + 1);
  for (int i = 0; i < samples; ++i) xs.push_back(lo + (hi - lo) * i / (samples - 1));
  xs.back() = hi;
  if (lo < 0.0 && hi > 0.0) xs.push_back(0.0);

  constexpr double delta = 1e-5;
  constexpr double rel_tol = 1e-5;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double M = nl.bound_M;

  AssumptionReport report;
  for (double x : xs) {
    ++report.samples_checked;
    const double f = nl.f(x), fp = nl.fp(x), fpp = nl.fpp(x);
    if (!std::isfinite(f) || !std::isfinite(fp) || !std::isfinite(fpp)) {
      report.violations.push_back({K::non_finite, x, f, 0.0});
      continue;
    }
    if (std::abs(f) > M) report.violations.push_back({K::bound_f, x, f, M});
    if (std::abs(fp) > M) report.violations.push_back({K::bound_fp, x, fp, M});
    if (std::abs(fpp) > M) report.violations.push_back({K::bound_fpp, x, fpp, M});
    if (!(fp < 0.0)) report.violations.push_back({K::sign_fp, x, fp, 0.0});

    const double fl = nl.f(x - delta), fr = nl.f(x + delta);
    const double pl = nl.fp(x - delta), pr = nl.fp(x + delta);
    const double ql = nl.fpp(x - delta), qr = nl.fpp(x + delta);

    // Allowances: relative tolerance, rounding in the difference quotient,
    // and the O(delta^2) truncation term from an estimated higher derivative.
    const double fd1 = (fr - fl) / (2.0 * delta);
    const double third = (qr - ql) / (2.0 * delta);
    const double tol1 = rel_tol * std::abs(fp) + 4.0 * eps * (std::abs(fl) + std::abs(fr)) / (2.0 * delta) +
                        2.0 * delta * delta / 6.0 * std::abs(third);
    if (std::abs(fd1 - fp) > tol1) report.violations.push_back({K::derivative_fp, x, fd1 - fp, tol1});

    const double fd2 = (pr - pl) / (2.0 * delta);
    const double fourth = (qr - 2.0 * fpp + ql) / (delta * delta);
    const double tol2 = rel_tol * std::abs(fpp) + 4.0 * eps * (std::abs(pl) + std::abs(pr)) / (2.0 * delta) +
                        2.0 * delta * delta / 6.0 * std::abs(fourth);
    if (std::abs(fd2 - fpp) > tol2) report.violations.push_back({K::derivative_fpp, x, fd2 - fpp, tol2});
  }
  return report;
}

}  // namespace newton_imbed
