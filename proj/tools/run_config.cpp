#include "run_config.hpp"

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <deque>
#include <sstream>

namespace newton_imbed::cli {

namespace {

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (text.empty() || used != text.size() || std::isnan(v)) throw UsageError("bad number '" + text + "' for " + what);
  return v;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_number(values[i]);
  }
  return out;
}

// String-valued options that are turned into numbers after parsing, so that
// lists and "inf" share one code path.
struct RawOptions {
  std::string R, L, p, deltas, xs, center, eps;

  // Scalar doubles, read as text too: CLI11's own conversion is not always
  // correctly rounded, which breaks the shortest round trip.
  struct Number {
    std::string text;
    double* target;
    std::string name;
    bool positive;
  };
  std::deque<Number> numbers;

  void add(CLI::App* app, const std::string& name, double& target, const std::string& help, bool positive = false) {
    numbers.push_back({"", &target, name, positive});
    app->add_option(name, numbers.back().text, help);
  }
};

void add_grid(CLI::App* app, RunConfig& c, RawOptions& raw, bool ball_allowed) {
  if (ball_allowed) {
    app->add_option("--domain", c.domain, "ball or box")->check(CLI::IsMember({"ball", "box"}));
    app->add_option("--R", raw.R, "ball radius");
  }
  app->add_option("--n", c.n, "dimension")->check(CLI::Range(1, 3));
  app->add_option("--L", raw.L, "box side");
  app->add_option("--res", c.res, "nodes per axis (radial nodes on balls)")->check(CLI::PositiveNumber);
}

void add_newton(CLI::App* app, RunConfig& c, RawOptions& raw) {
  app->add_option("--schedule", c.schedule, "uniform:J, explicit:t0,...,1 or auto");
  raw.add(app, "--newton-tol", c.newton_tol, "stop when the H2 increment is below this", true);
  app->add_option("--max-newton-iters", c.max_newton_iters)->check(CLI::PositiveNumber);
  raw.add(app, "--linear-tol", c.linear_tol, "relative CG residual", true);
  app->add_option("--linear-max-iter", c.linear_max_iter)->check(CLI::PositiveNumber);
  app->add_flag("--jacobi", c.jacobi, "Jacobi-preconditioned CG");
  app->add_flag("--no-adapt{false}", c.adapt, "fail instead of halving a step");
  app->add_option("--max-halvings", c.max_halvings)->check(CLI::NonNegativeNumber);
}

void add_mesa(CLI::App* app, RunConfig& c, RawOptions& raw) {
  app->add_option("--n", c.n, "dimension (>= 3)");
  raw.add(app, "--a", c.a, "outer plateau value");
  raw.add(app, "--b", c.b, "inner plateau value");
  raw.add(app, "--T", c.T, "support radius");
  raw.add(app, "--alpha", c.alpha, "ramp exponent");
  app->add_option("--depth", c.depth, "levels")->check(CLI::PositiveNumber);
}

void add_common(CLI::App* app, RunConfig& c) {
  app->add_option("--out", c.out, "output directory");
  app->add_option("--seed", c.seed, "seed for randomized checks");
}

}  // namespace

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(parse_number(item, what));
  if (out.empty() || (!text.empty() && text.back() == ',')) throw UsageError("empty entry in list for " + what);
  return out;
}

ScheduleSpec parse_schedule(const std::string& text) {
  ScheduleSpec s;
  if (text == "auto") {
    s.kind = ScheduleSpec::Kind::automatic;
    return s;
  }
  const std::size_t colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (kind == "uniform" && !rest.empty()) {
    const double j = parse_number(rest, "--schedule");
    if (j < 1 || j != std::floor(j) || j > 1e6) throw UsageError("uniform schedule needs a positive step count");
    s.kind = ScheduleSpec::Kind::uniform;
    s.steps = static_cast<int>(j);
    return s;
  }
  if (kind == "explicit" && !rest.empty()) {
    s.kind = ScheduleSpec::Kind::explicit_list;
    s.times = parse_list(rest, "--schedule");
    if (s.times.size() < 2 || s.times.front() != 0.0 || s.times.back() != 1.0) {
      throw UsageError("explicit schedule must run from 0 to 1");
    }
    for (std::size_t i = 1; i < s.times.size(); ++i) {
      if (!(s.times[i] > s.times[i - 1])) throw UsageError("explicit schedule must be strictly increasing");
    }
    return s;
  }
  throw UsageError("schedule '" + text + "' must be uniform:J, explicit:t0,...,1 or auto");
}

std::string format_schedule(const ScheduleSpec& spec) {
  switch (spec.kind) {
    case ScheduleSpec::Kind::uniform: return "uniform:" + std::to_string(spec.steps);
    case ScheduleSpec::Kind::explicit_list: return "explicit:" + join(spec.times);
    case ScheduleSpec::Kind::automatic: return "auto";
  }
  return "auto";
}

RunConfig parse_run_config(const std::vector<std::string>& args) {
  RunConfig c;
  RawOptions raw;
  CLI::App app{"Newton-imbedding solver for -Δu = f(u) with zero boundary values", "newton-imbed"};
  app.require_subcommand(1);

  CLI::App* solve = app.add_subcommand("solve", "continuation solve from u = 0 at t = 0 to t = 1");
  add_grid(solve, c, raw, true);
  solve->add_option("--f", c.f, "nonlinearity, e.g. arccot:1,0,1,0");
  add_newton(solve, c, raw);
  add_common(solve, c);

  CLI::App* mesa = app.add_subcommand("mesa", "mesa partition and per-level H1 contributions");
  add_mesa(mesa, c, raw);
  add_common(mesa, c);

  CLI::App* osc = app.add_subcommand("oscillation", "oscillation of f(U) on shrinking balls");
  osc->add_option("--f", c.f, "nonlinearity");
  add_mesa(osc, c, raw);
  osc->add_option("--deltas", raw.deltas, "comma-separated radii");
  add_common(osc, c);

  CLI::App* bump = app.add_subcommand("bump", "norms of f(x_k gamma) for a smooth cutoff gamma");
  add_grid(bump, c, raw, false);
  bump->add_option("--f", c.f, "nonlinearity");
  bump->add_option("--x", raw.xs, "comma-separated amplitudes");
  bump->add_option("--p", raw.p, "L^p exponent (inf for the max norm)");
  bump->add_option("--center", raw.center, "comma-separated center of the cutoff");
  raw.add(bump, "--radius", c.radius, "cutoff radius", true);
  add_common(bump, c);

  CLI::App* sweep = app.add_subcommand("epsilon-sweep", "solves with heaviside-approx:eps for several eps");
  add_grid(sweep, c, raw, true);
  sweep->add_option("--eps", raw.eps, "comma-separated eps values");
  add_newton(sweep, c, raw);
  add_common(sweep, c);

  std::vector<const char*> argv{"newton-imbed"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    UsageError e(app.help());
    e.help = true;
    e.exit_code = 0;
    throw e;
  } catch (const CLI::CallForAllHelp&) {
    UsageError e(app.help("", CLI::AppFormatMode::All));
    e.help = true;
    e.exit_code = 0;
    throw e;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  CLI::App* chosen = app.get_subcommands().front();
  c.command = chosen->get_name();

  if (c.command == "bump") {
    c.domain = "box";
    if (chosen->count("--res") == 0) c.res = 31;
  }
  for (const RawOptions::Number& num : raw.numbers) {
    if (num.text.empty()) continue;
    *num.target = parse_number(num.text, num.name);
    if (num.positive && !(*num.target > 0.0)) throw UsageError(num.name + " must be positive");
  }
  if (!raw.R.empty() && !raw.L.empty()) throw UsageError("give either --R or --L, not both");
  if (!raw.R.empty()) c.extent = parse_number(raw.R, "--R");
  if (!raw.L.empty()) c.extent = parse_number(raw.L, "--L");
  if (!(c.extent > 0.0) || std::isinf(c.extent)) throw UsageError("domain size must be positive");
  if (!raw.deltas.empty()) c.deltas = parse_list(raw.deltas, "--deltas");
  if (!raw.xs.empty()) c.xs = parse_list(raw.xs, "--x");
  if (!raw.p.empty()) c.p = parse_number(raw.p, "--p");
  if (!raw.center.empty()) c.center = parse_list(raw.center, "--center");
  if (!raw.eps.empty()) c.eps = parse_list(raw.eps, "--eps");
  c.schedule = format_schedule(parse_schedule(c.schedule));

  if (c.command == "bump") {
    if (c.center.empty()) c.center.assign(static_cast<std::size_t>(c.n), 0.5 * c.extent);
    if (c.center.size() != static_cast<std::size_t>(c.n)) throw UsageError("--center needs n coordinates");
    if (c.radius == 0.0) c.radius = 0.4 * c.extent;
    if (!(c.p >= 1.0)) throw UsageError("--p must be at least 1");
  }
  if (c.command == "epsilon-sweep") {
    for (double e : c.eps) {
      if (!(e > 0.0) || std::isinf(e)) throw UsageError("--eps values must be positive");
    }
  }
  return c;
}

std::vector<std::string> serialize(const RunConfig& c) {
  std::vector<std::string> out{c.command};
  auto opt = [&](const char* name, const std::string& value) {
    out.emplace_back(name);
    out.push_back(value);
  };
  auto num = [&](const char* name, double v) { opt(name, format_number(v)); };
  auto integer = [&](const char* name, long long v) { opt(name, std::to_string(v)); };

  auto grid = [&](bool ball_allowed) {
    if (ball_allowed) opt("--domain", c.domain);
    integer("--n", c.n);
    num(c.domain == "ball" ? "--R" : "--L", c.extent);
    integer("--res", c.res);
  };
  auto newton = [&] {
    opt("--schedule", c.schedule);
    num("--newton-tol", c.newton_tol);
    integer("--max-newton-iters", c.max_newton_iters);
    num("--linear-tol", c.linear_tol);
    integer("--linear-max-iter", c.linear_max_iter);
    if (c.jacobi) out.emplace_back("--jacobi");
    if (!c.adapt) out.emplace_back("--no-adapt");
    integer("--max-halvings", c.max_halvings);
  };
  auto mesa = [&] {
    integer("--n", c.n);
    num("--a", c.a);
    num("--b", c.b);
    num("--T", c.T);
    num("--alpha", c.alpha);
    integer("--depth", c.depth);
  };

  if (c.command == "solve") {
    grid(true);
    opt("--f", c.f);
    newton();
  } else if (c.command == "mesa") {
    mesa();
  } else if (c.command == "oscillation") {
    opt("--f", c.f);
    mesa();
    opt("--deltas", join(c.deltas));
  } else if (c.command == "bump") {
    grid(false);
    opt("--f", c.f);
    opt("--x", join(c.xs));
    num("--p", c.p);
    opt("--center", join(c.center));
    num("--radius", c.radius);
  } else if (c.command == "epsilon-sweep") {
    grid(true);
    opt("--eps", join(c.eps));
    newton();
  }
  opt("--out", c.out);
  opt("--seed", std::to_string(c.seed));
  return out;
}

std::string canonical_string(const RunConfig& config) {
  std::string out;
  for (const std::string& s : serialize(config)) {
    if (!out.empty()) out += ' ';
    out += s;
  }
  return out;
}

}  // namespace newton_imbed::cli
