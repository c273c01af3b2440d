// newton-imbed: command-line front end over the C API.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "newton_imbed/newton_imbed.h"
#include "run_config.hpp"

namespace fs = std::filesystem;
using newton_imbed::cli::RunConfig;

namespace {

// Carries a status out of a command; the message is already ni_last_error()
// or a CLI-side description.
struct Failure {
  ni_status status;
  std::string message;
};

void check(ni_status s) {
  if (s != NI_OK) throw Failure{s, ni_last_error()};
}

template <class T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using GridPtr = std::unique_ptr<ni_grid, Deleter<ni_grid, ni_grid_destroy>>;
using FieldPtr = std::unique_ptr<ni_field, Deleter<ni_field, ni_field_destroy>>;
using NlPtr = std::unique_ptr<ni_nonlinearity, Deleter<ni_nonlinearity, ni_nonlinearity_destroy>>;
using ResultPtr = std::unique_ptr<ni_result, Deleter<ni_result, ni_result_destroy>>;

GridPtr make_grid(const RunConfig& c) {
  ni_grid* g = nullptr;
  check(c.domain == "ball" ? ni_grid_create_ball(c.n, c.extent, c.res, &g) : ni_grid_create_box(c.n, c.extent, c.res, &g));
  return GridPtr(g);
}

NlPtr make_nl(const std::string& spec) {
  ni_nonlinearity* nl = nullptr;
  check(ni_nonlinearity_parse(spec.c_str(), &nl));
  return NlPtr(nl);
}

ni_newton_config newton_config(const RunConfig& c) {
  ni_newton_config cfg;
  ni_newton_config_default(&cfg);
  cfg.newton_tol = c.newton_tol;
  cfg.max_newton_iters = c.max_newton_iters;
  cfg.linear_tol = c.linear_tol;
  cfg.linear_max_iter = c.linear_max_iter;
  cfg.jacobi = c.jacobi ? 1 : 0;
  cfg.adapt = c.adapt ? 1 : 0;
  cfg.max_halvings = c.max_halvings;
  return cfg;
}

ni_mesa_spec mesa_spec(const RunConfig& c) {
  ni_mesa_spec s;
  ni_mesa_spec_default(&s);
  s.a = c.a;
  s.b = c.b;
  s.T = c.T;
  s.alpha = c.alpha;
  s.n = c.n;
  s.depth = c.depth;
  return s;
}

std::string out_path(const RunConfig& c, const std::string& name) { return (fs::path(c.out) / name).string(); }

void prepare_out(const RunConfig& c) {
  std::error_code ec;
  fs::create_directories(c.out, ec);
  if (ec) throw Failure{NI_IO_ERROR, "cannot create output directory '" + c.out + "': " + ec.message()};
}

std::string num(double v) { return newton_imbed::cli::format_number(v); }

ResultPtr run_solve(const RunConfig& c, const ni_nonlinearity* nl, const ni_grid* grid) {
  const ni_newton_config cfg = newton_config(c);
  const auto spec = newton_imbed::cli::parse_schedule(c.schedule);
  ni_result* r = nullptr;
  using Kind = newton_imbed::cli::ScheduleSpec::Kind;
  if (spec.kind == Kind::automatic) {
    check(ni_run_auto(nl, grid, &cfg, &r));
  } else {
    std::vector<double> times = spec.times;
    if (spec.kind == Kind::uniform) {
      times.resize(static_cast<std::size_t>(spec.steps) + 1);
      for (int j = 0; j <= spec.steps; ++j) times[static_cast<std::size_t>(j)] = static_cast<double>(j) / spec.steps;
    }
    check(ni_run(nl, grid, times.data(), times.size(), &cfg, &r));
  }
  return ResultPtr(r);
}

struct SolutionStats {
  double residual = 0.0, l2 = 0.0, h1 = 0.0, h2 = 0.0, linf = 0.0;
};

SolutionStats stats(const ni_field* u, const ni_nonlinearity* nl) {
  SolutionStats s;
  check(ni_semilinear_residual(u, 1.0, nl, &s.residual));
  check(ni_field_norm_lp(u, 2.0, &s.l2));
  check(ni_field_norm_h1(u, &s.h1));
  check(ni_field_norm_h2(u, &s.h2));
  check(ni_field_norm_lp(u, HUGE_VAL, &s.linf));
  return s;
}

int newton_iterations(const ni_result* r) {
  int total = 0;
  for (std::size_t i = 0; i < ni_result_step_count(r); ++i) {
    ni_step_record s;
    check(ni_result_step(r, i, &s));
    total += s.newton_iters;
  }
  return total;
}

int cmd_solve(const RunConfig& c) {
  prepare_out(c);
  const GridPtr grid = make_grid(c);
  const NlPtr nl = make_nl(c.f);
  const auto start = std::chrono::steady_clock::now();
  const ResultPtr result = run_solve(c, nl.get(), grid.get());
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  ni_field* raw = nullptr;
  check(ni_result_solution(result.get(), &raw));
  const FieldPtr u(raw);
  check(ni_result_write_trace(result.get(), out_path(c, "trace.csv").c_str()));
  check(ni_field_write(u.get(), out_path(c, "solution.field").c_str()));
  const SolutionStats st = stats(u.get(), nl.get());

  ni_constants k{};
  const ni_status ks = ni_result_constants(result.get(), &k);
  std::string constants;
  if (ks == NI_OK) {
    constants = "K_est = " + num(k.K_est) + "\nA_est = " + num(k.A_est) + "\ndt_recommendation = " +
                num(k.dt_recommendation) + "\n";
  } else if (ks == NI_INSUFFICIENT_DATA) {
    constants = "K_est = n/a\nA_est = n/a\ndt_recommendation = n/a\nconstants_note = " +
                std::string(ni_last_error()) + "\n";
  } else {
    check(ks);
  }

  const std::string summary = "command = " + newton_imbed::cli::canonical_string(c) + "\nnonlinearity = " +
                              ni_nonlinearity_name(nl.get()) + "\nsteps = " +
                              std::to_string(ni_result_schedule_size(result.get()) - 1) +
                              "\nhalvings = " + std::to_string(ni_result_halvings(result.get())) +
                              "\nnewton_iterations = " + std::to_string(newton_iterations(result.get())) +
                              "\nfinal_residual = " + num(st.residual) + "\n" + constants +
                              "solution_l2 = " + num(st.l2) + "\nsolution_h1 = " + num(st.h1) +
                              "\nsolution_h2 = " + num(st.h2) + "\nsolution_linf = " + num(st.linf) +
                              "\nwall_time_s = " + num(wall) + "\n";
  const std::string path = out_path(c, "summary.txt");
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Failure{NI_IO_ERROR, "cannot open '" + path + "' for writing"};
  std::fputs(summary.c_str(), f);
  const bool bad = std::ferror(f) != 0;
  std::fclose(f);
  if (bad) throw Failure{NI_IO_ERROR, "write to '" + path + "' failed"};
  std::fputs(summary.c_str(), stdout);
  return 0;
}

int cmd_mesa(const RunConfig& c) {
  prepare_out(c);
  const ni_mesa_spec spec = mesa_spec(c);
  ni_mesa_summary s{};
  check(ni_mesa_norms(&spec, &s, out_path(c, "partition.csv").c_str(), out_path(c, "mesa_levels.csv").c_str()));
  const char* verdict = s.verdict == NI_MESA_CONVERGENT  ? "convergent (gradient partial sums settle)"
                        : s.verdict == NI_MESA_DIVERGENT ? "divergent (gradient partial sums grow)"
                                                         : "undecided";
  std::printf("alpha = %s, n = %d, depth = %d (%s regime alpha < (n-2)/2)\n", num(c.alpha).c_str(), c.n, c.depth,
              s.subcritical ? "inside" : "outside");
  std::printf("grad_part = %s\nl2_part = %s\n", num(s.grad_part).c_str(), num(s.l2_part).c_str());
  std::printf("increment ratio: last = %s, max = %s\n", num(s.last_ratio).c_str(), num(s.max_ratio).c_str());
  std::printf("verdict: %s\n", verdict);
  return 0;
}

int cmd_oscillation(const RunConfig& c) {
  prepare_out(c);
  const NlPtr nl = make_nl(c.f);
  const ni_mesa_spec spec = mesa_spec(c);
  std::vector<ni_oscillation_row> rows(c.deltas.size());
  check(ni_oscillation_probe(nl.get(), &spec, c.deltas.data(), c.deltas.size(), rows.data(),
                             out_path(c, "oscillation.csv").c_str()));
  for (const auto& r : rows) {
    std::printf("delta = %s  max = %s  min = %s  oscillation = %s\n", num(r.delta).c_str(), num(r.max).c_str(),
                num(r.min).c_str(), num(r.oscillation).c_str());
  }
  return 0;
}

int cmd_bump(const RunConfig& c) {
  prepare_out(c);
  const GridPtr grid = make_grid(c);
  const NlPtr nl = make_nl(c.f);
  std::vector<ni_bump_row> rows(c.xs.size());
  check(ni_bump_probe(nl.get(), grid.get(), c.center.data(), c.radius, c.xs.data(), c.xs.size(), c.p, rows.data(),
                      out_path(c, "bump.csv").c_str()));
  for (const auto& r : rows) {
    std::printf("x = %s  norm = %s  lower_bound = %s\n", num(r.x).c_str(), num(r.norm).c_str(),
                num(r.lower_bound).c_str());
  }
  return 0;
}

int thread_count() {
  const char* env = std::getenv("NEWTON_IMBED_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024) {
    throw Failure{NI_INVALID_ARGUMENT, "NEWTON_IMBED_THREADS must be a positive integer"};
  }
  return static_cast<int>(v);
}

struct SweepEntry {
  double eps = 0.0;
  ni_status status = NI_OK;
  std::string message;
  int steps = 0;
  int halvings = 0;
  SolutionStats stats;
  FieldPtr solution;
};

void sweep_one(const RunConfig& c, const ni_grid* grid, std::size_t index, SweepEntry& e) {
  try {
    const NlPtr nl = make_nl("heaviside-approx:" + newton_imbed::cli::format_number(e.eps));
    const ResultPtr r = run_solve(c, nl.get(), grid);
    check(ni_result_write_trace(r.get(), out_path(c, "sweep_trace_" + std::to_string(index) + ".csv").c_str()));
    ni_field* raw = nullptr;
    check(ni_result_solution(r.get(), &raw));
    e.solution.reset(raw);
    e.stats = stats(e.solution.get(), nl.get());
    e.steps = static_cast<int>(ni_result_schedule_size(r.get())) - 1;
    e.halvings = ni_result_halvings(r.get());
  } catch (const Failure& f) {
    e.status = f.status;
    e.message = f.message;
  }
}

int cmd_epsilon_sweep(const RunConfig& c) {
  prepare_out(c);
  std::vector<double> eps = c.eps;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  if (std::adjacent_find(eps.begin(), eps.end()) != eps.end()) {
    throw Failure{NI_INVALID_ARGUMENT, "--eps values must be distinct"};
  }
  const GridPtr grid = make_grid(c);
  std::vector<SweepEntry> entries(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) entries[i].eps = eps[i];

  const int threads = std::min<int>(thread_count(), static_cast<int>(eps.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < entries.size(); i = next++) sweep_one(c, grid.get(), i, entries[i]);
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  const std::string path = out_path(c, "sweep.csv");
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw Failure{NI_IO_ERROR, "cannot open '" + path + "' for writing"};
  std::fputs("eps,status,steps,halvings,residual,l2,h1,h2,linf\n", f);
  for (const SweepEntry& e : entries) {
    if (e.status == NI_OK) {
      std::fprintf(f, "%.17g,%s,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.eps, ni_status_name(e.status), e.steps,
                   e.halvings, e.stats.residual, e.stats.l2, e.stats.h1, e.stats.h2, e.stats.linf);
    } else {
      std::fprintf(f, "%.17g,%s,,,,,,,\n", e.eps, ni_status_name(e.status));
    }
  }
  std::fclose(f);

  const std::string dpath = out_path(c, "sweep_distances.csv");
  f = std::fopen(dpath.c_str(), "w");
  if (!f) throw Failure{NI_IO_ERROR, "cannot open '" + dpath + "' for writing"};
  std::fputs("eps_i,eps_j,h1_distance\n", f);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    for (std::size_t j = i + 1; j < entries.size(); ++j) {
      if (!entries[i].solution || !entries[j].solution) continue;
      double d = 0.0;
      check(ni_field_h1_distance(entries[i].solution.get(), entries[j].solution.get(), &d));
      std::fprintf(f, "%.17g,%.17g,%.17g\n", entries[i].eps, entries[j].eps, d);
    }
  }
  std::fclose(f);

  int code = 0;
  for (const SweepEntry& e : entries) {
    if (e.status == NI_OK) {
      std::printf("eps = %s  ok  residual = %s  h1 = %s\n", num(e.eps).c_str(), num(e.stats.residual).c_str(),
                  num(e.stats.h1).c_str());
    } else {
      std::printf("eps = %s  %s: %s\n", num(e.eps).c_str(), ni_status_name(e.status), e.message.c_str());
      if (code == 0) code = e.status;
    }
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig config;
  try {
    config = newton_imbed::cli::parse_run_config(std::vector<std::string>(argv + 1, argv + argc));
  } catch (const newton_imbed::cli::UsageError& e) {
    std::fputs(e.what(), e.help ? stdout : stderr);
    std::fputc('\n', e.help ? stdout : stderr);
    return e.exit_code;
  }

  try {
    if (config.command == "solve") return cmd_solve(config);
    if (config.command == "mesa") return cmd_mesa(config);
    if (config.command == "oscillation") return cmd_oscillation(config);
    if (config.command == "bump") return cmd_bump(config);
    if (config.command == "epsilon-sweep") return cmd_epsilon_sweep(config);
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s: %s\n", ni_status_name(f.status), f.message.c_str());
    return f.status;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return NI_INTERNAL_ERROR;
  }
  return NI_INTERNAL_ERROR;
}
