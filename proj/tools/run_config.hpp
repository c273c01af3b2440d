#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace newton_imbed::cli {

/// Thrown for malformed command lines; `what()` is meant for the user.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
  int exit_code = 2;
  bool help = false;  // --help was requested; the message is the help text
};

struct ScheduleSpec {
  enum class Kind { uniform, explicit_list, automatic };
  Kind kind = Kind::uniform;
  int steps = 4;
  std::vector<double> times;  // explicit_list only
};

ScheduleSpec parse_schedule(const std::string& text);
std::string format_schedule(const ScheduleSpec& spec);

/// Everything one invocation needs. Only the fields of the chosen subcommand
/// are read from the command line; the rest keep their defaults.
struct RunConfig {
  std::string command;  // solve, mesa, oscillation, bump, epsilon-sweep

  std::string domain = "ball";
  int n = 3;
  double extent = 1.0;  // R for balls, L for boxes
  int res = 127;

  std::string f = "arccot:1,0,1,0";
  std::string schedule = "auto";
  double newton_tol = 1e-6;
  int max_newton_iters = 30;
  double linear_tol = 1e-11;
  int linear_max_iter = 20000;
  bool jacobi = false;
  bool adapt = true;
  int max_halvings = 20;

  std::string out = ".";
  std::uint64_t seed = 0;

  double a = 0.0;
  double b = 1.0;
  double T = 1.0;
  double alpha = 0.2;
  int depth = 16;
  std::vector<double> deltas{0.5, 0.05, 0.005};

  std::vector<double> xs{1.0, 10.0, 100.0};
  double p = std::numeric_limits<double>::infinity();
  std::vector<double> center;  // empty means the middle of the box
  double radius = 0.0;         // 0 means 0.4 L

  std::vector<double> eps{1.0, 0.1, 0.01};

  bool operator==(const RunConfig&) const = default;
};

/// Parses arguments without the program name. Throws UsageError.
RunConfig parse_run_config(const std::vector<std::string>& args);

/// Canonical argument list: the subcommand, then every option it reads in a
/// fixed order with shortest round-trip numbers.
std::vector<std::string> serialize(const RunConfig& config);
std::string canonical_string(const RunConfig& config);

/// Shortest decimal that reads back to the same double.
std::string format_number(double v);
std::vector<double> parse_list(const std::string& text, const std::string& what);

}  // namespace newton_imbed::cli
