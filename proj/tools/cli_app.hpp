#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nbstein/parasite.hpp"

namespace nbstein::cli {

enum ExitCode : int {
  kOk = 0,
  kCertificationFailed = 1,
  kUsage = 2,
  kAccuracy = 3,
};

/// Raised for unknown flags, malformed values and out-of-range values.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by parse_args for --help; carries the rendered help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Args {
  std::optional<double> r, p, a, b, t, T, theta, tol;
  std::optional<std::int64_t> i, N, z0;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> samples;
  unsigned workers = 1;
  std::optional<std::uint64_t> hosts;
  std::string out;
  std::string format;  // empty: the command's natural format
  std::string grid = "default";
  std::vector<std::string> scenario_paths;
  std::vector<ScenarioParams> scenarios;
};

struct Command {
  std::string name;
  Args args;
};

/// Subcommand names in help order.
const std::vector<std::string>& command_names();

/// argv[0] is the program name.
Command parse_args(const std::vector<std::string>& argv);

/// Executes a parsed command. Output goes to `out` unless --out names a file;
/// diagnostics go to `err`.
int run(const Command& cmd, std::ostream& out, std::ostream& err);

/// parse_args + run with the exit-code mapping applied to every error.
int main_entry(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace nbstein::cli
