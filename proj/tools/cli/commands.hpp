#pragma once

#include "mareg/model_core.hpp"
#include "mareg/table.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mareg::cli {

enum class Command { simulate, estimate, cv, bound };

/// Fully typed options for one invocation.
struct RunConfig {
  Command command = Command::simulate;
  std::string y_path;
  std::string x_path;
  std::string scenario;
  std::string regime;
  std::vector<Index> n_grid;
  std::vector<Index> p_grid;
  std::optional<double> eta;
  std::optional<double> delta;
  std::optional<double> beta;
  std::optional<double> lambda2_exponent;
  std::size_t reps = 200;
  std::uint64_t seed = 1;
  std::vector<double> weights;
  std::string out;
  TableFormat format = TableFormat::csv;
  std::optional<double> a;
  std::optional<double> b;
  std::optional<double> c;
  std::optional<double> d;
  std::optional<Index> q;
  double step = 1e-5;
  double max_cost = 1e12;
  unsigned workers = 0;
};

using RawOptions = std::map<std::string, std::string>;

/// Converts raw string options (flag name without "--" -> value) into a RunConfig.
/// Throws ValidationError naming the offending flag.
RunConfig resolve_config(Command command, const RawOptions& raw);

/// Each command writes its document to config.out (atomically) or to `out`
/// when no path is given, and diagnostics to `err`. They return the exit code.
int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_estimate(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_cv(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_bound(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Full command-line entry point: parses arguments (argv[0] is the program name),
/// merges a --config file under explicit flags, dispatches, and maps errors to
/// exit codes (0 success, 2 usage/validation, 1 internal numeric failure).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mareg::cli
