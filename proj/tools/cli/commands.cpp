#include "cli/commands.hpp"

#include "cli/io.hpp"
#include "mareg/bounds.hpp"
#include "mareg/errors.hpp"
#include "mareg/estimators.hpp"
#include "mareg/harness.hpp"
#include "mareg/rng.hpp"
#include "mareg/simgen.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <set>
#include <sstream>

namespace mareg::cli {
namespace {

const std::vector<double> kDefaultWeights = {0.5, 1.0, 0.0, 0.1, 0.2, 0.3, 0.4, 0.6};

const std::map<Command, std::vector<std::string>>& command_keys() {
  static const std::map<Command, std::vector<std::string>> keys = {
      {Command::simulate,
       {"scenario", "regime", "n", "p", "eta", "delta", "beta", "lambda2-exponent", "reps", "seed",
        "weights", "out", "format", "max-cost", "workers"}},
      {Command::estimate, {"y", "x", "weights", "out", "format"}},
      {Command::cv, {"y", "x", "weights", "out", "format"}},
      {Command::bound, {"a", "b", "c", "d", "q", "n", "p", "scenario", "eta", "step", "out", "format"}},
  };
  return keys;
}

const char* command_name(Command c) {
  switch (c) {
    case Command::simulate:
      return "simulate";
    case Command::estimate:
      return "estimate";
    case Command::cv:
      return "cv";
    case Command::bound:
      return "bound";
  }
  return "?";
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  throw ValidationError("invalid value for --" + key + ": '" + value + "' (" + why + ")");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double to_double(const std::string& key, std::string_view text) {
  const std::string_view s = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) {
    bad_value(key, std::string(text), "expected a finite number");
  }
  return v;
}

long long to_integer(const std::string& key, std::string_view text) {
  const std::string_view s = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
    bad_value(key, std::string(text), "expected an integer");
  }
  return v;
}

std::vector<std::string_view> split_list(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = s.find(',', start);
    out.push_back(trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start)));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

std::vector<Index> to_index_list(const std::string& key, const std::string& value) {
  std::vector<Index> out;
  for (auto item : split_list(value)) {
    const long long v = to_integer(key, item);
    if (v < 1) bad_value(key, value, "sizes must be positive");
    out.push_back(static_cast<Index>(v));
  }
  return out;
}

std::vector<double> to_weight_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (auto item : split_list(value)) {
    const double w = to_double(key, item);
    if (!(w >= 0.0 && w <= 1.0)) bad_value(key, value, "weights must lie in [0, 1]");
    out.push_back(w);
  }
  return out;
}

// Fixed weights in display order: T, E, R first, then ascending.
std::vector<double> ordered_weights(const std::vector<double>& weights) {
  std::vector<double> out;
  for (const auto& est : estimators_for_weights(weights)) {
    if (est.kind == EstimatorSpec::Kind::fixed) out.push_back(est.w);
  }
  return out;
}

std::string fmt(double v, const char* spec = "%.10g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void emit(const RunConfig& config, const std::string& document, std::ostream& out) {
  if (config.out.empty() || config.out == "-") {
    out << document;
  } else {
    write_file_atomically(config.out, document);
  }
}

std::string two_column(const std::vector<std::pair<std::string, std::string>>& rows, TableFormat format,
                       const std::string& key_header, const std::string& value_header) {
  std::ostringstream os;
  if (format == TableFormat::csv) {
    os << key_header << ',' << value_header << '\n';
    for (const auto& [k, v] : rows) os << k << ',' << v << '\n';
  } else {
    os << "| " << key_header << " | " << value_header << " |\n|---|---|\n";
    for (const auto& [k, v] : rows) os << "| " << k << " | " << v << " |\n";
  }
  return os.str();
}

Dataset load_dataset(const RunConfig& config) {
  if (config.y_path.empty()) throw ValidationError("missing required option --y");
  if (config.x_path.empty()) throw ValidationError("missing required option --x");
  Matrix y = read_csv_matrix(config.y_path);
  const Matrix x_raw = read_csv_matrix(config.x_path);
  if (y.rows() != x_raw.rows()) {
    std::ostringstream os;
    os << "row count mismatch: Y (" << config.y_path << ") has " << y.rows() << " rows but X ("
       << config.x_path << ") has " << x_raw.rows() << " rows";
    throw ShapeError(os.str());
  }
  return Dataset(std::move(y), center_columns(x_raw));
}

std::string describe(const ModelSpec& spec) {
  std::ostringstream os;
  os << "p=" << spec.p << " q=" << spec.q << " n=" << spec.n << " lambda1=" << fmt(spec.lambdas(0))
     << " lambda2=" << fmt(spec.lambdas.size() > 1 ? spec.lambdas(1) : 0.0)
     << " seed=" << spec.master_seed;
  return os.str();
}

std::vector<ScenarioPoint> scenario_points(const RunConfig& config) {
  std::vector<ScenarioPoint> points;
  const std::string& sc = config.scenario;
  auto seed_for = [&](std::size_t j) { return derive_seed(config.seed, StreamTag::scenario, j); };
  auto wrap = [](const std::string& field, auto&& build) {
    try {
      return build();
    } catch (const ValidationError& e) {
      throw ValidationError("--" + field + ": " + e.what());
    }
  };

  if (sc == "table1" || sc == "table2") {
    const std::vector<Index> ns = config.n_grid.empty() ? std::vector<Index>{20, 50, 100, 200, 500} : config.n_grid;
    const double eta = config.eta.value_or(1.0 / 3.0);
    if (sc == "table2" && !(eta > 0.0)) throw ValidationError("invalid value for --eta: must be positive");
    for (std::size_t j = 0; j < ns.size(); ++j) {
      ModelSpec spec = wrap("n", [&] {
        return sc == "table1" ? scenario_table1(ns[j], seed_for(j)) : scenario_table2(ns[j], eta, seed_for(j));
      });
      points.push_back({"n=" + std::to_string(ns[j]), std::move(spec)});
    }
    return points;
  }
  if (sc == "table3a" || sc == "table3b") {
    const std::vector<Index> ps = config.p_grid.empty() ? std::vector<Index>{20, 50, 100, 200} : config.p_grid;
    const SpikeCase spike = sc == "table3a" ? SpikeCase::weak_spike : SpikeCase::strong_spike;
    for (std::size_t j = 0; j < ps.size(); ++j) {
      ModelSpec spec = wrap("p", [&] { return scenario_table3(ps[j], spike, seed_for(j)); });
      points.push_back({"p=" + std::to_string(ps[j]) + " (n=" + std::to_string(spec.n) + ")", std::move(spec)});
    }
    return points;
  }
  if (sc == "custom") {
    RegimeSpec regime;
    if (config.regime == "traditional") {
      if (config.n_grid.empty()) throw ValidationError("missing required option --n for --regime traditional");
      regime = RegimeSpec::traditional(config.n_grid, config.p_grid.empty() ? 10 : config.p_grid.front());
    } else if (config.regime == "weak") {
      if (config.n_grid.empty()) throw ValidationError("missing required option --n for --regime weak");
      if (!config.eta) throw ValidationError("missing required option --eta for --regime weak");
      regime = RegimeSpec::weak_identifiability(*config.eta, config.n_grid,
                                                config.p_grid.empty() ? 10 : config.p_grid.front());
    } else if (config.regime == "large-p") {
      if (config.p_grid.empty()) throw ValidationError("missing required option --p for --regime large-p");
      regime = RegimeSpec::large_p_large_n(config.delta.value_or(0.8), config.beta.value_or(0.8),
                                           config.lambda2_exponent.value_or(0.0), config.p_grid);
    } else {
      throw ValidationError("invalid value for --regime: '" + config.regime +
                            "' (expected traditional, weak or large-p)");
    }
    ExperimentPlan plan = wrap("regime", [&] { return regime_plan(regime, {EstimatorSpec::plugin()}, 1, config.seed); });
    return plan.points;
  }
  throw ValidationError("invalid value for --scenario: '" + sc +
                        "' (expected table1, table2, table3a, table3b or custom)");
}

}  // namespace

RunConfig resolve_config(Command command, const RawOptions& raw) {
  const auto& allowed = command_keys().at(command);
  for (const auto& [key, value] : raw) {
    if (key == "config") continue;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ValidationError("unknown option --" + key + " for command " + command_name(command));
    }
  }

  RunConfig c;
  c.command = command;
  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = raw.find(key);
    return it == raw.end() ? nullptr : &it->second;
  };

  if (const auto* v = get("y")) c.y_path = *v;
  if (const auto* v = get("x")) c.x_path = *v;
  if (const auto* v = get("scenario")) c.scenario = *v;
  if (const auto* v = get("regime")) c.regime = *v;
  if (const auto* v = get("n")) c.n_grid = to_index_list("n", *v);
  if (const auto* v = get("p")) c.p_grid = to_index_list("p", *v);
  if (const auto* v = get("eta")) {
    c.eta = to_double("eta", *v);
    if (!(*c.eta > 0.0)) bad_value("eta", *v, "must be positive");
  }
  if (const auto* v = get("delta")) {
    c.delta = to_double("delta", *v);
    if (!(*c.delta > 0.0)) bad_value("delta", *v, "must be positive");
  }
  if (const auto* v = get("beta")) {
    c.beta = to_double("beta", *v);
    if (!(*c.beta <= 1.0)) bad_value("beta", *v, "must be at most 1");
  }
  if (const auto* v = get("lambda2-exponent")) c.lambda2_exponent = to_double("lambda2-exponent", *v);
  if (const auto* v = get("reps")) {
    const long long r = to_integer("reps", *v);
    if (r < 1) bad_value("reps", *v, "must be at least 1");
    c.reps = static_cast<std::size_t>(r);
  }
  if (const auto* v = get("seed")) {
    const std::string_view s = trim(*v);
    std::uint64_t seed = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) bad_value("seed", *v, "expected an unsigned 64-bit integer");
    c.seed = seed;
  }
  c.weights = kDefaultWeights;
  if (const auto* v = get("weights")) c.weights = to_weight_list("weights", *v);
  if (const auto* v = get("out")) c.out = *v;
  if (const auto* v = get("format")) {
    if (*v == "csv") {
      c.format = TableFormat::csv;
    } else if (*v == "markdown") {
      c.format = TableFormat::markdown;
    } else {
      bad_value("format", *v, "expected csv or markdown");
    }
  }
  for (const char* key : {"a", "b", "c", "d"}) {
    if (const auto* v = get(key)) {
      const double x = to_double(key, *v);
      std::optional<double>& slot = key[0] == 'a' ? c.a : key[0] == 'b' ? c.b : key[0] == 'c' ? c.c : c.d;
      slot = x;
    }
  }
  if (const auto* v = get("q")) {
    const long long q = to_integer("q", *v);
    if (q < 1) bad_value("q", *v, "must be positive");
    c.q = static_cast<Index>(q);
  }
  if (const auto* v = get("step")) {
    c.step = to_double("step", *v);
    if (!(c.step > 0.0 && c.step <= 0.01)) bad_value("step", *v, "must lie in (0, 0.01]");
  }
  if (const auto* v = get("max-cost")) {
    c.max_cost = to_double("max-cost", *v);
    if (c.max_cost < 0.0) bad_value("max-cost", *v, "must be non-negative (0 disables the limit)");
  }
  if (const auto* v = get("workers")) {
    const long long w = to_integer("workers", *v);
    if (w < 0 || w > 4096) bad_value("workers", *v, "must lie in [0, 4096]");
    c.workers = static_cast<unsigned>(w);
  }

  if (command == Command::simulate && c.scenario.empty()) {
    throw ValidationError("missing required option --scenario");
  }
  if (command == Command::bound && c.n_grid.size() > 1) bad_value("n", get("n") ? *get("n") : "", "bound takes a single n");
  return c;
}

int cmd_simulate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  ExperimentPlan plan;
  plan.points = scenario_points(config);
  plan.estimators = estimators_for_weights(config.weights);
  plan.replications = config.reps;
  plan.master_seed = config.seed;
  plan.cost_limit = config.max_cost;
  plan.workers = config.workers;

  err << "scenario=" << config.scenario << " seed=" << config.seed << " reps=" << config.reps << '\n';
  for (const auto& pt : plan.points) err << "  " << pt.label << ": " << describe(pt.spec) << '\n';

  const McResult result = run_experiment(plan);
  emit(config, emit_table(result, config.format), out);
  err << "wall time " << fmt(result.wall_seconds, "%.3f") << " s\n";
  return 0;
}

int cmd_estimate(const RunConfig& config, std::ostream& out, std::ostream&) {
  const Dataset data = load_dataset(config);
  const SumOfSquares ss = sums_of_squares(data);
  const PluginWeights pw = estimate_abcd(ss);

  std::vector<std::string> labels;
  std::vector<Vector> estimates;
  for (double w : ordered_weights(config.weights)) {
    labels.push_back(WeightRule::fixed_weight(w).label());
    estimates.push_back(gamma1_hat(ss, w).vector);
  }
  labels.push_back("plugin");
  estimates.push_back(gamma1_hat(ss, pw.w_hat).vector);

  const double tr_sigma = pw.sigma_hat.trace();
  const std::vector<std::pair<std::string, std::string>> summary = {
      {"n", std::to_string(data.n())},
      {"p", std::to_string(data.p())},
      {"q", std::to_string(data.q())},
      {"w_hat_raw", fmt(pw.w_hat_raw)},
      {"w_hat", fmt(pw.w_hat)},
      {"lambda1_hat", fmt(pw.lambda1_hat)},
      {"lambda2_hat", fmt(pw.lambda2_hat)},
      {"contribution_ratio_1", fmt(pw.lambda1_hat / tr_sigma)},
      {"contribution_ratio_2", fmt(pw.lambda2_hat / tr_sigma)},
  };

  std::ostringstream os;
  const bool csv = config.format == TableFormat::csv;
  const char* sep = csv ? "," : " | ";
  os << (csv ? "" : "| ") << "coordinate";
  for (const auto& l : labels) os << sep << l;
  os << (csv ? "\n" : " |\n");
  if (!csv) {
    os << "|---|";
    for (std::size_t i = 0; i < labels.size(); ++i) os << "---|";
    os << '\n';
  }
  for (Index i = 0; i < data.p(); ++i) {
    os << (csv ? "" : "| ") << i + 1;
    for (const auto& v : estimates) os << sep << fmt(v(i), "%.10f");
    os << (csv ? "\n" : " |\n");
  }
  os << '\n' << two_column(summary, config.format, "quantity", "value");
  emit(config, os.str(), out);
  return 0;
}

int cmd_cv(const RunConfig& config, std::ostream& out, std::ostream&) {
  const Dataset data = load_dataset(config);
  if (data.n() <= 3 + data.q()) {
    std::ostringstream os;
    os << "cross-validation needs n > 3 + q so every fold supports the plug-in weight; got n = " << data.n()
       << ", q = " << data.q();
    throw DegreesOfFreedomError(os.str());
  }
  std::vector<WeightRule> rules;
  for (double w : ordered_weights(config.weights)) rules.push_back(WeightRule::fixed_weight(w));
  rules.push_back(WeightRule::plugin());
  rules.push_back(WeightRule::ols());

  std::vector<std::pair<std::string, std::string>> rows;
  for (const auto& rule : rules) rows.emplace_back(rule.label(), fmt(loo_cv_mspe(data, rule), "%.3f"));
  emit(config, two_column(rows, config.format, "rule", "mspe"), out);
  return 0;
}

int cmd_bound(const RunConfig& config, std::ostream& out, std::ostream& err) {
  AbcdParams params;
  bool have_scenario = !config.scenario.empty();
  if (have_scenario) {
    ModelSpec spec;
    const std::uint64_t seed = derive_seed(config.seed, StreamTag::scenario, 0);
    const std::string& sc = config.scenario;
    try {
      if (sc == "table1") {
        spec = scenario_table1(config.n_grid.empty() ? 100 : config.n_grid.front(), seed);
      } else if (sc == "table2") {
        spec = scenario_table2(config.n_grid.empty() ? 100 : config.n_grid.front(), config.eta.value_or(1.0 / 3.0), seed);
      } else if (sc == "table3a" || sc == "table3b") {
        spec = scenario_table3(config.p_grid.empty() ? 50 : config.p_grid.front(),
                               sc == "table3a" ? SpikeCase::weak_spike : SpikeCase::strong_spike, seed);
      } else {
        throw ValidationError("invalid value for --scenario: '" + sc + "' (expected table1, table2, table3a or table3b)");
      }
    } catch (const ValidationError& e) {
      throw ValidationError(std::string("--scenario: ") + e.what());
    }
    // E||X alpha||^2 for a centered standard-normal design.
    const double expected_c = static_cast<double>(spec.n - 1) * spec.alpha.squaredNorm();
    params = spec.oracle_params(expected_c);
  } else {
    for (const auto& [name, value] : {std::pair{"a", config.a}, {"b", config.b}, {"c", config.c}, {"d", config.d}}) {
      if (!value) throw ValidationError(std::string("missing required option --") + name + " (or give --scenario)");
    }
    if (!config.q) throw ValidationError("missing required option --q (or give --scenario)");
    if (config.n_grid.empty()) throw ValidationError("missing required option --n (or give --scenario)");
  }
  if (config.a) params.a = *config.a;
  if (config.b) params.b = *config.b;
  if (config.c) params.c = *config.c;
  if (config.d) params.d = *config.d;
  if (config.q) params.q = *config.q;
  if (!have_scenario || !config.n_grid.empty()) params.n = config.n_grid.front();
  params.validate();

  const double ws = w_star(params);
  const double argmin = grid_argmin_bound(params, config.step);

  std::vector<std::pair<std::string, std::string>> rows = {
      {"a", fmt(params.a)}, {"b", fmt(params.b)}, {"c", fmt(params.c)}, {"d", fmt(params.d)},
      {"q", std::to_string(params.q)}, {"n", std::to_string(params.n)},
      {"w_star", fmt(ws)}, {"grid_step", fmt(config.step)}, {"grid_argmin", fmt(argmin)},
  };
  for (int k = 0; k <= 10; ++k) {
    const double w = k / 10.0;
    rows.emplace_back("bound(w=" + fmt(w, "%.1f") + ")", fmt(mse_upper_bound(params, w)));
  }
  rows.emplace_back("bound(w=w_star)", fmt(mse_upper_bound(params, ws)));
  emit(config, two_column(rows, config.format, "quantity", "value"), out);

  if (!(std::abs(argmin - ws) <= 2.0 * config.step)) {
    err << "error: grid argmin " << fmt(argmin) << " disagrees with closed-form w* " << fmt(ws)
        << " by more than 2 * step\n";
    return 1;
  }
  return 0;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Weighted sum-of-squares estimators for the multivariate allometric regression model", "mareg"};
  app.require_subcommand(1);

  struct Sub {
    Command command;
    CLI::App* app;
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
  };
  const std::map<std::string, std::string> help = {
      {"scenario", "table1 | table2 | table3a | table3b | custom"},
      {"regime", "custom regime: traditional | weak | large-p"},
      {"n", "comma-separated sample sizes"},
      {"p", "comma-separated response dimensions"},
      {"eta", "weak identifiability exponent (lambda1 - lambda2 = n^-eta)"},
      {"delta", "large-p regime: n = floor(p^delta)"},
      {"beta", "large-p regime: lambda1 = p^beta"},
      {"lambda2-exponent", "large-p regime: lambda2 = p^exponent"},
      {"reps", "Monte Carlo replications (default 200)"},
      {"seed", "master seed (default 1)"},
      {"weights", "comma-separated fixed weights in [0, 1]"},
      {"out", "output path (default: standard output)"},
      {"format", "csv | markdown"},
      {"max-cost", "abort plans estimated above this many flops (0 = no limit)"},
      {"workers", "worker threads (default: MAREG_WORKERS or all cores)"},
      {"y", "CSV file with the n x p responses"},
      {"x", "CSV file with the n x q explanatory variables"},
      {"a", "tr(Sigma^2) + tr(Sigma)^2"},
      {"b", "lambda1 + tr(Sigma)"},
      {"c", "||X alpha||^2"},
      {"d", "lambda1 - lambda2"},
      {"q", "number of explanatory variables"},
      {"step", "grid step for the argmin check (default 1e-5)"},
  };
  std::vector<std::unique_ptr<Sub>> subs;
  for (Command command : {Command::simulate, Command::estimate, Command::cv, Command::bound}) {
    auto sub = std::make_unique<Sub>();
    sub->command = command;
    sub->app = app.add_subcommand(command_name(command));
    sub->options["config"] = sub->app->add_option("--config", sub->values["config"], "key = value file; flags override it");
    for (const auto& key : command_keys().at(command)) {
      sub->options[key] = sub->app->add_option("--" + key, sub->values[key], help.at(key));
    }
    subs.push_back(std::move(sub));
  }

  std::vector<char*> argv;
  std::vector<std::string> storage = args;
  if (storage.empty()) storage.emplace_back("mareg");
  for (auto& s : storage) argv.push_back(s.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    for (const auto& sub : subs) {
      if (!sub->app->parsed()) continue;
      RawOptions raw;
      if (sub->options["config"]->count() > 0) raw = read_key_value_file(sub->values["config"]);
      for (const auto& [key, opt] : sub->options) {
        if (key != "config" && opt->count() > 0) raw[key] = sub->values[key];
      }
      if (sub->command == Command::simulate && raw.find("workers") == raw.end()) {
        if (const char* env = std::getenv("MAREG_WORKERS"); env != nullptr && *env != '\0') raw["workers"] = env;
      }
      const RunConfig config = resolve_config(sub->command, raw);
      switch (sub->command) {
        case Command::simulate:
          return cmd_simulate(config, out, err);
        case Command::estimate:
          return cmd_estimate(config, out, err);
        case Command::cv:
          return cmd_cv(config, out, err);
        case Command::bound:
          return cmd_bound(config, out, err);
      }
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
  err << "error: no command given\n";
  return 2;
}

}  // namespace mareg::cli
