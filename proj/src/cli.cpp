#include "tagsync/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>

#include "tagsync/sim.hpp"
#include "tagsync/sync.hpp"
#include "tagsync/trace_io.hpp"

namespace tagsync {

namespace {

struct InputError {
  std::string message;
};

struct InsufficientData {
  std::string message;
};

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

void write_output(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw InputError{"cannot write output file '" + path + "'"};
  }
  out << content;
}

void emit(const std::optional<std::string>& path, const std::string& content, std::ostream& out) {
  if (path) {
    write_output(*path, content);
  } else {
    out << content;
  }
}

std::string load(const std::string& path) {
  try {
    return read_file(path);
  } catch (const std::runtime_error& e) {
    throw InputError{e.what()};
  }
}

ScenarioConfig load_config(const std::string& path) {
  const std::string text = load(path);
  try {
    return parse_config(text);
  } catch (const InvalidConfig& e) {
    throw InputError{path + ": " + e.what()};
  }
}

void print_summary(const MetricsSummary& s, Engine engine, std::ostream& out) {
  out << "engine: " << to_string(engine) << '\n'
      << "samples: " << s.samples << '\n'
      << "gaps: " << s.gaps << '\n'
      << "mean |gamma|: " << fmt("%.6f", s.mean_abs_gamma_ticks) << " ticks ("
      << fmt("%.6f", s.mean_abs_gamma_ms) << " ms)\n"
      << "max |gamma|: " << fmt("%.6f", s.max_abs_gamma_ticks) << " ticks ("
      << fmt("%.6f", s.max_abs_gamma_ms) << " ms)\n";
  if (engine != Engine::sender_receiver) {
    out << "converged: " << (s.converged ? "yes" : "no") << '\n';
  }
}

struct SimulateArgs {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::optional<std::string> engine;
};

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  ScenarioConfig config = load_config(args.config_path);
  if (args.seed) {
    config.seed = *args.seed;
  }
  if (args.engine) {
    auto engine = engine_from_string(*args.engine);
    if (!engine) {
      throw InputError{"unknown engine '" + *args.engine + "'"};
    }
    config.engine = *engine;
  }
  RunMetrics metrics;
  try {
    metrics = run_scenario(config);
  } catch (const InvalidConfig& e) {
    throw InputError{args.config_path + ": " + e.what()};
  }
  write_output(args.out_path, write_metrics(metrics));
  print_summary(metrics.summary, metrics.engine, out);
  return kExitOk;
}

struct RegressArgs {
  std::string trace_path;
  std::size_t window = 8;
  double tick_hz = 31250.0;
  std::optional<std::string> out_path;
};

// gamma(t_{k+N}) = S_w(C_w(t_{k+N})) - C_r(t_{k+N}) with S_w fitted on the
// N pairs preceding k+N.
int cmd_regress(const RegressArgs& args, std::ostream& out) {
  PairTrace trace;
  try {
    trace = parse_pair_trace(load(args.trace_path));
  } catch (const Error& e) {
    throw InputError{args.trace_path + ": " + e.what()};
  }
  if (args.window < 2) {
    throw InputError{"--window must be at least 2"};
  }
  if (trace.rows.size() <= args.window) {
    throw InsufficientData{args.trace_path + ": " + std::to_string(trace.rows.size()) +
                           " rows, need more than window size " + std::to_string(args.window)};
  }
  RunMetrics metrics;
  metrics.engine = Engine::sender_receiver;
  metrics.options.tick_hz = args.tick_hz;
  const double tick_us = 1e6 / args.tick_hz;
  RegressionState state(args.window);
  for (std::size_t k = 0; k < trace.rows.size(); ++k) {
    const SyncPoint& point = trace.rows[k];
    if (state.full()) {
      if (!state.fitted()) {
        throw InputError{args.trace_path + ": degenerate window before row " +
                         std::to_string(k + 1)};
      }
      const double gamma_us = sync_error(predict(state, point.cw), static_cast<double>(point.cr));
      metrics.series.push_back({static_cast<std::int64_t>(k), point.cr,
                                Fixed6::from_double(gamma_us / tick_us),
                                Fixed6::from_double(state.slope()), true});
    }
    state.push(point);
  }
  metrics.summary = summarize(metrics.series, metrics.options);
  emit(args.out_path, write_metrics(metrics), out);
  if (args.out_path) {
    print_summary(metrics.summary, metrics.engine, out);
  }
  return kExitOk;
}

struct ControllerArgs {
  std::string trace_path;
  double gain = 1e-4;
  double mu_e = 7086.0;
  double tick_hz = 31250.0;
  std::optional<double> rate_min;
  std::optional<double> rate_max;
  std::optional<std::string> out_path;
};

// Replays the integral controller over recorded bursts. Traces carry no
// reference time, so ref_time_us holds the last-event local time converted at
// the nominal tick rate.
int cmd_controller(const ControllerArgs& args, std::ostream& out, std::ostream& err) {
  BurstTrace trace;
  try {
    trace = parse_burst_trace(load(args.trace_path));
  } catch (const Error& e) {
    throw InputError{args.trace_path + ": " + e.what()};
  }
  if (!(args.mu_e > 0.0) || !(args.tick_hz > 0.0)) {
    throw InputError{"--mu-e and --tick-hz must be positive"};
  }
  const double period_s = args.mu_e / args.tick_hz;
  const double bound = convergence_bound(period_s, args.tick_hz);
  const bool within_bound = args.gain > 0.0 && args.gain < bound;
  if (!within_bound) {
    err << "warning: gain " << fmt("%.9g", args.gain) << " is outside the convergence range (0, "
        << fmt("%.9g", bound) << ")\n";
  }

  ControllerState state;
  state.gain = args.gain;
  state.mu_e = args.mu_e;
  if (args.rate_min) state.rate_min = *args.rate_min;
  if (args.rate_max) state.rate_max = *args.rate_max;

  RunMetrics metrics;
  metrics.engine = Engine::event_based;
  metrics.options.tick_hz = args.tick_hz;
  metrics.options.rate_min = args.rate_min;
  metrics.options.rate_max = args.rate_max;
  const double tick_us = 1e6 / args.tick_hz;
  for (const BurstRow& row : trace.rows) {
    state = on_first_blockwrite(state, row.cw_first);
    const ControllerUpdate update = on_last_blockwrite(state, row.cw_last);
    state = update.state;
    if (!std::isfinite(update.gamma) || !std::isfinite(state.rate_multiplier)) {
      err << "warning: controller diverged at burst " << row.burst_index << "\n";
      break;
    }
    metrics.series.push_back({row.burst_index,
                              std::llround(static_cast<double>(row.cw_last) * tick_us),
                              Fixed6::from_double(update.gamma),
                              Fixed6::from_double(state.rate_multiplier), true});
  }
  metrics.summary = summarize(metrics.series, metrics.options);
  metrics.summary.gain = args.gain;
  metrics.summary.within_bound = within_bound;
  emit(args.out_path, write_metrics(metrics), out);
  if (args.out_path) {
    print_summary(metrics.summary, metrics.engine, out);
  }
  return kExitOk;
}

struct SweepArgs {
  std::string config_path;
  std::vector<double> gains;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_path;
};

int cmd_sweep_beta(const SweepArgs& args, std::ostream& out) {
  ScenarioConfig config = load_config(args.config_path);
  if (args.seed) {
    config.seed = *args.seed;
  }
  std::vector<MetricsSummary> summaries;
  try {
    summaries = sweep_gain(config, args.gains);
  } catch (const InvalidConfig& e) {
    throw InputError{args.config_path + ": " + e.what()};
  }
  std::string table =
      "gain,samples,gaps,mean_abs_gamma_ticks,max_abs_gamma_ticks,std_gamma_ticks,"
      "mean_abs_gamma_ms,converged,within_bound\n";
  for (const auto& s : summaries) {
    table += fmt("%.9g", s.gain) + ',' + std::to_string(s.samples) + ',' +
             std::to_string(s.gaps) + ',' + fmt("%.6f", s.mean_abs_gamma_ticks) + ',' +
             fmt("%.6f", s.max_abs_gamma_ticks) + ',' + fmt("%.6f", s.std_gamma_ticks) + ',' +
             fmt("%.6f", s.mean_abs_gamma_ms) + ',' + (s.converged ? '1' : '0') + ',' +
             (s.within_bound ? '1' : '0') + '\n';
  }
  if (args.out_path) {
    write_output(*args.out_path, table);
  }
  out << table;
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Clock synchronization simulator for intermittently powered RFID tags", "tagsync"};
  app.require_subcommand(1);
  std::string format = "csv";
  const auto add_format = [&format](CLI::App* cmd) {
    cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv"}));
  };

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write its metrics");
  simulate->add_option("config", sim.config_path, "Scenario file")->required();
  simulate->add_option("--seed", sim.seed, "Override the scenario seed");
  simulate->add_option("--out", sim.out_path, "Metrics CSV path")->required();
  simulate->add_option("--engine", sim.engine, "sender_receiver | event_based | none");
  add_format(simulate);

  RegressArgs reg;
  auto* regress = app.add_subcommand("regress", "Sliding-window regression over a pair trace");
  regress->add_option("trace", reg.trace_path, "Pair trace CSV")->required();
  regress->add_option("--window", reg.window, "Window size N")->capture_default_str();
  regress->add_option("--tick-hz", reg.tick_hz, "Nominal tick rate")->capture_default_str();
  regress->add_option("--out", reg.out_path, "Metrics CSV path (default: standard output)");
  add_format(regress);

  ControllerArgs ctl;
  auto* controller = app.add_subcommand("controller", "Replay the integral controller over bursts");
  controller->add_option("trace", ctl.trace_path, "Burst trace CSV")->required();
  controller->add_option("--gain", ctl.gain, "Integral gain")->capture_default_str();
  controller->add_option("--mu-e", ctl.mu_e, "Mean event period, ticks")->capture_default_str();
  controller->add_option("--tick-hz", ctl.tick_hz, "Nominal tick rate")->capture_default_str();
  controller->add_option("--rate-min", ctl.rate_min, "Lower clamp on the rate multiplier");
  controller->add_option("--rate-max", ctl.rate_max, "Upper clamp on the rate multiplier");
  controller->add_option("--out", ctl.out_path, "Metrics CSV path (default: standard output)");
  add_format(controller);

  SweepArgs sweep;
  auto* sweep_beta = app.add_subcommand("sweep-beta", "Run one scenario per integral gain");
  sweep_beta->add_option("config", sweep.config_path, "Scenario file")->required();
  sweep_beta->add_option("--gains", sweep.gains, "Comma-separated gains")
      ->required()
      ->delimiter(',');
  sweep_beta->add_option("--seed", sweep.seed, "Override the scenario seed");
  sweep_beta->add_option("--out", sweep.out_path, "Also write the table to this path");
  add_format(sweep_beta);

  std::vector<const char*> argv;
  argv.push_back("tagsync");
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, out);
    if (regress->parsed()) return cmd_regress(reg, out);
    if (controller->parsed()) return cmd_controller(ctl, out, err);
    if (sweep_beta->parsed()) return cmd_sweep_beta(sweep, out);
  } catch (const InputError& e) {
    err << "error: " << e.message << '\n';
    return kExitInputError;
  } catch (const InsufficientData& e) {
    err << "error: " << e.message << '\n';
    return kExitInsufficientData;
  }
  return kExitInputError;
}

}  // namespace tagsync
