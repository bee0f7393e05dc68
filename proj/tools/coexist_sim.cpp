// coexist-sim: batch driver for the spectrum-sharing experiments.
#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <set>

#include "coexist/radar_nsp.hpp"
#include "coexist/sim_harness.hpp"

using namespace coexist;

namespace {

ScenarioConfig config_from(const std::string& path) {
  return path.empty() ? ScenarioConfig{} : load_config(path);
}

void print_summary(const std::vector<ResultRow>& rows) {
  static const std::set<std::string> shown = {"gamma",         "interference", "iterations",
                                              "converged",     "pod_sharing",  "pod_no_sharing",
                                              "complexity_estimate", "solve_seconds"};
  std::printf("%-14s %-22s %-14s %6s %8s\n", "sweep", "metric", "mean", "n", "excluded");
  for (const auto& [key, m] : summarize(rows)) {
    if (!shown.count(key.second)) continue;
    std::printf("%-14.6g %-22s %-14.6g %6d %8d\n", key.first, key.second.c_str(), m.mean, m.count,
                m.excluded);
  }
}

int run(const std::string& experiment, const std::string& config, const std::string& out,
        const std::string& format, int trials, std::optional<std::uint64_t> seed, bool full_scale,
        const std::vector<double>& sweep, int workers) {
  ScenarioConfig cfg = config_from(config);
  if (seed) cfg.seed = *seed;
  for (const auto& w : validate_config(cfg)) std::cerr << "warning: " << w << "\n";
  ExperimentSpec spec = default_experiment(parse_experiment(experiment), cfg, full_scale);
  if (trials > 0) spec.trials = trials;
  if (!sweep.empty()) spec.sweep = sweep;
  spec.workers = workers;
  std::vector<ResultRow> rows = run_experiment(spec);
  emit(rows, parse_format(format), out);
  print_summary(rows);
  double fail = failure_rate(rows);
  std::printf("trials %d, sweep points %zu, failed %.1f%%, rows %zu -> %s\n", spec.trials,
              spec.sweep.size(), 100 * fail, rows.size(), out.c_str());
  return fail > 0.2 ? 2 : 0;
}

int validate(const std::string& config) {
  ScenarioConfig cfg = config_from(config);
  for (const auto& w : validate_config(cfg)) std::cout << "# warning: " << w << "\n";
  std::cout << describe_config(cfg);
  SeededRng rng(cfg.seed);
  ChannelSet chs = draw_channel_set(cfg, rng);
  const int rows = chs.stack_rows();
  std::cout << "# links " << chs.size() << ", stacked radar-cellular rows " << rows
            << ", null-space dimension " << std::max(0, cfg.radar_antennas - rows) << "\n";
  if (cfg.nsp_enabled && cfg.radar_antennas <= rows)
    std::cout << "# warning: no null space at this radar size; the radar stays silent when sharing\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radar/cellular spectrum-sharing simulator"};
  app.require_subcommand(1);

  auto* run_cmd = app.add_subcommand("run", "run one experiment and write its rows");
  std::string experiment, config, out, format = "csv";
  int trials = 0, workers = 0;
  std::uint64_t seed_value = 0;
  bool full_scale = false;
  std::vector<double> sweep;
  run_cmd->add_option("--experiment", experiment,
                      "convergence | complexity | interference_vs_rsi | interference_vs_qos | "
                      "pod_vs_power | pod_vs_pfa")
      ->required();
  run_cmd->add_option("--config", config, "scenario file (key = value)");
  run_cmd->add_option("--out", out, "output path")->required();
  run_cmd->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  run_cmd->add_option("--trials", trials, "trials per sweep point")->check(CLI::PositiveNumber);
  auto* seed_opt = run_cmd->add_option("--seed", seed_value, "base seed");
  run_cmd->add_flag("--full-scale", full_scale, "R = 8 and 100 trials");
  run_cmd->add_option("--sweep", sweep, "override the sweep values")->delimiter(',');
  run_cmd->add_option("--workers", workers, "worker threads (0: all cores)");

  auto* val_cmd = app.add_subcommand("validate", "check a scenario file and print resolved values");
  std::string val_config;
  val_cmd->add_option("--config", val_config, "scenario file")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run_cmd) {
      std::optional<std::uint64_t> seed;
      if (*seed_opt) seed = seed_value;
      return run(experiment, config, out, format, trials, seed, full_scale, sweep, workers);
    }
    return validate(val_config);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
