#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coexist/channel_model.hpp"
#include "coexist/robust_beamforming.hpp"

namespace coexist {

struct IoError : Error {
  using Error::Error;
};

enum class ExperimentName {
  Convergence,
  Complexity,
  InterferenceVsRsi,
  InterferenceVsQos,
  PodVsPower,
  PodVsPfa
};

const char* to_string(ExperimentName e);
ExperimentName parse_experiment(const std::string& s);

struct ExperimentSpec {
  ExperimentName name = ExperimentName::Convergence;
  std::vector<double> sweep;
  int trials = 100;
  ScenarioConfig scenario;
  AlgorithmConfig algorithm;
  int workers = 0;  // 0: hardware concurrency
};

// Defaults per experiment. Desk scale is R = 4 and 20 trials.
ExperimentSpec default_experiment(ExperimentName name, const ScenarioConfig& scenario,
                                  bool full_scale);
// Scenario key the sweep value is written to.
std::string sweep_key(ExperimentName name);
void check_experiment(const ExperimentSpec& spec);

struct ResultRow {
  std::string experiment;
  double sweep_value = 0;
  int trial = 0;
  std::string metric;
  double value = 0;
  // metadata
  int iterations = 0;
  std::string status;  // "Optimal" or the failure kind
  double rho = 0;
  double threshold = 0;
  int nsp_feasible = 0;

  bool ok() const { return status == "Optimal"; }
};

bool operator==(const ResultRow& a, const ResultRow& b);

std::uint64_t trial_seed(std::uint64_t base, ExperimentName name, int trial);

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec);

enum class OutputFormat { Csv, Json };
OutputFormat parse_format(const std::string& s);

// Floats are rounded to 12 significant digits.
void emit(const std::vector<ResultRow>& rows, OutputFormat format, const std::string& path);
std::vector<ResultRow> read_rows(OutputFormat format, const std::string& path);

struct MetricSummary {
  double mean = 0;
  int count = 0;     // Optimal rows used in the mean
  int excluded = 0;  // rows of non-Optimal trials
};
// Keyed by (sweep value, metric).
std::map<std::pair<double, std::string>, MetricSummary> summarize(const std::vector<ResultRow>& rows);

// Fraction of (sweep, trial) points whose solve did not end Optimal.
double failure_rate(const std::vector<ResultRow>& rows);

}  // namespace coexist
