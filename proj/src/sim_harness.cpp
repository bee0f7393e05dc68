#include "coexist/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "coexist/radar_detection.hpp"
#include "coexist/radar_nsp.hpp"

namespace coexist {

namespace {

struct NameEntry {
  ExperimentName name;
  const char* text;
};
constexpr NameEntry kNames[] = {
    {ExperimentName::Convergence, "convergence"},
    {ExperimentName::Complexity, "complexity"},
    {ExperimentName::InterferenceVsRsi, "interference_vs_rsi"},
    {ExperimentName::InterferenceVsQos, "interference_vs_qos"},
    {ExperimentName::PodVsPower, "pod_vs_power"},
    {ExperimentName::PodVsPfa, "pod_vs_pfa"},
};

bool is_pod(ExperimentName n) {
  return n == ExperimentName::PodVsPower || n == ExperimentName::PodVsPfa;
}

void apply_sweep(ScenarioConfig& cfg, ExperimentName name, double v) {
  switch (name) {
    case ExperimentName::Convergence:
    case ExperimentName::Complexity:
      if (v != std::round(v) || v < 1)
        throw ConfigError("radar_antennas sweep value must be a positive integer");
      cfg.radar_antennas = static_cast<int>(v);
      break;
    case ExperimentName::InterferenceVsRsi:
      cfg.psi = cfg.upsilon = db_to_linear(v);
      break;
    case ExperimentName::InterferenceVsQos:
      cfg.qos_ul_bps = cfg.qos_dl_bps = v;
      break;
    case ExperimentName::PodVsPower:
      cfg.radar_power_db = v;
      break;
    case ExperimentName::PodVsPfa:
      cfg.p_fa = v;
      break;
  }
}

double round12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

std::string fmt12(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

struct Solved {
  std::string status;
  AlternatingResult result;
};

Solved solve_cellular(const ChannelSet& chs, const AlgorithmConfig& alg, const RobustSetup& setup) {
  Solved s;
  try {
    s.result = alternating_solve(chs, alg, setup);
    s.status = to_string(s.result.status);
    if (s.result.trace.empty()) s.status = "Failed";
  } catch (const SdpInfeasible&) {
    s.status = "Infeasible";
  } catch (const Error&) {
    s.status = "Failed";
  }
  return s;
}

class TrialRunner {
 public:
  TrialRunner(const ExperimentSpec& spec, int trial) : spec_(spec), trial_(trial) {}

  std::vector<ResultRow> run() {
    std::optional<Solved> cached;
    for (double v : spec_.sweep) {
      ScenarioConfig cfg = spec_.scenario;
      apply_sweep(cfg, spec_.name, v);
      sweep_ = v;
      try {
        point(cfg, cached);
      } catch (const Error&) {
        meta_ = {};
        meta_.status = "Failed";
        add("feasible", 0);
      }
    }
    return std::move(rows_);
  }

 private:
  struct Meta {
    int iterations = 0;
    std::string status;
    double rho = 0, threshold = 0;
    int nsp = 0;
  };

  void add(const std::string& metric, double value) {
    ResultRow r;
    r.experiment = to_string(spec_.name);
    r.sweep_value = sweep_;
    r.trial = trial_;
    r.metric = metric;
    r.value = value;
    r.iterations = meta_.iterations;
    r.status = meta_.status;
    r.rho = meta_.rho;
    r.threshold = meta_.threshold;
    r.nsp_feasible = meta_.nsp;
    rows_.push_back(std::move(r));
  }

  void point(const ScenarioConfig& cfg, std::optional<Solved>& cached) {
    meta_ = {};
    SeededRng rng(trial_seed(spec_.scenario.seed, spec_.name, trial_));
    ChannelSet chs = draw_channel_set(cfg, rng);
    const int r = cfg.radar_antennas;
    Projector proj = identity_projector(r);
    if (cfg.nsp_enabled) {
      try {
        proj = build_projector(stack_interference(chs));
        meta_.nsp = 1;
      } catch (const FullRankNullSpace&) {
        // no null space: the radar stays silent toward the cellular system
        proj.p = CMatrix::Zero(r, r);
        proj.null_basis = CMatrix::Zero(r, 0);
        proj.rank_w = r;
      }
    }
    ChannelSet eff = with_radar_precoder(chs, proj.p);
    const double p_r = db_to_linear(cfg.radar_power_db);
    RobustSetup setup = make_robust_setup(cfg, p_r);

    if (spec_.name == ExperimentName::Complexity) {
      complexity(eff, setup);
      return;
    }

    // The cellular problem sees the radar only through W·P; when that is
    // zero, radar-side sweeps reuse one solve per trial.
    double leak = 0, wn = 0;
    for (int i = 0; i < chs.size(); ++i) {
      leak += eff.w[i].squaredNorm();
      wn += chs.w[i].squaredNorm();
    }
    bool radar_silent = leak <= 1e-18 * std::max(wn, 1e-300);
    bool reuse = spec_.name == ExperimentName::PodVsPfa ||
                 (spec_.name == ExperimentName::PodVsPower && radar_silent);
    if (!reuse || !cached) cached = solve_cellular(eff, spec_.algorithm, setup);
    const Solved& s = *cached;
    const bool ok = s.status == "Optimal";
    meta_.status = s.status;
    meta_.iterations = s.result.iterations;

    double rho_s = 0, rho_n = 0;
    if (is_pod(spec_.name)) {
      RadarParams params = make_radar_params(cfg);
      CMatrix a = steering_matrix(params);
      CMatrix white = params.sigma_r2 * CMatrix::Identity(r, r);
      rho_n = noncentrality_rho(params, a, identity_projector(r), white);
      meta_.threshold = detection_threshold(cfg.p_fa);
      if (ok) {
        CMatrix chi = radar_interference_covariance(chs, s.result.bf, cfg.psi, params.sigma_r2);
        rho_s = noncentrality_rho(params, a, proj, chi);
        meta_.rho = rho_s;
      }
    }

    add("feasible", ok ? 1 : 0);
    if (ok) {
      const AlternatingResult& res = s.result;
      add("gamma", res.slacks.gamma);
      add("interference", interference_to_radar(eff, res.bf, setup.dist));
      add("robust_interference", robust_interference(eff, res.bf, setup));
      add("iterations", res.iterations);
      add("converged", res.converged ? 1 : 0);
      const IterationRecord& last = res.records.back();
      add("min_margin", last.min_margin);
      for (size_t i = 0; i < last.rates.size(); ++i) add("rate_" + std::to_string(i), last.rates[i]);
      if (spec_.name == ExperimentName::Convergence) {
        for (size_t n = 0; n < res.trace.size(); ++n) {
          char name[32];
          std::snprintf(name, sizeof name, "trace_%03zu", n + 1);
          add(name, res.trace[n]);
        }
      }
    }
    if (is_pod(spec_.name)) {
      add("rho_no_sharing", rho_n);
      add("pod_no_sharing", prob_detection(rho_n, cfg.p_fa));
      if (ok) {
        add("rho_sharing", rho_s);
        add("pod_sharing", prob_detection(rho_s, cfg.p_fa));
      }
    }
  }

  void complexity(const ChannelSet& eff, const RobustSetup& setup) {
    BlockAccounting acc = vstep_block_accounting(eff);
    std::vector<int> sizes = acc.all_sizes();
    sizes.insert(sizes.end(), acc.scalar_rows, 1);
    double estimate = complexity_estimate(sizes, acc.n_vars);
    double seconds = 0;
    try {
      BeamformerSet bf = initial_beamformers(eff, setup, spec_.algorithm);
      auto t0 = std::chrono::steady_clock::now();
      VStepProblem prob = assemble_p3_vstep(eff, bf, setup, spec_.algorithm.form);
      SdpSolution sol = solve(prob.spec, spec_.algorithm.sdp_tol, spec_.algorithm.sdp_max_iter);
      seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      meta_.status = to_string(sol.status);
      meta_.iterations = sol.iterations;
    } catch (const SdpInfeasible&) {
      meta_.status = "Infeasible";
    }
    add("feasible", meta_.status == "Optimal" ? 1 : 0);
    add("complexity_estimate", estimate);
    add("block_count", acc.block_count);
    add("n_vars", acc.n_vars);
    if (meta_.status == "Optimal") add("solve_seconds", seconds);
  }

  const ExperimentSpec& spec_;
  int trial_;
  double sweep_ = 0;
  Meta meta_;
  std::vector<ResultRow> rows_;
};

void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const ResultRow& a, const ResultRow& b) {
    return std::tie(a.experiment, a.sweep_value, a.trial, a.metric) <
           std::tie(b.experiment, b.sweep_value, b.trial, b.metric);
  });
}

const char* kColumns[] = {"experiment", "sweep_value", "trial", "metric", "value",
                          "iterations", "status", "rho", "threshold", "nsp_feasible"};

nlohmann::json number(double x) {
  if (!std::isfinite(x)) return nullptr;
  return round12(x);
}

double from_json(const nlohmann::json& j) {
  return j.is_null() ? std::nan("") : j.get<double>();
}

}  // namespace

const char* to_string(ExperimentName e) {
  for (const auto& n : kNames)
    if (n.name == e) return n.text;
  return "?";
}

ExperimentName parse_experiment(const std::string& s) {
  for (const auto& n : kNames)
    if (s == n.text) return n.name;
  throw ConfigError("unknown experiment '" + s + "'");
}

std::string sweep_key(ExperimentName name) {
  switch (name) {
    case ExperimentName::Convergence:
    case ExperimentName::Complexity:
      return "radar_antennas";
    case ExperimentName::InterferenceVsRsi:
      return "psi_upsilon_db";
    case ExperimentName::InterferenceVsQos:
      return "qos_bps";
    case ExperimentName::PodVsPower:
      return "radar_power_db";
    case ExperimentName::PodVsPfa:
      return "p_fa";
  }
  return "";
}

ExperimentSpec default_experiment(ExperimentName name, const ScenarioConfig& scenario,
                                  bool full_scale) {
  ExperimentSpec spec;
  spec.name = name;
  spec.scenario = scenario;
  if (!scenario.explicit_keys.count("radar_antennas")) spec.scenario.radar_antennas = full_scale ? 8 : 4;
  spec.trials = full_scale ? 100 : 20;
  switch (name) {
    case ExperimentName::Convergence:
      spec.sweep = {double(spec.scenario.radar_antennas)};
      break;
    case ExperimentName::Complexity:
      spec.sweep = {4, 8, 12, 16};
      break;
    case ExperimentName::InterferenceVsRsi:
      spec.sweep = {-90, -80, -70, -60};
      break;
    case ExperimentName::InterferenceVsQos:
      spec.sweep = {1e5, 2.5e5, 5e5, 7.5e5, 1e6};
      break;
    case ExperimentName::PodVsPower:
      spec.sweep = {10, 15, 20, 25, 30, 35, 40};
      break;
    case ExperimentName::PodVsPfa:
      spec.sweep = {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
      break;
  }
  return spec;
}

void check_experiment(const ExperimentSpec& spec) {
  if (spec.sweep.empty()) throw ConfigError("experiment sweep is empty");
  if (spec.trials < 1) throw ConfigError("trials must be at least 1");
  for (double v : spec.sweep) {
    ScenarioConfig c = spec.scenario;
    apply_sweep(c, spec.name, v);
    validate_config(c);
  }
}

bool operator==(const ResultRow& a, const ResultRow& b) {
  return a.experiment == b.experiment && a.sweep_value == b.sweep_value && a.trial == b.trial &&
         a.metric == b.metric && a.value == b.value && a.iterations == b.iterations &&
         a.status == b.status && a.rho == b.rho && a.threshold == b.threshold &&
         a.nsp_feasible == b.nsp_feasible;
}

std::uint64_t trial_seed(std::uint64_t base, ExperimentName name, int trial) {
  return mix_seed(mix_seed(base, static_cast<std::uint64_t>(name) + 1), static_cast<std::uint64_t>(trial));
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
  check_experiment(spec);
  std::vector<std::vector<ResultRow>> per_trial(spec.trials);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int t; (t = next++) < spec.trials;) per_trial[t] = TrialRunner(spec, t).run();
  };
  int workers = spec.workers > 0 ? spec.workers : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, spec.trials);
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  std::vector<ResultRow> rows;
  for (auto& v : per_trial) rows.insert(rows.end(), v.begin(), v.end());
  sort_rows(rows);
  return rows;
}

OutputFormat parse_format(const std::string& s) {
  if (s == "csv") return OutputFormat::Csv;
  if (s == "json") return OutputFormat::Json;
  throw ConfigError("unknown format '" + s + "' (csv or json)");
}

void emit(const std::vector<ResultRow>& rows, OutputFormat format, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  if (format == OutputFormat::Csv) {
    for (size_t c = 0; c < std::size(kColumns); ++c) out << (c ? "," : "") << kColumns[c];
    out << "\n";
    for (const auto& r : rows)
      out << r.experiment << ',' << fmt12(r.sweep_value) << ',' << r.trial << ',' << r.metric << ','
          << fmt12(r.value) << ',' << r.iterations << ',' << r.status << ',' << fmt12(r.rho) << ','
          << fmt12(r.threshold) << ',' << r.nsp_feasible << "\n";
  } else {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows)
      arr.push_back({{"experiment", r.experiment},
                     {"sweep_value", number(r.sweep_value)},
                     {"trial", r.trial},
                     {"metric", r.metric},
                     {"value", number(r.value)},
                     {"iterations", r.iterations},
                     {"status", r.status},
                     {"rho", number(r.rho)},
                     {"threshold", number(r.threshold)},
                     {"nsp_feasible", r.nsp_feasible}});
    out << arr.dump(1) << "\n";
  }
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::vector<ResultRow> read_rows(OutputFormat format, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<ResultRow> rows;
  if (format == OutputFormat::Csv) {
    std::string line;
    if (!std::getline(in, line)) throw IoError("'" + path + "' has no header");
    int lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
      if (f.size() != std::size(kColumns))
        throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(std::size(kColumns)) + " fields");
      ResultRow r;
      r.experiment = f[0];
      r.sweep_value = std::strtod(f[1].c_str(), nullptr);
      r.trial = std::stoi(f[2]);
      r.metric = f[3];
      r.value = std::strtod(f[4].c_str(), nullptr);
      r.iterations = std::stoi(f[5]);
      r.status = f[6];
      r.rho = std::strtod(f[7].c_str(), nullptr);
      r.threshold = std::strtod(f[8].c_str(), nullptr);
      r.nsp_feasible = std::stoi(f[9]);
      rows.push_back(std::move(r));
    }
  } else {
    nlohmann::json arr;
    try {
      in >> arr;
    } catch (const nlohmann::json::exception& e) {
      throw IoError("'" + path + "': " + e.what());
    }
    for (const auto& j : arr) {
      ResultRow r;
      r.experiment = j.at("experiment").get<std::string>();
      r.sweep_value = from_json(j.at("sweep_value"));
      r.trial = j.at("trial").get<int>();
      r.metric = j.at("metric").get<std::string>();
      r.value = from_json(j.at("value"));
      r.iterations = j.at("iterations").get<int>();
      r.status = j.at("status").get<std::string>();
      r.rho = from_json(j.at("rho"));
      r.threshold = from_json(j.at("threshold"));
      r.nsp_feasible = j.at("nsp_feasible").get<int>();
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

std::map<std::pair<double, std::string>, MetricSummary> summarize(const std::vector<ResultRow>& rows) {
  std::map<std::pair<double, std::string>, MetricSummary> out;
  for (const auto& r : rows) {
    MetricSummary& m = out[{r.sweep_value, r.metric}];
    if (!r.ok()) {
      ++m.excluded;
      continue;
    }
    m.mean += (r.value - m.mean) / ++m.count;
  }
  return out;
}

double failure_rate(const std::vector<ResultRow>& rows) {
  std::map<std::pair<double, int>, bool> points;
  for (const auto& r : rows) points[{r.sweep_value, r.trial}] = r.ok();
  if (points.empty()) return 0;
  int bad = 0;
  for (const auto& [k, ok] : points) bad += !ok;
  return double(bad) / points.size();
}

}  // namespace coexist
