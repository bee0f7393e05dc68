#include "coexist/channel_model.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>

namespace coexist {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  double x = to_double(key, v);
  if (x != std::floor(x)) throw ConfigError("config: key '" + key + "' expects an integer");
  return static_cast<int>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "no") return false;
  throw ConfigError("config: key '" + key + "' expects a boolean");
}

struct Field {
  std::function<void(ScenarioConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const ScenarioConfig&)> get;
};

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

template <class T>
Field num_field(T ScenarioConfig::*m) {
  Field f;
  f.set = [m](ScenarioConfig& c, const std::string& k, const std::string& v) {
    if constexpr (std::is_same_v<T, int>)
      c.*m = to_int(k, v);
    else if constexpr (std::is_same_v<T, bool>)
      c.*m = to_bool(k, v);
    else if constexpr (std::is_same_v<T, std::uint64_t>)
      c.*m = static_cast<std::uint64_t>(std::stoull(v));
    else
      c.*m = to_double(k, v);
  };
  f.get = [m](const ScenarioConfig& c) {
    if constexpr (std::is_same_v<T, bool>)
      return std::string(c.*m ? "true" : "false");
    else if constexpr (std::is_same_v<T, std::uint64_t>)
      return std::to_string(c.*m);
    else
      return fmt(static_cast<double>(c.*m));
  };
  return f;
}

const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"cell_radius_m", num_field(&ScenarioConfig::cell_radius_m)},
      {"radar_offset_m", num_field(&ScenarioConfig::radar_offset_m)},
      {"num_ul_users", num_field(&ScenarioConfig::num_ul_users)},
      {"num_dl_users", num_field(&ScenarioConfig::num_dl_users)},
      {"antennas_bs_tx", num_field(&ScenarioConfig::antennas_bs_tx)},
      {"antennas_bs_rx", num_field(&ScenarioConfig::antennas_bs_rx)},
      {"antennas_user", num_field(&ScenarioConfig::antennas_user)},
      {"radar_antennas", num_field(&ScenarioConfig::radar_antennas)},
      {"streams", num_field(&ScenarioConfig::streams)},
      {"carrier_hz", num_field(&ScenarioConfig::carrier_hz)},
      {"bandwidth_hz", num_field(&ScenarioConfig::bandwidth_hz)},
      {"d0_m", num_field(&ScenarioConfig::d0_m)},
      {"los_threshold_m", num_field(&ScenarioConfig::los_threshold_m)},
      {"alpha_los", num_field(&ScenarioConfig::alpha_los)},
      {"alpha_nlos", num_field(&ScenarioConfig::alpha_nlos)},
      {"shadow_sigma_los_db", num_field(&ScenarioConfig::shadow_sigma_los_db)},
      {"shadow_sigma_nlos_db", num_field(&ScenarioConfig::shadow_sigma_nlos_db)},
      {"noise_density_dbm_hz", num_field(&ScenarioConfig::noise_density_dbm_hz)},
      {"noise_figure_bs_db", num_field(&ScenarioConfig::noise_figure_bs_db)},
      {"noise_figure_user_db", num_field(&ScenarioConfig::noise_figure_user_db)},
      {"noise_figure_radar_db", num_field(&ScenarioConfig::noise_figure_radar_db)},
      {"rician_k", num_field(&ScenarioConfig::rician_k)},
      {"psi", num_field(&ScenarioConfig::psi)},
      {"upsilon", num_field(&ScenarioConfig::upsilon)},
      {"delta", num_field(&ScenarioConfig::delta)},
      {"theta", num_field(&ScenarioConfig::theta)},
      {"cci_factor", num_field(&ScenarioConfig::cci_factor)},
      {"qos_ul_bps", num_field(&ScenarioConfig::qos_ul_bps)},
      {"qos_dl_bps", num_field(&ScenarioConfig::qos_dl_bps)},
      {"p_ul_db", num_field(&ScenarioConfig::p_ul_db)},
      {"p_bs_db", num_field(&ScenarioConfig::p_bs_db)},
      {"radar_power_db", num_field(&ScenarioConfig::radar_power_db)},
      {"radar_target_range_m", num_field(&ScenarioConfig::radar_target_range_m)},
      {"radar_target_angle_deg", num_field(&ScenarioConfig::radar_target_angle_deg)},
      {"radar_rcs_m2", num_field(&ScenarioConfig::radar_rcs_m2)},
      {"radar_samples", num_field(&ScenarioConfig::radar_samples)},
      {"p_fa", num_field(&ScenarioConfig::p_fa)},
      {"nsp_enabled", num_field(&ScenarioConfig::nsp_enabled)},
      {"seed", num_field(&ScenarioConfig::seed)},
  };
  return table;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    bool found = false;
    for (const auto& [name, f] : fields()) {
      if (name == key) {
        f.set(cfg, key, val);
        found = true;
        break;
      }
    }
    if (!found) throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    cfg.explicit_keys.insert(key);
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::string> validate_config(const ScenarioConfig& c) {
  auto positive = [](const char* name, double v) {
    if (!(v > 0)) throw ConfigError(std::string(name) + " must be positive");
  };
  positive("cell_radius_m", c.cell_radius_m);
  positive("radar_offset_m", c.radar_offset_m);
  positive("carrier_hz", c.carrier_hz);
  positive("bandwidth_hz", c.bandwidth_hz);
  positive("d0_m", c.d0_m);
  positive("antennas_bs_tx", c.antennas_bs_tx);
  positive("antennas_bs_rx", c.antennas_bs_rx);
  positive("antennas_user", c.antennas_user);
  positive("radar_antennas", c.radar_antennas);
  positive("radar_samples", c.radar_samples);
  positive("radar_rcs_m2", c.radar_rcs_m2);
  positive("radar_target_range_m", c.radar_target_range_m);
  if (c.num_ul_users < 0 || c.num_dl_users < 0 || c.num_ul_users + c.num_dl_users == 0)
    throw ConfigError("need at least one cellular link");
  if (c.cci_factor < 0 || c.cci_factor > 1) throw ConfigError("cci_factor must lie in [0,1]");
  if (c.psi < 0 || c.upsilon < 0) throw ConfigError("psi and upsilon must be non-negative");
  if (c.delta < 0 || c.theta < 0) throw ConfigError("delta and theta must be non-negative");
  if (c.qos_ul_bps < 0 || c.qos_dl_bps < 0) throw ConfigError("QoS targets must be non-negative");
  if (!(c.p_fa > 0 && c.p_fa < 1)) throw ConfigError("p_fa must lie in (0,1)");
  if (c.streams < 0) throw ConfigError("streams must be >= 0");
  if (c.rician_k < 0) throw ConfigError("rician_k must be non-negative");
  std::vector<std::string> warn;
  if (c.psi > 0.1) warn.push_back("psi above 0.1: distortion model is a small-ratio approximation");
  if (c.upsilon > 0.1) warn.push_back("upsilon above 0.1: distortion model is a small-ratio approximation");
  return warn;
}

std::string describe_config(const ScenarioConfig& cfg) {
  std::ostringstream os;
  for (const auto& [name, f] : fields()) os << name << " = " << f.get(cfg) << "\n";
  return os.str();
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double noise_power_w(const ScenarioConfig& cfg, double noise_figure_db) {
  return dbm_to_watts(cfg.noise_density_dbm_hz + 10.0 * std::log10(cfg.bandwidth_hz) +
                      noise_figure_db);
}

CMatrix SeededRng::cgauss(Eigen::Index rows, Eigen::Index cols) {
  CMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = cnormal();
  return m;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double ci_path_loss_db(double f_hz, double d_m, double alpha_c, double shadow_db, double d0_m) {
  if (!(f_hz > 0)) throw DomainError("ci_path_loss_db: frequency must be positive");
  if (d_m < d0_m) throw DomainError("ci_path_loss_db: distance below reference distance");
  double plf = 20.0 * std::log10(4.0 * M_PI * d0_m * f_hz / kSpeedOfLight);
  return plf + 10.0 * alpha_c * std::log10(d_m / d0_m) + shadow_db;
}

int ChannelSet::stack_rows() const {
  int rows = static_cast<int>(w_br.rows());
  for (int i = 0; i < size(); ++i)
    if (!is_ul(i)) rows += static_cast<int>(w[i].rows());
  return rows;
}

namespace {

bool inside_hexagon(double x, double y, double r) {
  const double s3 = std::sqrt(3.0);
  return std::abs(y) <= 0.5 * s3 * r && s3 * std::abs(x) + std::abs(y) <= s3 * r;
}

Point draw_in_hexagon(double r, SeededRng& rng) {
  for (;;) {
    double x = (2 * rng.uniform() - 1) * r, y = (2 * rng.uniform() - 1) * r;
    if (inside_hexagon(x, y, r)) return {x, y};
  }
}

double dist(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Linear large-scale power gain of a link, one shadowing draw.
double large_scale_gain(const ScenarioConfig& cfg, double d, SeededRng& rng) {
  d = std::max(d, cfg.d0_m);
  bool los = d < cfg.los_threshold_m;
  double sigma = los ? cfg.shadow_sigma_los_db : cfg.shadow_sigma_nlos_db;
  double shadow = sigma * rng.normal();
  double pl = ci_path_loss_db(cfg.carrier_hz, d, los ? cfg.alpha_los : cfg.alpha_nlos, shadow,
                              cfg.d0_m);
  return db_to_linear(-pl);
}

}  // namespace

ChannelSet draw_channel_set(const ScenarioConfig& cfg, SeededRng& rng) {
  ChannelSet c;
  const int K = cfg.num_ul_users, J = cfg.num_dl_users, R = cfg.radar_antennas;
  const int M0 = cfg.antennas_bs_tx, N0 = cfg.antennas_bs_rx, Nu = cfg.antennas_user;
  c.num_ul = K;
  c.num_dl = J;
  c.radar_antennas = R;
  c.bs_power_w = db_to_linear(cfg.p_bs_db);
  const double s_bs = noise_power_w(cfg, cfg.noise_figure_bs_db);
  const double s_user = noise_power_w(cfg, cfg.noise_figure_user_db);
  const double ln2 = std::log(2.0);
  auto pick_streams = [&](int tx, int rx) {
    return cfg.streams > 0 ? std::min({cfg.streams, tx, rx}) : std::min(tx, rx);
  };
  for (int k = 0; k < K; ++k)
    c.links.push_back({LinkKind::UL, k, N0, Nu, pick_streams(Nu, N0), s_bs,
                       db_to_linear(cfg.p_ul_db), ln2 * cfg.qos_ul_bps / cfg.bandwidth_hz});
  for (int j = 0; j < J; ++j)
    c.links.push_back({LinkKind::DL, j, Nu, M0, pick_streams(M0, Nu), s_user, c.bs_power_w,
                       ln2 * cfg.qos_dl_bps / cfg.bandwidth_hz});

  c.bs = {0, 0};
  c.radar = {cfg.cell_radius_m + cfg.radar_offset_m, 0};
  for (int k = 0; k < K; ++k) c.ul_pos.push_back(draw_in_hexagon(cfg.cell_radius_m, rng));
  for (int j = 0; j < J; ++j) c.dl_pos.push_back(draw_in_hexagon(cfg.cell_radius_m, rng));

  // Large-scale gains, one shadowing draw per node pair.
  std::vector<double> g_bs_ul(K), g_bs_dl(J), g_rad_ul(K), g_rad_dl(J);
  std::vector<std::vector<double>> g_cci(J, std::vector<double>(K));
  for (int k = 0; k < K; ++k) g_bs_ul[k] = large_scale_gain(cfg, dist(c.bs, c.ul_pos[k]), rng);
  for (int j = 0; j < J; ++j) g_bs_dl[j] = large_scale_gain(cfg, dist(c.bs, c.dl_pos[j]), rng);
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < K; ++k)
      g_cci[j][k] = large_scale_gain(cfg, dist(c.dl_pos[j], c.ul_pos[k]), rng);
  for (int k = 0; k < K; ++k) g_rad_ul[k] = large_scale_gain(cfg, dist(c.radar, c.ul_pos[k]), rng);
  for (int j = 0; j < J; ++j) g_rad_dl[j] = large_scale_gain(cfg, dist(c.radar, c.dl_pos[j]), rng);
  const double g_rad_bs = large_scale_gain(cfg, dist(c.radar, c.bs), rng);

  // Small-scale fading.
  std::vector<CMatrix> h_ul(K), h_dl(J), g_ru(K);
  std::vector<std::vector<CMatrix>> h_du(J, std::vector<CMatrix>(K));
  for (int k = 0; k < K; ++k) h_ul[k] = std::sqrt(g_bs_ul[k]) * rng.cgauss(N0, Nu);
  for (int j = 0; j < J; ++j) h_dl[j] = std::sqrt(g_bs_dl[j]) * rng.cgauss(Nu, M0);
  for (int j = 0; j < J; ++j)
    for (int k = 0; k < K; ++k)
      h_du[j][k] = cfg.cci_factor * std::sqrt(g_cci[j][k]) * rng.cgauss(Nu, Nu);
  const double kr = cfg.rician_k;
  c.h_si = std::sqrt(kr / (1 + kr)) * CMatrix::Ones(N0, M0) +
           std::sqrt(1 / (1 + kr)) * rng.cgauss(N0, M0);
  for (int k = 0; k < K; ++k) g_ru[k] = std::sqrt(g_rad_ul[k]) * rng.cgauss(R, Nu);
  CMatrix g_rb = std::sqrt(g_rad_bs) * rng.cgauss(R, M0);
  c.w_br = std::sqrt(g_rad_bs) * rng.cgauss(N0, R);
  std::vector<CMatrix> w_dl(J);
  for (int j = 0; j < J; ++j) w_dl[j] = std::sqrt(g_rad_dl[j]) * rng.cgauss(Nu, R);

  const int S = K + J;
  c.h.assign(S, std::vector<CMatrix>(S));
  c.h_gain.assign(S, std::vector<double>(S, 0.0));
  c.g.resize(S);
  c.w.resize(S);
  c.g_gain.resize(S);
  for (int i = 0; i < S; ++i) {
    for (int j = 0; j < S; ++j) {
      bool iu = i < K, ju = j < K;
      if (iu && ju) {
        c.h[i][j] = h_ul[j];
        c.h_gain[i][j] = g_bs_ul[j];
      } else if (iu && !ju) {
        c.h[i][j] = c.h_si;
        c.h_gain[i][j] = 1.0;
      } else if (!iu && ju) {
        c.h[i][j] = h_du[i - K][j];
        c.h_gain[i][j] = cfg.cci_factor * cfg.cci_factor * g_cci[i - K][j];
      } else {
        c.h[i][j] = h_dl[i - K];
        c.h_gain[i][j] = g_bs_dl[i - K];
      }
    }
    if (i < K) {
      c.g[i] = g_ru[i];
      c.g_gain[i] = g_rad_ul[i];
      c.w[i] = c.w_br;
    } else {
      c.g[i] = g_rb;
      c.g_gain[i] = g_rad_bs;
      c.w[i] = w_dl[i - K];
    }
  }
  return c;
}

ChannelSet with_radar_precoder(const ChannelSet& chs, const CMatrix& p) {
  ChannelSet out = chs;
  if (p.rows() != chs.radar_antennas || p.cols() != chs.radar_antennas)
    throw DimensionMismatch("with_radar_precoder: projector " + shape(p));
  out.w_br = chs.w_br * p;
  for (auto& w : out.w) w = w * p;
  return out;
}

CMatrix sample_perturbation(Eigen::Index rows, Eigen::Index cols, double radius, SeededRng& rng) {
  if (radius <= 0 || rows * cols == 0) return CMatrix::Zero(rows, cols);
  CMatrix dir = rng.cgauss(rows, cols);
  double n = dir.norm();
  while (n == 0) {
    dir = rng.cgauss(rows, cols);
    n = dir.norm();
  }
  double r = radius * std::pow(rng.uniform(), 1.0 / (2.0 * static_cast<double>(rows * cols)));
  return dir * (r / n);
}

CMatrix sample_in_ball(const UncertaintyBall& ball, SeededRng& rng) {
  if (ball.radius < 0) throw DomainError("sample_in_ball: negative radius");
  if (ball.radius == 0) return ball.nominal;
  return ball.nominal + sample_perturbation(ball.nominal.rows(), ball.nominal.cols(), ball.radius, rng);
}

double channel_radius(const ChannelSet& chs, double delta, int i, int j) {
  return delta * std::sqrt(chs.h_gain[i][j]);
}

double radar_radius(const ChannelSet& chs, double theta) {
  double g = 0;
  for (double x : chs.g_gain) g = std::max(g, x);
  return theta * std::sqrt(g);
}

}  // namespace coexist
