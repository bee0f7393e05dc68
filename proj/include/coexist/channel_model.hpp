#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "coexist/matrix_core.hpp"

namespace coexist {

inline constexpr double kSpeedOfLight = 299792458.0;

struct ScenarioConfig {
  double cell_radius_m = 40;
  double radar_offset_m = 400;
  int num_ul_users = 2;
  int num_dl_users = 2;
  int antennas_bs_tx = 2;
  int antennas_bs_rx = 2;
  int antennas_user = 2;
  int radar_antennas = 8;
  int streams = 0;  // 0: min(tx, rx) per link
  double carrier_hz = 3.6e9;
  double bandwidth_hz = 100e6;
  double d0_m = 1;
  double los_threshold_m = 25;
  double alpha_los = 2.0;
  double alpha_nlos = 3.1;
  double shadow_sigma_los_db = 2.9;
  double shadow_sigma_nlos_db = 8.1;
  double noise_density_dbm_hz = -174;
  double noise_figure_bs_db = 13;
  double noise_figure_user_db = 9;
  double noise_figure_radar_db = 13;
  double rician_k = 1;
  double psi = 1e-7;
  double upsilon = 1e-7;
  double delta = 0.1;
  double theta = 0.1;
  double cci_factor = 0.5;
  double qos_ul_bps = 5e5;
  double qos_dl_bps = 5e5;
  double p_ul_db = 5;
  double p_bs_db = 10;
  // radar side
  double radar_power_db = 20;
  double radar_target_range_m = 300;
  double radar_target_angle_deg = 30;
  double radar_rcs_m2 = 1;
  int radar_samples = 32;
  double p_fa = 1e-5;
  bool nsp_enabled = true;
  std::uint64_t seed = 1;

  // Keys that were present in the parsed file.
  std::set<std::string> explicit_keys;
};

// Flat "key = value" text with '#' comments. Unknown keys raise ConfigError.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);
// Throws ConfigError on violated invariants; returns warnings.
std::vector<std::string> validate_config(const ScenarioConfig& cfg);
// key = value listing of every resolved parameter.
std::string describe_config(const ScenarioConfig& cfg);

double db_to_linear(double db);
double dbm_to_watts(double dbm);
double noise_power_w(const ScenarioConfig& cfg, double noise_figure_db);

class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : eng_(seed) {}
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
  double normal() { return std::normal_distribution<double>(0.0, 1.0)(eng_); }
  // Circular complex Gaussian with E|z|^2 = 1.
  cd cnormal() {
    double re = normal(), im = normal();
    return {re * M_SQRT1_2, im * M_SQRT1_2};
  }
  CMatrix cgauss(Eigen::Index rows, Eigen::Index cols);
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

// splitmix64 mixing, used to derive per-trial seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

double ci_path_loss_db(double f_hz, double d_m, double alpha_c, double shadow_db,
                       double d0_m = 1.0);

enum class LinkKind { UL, DL };

struct LinkInfo {
  LinkKind kind;
  int user;       // index within its direction
  int n_rx;       // Ñ_i
  int m_tx;       // M̃_i
  int streams;    // d_i
  double noise_w;  // σ_i²
  double power_w;  // P_i (UL) or P_0 share bound (DL)
  double qos_nats;  // log(2) * R_min / bandwidth
};

struct Point {
  double x = 0, y = 0;
};

// Links are indexed UL first (0..K-1), then DL (K..K+J-1).
struct ChannelSet {
  std::vector<LinkInfo> links;
  int num_ul = 0, num_dl = 0;
  int radar_antennas = 0;
  double bs_power_w = 0;
  std::vector<std::vector<CMatrix>> h;  // h[i][j]: Ñ_i x M̃_j
  std::vector<CMatrix> g;               // g[j]: R x M̃_j (G_RU or G_RB)
  std::vector<CMatrix> w;               // w[i]: Ñ_i x R (W_BR for UL links)
  CMatrix w_br;                         // N0 x R
  CMatrix h_si;                         // N0 x M0
  std::vector<std::vector<double>> h_gain;  // large-scale power gain of h[i][j]
  std::vector<double> g_gain;               // large-scale power gain of g[j]
  Point bs, radar;
  std::vector<Point> ul_pos, dl_pos;

  int size() const { return static_cast<int>(links.size()); }
  bool is_ul(int i) const { return links[i].kind == LinkKind::UL; }
  // Self-interference pair: known BS transmit signal seen by the BS receiver.
  bool is_si_pair(int i, int j) const { return is_ul(i) && !is_ul(j); }
  // Row count of the stacked radar→cellular channel.
  int stack_rows() const;
};

ChannelSet draw_channel_set(const ScenarioConfig& cfg, SeededRng& rng);

// Radar→cellular channels replaced by W_i·P (effective channel seen after
// projection of the radar waveform).
ChannelSet with_radar_precoder(const ChannelSet& chs, const CMatrix& p);

struct UncertaintyBall {
  CMatrix nominal;
  double radius = 0;
};

CMatrix sample_in_ball(const UncertaintyBall& ball, SeededRng& rng);
// Perturbation only (uniform in the Frobenius ball of given radius).
CMatrix sample_perturbation(Eigen::Index rows, Eigen::Index cols, double radius,
                            SeededRng& rng);

// Absolute radii used by the robust design.
double channel_radius(const ChannelSet& chs, double delta, int i, int j);
double radar_radius(const ChannelSet& chs, double theta);

}  // namespace coexist
