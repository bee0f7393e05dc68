#pragma once

#include <array>
#include <optional>
#include <vector>

#include "coexist/cellular_fd.hpp"
#include "coexist/channel_model.hpp"
#include "coexist/radar_nsp.hpp"

namespace coexist {

struct RadarParams {
  int r_antennas = 0;
  std::vector<std::array<double, 2>> element_positions;
  double wavelength = 0;
  double p_r = 0;
  cd alpha_r = 0;
  double phi = 0;
  double sigma_r2 = 0;
  int l_samples = 1;
  double p_fa = 1e-5;

  double gamma_r() const;  // |α_r|² L P_R / σ_R²
};

// Half-wavelength ULA along x, α_r from the two-way radar equation.
RadarParams make_radar_params(const ScenarioConfig& cfg);
void check_radar_params(const RadarParams& p);

// How the matched-filter output covariance is modelled.
//   MatchedFilter: P^T ⊗ χ̂, what the matched filter actually produces.
//   BlockDiagonal: I_R ⊗ P^H χ̂ P, kept for comparison.
enum class CovarianceModel { MatchedFilter, BlockDiagonal };

CMatrix steering_matrix(const RadarParams& params);

// χ̂ = Σ_j G_j (V_j V_j^H + ψ diag(V_j V_j^H)) G_j^H + σ_R² I
CMatrix radar_interference_covariance(const ChannelSet& chs, const BeamformerSet& bf, double psi,
                                      double sigma_r2);

CMatrix detection_covariance(const CMatrix& chi_hat, const Projector& p,
                             CovarianceModel model = CovarianceModel::MatchedFilter);

// Π with Π^H χ Π = I on the positive-definite subspace of χ; Π Π^H = χ⁺.
CMatrix whitening_filter(const CMatrix& chi_hat, const Projector& p,
                         CovarianceModel model = CovarianceModel::MatchedFilter);

double noncentrality_rho(const RadarParams& params, const CMatrix& a, const Projector& p,
                         const CMatrix& chi_hat,
                         CovarianceModel model = CovarianceModel::MatchedFilter);
// Γ_R σ_R² tr(A P P^H A^H χ̂⁻¹)
double noncentrality_rho_trace_form(const RadarParams& params, const CMatrix& a,
                                    const Projector& p, const CMatrix& chi_hat);

double detection_threshold(double p_fa);
double marcum_q1(double a, double b);
double prob_detection(double rho, double p_fa);

double glrt_statistic(const CMatrix& y_hat, const CMatrix& a, const Projector& p,
                      const CMatrix& chi_hat);

struct DetectionReport {
  double rho = 0;
  double threshold = 0;
  double pod_analytic = 0;
  std::optional<double> pod_empirical;
  std::optional<double> pfa_empirical;
  std::vector<double> glrt_values;  // H1 statistics, filled on request
};

struct SimulationOptions {
  bool run_h0 = true;
  bool run_h1 = true;
  bool keep_values = false;
};

DetectionReport simulate_detection(const RadarParams& params, const ChannelSet& chs,
                                   const BeamformerSet& bf, const DistortionParams& d,
                                   const Projector& p, int trials, SeededRng& rng,
                                   const SimulationOptions& opt = {});

}  // namespace coexist
