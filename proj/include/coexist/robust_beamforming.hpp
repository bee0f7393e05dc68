#pragma once

#include <string>
#include <utility>
#include <vector>

#include "coexist/cellular_fd.hpp"
#include "coexist/channel_model.hpp"
#include "coexist/sdp_engine.hpp"

namespace coexist {

// How the V-step SDP is written.
//   Displayed: stacked vectors z, Z, iota, E in one LMI per constraint.
//   Lifted: T_j ⪰ V_j V_j^H added as a variable; the same S-lemma
//           constraints become small LMIs in (V, T). Same optimum, much
//           smaller blocks.
enum class VStepForm { Displayed, Lifted };

struct AlgorithmConfig {
  int n_max = 50;
  double tol = 1e-4;      // relative change of Γ between iterations
  double sdp_tol = 1e-7;
  int sdp_max_iter = 100;
  VStepForm form = VStepForm::Lifted;
  int init_grid_points = 17;  // per direction, log grid over 8 decades of power
  // Margin-maximising rounds when no grid point is robustly feasible.
  int init_max_iter = 30;
  int init_restarts = 6;
};

// Everything the robust design needs besides channels and beamformers.
struct RobustSetup {
  DistortionParams dist;
  double p_r = 0;    // radar power seen through chs.w
  double delta = 0;  // relative CSI error radius
  double theta = 0;  // relative radar-link error radius
};

RobustSetup make_robust_setup(const ScenarioConfig& cfg, double p_r);

struct VectorizedForms {
  std::vector<std::vector<CVector>> z_hat;
  std::vector<std::vector<CMatrix>> z_mat;
  CVector iota_tilde;
  CMatrix e_lambda;
  int b_dim = 0;
};

// ẑ_ij and Ẑ_ij: Σ_j ||ẑ_ij + Ẑ_ij vec(Δ_ij)||² = tr(B_i^H E_i(H + Δ) B_i).
std::pair<CVector, CMatrix> build_z(const ChannelSet& chs, const BeamformerSet& bf,
                                    const DistortionParams& d, double p_r, int i, int j);
// ι̃ and E_Λ: ||ι̃ + E_Λ vec(Λ)||² = I^RAD(G + Λ).
std::pair<CVector, CMatrix> build_iota(const ChannelSet& chs, const BeamformerSet& bf,
                                       const DistortionParams& d);
VectorizedForms build_vectorized(const ChannelSet& chs, const BeamformerSet& bf,
                                 const DistortionParams& d, double p_r);

// [λ-ε, ẑ^H, 0; ẑ, I, -δẐ; 0, -δẐ^H, εI]
CMatrix build_qos_lmi(const CVector& z_hat, const CMatrix& z_mat, double lambda, double epsilon,
                      double delta);
// [Γ-η, ι̃^H, 0; ι̃, I, -θE_Λ; 0, -θE_Λ^H, ηI]
CMatrix build_interference_lmi(const CVector& iota, const CMatrix& e_lambda, double gamma,
                               double eta, double theta);

// max over ||x|| <= radius of ||a + Z x||², exact (trust-region dual).
double worst_case_norm2(const CVector& a, const CMatrix& z, double radius);

struct BlockInfo {
  enum Kind { Qos, Interference, Power, BsPower, Link, Rate, Nonneg } kind;
  int i = -1, j = -1;
  int complex_size = 1;  // size before the real embedding (1 for scalar rows)
};

struct VarLayout {
  int n = 0;
  std::vector<int> v_off;  // Re/Im pairs, column-major over V_j
  std::vector<int> t_off;  // lifted form only
  std::vector<std::vector<int>> lambda, epsilon;
  int gamma = -1, eta = -1;
  std::vector<double> v_scale;  // V_j = v_scale[j] * (x_re + i x_im)
  double gamma_scale = 1;       // Γ = gamma_scale * x_gamma

  CMatrix v_of(const RVector& x, const ChannelSet& chs, int j) const;
  CMatrix t_of(const RVector& x, const ChannelSet& chs, int j) const;
};

struct VStepProblem {
  SdpProblemSpec spec;
  VarLayout layout;
  std::vector<BlockInfo> info;  // parallel to spec.blocks
};

// V-step SDP for fixed U, B. bf.v sets the variable scaling only.
VStepProblem assemble_p3_vstep(const ChannelSet& chs, const BeamformerSet& bf,
                               const RobustSetup& setup, VStepForm form = VStepForm::Displayed);

CMatrix update_b_closed_form(const ChannelSet& chs, const BeamformerSet& bf,
                             const DistortionParams& d, double p_r, int i);

// Robust rate margin of link i (nats): d_i + 2 log|B_i| - Σ_j wc_ij - c_i.
double robust_margin(const ChannelSet& chs, const BeamformerSet& bf, const RobustSetup& setup,
                     int i);
double robust_interference(const ChannelSet& chs, const BeamformerSet& bf,
                           const RobustSetup& setup);

struct SlackSet {
  double gamma = 0;
  std::vector<std::vector<double>> lambda, epsilon;
  double eta = 0;
};

struct IterationRecord {
  double gamma = 0;            // SDP optimum, watts
  double interference = 0;     // nominal I^RAD at the new V
  std::vector<double> rates;   // bits/s/Hz at nominal channels
  double min_margin = 0;       // robust margin after the U/B update
  double blend = 1;            // accepted U/B step (1 = full closed form)
  SdpStatus status = SdpStatus::Optimal;
  int sdp_iterations = 0;
  KktResiduals kkt;
};

struct AlternatingResult {
  BeamformerSet bf;
  std::vector<double> trace;  // Γ per iteration
  std::vector<IterationRecord> records;
  SlackSet slacks;
  int iterations = 0;
  bool converged = false;
  SdpStatus status = SdpStatus::Optimal;
  std::string message;
};

// Right-singular-vector start. UL and DL powers are scaled on a log grid and
// the robustly feasible point with the least worst-case radar interference
// is kept. Throws SdpInfeasible when no grid point is feasible.
BeamformerSet initial_beamformers(const ChannelSet& chs, const RobustSetup& setup,
                                  const AlgorithmConfig& cfg);

AlternatingResult alternating_solve(const ChannelSet& chs, const AlgorithmConfig& cfg,
                                    const RobustSetup& setup);

double complexity_estimate(const SdpProblemSpec& problem);
// Same bound from explicit block sizes.
double complexity_estimate(const std::vector<int>& block_sizes, int n_vars);

// Closed-form sizes of the displayed V-step (real sizes, scalar rows excluded).
struct BlockAccounting {
  int block_count = 0;
  std::vector<int> qos_sizes;   // |S|² entries, row-major in (i, j)
  std::vector<int> power_sizes; // UL links, then the BS
  int interference_size = 0;
  int b_dim = 0;
  int n_vars = 0;
  int scalar_rows = 0;
  std::vector<int> all_sizes() const;
};
BlockAccounting vstep_block_accounting(const ChannelSet& chs);

}  // namespace coexist
