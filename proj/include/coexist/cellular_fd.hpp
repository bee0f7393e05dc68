#pragma once

#include <vector>

#include "coexist/channel_model.hpp"
#include "coexist/matrix_core.hpp"

namespace coexist {

struct BeamformerSet {
  std::vector<CMatrix> v;  // M̃_i x d_i
  std::vector<CMatrix> u;  // Ñ_i x d_i
  std::vector<CMatrix> b;  // d_i x d_i
};

struct DistortionParams {
  double psi = 0;
  double upsilon = 0;
};

// Zero precoders, identity weights, zero receivers sized for chs.
BeamformerSet empty_beamformers(const ChannelSet& chs);

// Interference-plus-noise covariance of link i. The known SI signal term is
// left out; only its distortion survives.
CMatrix sigma_i(const ChannelSet& chs, const BeamformerSet& bf, const DistortionParams& d,
                double p_r, int i);
// sigma_i plus the psi*upsilon cross terms.
CMatrix sigma_i_exact(const ChannelSet& chs, const BeamformerSet& bf, const DistortionParams& d,
                      double p_r, int i);

// bits/s/Hz
double achievable_rate(const ChannelSet& chs, const BeamformerSet& bf, const DistortionParams& d,
                       double p_r, int i);

CMatrix mmse_receiver(const ChannelSet& chs, const BeamformerSet& bf, const DistortionParams& d,
                      double p_r, int i);

// E_i at the receiver stored in bf.u[i].
CMatrix mse_matrix(const ChannelSet& chs, const BeamformerSet& bf, const DistortionParams& d,
                   double p_r, int i);

// (I + V^H H^H Σ^-1 H V)^-1
CMatrix mse_mmse(const ChannelSet& chs, const BeamformerSet& bf, const DistortionParams& d,
                 double p_r, int i);

double interference_to_radar(const ChannelSet& chs, const BeamformerSet& bf,
                             const DistortionParams& d);

// sum_j tr(V_j V_j^H) over DL links
double bs_power(const ChannelSet& chs, const BeamformerSet& bf);

}  // namespace coexist
