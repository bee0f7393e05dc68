#include "coexist/cellular_fd.hpp"

#include <cmath>

namespace coexist {

namespace {

void check_link(const ChannelSet& chs, const BeamformerSet& bf, int i) {
  if (i < 0 || i >= chs.size()) throw DimensionMismatch("link index out of range");
  if (static_cast<int>(bf.v.size()) != chs.size())
    throw DimensionMismatch("beamformer set does not cover every link");
  for (int j = 0; j < chs.size(); ++j) {
    if (bf.v[j].rows() != chs.links[j].m_tx)
      throw DimensionMismatch("V_" + std::to_string(j) + " is " + shape(bf.v[j]));
    if (chs.h[i][j].cols() != bf.v[j].rows() || chs.h[i][j].rows() != chs.links[i].n_rx)
      throw DimensionMismatch("H_" + std::to_string(i) + std::to_string(j) + " is " +
                              shape(chs.h[i][j]));
  }
}

CMatrix gram(const CMatrix& v) { return v * v.adjoint(); }

}  // namespace

BeamformerSet empty_beamformers(const ChannelSet& chs) {
  BeamformerSet bf;
  for (const auto& l : chs.links) {
    bf.v.push_back(CMatrix::Zero(l.m_tx, l.streams));
    bf.u.push_back(CMatrix::Zero(l.n_rx, l.streams));
    bf.b.push_back(CMatrix::Identity(l.streams, l.streams));
  }
  return bf;
}

CMatrix sigma_i(const ChannelSet& chs, const BeamformerSet& bf, const DistortionParams& d,
                double p_r, int i) {
  check_link(chs, bf, i);
  const auto& li = chs.links[i];
  CMatrix s = li.noise_w * CMatrix::Identity(li.n_rx, li.n_rx);
  for (int j = 0; j < chs.size(); ++j) {
    const CMatrix& h = chs.h[i][j];
    CMatrix q = gram(bf.v[j]);
    CMatrix rx = h * q * h.adjoint();
    if (j != i && !chs.is_si_pair(i, j)) s += rx;
    s += d.psi * h * diag_part(q) * h.adjoint();
    s += d.upsilon * diag_part(rx);
  }
  if (chs.w[i].rows() != li.n_rx) throw DimensionMismatch("W_i is " + shape(chs.w[i]));
  s += p_r * chs.w[i] * chs.w[i].adjoint();
  return s;
}

CMatrix sigma_i_exact(const ChannelSet& chs, const BeamformerSet& bf, const DistortionParams& d,
                      double p_r, int i) {
  CMatrix s = sigma_i(chs, bf, d, p_r, i);
  for (int j = 0; j < chs.size(); ++j) {
    const CMatrix& h = chs.h[i][j];
    s += d.psi * d.upsilon * diag_part(h * diag_part(gram(bf.v[j])) * h.adjoint());
  }
  return s;
}

double achievable_rate(const ChannelSet& chs, const BeamformerSet& bf, const DistortionParams& d,
                       double p_r, int i) {
  CMatrix sig = sigma_i(chs, bf, d, p_r, i);
  const CMatrix& u = bf.u[i];
  CMatrix hv = chs.h[i][i] * bf.v[i];
  CMatrix us = u.adjoint() * sig * u;
  CMatrix inv;
  try {
    inv = hpd_inverse(us);
  } catch (const NotPositiveDefinite&) {
    throw SingularCovariance("achievable_rate: U^H Σ U is singular");
  }
  CMatrix uhv = u.adjoint() * hv;
  CMatrix m = CMatrix::Identity(u.cols(), u.cols()) + uhv * uhv.adjoint() * inv;
  // det of I + X Y with X, Y PSD is real positive
  double ld = std::log(std::abs(m.determinant()));
  return std::max(0.0, ld / std::log(2.0));
}

CMatrix mmse_receiver(const ChannelSet& chs, const BeamformerSet& bf, const DistortionParams& d,
                      double p_r, int i) {
  CMatrix hv = chs.h[i][i] * bf.v[i];
  CMatrix c = hv * hv.adjoint() + sigma_i(chs, bf, d, p_r, i);
  try {
    return hpd_inverse(c) * hv;
  } catch (const NotPositiveDefinite&) {
    throw SingularCovariance("mmse_receiver: received covariance is singular");
  }
}

CMatrix mse_matrix(const ChannelSet& chs, const BeamformerSet& bf, const DistortionParams& d,
                   double p_r, int i) {
  const CMatrix& u = bf.u[i];
  if (u.rows() != chs.links[i].n_rx || u.cols() != bf.v[i].cols())
    throw DimensionMismatch("U_i is " + shape(u));
  CMatrix e = u.adjoint() * chs.h[i][i] * bf.v[i] - CMatrix::Identity(u.cols(), u.cols());
  return e * e.adjoint() + u.adjoint() * sigma_i(chs, bf, d, p_r, i) * u;
}

CMatrix mse_mmse(const ChannelSet& chs, const BeamformerSet& bf, const DistortionParams& d,
                 double p_r, int i) {
  CMatrix hv = chs.h[i][i] * bf.v[i];
  CMatrix si;
  try {
    si = hpd_inverse(sigma_i(chs, bf, d, p_r, i));
  } catch (const NotPositiveDefinite&) {
    throw SingularCovariance("mse_mmse: Σ_i is singular");
  }
  CMatrix f = CMatrix::Identity(hv.cols(), hv.cols()) + hv.adjoint() * si * hv;
  return hpd_inverse(f);
}

double interference_to_radar(const ChannelSet& chs, const BeamformerSet& bf,
                             const DistortionParams& d) {
  double total = 0;
  for (int j = 0; j < chs.size(); ++j) {
    const CMatrix& g = chs.g[j];
    if (g.cols() != bf.v[j].rows()) throw DimensionMismatch("G_j is " + shape(g));
    CMatrix q = gram(bf.v[j]);
    q += d.psi * diag_part(q);
    total += (g * q * g.adjoint()).trace().real();
  }
  return total;
}

double bs_power(const ChannelSet& chs, const BeamformerSet& bf) {
  double p = 0;
  for (int j = 0; j < chs.size(); ++j)
    if (!chs.is_ul(j)) p += bf.v[j].squaredNorm();
  return p;
}

}  // namespace coexist
