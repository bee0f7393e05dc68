#include "coexist/radar_nsp.hpp"

namespace coexist {

InterferenceStack stack_interference(const ChannelSet& chs) {
  const int R = chs.radar_antennas;
  CMatrix w(chs.stack_rows(), R);
  Eigen::Index r = chs.w_br.rows();
  w.topRows(r) = chs.w_br;
  for (int i = 0; i < chs.size(); ++i) {
    if (chs.is_ul(i)) continue;
    if (chs.w[i].cols() != R) throw DimensionMismatch("stack_interference: W_j " + shape(chs.w[i]));
    w.middleRows(r, chs.w[i].rows()) = chs.w[i];
    r += chs.w[i].rows();
  }
  return {w};
}

Projector build_projector(const InterferenceStack& stack) {
  const CMatrix& w = stack.w_stacked;
  const Eigen::Index rt = w.cols();
  if (rt < 1) throw DimensionMismatch("build_projector: radar has no antennas");
  Projector out;
  if (w.rows() == 0) {
    out.rank_w = 0;
  } else {
    Svd d = svd(w);
    out.rank_w = numerical_rank(d.s, w.rows(), w.cols());
    if (out.rank_w == rt)
      throw FullRankNullSpace("build_projector: interference stack " + shape(w) +
                              " has full column rank, no null space");
    // Columns of X = Vh^H past the rank are the null-space directions,
    // including indices beyond min(rows, cols).
    out.null_basis = d.vh.adjoint().rightCols(rt - out.rank_w);
    out.p = out.null_basis * out.null_basis.adjoint();
    return out;
  }
  out.null_basis = CMatrix::Identity(rt, rt);
  out.p = out.null_basis;
  return out;
}

Projector identity_projector(int r) {
  Projector p;
  p.rank_w = 0;
  p.null_basis = CMatrix::Identity(r, r);
  p.p = p.null_basis;
  return p;
}

CMatrix project_waveform(const Projector& p, const CMatrix& s_r) {
  if (s_r.rows() != p.p.cols())
    throw DimensionMismatch("project_waveform: P " + shape(p.p) + " vs s_R " + shape(s_r));
  return p.p * s_r;
}

CMatrix orthogonal_waveforms(int r, int l, SeededRng& rng) {
  if (l < r) throw DimensionMismatch("orthogonal_waveforms: need L >= R");
  CMatrix g = rng.cgauss(l, r);
  Eigen::HouseholderQR<CMatrix> qr(g);
  CMatrix q = qr.householderQ() * CMatrix::Identity(l, r);
  return std::sqrt(static_cast<double>(l)) * q.adjoint();
}

}  // namespace coexist
