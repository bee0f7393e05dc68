#pragma once

#include "coexist/channel_model.hpp"
#include "coexist/matrix_core.hpp"

namespace coexist {

struct InterferenceStack {
  CMatrix w_stacked;  // (N0 + sum_j N_j) x R
};

struct Projector {
  CMatrix p;
  int rank_w = 0;
  CMatrix null_basis;  // R x (R - rank_w), orthonormal columns spanning range(p)
};

// [W_BR; W_1^DL; ...; W_J^DL]
InterferenceStack stack_interference(const ChannelSet& chs);

Projector build_projector(const InterferenceStack& stack);
Projector identity_projector(int r);

CMatrix project_waveform(const Projector& p, const CMatrix& s_r);

// R x L probing block with (1/L) S S^H = I (requires L >= R).
CMatrix orthogonal_waveforms(int r, int l, SeededRng& rng);

}  // namespace coexist
