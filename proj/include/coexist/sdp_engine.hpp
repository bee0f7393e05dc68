#pragma once

#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coexist/matrix_core.hpp"

namespace coexist {

// One stored entry of a symmetric matrix, r <= c.
struct SymEntry {
  int r, c;
  double v;
};

// Constraint  a0 + Σ_k x_k coeffs[k]  ⪰ 0.
struct LmiBlock {
  int size = 0;
  RMatrix a0;
  std::map<int, std::vector<SymEntry>> coeffs;
  std::string label;

  // Dense coefficient matrix of variable k (zero when absent).
  RMatrix coeff_dense(int k) const;
  RMatrix evaluate(const RVector& x) const;
};

// Hermitian data before the real embedding.
struct ComplexLmiBlock {
  int size = 0;
  CMatrix a0;
  std::map<int, CMatrix> coeffs;
  std::string label;

  CMatrix evaluate(const RVector& x) const;
};

struct SdpProblemSpec {
  int n_vars = 0;
  RVector c;
  std::vector<LmiBlock> blocks;
  // Optional box bounds, turned into 1x1 blocks by the solver.
  std::vector<std::pair<double, double>> var_bounds;
};

enum class SdpStatus { Optimal, Infeasible, MaxIter, NumericalFailure };
const char* to_string(SdpStatus s);

struct KktResiduals {
  double primal_res = 0;  // max(0, -min eig of any block) / (1 + ||A0||_F)
  double dual_res = 0;    // ||c - A*(Z)||_inf / (1 + ||c||_inf), or dual PSD violation
  double gap = 0;         // |c^T x + Σ tr(A0 Z)| / (1 + |c^T x|)
  double primal_obj = 0;
  double dual_obj = 0;
  double min_block_eig = 0;
  double min_dual_eig = 0;
  double worst() const { return std::max({primal_res, dual_res, gap}); }
};

struct SdpSolution {
  RVector x;
  SdpStatus status = SdpStatus::NumericalFailure;
  std::vector<RMatrix> duals;  // one per block of the spec, bound blocks excluded
  KktResiduals kkt;
  int iterations = 0;
  std::string message;
};

void check_problem(const SdpProblemSpec& spec);

LmiBlock embed_complex(const ComplexLmiBlock& block);

SdpSolution solve(const SdpProblemSpec& spec, double tol = 1e-7, int max_iter = 100);

KktResiduals kkt_residuals(const SdpProblemSpec& spec, const SdpSolution& sol);

// SDPA sparse format: min c^T x s.t. Σ F_k x_k - F_0 ⪰ 0, with F_0 = -a0.
void write_sdpa(const SdpProblemSpec& spec, std::ostream& out);
SdpProblemSpec read_sdpa(std::istream& in);

}  // namespace coexist
