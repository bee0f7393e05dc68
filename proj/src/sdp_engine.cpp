#include "coexist/sdp_engine.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace coexist {

const char* to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::Infeasible: return "Infeasible";
    case SdpStatus::MaxIter: return "MaxIter";
    case SdpStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

RMatrix LmiBlock::coeff_dense(int k) const {
  RMatrix m = RMatrix::Zero(size, size);
  auto it = coeffs.find(k);
  if (it == coeffs.end()) return m;
  for (const auto& e : it->second) {
    m(e.r, e.c) += e.v;
    if (e.r != e.c) m(e.c, e.r) += e.v;
  }
  return m;
}

RMatrix LmiBlock::evaluate(const RVector& x) const {
  RMatrix m = a0;
  for (const auto& [k, ents] : coeffs)
    for (const auto& e : ents) {
      m(e.r, e.c) += x(k) * e.v;
      if (e.r != e.c) m(e.c, e.r) += x(k) * e.v;
    }
  return m;
}

CMatrix ComplexLmiBlock::evaluate(const RVector& x) const {
  CMatrix m = a0;
  for (const auto& [k, c] : coeffs) m += x(k) * c;
  return m;
}

void check_problem(const SdpProblemSpec& spec) {
  if (spec.c.size() != spec.n_vars) throw DimensionMismatch("sdp: objective length != n_vars");
  for (const auto& b : spec.blocks) {
    if (b.a0.rows() != b.size || b.a0.cols() != b.size)
      throw DimensionMismatch("sdp: block '" + b.label + "' a0 has wrong size");
    if ((b.a0 - b.a0.transpose()).norm() > 1e-12 * std::max(1.0, b.a0.norm()))
      throw NotHermitian("sdp: block '" + b.label + "' a0 not symmetric");
    for (const auto& [k, ents] : b.coeffs) {
      if (k < 0 || k >= spec.n_vars) throw DimensionMismatch("sdp: variable index out of range");
      for (const auto& e : ents)
        if (e.r < 0 || e.c < e.r || e.c >= b.size)
          throw DimensionMismatch("sdp: entry outside upper triangle in '" + b.label + "'");
    }
  }
  if (!spec.var_bounds.empty() && static_cast<int>(spec.var_bounds.size()) != spec.n_vars)
    throw DimensionMismatch("sdp: var_bounds length != n_vars");
}

LmiBlock embed_complex(const ComplexLmiBlock& cb) {
  const int n = cb.size;
  auto check = [&](const CMatrix& m, const char* what) {
    if (m.rows() != n || m.cols() != n)
      throw DimensionMismatch(std::string("embed_complex: ") + what + " is " + shape(m));
    double tol = 1e-10 * std::max(1.0, m.norm());
    if ((m - m.adjoint()).norm() > tol)
      throw NotHermitian(std::string("embed_complex: ") + what + " in '" + cb.label + "'");
  };
  LmiBlock b;
  b.size = 2 * n;
  b.label = cb.label;
  check(cb.a0, "a0");
  auto real_of = [n](const CMatrix& h) {
    RMatrix r(2 * n, 2 * n);
    RMatrix x = 0.5 * (h + h.adjoint()).real();
    RMatrix y = 0.5 * (h + h.adjoint()).imag();
    r << x, -y, y, x;
    return r;
  };
  b.a0 = real_of(cb.a0);
  for (const auto& [k, m] : cb.coeffs) {
    check(m, "coefficient");
    RMatrix r = real_of(m);
    std::vector<SymEntry> ents;
    for (int j = 0; j < 2 * n; ++j)
      for (int i = 0; i <= j; ++i)
        if (r(i, j) != 0.0) ents.push_back({i, j, r(i, j)});
    if (!ents.empty()) b.coeffs[k] = std::move(ents);
  }
  return b;
}

namespace {

struct VarEntries {
  int var;
  std::vector<SymEntry> upper;
  std::vector<SymEntry> full;  // both triangles
};

struct Block {
  int n;
  RMatrix a0;
  std::vector<VarEntries> vars;
};

struct Problem {
  int m = 0;
  RVector c;
  std::vector<Block> blocks;
  RVector col_scale;  // x_original = col_scale .* x_scaled
  double a0_norm = 0, c_norm = 0;
};

Problem prepare(const SdpProblemSpec& spec) {
  Problem p;
  p.m = spec.n_vars;
  std::vector<LmiBlock> all = spec.blocks;
  if (!spec.var_bounds.empty()) {
    for (int k = 0; k < spec.n_vars; ++k) {
      auto [lo, hi] = spec.var_bounds[k];
      if (std::isfinite(lo)) {
        LmiBlock b;
        b.size = 1;
        b.a0 = RMatrix::Constant(1, 1, -lo);
        b.coeffs[k] = {{0, 0, 1.0}};
        all.push_back(b);
      }
      if (std::isfinite(hi)) {
        LmiBlock b;
        b.size = 1;
        b.a0 = RMatrix::Constant(1, 1, hi);
        b.coeffs[k] = {{0, 0, -1.0}};
        all.push_back(b);
      }
    }
  }
  // Column scaling so every variable has a unit-norm coefficient.
  RVector norm2 = RVector::Zero(p.m);
  for (const auto& b : all)
    for (const auto& [k, ents] : b.coeffs)
      for (const auto& e : ents) norm2(k) += (e.r == e.c ? 1.0 : 2.0) * e.v * e.v;
  p.col_scale.resize(p.m);
  for (int k = 0; k < p.m; ++k) p.col_scale(k) = norm2(k) > 0 ? 1.0 / std::sqrt(norm2(k)) : 1.0;
  p.c = spec.c.cwiseProduct(p.col_scale);
  for (const auto& b : all) {
    Block blk;
    blk.n = b.size;
    blk.a0 = 0.5 * (b.a0 + b.a0.transpose());
    p.a0_norm += blk.a0.squaredNorm();
    for (const auto& [k, ents] : b.coeffs) {
      VarEntries ve;
      ve.var = k;
      // merge duplicates
      std::map<std::pair<int, int>, double> acc;
      for (const auto& e : ents) acc[{e.r, e.c}] += e.v;
      for (const auto& [rc, v] : acc) {
        if (v == 0.0) continue;
        double s = v * p.col_scale(k);
        ve.upper.push_back({rc.first, rc.second, s});
        ve.full.push_back({rc.first, rc.second, s});
        if (rc.first != rc.second) ve.full.push_back({rc.second, rc.first, s});
      }
      if (!ve.upper.empty()) blk.vars.push_back(std::move(ve));
    }
    p.blocks.push_back(std::move(blk));
  }
  p.a0_norm = std::sqrt(p.a0_norm);
  p.c_norm = p.c.norm();
  return p;
}

void add_scaled(RMatrix& m, const std::vector<SymEntry>& ents, double x) {
  for (const auto& e : ents) {
    m(e.r, e.c) += x * e.v;
    if (e.r != e.c) m(e.c, e.r) += x * e.v;
  }
}

// A*(Z)_k = Σ_blocks tr(A_k Z)
RVector adjoint(const Problem& p, const std::vector<RMatrix>& z) {
  RVector out = RVector::Zero(p.m);
  for (size_t l = 0; l < p.blocks.size(); ++l)
    for (const auto& ve : p.blocks[l].vars) {
      double s = 0;
      for (const auto& e : ve.upper) s += (e.r == e.c ? 1.0 : 2.0) * e.v * z[l](e.r, e.c);
      out(ve.var) += s;
    }
  return out;
}

std::vector<RMatrix> apply(const Problem& p, const RVector& x) {
  std::vector<RMatrix> out;
  for (const auto& b : p.blocks) {
    RMatrix m = RMatrix::Zero(b.n, b.n);
    for (const auto& ve : b.vars) add_scaled(m, ve.upper, x(ve.var));
    out.push_back(std::move(m));
  }
  return out;
}

struct Scaling {
  RMatrix g, ginv, d;  // W = G G^T, D = W^-1
  RVector sig;         // eigenvalues of the scaled point
  bool ok = true;
};

Scaling nt_scaling(const RMatrix& s, const RMatrix& z) {
  Scaling sc;
  Eigen::LLT<RMatrix> ls(s), lz(z);
  if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) {
    sc.ok = false;
    return sc;
  }
  RMatrix l_s = ls.matrixL(), l_z = lz.matrixL();
  Eigen::BDCSVD<RMatrix> svd(l_z.transpose() * l_s, Eigen::ComputeFullU | Eigen::ComputeFullV);
  sc.sig = svd.singularValues();
  if (!(sc.sig.minCoeff() > 0)) {
    sc.ok = false;
    return sc;
  }
  RVector isq = sc.sig.cwiseSqrt().cwiseInverse();
  sc.g = l_s * svd.matrixV() * isq.asDiagonal();
  sc.ginv = isq.asDiagonal() * svd.matrixU().transpose() * l_z.transpose();
  sc.d = sc.ginv.transpose() * sc.ginv;
  return sc;
}

// Largest alpha with diag(sig) + alpha * dt ⪰ 0 (dt already scaled).
double max_step(const RVector& sig, const RMatrix& dt) {
  RVector is = sig.cwiseSqrt().cwiseInverse();
  RMatrix m = is.asDiagonal() * dt * is.asDiagonal();
  m = (0.5 * (m + m.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<RMatrix> es(m, Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues()(0);
  return lmin < 0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

double min_eig(const RMatrix& m) {
  if (m.rows() == 0) return 0;
  RMatrix s = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> es(s, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace

KktResiduals kkt_residuals(const SdpProblemSpec& spec, const SdpSolution& sol) {
  KktResiduals k;
  const RVector& x = sol.x;
  double a0n = 0;
  k.min_block_eig = std::numeric_limits<double>::infinity();
  for (const auto& b : spec.blocks) {
    a0n += b.a0.squaredNorm();
    k.min_block_eig = std::min(k.min_block_eig, min_eig(b.evaluate(x)));
  }
  if (spec.blocks.empty()) k.min_block_eig = 0;
  if (!spec.var_bounds.empty())
    for (int i = 0; i < spec.n_vars; ++i) {
      auto [lo, hi] = spec.var_bounds[i];
      if (std::isfinite(lo)) k.min_block_eig = std::min(k.min_block_eig, x(i) - lo);
      if (std::isfinite(hi)) k.min_block_eig = std::min(k.min_block_eig, hi - x(i));
    }
  a0n = std::sqrt(a0n);
  k.primal_res = std::max(0.0, -k.min_block_eig) / (1.0 + a0n);
  k.primal_obj = spec.c.dot(x);

  RVector az = RVector::Zero(spec.n_vars);
  double dual_obj = 0;
  k.min_dual_eig = std::numeric_limits<double>::infinity();
  double znorm = 0;
  const bool have_duals = sol.duals.size() == spec.blocks.size();
  for (size_t l = 0; have_duals && l < spec.blocks.size(); ++l) {
    const auto& b = spec.blocks[l];
    const RMatrix& z = sol.duals[l];
    dual_obj -= (b.a0.cwiseProduct(z)).sum();
    for (const auto& [kk, ents] : b.coeffs)
      for (const auto& e : ents) az(kk) += (e.r == e.c ? 1.0 : 2.0) * e.v * z(e.r, e.c);
    k.min_dual_eig = std::min(k.min_dual_eig, min_eig(z));
    znorm += z.squaredNorm();
  }
  if (!have_duals || spec.blocks.empty()) k.min_dual_eig = 0;
  // Bound multipliers are not stored; a residual with the sign of an
  // existing bound is absorbed by that bound's multiplier.
  RVector r = spec.c - az;
  if (!spec.var_bounds.empty())
    for (int i = 0; i < spec.n_vars; ++i) {
      auto [lo, hi] = spec.var_bounds[i];
      if (r(i) > 0 && std::isfinite(lo)) {
        dual_obj += r(i) * lo;
        r(i) = 0;
      } else if (r(i) < 0 && std::isfinite(hi)) {
        dual_obj += r(i) * hi;
        r(i) = 0;
      }
    }
  k.dual_obj = dual_obj;
  double cinf = spec.c.size() ? spec.c.cwiseAbs().maxCoeff() : 0.0;
  k.dual_res = (r.size() ? r.cwiseAbs().maxCoeff() : 0.0) / (1.0 + cinf);
  k.dual_res = std::max(k.dual_res, std::max(0.0, -k.min_dual_eig) / (1.0 + std::sqrt(znorm)));
  k.gap = std::abs(k.primal_obj - k.dual_obj) / (1.0 + std::abs(k.primal_obj));
  return k;
}

SdpSolution solve(const SdpProblemSpec& spec, double tol, int max_iter) {
  check_problem(spec);
  Problem p = prepare(spec);
  const int m = p.m;
  const size_t nb = p.blocks.size();
  SdpSolution sol;
  sol.x = RVector::Zero(m);

  int ntot = 0;
  double amax = 0;
  for (const auto& b : p.blocks) {
    ntot += b.n;
    for (const auto& ve : b.vars) {
      double s = 0;
      for (const auto& e : ve.upper) s += (e.r == e.c ? 1.0 : 2.0) * e.v * e.v;
      amax = std::max(amax, std::sqrt(s));
    }
  }
  if (ntot == 0) {
    sol.status = p.c.norm() == 0 ? SdpStatus::Optimal : SdpStatus::Infeasible;
    sol.message = "no constraints";
    sol.kkt = kkt_residuals(spec, sol);
    return sol;
  }

  // Initial point
  double cmax = 0;
  for (int k = 0; k < m; ++k) cmax = std::max(cmax, (1.0 + std::abs(p.c(k))) / (1.0 + 1.0));
  const double sq = std::sqrt(static_cast<double>(ntot));
  const double xi = std::max({10.0, sq, sq * cmax});
  const double eta = std::max({10.0, sq, amax, p.a0_norm});
  std::vector<RMatrix> S(nb), Z(nb);
  for (size_t l = 0; l < nb; ++l) {
    S[l] = eta * RMatrix::Identity(p.blocks[l].n, p.blocks[l].n);
    Z[l] = xi * RMatrix::Identity(p.blocks[l].n, p.blocks[l].n);
  }
  RVector x = RVector::Zero(m);

  auto unscaled = [&](const RVector& xs) { return RVector(xs.cwiseProduct(p.col_scale)); };
  auto finish = [&](SdpStatus st, const std::string& msg) {
    sol.x = unscaled(x);
    sol.duals.assign(Z.begin(), Z.begin() + spec.blocks.size());
    sol.status = st;
    sol.message = msg;
    sol.kkt = kkt_residuals(spec, sol);
    return sol;
  };

  int stall = 0;
  for (int it = 0; it < max_iter; ++it) {
    sol.iterations = it + 1;
    std::vector<RMatrix> ax = apply(p, x);
    std::vector<RMatrix> rp(nb);
    double rp_norm = 0, mu_num = 0, dobj = 0;
    for (size_t l = 0; l < nb; ++l) {
      rp[l] = p.blocks[l].a0 + ax[l] - S[l];
      rp_norm += rp[l].squaredNorm();
      mu_num += S[l].cwiseProduct(Z[l]).sum();
      dobj -= p.blocks[l].a0.cwiseProduct(Z[l]).sum();
    }
    rp_norm = std::sqrt(rp_norm);
    RVector rd = p.c - adjoint(p, Z);
    const double pobj = p.c.dot(x);
    const double mu = mu_num / ntot;
    const double pinf = rp_norm / (1.0 + p.a0_norm);
    const double dinf = rd.norm() / (1.0 + p.c_norm);
    const double denom = 1.0 + std::abs(pobj) + std::abs(dobj);
    const double relgap = std::max(std::abs(pobj - dobj), mu_num) / denom;

    if (std::max({pinf, dinf, relgap}) <= 0.5 * tol) {
      SdpSolution trial = finish(SdpStatus::Optimal, "converged");
      if (trial.kkt.worst() <= tol) return trial;
    }
    // Farkas certificates on the iterates.
    {
      double tz = -dobj;  // tr(A0 Z)
      if (tz < 0) {
        RVector az = adjoint(p, Z);
        if (az.norm() <= 1e-8 * (-tz) && -tz > 1e3 * (1.0 + std::abs(pobj)))
          return finish(SdpStatus::Infeasible, "primal infeasible (certificate on dual iterate)");
      }
      if (pobj < 0 && x.norm() > 1e8 * (1.0 + p.a0_norm)) {
        RVector dir = x / (-pobj);
        std::vector<RMatrix> ad = apply(p, dir);
        double worst = 0;
        for (auto& a : ad) worst = std::min(worst, min_eig(a));
        if (worst >= -1e-8) return finish(SdpStatus::Infeasible, "unbounded (dual infeasible)");
      }
    }

    std::vector<Scaling> sc(nb);
    for (size_t l = 0; l < nb; ++l) {
      sc[l] = nt_scaling(S[l], Z[l]);
      if (!sc[l].ok) return finish(SdpStatus::NumericalFailure, "lost positive definiteness");
    }

    // Schur complement M_kl = Σ tr(A_k D A_l D)
    RMatrix M = RMatrix::Zero(m, m);
    for (size_t l = 0; l < nb; ++l) {
      const auto& vars = p.blocks[l].vars;
      const RMatrix& D = sc[l].d;
      for (size_t a = 0; a < vars.size(); ++a) {
        const auto& fa = vars[a].full;
        // T = D A_a restricted to the columns it touches, evaluated lazily:
        // tr(A_a D A_b D) = Σ_{(p,q)∈A_a} Σ_{(r,s)∈A_b} a_pq b_rs D[q,r] D[s,p]
        RMatrix dad = RMatrix::Zero(D.rows(), D.cols());
        if (fa.size() > static_cast<size_t>(D.rows())) {
          RMatrix t = RMatrix::Zero(D.rows(), D.cols());
          for (const auto& e : fa) t.col(e.c) += e.v * D.col(e.r);
          dad.noalias() = t * D;  // D A_a D
        } else {
          for (const auto& e : fa) dad.noalias() += e.v * D.col(e.r) * D.row(e.c);
        }
        for (size_t b = a; b < vars.size(); ++b) {
          double s = 0;
          for (const auto& e : vars[b].upper)
            s += (e.r == e.c ? 1.0 : 2.0) * e.v * dad(e.r, e.c);
          M(vars[a].var, vars[b].var) += s;
          if (b != a) M(vars[b].var, vars[a].var) += s;
        }
      }
    }
    Eigen::LLT<RMatrix> chol(M);
    bool use_lu = chol.info() != Eigen::Success;
    Eigen::FullPivLU<RMatrix> lu;
    if (use_lu) {
      RMatrix Mr = M;
      Mr.diagonal().array() += 1e-13 * std::max(1.0, M.diagonal().cwiseAbs().maxCoeff());
      lu.compute(Mr);
    }
    auto solve_m = [&](const RVector& rhs) -> RVector {
      return use_lu ? RVector(lu.solve(rhs)) : RVector(chol.solve(rhs));
    };

    // Direction for target complementarity H (scaled space).
    std::vector<RMatrix> dS(nb), dZ(nb);
    RVector dx;
    auto direction = [&](const std::vector<RMatrix>& H) {
      std::vector<RMatrix> Cm(nb), dprd(nb);
      for (size_t l = 0; l < nb; ++l) {
        const RVector& sg = sc[l].sig;
        RMatrix K = H[l];
        for (int i = 0; i < K.rows(); ++i)
          for (int j = 0; j < K.cols(); ++j) K(i, j) *= 2.0 / (sg(i) + sg(j));
        Cm[l] = sc[l].ginv.transpose() * K * sc[l].ginv;
        dprd[l] = Cm[l] - sc[l].d * rp[l] * sc[l].d;
      }
      RVector rhs = adjoint(p, dprd) - rd;
      dx = solve_m(rhs);
      std::vector<RMatrix> adx = apply(p, dx);
      for (size_t l = 0; l < nb; ++l) {
        dS[l] = rp[l] + adx[l];
        dZ[l] = Cm[l] - sc[l].d * dS[l] * sc[l].d;
        dZ[l] = (0.5 * (dZ[l] + dZ[l].transpose())).eval();
      }
    };
    auto step_lengths = [&](double& ap, double& ad) {
      ap = ad = std::numeric_limits<double>::infinity();
      for (size_t l = 0; l < nb; ++l) {
        RMatrix ds = sc[l].ginv * dS[l] * sc[l].ginv.transpose();
        RMatrix dz = sc[l].g.transpose() * dZ[l] * sc[l].g;
        ap = std::min(ap, max_step(sc[l].sig, ds));
        ad = std::min(ad, max_step(sc[l].sig, dz));
      }
    };

    // Predictor
    std::vector<RMatrix> H(nb);
    for (size_t l = 0; l < nb; ++l) {
      RVector s2 = sc[l].sig.cwiseProduct(sc[l].sig);
      H[l] = -RMatrix(s2.asDiagonal());
    }
    direction(H);
    double ap, ad;
    step_lengths(ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double mu_aff = 0;
    for (size_t l = 0; l < nb; ++l)
      mu_aff += (S[l] + ap * dS[l]).cwiseProduct(Z[l] + ad * dZ[l]).sum();
    mu_aff /= ntot;
    double sigma = std::pow(std::max(0.0, mu_aff) / mu, 3);
    sigma = std::clamp(sigma, 0.0, 1.0);

    // Corrector
    for (size_t l = 0; l < nb; ++l) {
      RMatrix ds = sc[l].ginv * dS[l] * sc[l].ginv.transpose();
      RMatrix dz = sc[l].g.transpose() * dZ[l] * sc[l].g;
      RMatrix prod = ds * dz;
      RVector s2 = sc[l].sig.cwiseProduct(sc[l].sig);
      H[l] = sigma * mu * RMatrix::Identity(s2.size(), s2.size()) - RMatrix(s2.asDiagonal()) -
             0.5 * (prod + prod.transpose());
    }
    direction(H);
    step_lengths(ap, ad);
    const double gam = 0.9 + 0.09 * std::min(std::min(1.0, ap), std::min(1.0, ad));
    ap = std::min(1.0, gam * ap);
    ad = std::min(1.0, gam * ad);
    if (!dx.allFinite()) return finish(SdpStatus::NumericalFailure, "non-finite direction");

    x += ap * dx;
    for (size_t l = 0; l < nb; ++l) {
      S[l] += ap * dS[l];
      Z[l] += ad * dZ[l];
      S[l] = (0.5 * (S[l] + S[l].transpose())).eval();
      Z[l] = (0.5 * (Z[l] + Z[l].transpose())).eval();
    }
    if (std::max(ap, ad) < 1e-8) {
      if (++stall >= 3) {
        SdpSolution trial = finish(SdpStatus::Optimal, "stalled");
        if (trial.kkt.worst() <= tol) return trial;
        return finish(SdpStatus::NumericalFailure, "step length collapsed");
      }
    } else {
      stall = 0;
    }
  }
  SdpSolution trial = finish(SdpStatus::Optimal, "iteration limit");
  if (trial.kkt.worst() <= tol) return trial;
  return finish(SdpStatus::MaxIter, "iteration limit reached");
}

void write_sdpa(const SdpProblemSpec& spec, std::ostream& out) {
  out << "* coexist SDP in SDPA sparse format, F0 = -a0\n";
  out << spec.n_vars << "\n" << spec.blocks.size() << "\n";
  for (size_t l = 0; l < spec.blocks.size(); ++l)
    out << spec.blocks[l].size << (l + 1 < spec.blocks.size() ? " " : "\n");
  if (spec.blocks.empty()) out << "\n";
  out.precision(17);
  for (int k = 0; k < spec.n_vars; ++k) out << spec.c(k) << (k + 1 < spec.n_vars ? " " : "\n");
  for (size_t l = 0; l < spec.blocks.size(); ++l) {
    const auto& b = spec.blocks[l];
    for (int j = 0; j < b.size; ++j)
      for (int i = 0; i <= j; ++i)
        if (b.a0(i, j) != 0.0) out << 0 << " " << l + 1 << " " << i + 1 << " " << j + 1 << " " << -b.a0(i, j) << "\n";
    for (const auto& [k, ents] : b.coeffs)
      for (const auto& e : ents)
        out << k + 1 << " " << l + 1 << " " << e.r + 1 << " " << e.c + 1 << " " << e.v << "\n";
  }
}

SdpProblemSpec read_sdpa(std::istream& in) {
  std::string line;
  std::vector<std::string> toks;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '*' || line[0] == '"') continue;
    for (char& ch : line)
      if (ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')') ch = ' ';
    std::istringstream ls(line);
    std::string t;
    while (ls >> t) toks.push_back(t);
  }
  size_t pos = 0;
  auto next = [&]() {
    if (pos >= toks.size()) throw DimensionMismatch("read_sdpa: truncated input");
    return toks[pos++];
  };
  SdpProblemSpec spec;
  spec.n_vars = std::stoi(next());
  int nblocks = std::stoi(next());
  for (int l = 0; l < nblocks; ++l) {
    LmiBlock b;
    b.size = std::abs(std::stoi(next()));
    b.a0 = RMatrix::Zero(b.size, b.size);
    spec.blocks.push_back(b);
  }
  spec.c.resize(spec.n_vars);
  for (int k = 0; k < spec.n_vars; ++k) spec.c(k) = std::stod(next());
  while (pos + 5 <= toks.size()) {
    int k = std::stoi(next()), l = std::stoi(next()) - 1, i = std::stoi(next()) - 1,
        j = std::stoi(next()) - 1;
    double v = std::stod(next());
    if (i > j) std::swap(i, j);
    auto& b = spec.blocks.at(l);
    if (k == 0) {
      b.a0(i, j) -= v;
      if (i != j) b.a0(j, i) -= v;
    } else {
      b.coeffs[k - 1].push_back({i, j, v});
    }
  }
  return spec;
}

}  // namespace coexist
