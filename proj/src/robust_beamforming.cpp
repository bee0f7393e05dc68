#include "coexist/robust_beamforming.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace coexist {

namespace {

CMatrix row_only(const CMatrix& v, int l) {
  CMatrix r = CMatrix::Zero(v.rows(), v.cols());
  r.row(l) = v.row(l);
  return r;
}

CMatrix col_only(const CMatrix& k, int l) {
  CMatrix r = CMatrix::Zero(k.rows(), k.cols());
  r.col(l) = k.col(l);
  return r;
}

struct Stacker {
  std::vector<CVector> vals;
  std::vector<CMatrix> jacs;
  void push(const CMatrix& val, const CMatrix& jac) {
    vals.push_back(vec(val));
    jacs.push_back(jac);
  }
  std::pair<CVector, CMatrix> finish(Eigen::Index cols) const {
    Eigen::Index n = 0;
    for (const auto& v : vals) n += v.size();
    CVector z(n);
    CMatrix m(n, cols);
    Eigen::Index r = 0;
    for (size_t k = 0; k < vals.size(); ++k) {
      z.segment(r, vals[k].size()) = vals[k];
      m.middleRows(r, vals[k].size()) = jacs[k];
      r += vals[k].size();
    }
    return {z, m};
  }
};

int common_m_tx(const ChannelSet& chs) {
  int m = chs.links.at(0).m_tx;
  for (const auto& l : chs.links)
    if (l.m_tx != m)
      throw InfeasibleDimensions("a shared radar-link error needs equal transmit antenna counts");
  return m;
}

double logabsdet(const CMatrix& b) { return std::log(std::abs(b.determinant())); }

void check_setup(const ChannelSet& chs, const BeamformerSet& bf) {
  int n = chs.size();
  if ((int)bf.v.size() != n || (int)bf.u.size() != n || (int)bf.b.size() != n)
    throw DimensionMismatch("beamformer set does not cover every link");
  for (int i = 0; i < n; ++i) {
    const auto& l = chs.links[i];
    if (bf.v[i].rows() != l.m_tx || bf.v[i].cols() != l.streams)
      throw DimensionMismatch("V_" + std::to_string(i) + " is " + shape(bf.v[i]));
    if (bf.u[i].rows() != l.n_rx || bf.u[i].cols() != l.streams)
      throw DimensionMismatch("U_" + std::to_string(i) + " is " + shape(bf.u[i]));
    if (bf.b[i].rows() != l.streams || bf.b[i].cols() != l.streams)
      throw DimensionMismatch("B_" + std::to_string(i) + " is " + shape(bf.b[i]));
  }
}

// Block from an evaluator that is affine in the listed variables.
ComplexLmiBlock affine_block(int n_vars, const std::vector<int>& vars,
                             const std::function<CMatrix(const RVector&)>& f,
                             const std::string& label) {
  RVector x = RVector::Zero(n_vars);
  ComplexLmiBlock b;
  b.label = label;
  b.a0 = f(x);
  b.size = static_cast<int>(b.a0.rows());
  double scale = std::max(1.0, b.a0.cwiseAbs().maxCoeff());
  for (int k : vars) {
    x(k) = 1;
    CMatrix c = f(x) - b.a0;
    x(k) = 0;
    double cmax = c.size() ? c.cwiseAbs().maxCoeff() : 0.0;
    if (cmax == 0) continue;
    double floor = 1e-15 * std::max(scale, cmax);
    for (Eigen::Index q = 0; q < c.cols(); ++q)
      for (Eigen::Index p = 0; p < c.rows(); ++p)
        if (std::abs(c(p, q)) < floor) c(p, q) = 0;
    b.coeffs[k] = (0.5 * (c + c.adjoint())).eval();
  }
  b.a0 = (0.5 * (b.a0 + b.a0.adjoint())).eval();
  return b;
}

LmiBlock scalar_row(double a0, const std::map<int, double>& coeffs, const std::string& label) {
  LmiBlock b;
  b.size = 1;
  b.a0 = RMatrix::Constant(1, 1, a0);
  b.label = label;
  for (auto [k, v] : coeffs)
    if (v != 0) b.coeffs[k] = {{0, 0, v}};
  return b;
}

CMatrix raw_v(const RVector& x, int off, int m, int d) {
  CMatrix v(m, d);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < m; ++r) {
      int k = off + 2 * (c * m + r);
      v(r, c) = cd(x(k), x(k + 1));
    }
  return v;
}

CMatrix raw_t(const RVector& x, int off, int m) {
  CMatrix t(m, m);
  int k = off;
  for (int p = 0; p < m; ++p) t(p, p) = x(k++);
  for (int q = 0; q < m; ++q)
    for (int p = 0; p < q; ++p) {
      t(p, q) = cd(x(k), x(k + 1));
      t(q, p) = std::conj(t(p, q));
      k += 2;
    }
  return t;
}

std::vector<int> range(int off, int count) {
  std::vector<int> r(count);
  std::iota(r.begin(), r.end(), off);
  return r;
}

}  // namespace

RobustSetup make_robust_setup(const ScenarioConfig& cfg, double p_r) {
  RobustSetup s;
  s.dist = {cfg.psi, cfg.upsilon};
  s.p_r = p_r;
  s.delta = cfg.delta;
  s.theta = cfg.theta;
  return s;
}

std::pair<CVector, CMatrix> build_z(const ChannelSet& chs, const BeamformerSet& bf,
                                    const DistortionParams& d, double p_r, int i, int j) {
  if (i < 0 || j < 0 || i >= chs.size() || j >= chs.size())
    throw DimensionMismatch("build_z: link index out of range");
  check_setup(chs, bf);
  const auto& li = chs.links[i];
  const int n = li.n_rx, m = chs.links[j].m_tx;
  const CMatrix k = bf.b[i].adjoint() * bf.u[i].adjoint();
  const CMatrix& h = chs.h[i][j];
  const CMatrix& v = bf.v[j];
  const double sp = std::sqrt(d.psi), su = std::sqrt(d.upsilon);
  Stacker st;
  if (j == i)
    st.push(k * h * v - bf.b[i].adjoint(), kron(v.transpose(), k));
  else if (chs.is_si_pair(i, j))
    st.push(CMatrix::Zero(k.rows(), v.cols()), CMatrix::Zero(k.rows() * v.cols(), n * m));
  else
    st.push(k * h * v, kron(v.transpose(), k));
  for (int l = 0; l < m; ++l) {
    CMatrix vl = row_only(v, l);
    st.push(sp * k * h * vl, sp * kron(vl.transpose(), k));
  }
  for (int l = 0; l < n; ++l) {
    CMatrix kl = col_only(k, l);
    st.push(su * kl * h * v, su * kron(v.transpose(), kl));
  }
  if (j == i) {
    CMatrix kw = std::sqrt(p_r) * k * chs.w[i];
    st.push(kw, CMatrix::Zero(kw.size(), n * m));
    st.push(std::sqrt(li.noise_w) * k, CMatrix::Zero(k.size(), n * m));
  }
  return st.finish(n * m);
}

std::pair<CVector, CMatrix> build_iota(const ChannelSet& chs, const BeamformerSet& bf,
                                       const DistortionParams& d) {
  check_setup(chs, bf);
  const int m = common_m_tx(chs), r = chs.radar_antennas;
  const CMatrix eye = CMatrix::Identity(r, r);
  const double sp = std::sqrt(d.psi);
  Stacker st;
  for (int j = 0; j < chs.size(); ++j) {
    const CMatrix& g = chs.g[j];
    const CMatrix& v = bf.v[j];
    st.push(g * v, kron(v.transpose(), eye));
    for (int l = 0; l < m; ++l) {
      CMatrix vl = row_only(v, l);
      st.push(sp * g * vl, sp * kron(vl.transpose(), eye));
    }
  }
  return st.finish(r * m);
}

VectorizedForms build_vectorized(const ChannelSet& chs, const BeamformerSet& bf,
                                 const DistortionParams& d, double p_r) {
  VectorizedForms f;
  int n = chs.size();
  f.z_hat.assign(n, std::vector<CVector>(n));
  f.z_mat.assign(n, std::vector<CMatrix>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) std::tie(f.z_hat[i][j], f.z_mat[i][j]) = build_z(chs, bf, d, p_r, i, j);
  std::tie(f.iota_tilde, f.e_lambda) = build_iota(chs, bf, d);
  f.b_dim = static_cast<int>(f.iota_tilde.size());
  return f;
}

namespace {

CMatrix s_lemma_block(const CVector& z, const CMatrix& zm, double top, double slack,
                      double radius) {
  const Eigen::Index a = z.size(), c = zm.cols();
  if (zm.rows() != a) throw DimensionMismatch("S-lemma block: vector and matrix rows differ");
  CMatrix m = CMatrix::Zero(1 + a + c, 1 + a + c);
  m(0, 0) = top - slack;
  m.block(1, 0, a, 1) = z;
  m.block(0, 1, 1, a) = z.adjoint();
  m.block(1, 1, a, a).setIdentity();
  m.block(1, 1 + a, a, c) = -radius * zm;
  m.block(1 + a, 1, c, a) = -radius * zm.adjoint();
  m.block(1 + a, 1 + a, c, c) = slack * CMatrix::Identity(c, c);
  return m;
}

}  // namespace

CMatrix build_qos_lmi(const CVector& z_hat, const CMatrix& z_mat, double lambda, double epsilon,
                      double delta) {
  return s_lemma_block(z_hat, z_mat, lambda, epsilon, delta);
}

CMatrix build_interference_lmi(const CVector& iota, const CMatrix& e_lambda, double gamma,
                               double eta, double theta) {
  return s_lemma_block(iota, e_lambda, gamma, eta, theta);
}

double worst_case_norm2(const CVector& a, const CMatrix& z, double radius) {
  if (z.rows() != a.size()) throw DimensionMismatch("worst_case_norm2: " + shape(z));
  if (radius < 0) throw DomainError("worst_case_norm2: negative radius");
  const double a2 = a.squaredNorm();
  if (radius == 0 || z.cols() == 0) return a2;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(z.adjoint() * z);
  const RVector s = es.eigenvalues().cwiseMax(0.0);
  const CVector c = es.eigenvectors().adjoint() * (z.adjoint() * a);
  const RVector c2 = c.cwiseAbs2();
  const double smax = s.maxCoeff(), r2 = radius * radius;
  const RVector gap = (smax - s.array()).matrix();
  auto phi = [&](double t) {
    double v = a2 + (t + smax) * r2;
    for (Eigen::Index k = 0; k < s.size(); ++k)
      if (c2(k) > 0) v += c2(k) / (t + gap(k));
    return v;
  };
  auto dphi = [&](double t) {
    double v = r2;
    for (Eigen::Index k = 0; k < s.size(); ++k)
      if (c2(k) > 0) v -= c2(k) / ((t + gap(k)) * (t + gap(k)));
    return v;
  };
  double hi = std::sqrt(c2.sum()) / radius + smax + 1e-300;
  double lo = 1e-16 * hi;
  if (dphi(lo) >= 0) return phi(lo);
  double llo = std::log(lo), lhi = std::log(hi);
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (llo + lhi);
    (dphi(std::exp(mid)) < 0 ? llo : lhi) = mid;
  }
  return phi(std::exp(0.5 * (llo + lhi)));
}

CMatrix VarLayout::v_of(const RVector& x, const ChannelSet& chs, int j) const {
  const auto& l = chs.links[j];
  return v_scale[j] * raw_v(x, v_off[j], l.m_tx, l.streams);
}

CMatrix VarLayout::t_of(const RVector& x, const ChannelSet& chs, int j) const {
  if (t_off.empty()) throw DimensionMismatch("layout has no T variables");
  return v_scale[j] * v_scale[j] * raw_t(x, t_off[j], chs.links[j].m_tx);
}

VStepProblem assemble_p3_vstep(const ChannelSet& chs, const BeamformerSet& bf,
                               const RobustSetup& setup, VStepForm form) {
  check_setup(chs, bf);
  const int ns = chs.size();
  const int m_common = common_m_tx(chs);
  const DistortionParams& d = setup.dist;
  VStepProblem prob;
  VarLayout& L = prob.layout;
  int n = 0;
  for (int j = 0; j < ns; ++j) {
    const auto& l = chs.links[j];
    L.v_off.push_back(n);
    n += 2 * l.m_tx * l.streams;
    double norm = bf.v[j].norm() / std::sqrt(double(l.m_tx * l.streams));
    double floor = 1e-6 * std::sqrt(l.power_w / (l.m_tx * l.streams));
    L.v_scale.push_back(std::max(norm, floor));
  }
  if (form == VStepForm::Lifted)
    for (int j = 0; j < ns; ++j) {
      L.t_off.push_back(n);
      n += chs.links[j].m_tx * chs.links[j].m_tx;
    }
  L.lambda.assign(ns, std::vector<int>(ns));
  L.epsilon.assign(ns, std::vector<int>(ns));
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < ns; ++j) L.lambda[i][j] = n++;
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < ns; ++j) L.epsilon[i][j] = n++;
  L.gamma = n++;
  L.eta = n++;
  L.n = n;
  L.gamma_scale = std::max(robust_interference(chs, bf, setup), 1e-300);

  SdpProblemSpec& spec = prob.spec;
  spec.n_vars = n;
  spec.c = RVector::Zero(n);
  spec.c(L.gamma) = 1;
  auto add = [&](const ComplexLmiBlock& cb, BlockInfo info) {
    info.complex_size = cb.size;
    spec.blocks.push_back(embed_complex(cb));
    prob.info.push_back(info);
  };
  auto add_scalar = [&](const LmiBlock& b, BlockInfo info) {
    spec.blocks.push_back(b);
    prob.info.push_back(info);
  };
  auto v_vars = [&](int j) {
    return range(L.v_off[j], 2 * chs.links[j].m_tx * chs.links[j].streams);
  };
  auto t_vars = [&](int j) { return range(L.t_off[j], chs.links[j].m_tx * chs.links[j].m_tx); };
  const double root_gs = std::sqrt(L.gamma_scale);
  const double theta_abs = radar_radius(chs, setup.theta) / root_gs;

  // QoS
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < ns; ++j) {
      const double delta = channel_radius(chs, setup.delta, i, j);
      std::vector<int> vars = v_vars(j);
      vars.push_back(L.lambda[i][j]);
      vars.push_back(L.epsilon[i][j]);
      std::function<CMatrix(const RVector&)> f;
      if (form == VStepForm::Displayed) {
        f = [&, i, j, delta](const RVector& x) {
          BeamformerSet b = bf;
          b.v[j] = L.v_of(x, chs, j);
          auto [z, zm] = build_z(chs, b, d, setup.p_r, i, j);
          return build_qos_lmi(z, zm, x(L.lambda[i][j]), x(L.epsilon[i][j]), delta);
        };
      } else {
        auto tv = t_vars(j);
        vars.insert(vars.end(), tv.begin(), tv.end());
        const auto& li = chs.links[i];
        const CMatrix k = bf.b[i].adjoint() * bf.u[i].adjoint();
        const CMatrix kk = k.adjoint() * k;
        const CMatrix dk = diag_part(kk);
        const CVector h = vec(chs.h[i][j]);
        const bool si = chs.is_si_pair(i, j);
        double c0 = 0;
        if (j == i)
          c0 = bf.b[i].squaredNorm() + setup.p_r * (k * chs.w[i]).squaredNorm() +
               li.noise_w * k.squaredNorm();
        f = [&, i, j, delta, k, kk, dk, h, si, c0](const RVector& x) {
          CMatrix t = L.t_of(x, chs, j);
          CMatrix td = diag_part(t);
          CMatrix cross = si ? CMatrix(d.psi * td) : CMatrix(t + d.psi * td);
          CMatrix q = kron(cross.conjugate(), kk) + d.upsilon * kron(t.conjugate(), dk);
          CVector beta = CVector::Zero(h.size());
          if (j == i) beta = vec((L.v_of(x, chs, j) * bf.b[i] * k).transpose()).conjugate();
          CVector g = q * h - beta;
          double tau = (h.adjoint() * q * h)(0, 0).real() - 2 * beta.dot(h).real() + c0;
          const Eigen::Index c = h.size();
          CMatrix m(1 + c, 1 + c);
          m(0, 0) = x(L.lambda[i][j]) - tau - x(L.epsilon[i][j]);
          m.block(1, 0, c, 1) = -delta * g;
          m.block(0, 1, 1, c) = -delta * g.adjoint();
          m.block(1, 1, c, c) =
              x(L.epsilon[i][j]) * CMatrix::Identity(c, c) - delta * delta * q;
          return m;
        };
      }
      add(affine_block(n, vars, f, "qos " + std::to_string(i) + "," + std::to_string(j)),
          {BlockInfo::Qos, i, j});
    }

  // radar interference
  {
    std::vector<int> vars{L.gamma, L.eta};
    ChannelSet scaled_g = chs;
    for (auto& g : scaled_g.g) g /= root_gs;
    std::function<CMatrix(const RVector&)> f;
    if (form == VStepForm::Displayed) {
      for (int j = 0; j < ns; ++j) {
        auto vv = v_vars(j);
        vars.insert(vars.end(), vv.begin(), vv.end());
      }
      f = [&, scaled_g, theta_abs](const RVector& x) {
        BeamformerSet b = bf;
        for (int j = 0; j < ns; ++j) b.v[j] = L.v_of(x, chs, j);
        auto [io, e] = build_iota(scaled_g, b, d);
        return build_interference_lmi(io, e, x(L.gamma), x(L.eta), theta_abs);
      };
    } else {
      for (int j = 0; j < ns; ++j) {
        auto tv = t_vars(j);
        vars.insert(vars.end(), tv.begin(), tv.end());
      }
      const int r = chs.radar_antennas;
      f = [&, scaled_g, theta_abs, r](const RVector& x) {
        const Eigen::Index c = r * m_common;
        const CMatrix eye = CMatrix::Identity(r, r);
        CMatrix qs = CMatrix::Zero(c, c);
        CVector q = CVector::Zero(c);
        double cst = 0;
        for (int j = 0; j < ns; ++j) {
          CMatrix t = L.t_of(x, chs, j);
          CMatrix tp = t + d.psi * diag_part(t);
          CMatrix qj = kron(tp.conjugate(), eye);
          CVector gj = vec(scaled_g.g[j]);
          CVector qg = qj * gj;
          qs += qj;
          q += qg;
          cst += gj.dot(qg).real();
        }
        CMatrix m(1 + c, 1 + c);
        m(0, 0) = x(L.gamma) - cst - x(L.eta);
        m.block(1, 0, c, 1) = -theta_abs * q;
        m.block(0, 1, 1, c) = -theta_abs * q.adjoint();
        m.block(1, 1, c, c) =
            x(L.eta) * CMatrix::Identity(c, c) - theta_abs * theta_abs * qs;
        return m;
      };
    }
    add(affine_block(n, vars, f, "interference"), {BlockInfo::Interference});
  }

  // power
  if (form == VStepForm::Displayed) {
    auto power_block = [&](const std::vector<int>& links, double p) {
      std::vector<int> vars;
      for (int j : links) {
        auto vv = v_vars(j);
        vars.insert(vars.end(), vv.begin(), vv.end());
      }
      return affine_block(
          n, vars,
          [&, links, p](const RVector& x) {
            std::vector<CVector> parts;
            Eigen::Index len = 0;
            for (int j : links) {
              parts.push_back(vec(L.v_of(x, chs, j)) / std::sqrt(p));
              len += parts.back().size();
            }
            CVector v(len);
            Eigen::Index r = 0;
            for (const auto& pv : parts) {
              v.segment(r, pv.size()) = pv;
              r += pv.size();
            }
            CMatrix m = CMatrix::Identity(1 + len, 1 + len);
            m.block(1, 0, len, 1) = v;
            m.block(0, 1, 1, len) = v.adjoint();
            return m;
          },
          "power");
    };
    std::vector<int> dl;
    for (int j = 0; j < ns; ++j) {
      if (chs.is_ul(j))
        add(power_block({j}, chs.links[j].power_w), {BlockInfo::Power, j});
      else
        dl.push_back(j);
    }
    if (!dl.empty()) add(power_block(dl, chs.bs_power_w), {BlockInfo::BsPower});
  } else {
    std::map<int, double> bs;
    for (int j = 0; j < ns; ++j) {
      const double s2 = L.v_scale[j] * L.v_scale[j];
      const int m = chs.links[j].m_tx;
      std::map<int, double> row;
      for (int p = 0; p < m; ++p) row[L.t_off[j] + p] = -s2;
      if (chs.is_ul(j)) {
        const double pw = chs.links[j].power_w;
        for (auto& [k, v] : row) v /= pw;
        add_scalar(scalar_row(1.0, row, "power"), {BlockInfo::Power, j});
      } else {
        for (auto [k, v] : row) bs[k] = v / chs.bs_power_w;
      }
    }
    if (!bs.empty()) add_scalar(scalar_row(1.0, bs, "bs power"), {BlockInfo::BsPower});
    for (int j = 0; j < ns; ++j) {
      const auto& l = chs.links[j];
      std::vector<int> vars = v_vars(j);
      auto tv = t_vars(j);
      vars.insert(vars.end(), tv.begin(), tv.end());
      add(affine_block(
              n, vars,
              [&, j, l](const RVector& x) {
                const int m = l.m_tx, s = l.streams;
                CMatrix blk = CMatrix::Identity(m + s, m + s);
                blk.topLeftCorner(m, m) = raw_t(x, L.t_off[j], m);
                CMatrix v = raw_v(x, L.v_off[j], m, s);
                blk.topRightCorner(m, s) = v;
                blk.bottomLeftCorner(s, m) = v.adjoint();
                return blk;
              },
              "link " + std::to_string(j)),
          {BlockInfo::Link, j});
    }
  }

  // rate rows and sign constraints
  for (int i = 0; i < ns; ++i) {
    const auto& l = chs.links[i];
    std::map<int, double> row;
    for (int j = 0; j < ns; ++j) row[L.lambda[i][j]] = -1;
    double a0 = l.streams + 2 * logabsdet(bf.b[i]) - l.qos_nats;
    add_scalar(scalar_row(a0, row, "rate " + std::to_string(i)), {BlockInfo::Rate, i});
  }
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < ns; ++j) {
      add_scalar(scalar_row(0, {{L.lambda[i][j], 1.0}}, "lambda>=0"), {BlockInfo::Nonneg, i, j});
      add_scalar(scalar_row(0, {{L.epsilon[i][j], 1.0}}, "epsilon>=0"), {BlockInfo::Nonneg, i, j});
    }
  add_scalar(scalar_row(0, {{L.eta, 1.0}}, "eta>=0"), {BlockInfo::Nonneg});
  return prob;
}

CMatrix update_b_closed_form(const ChannelSet& chs, const BeamformerSet& bf,
                             const DistortionParams& d, double p_r, int i) {
  return cholesky_lower(hpd_inverse(mse_mmse(chs, bf, d, p_r, i)));
}

double robust_margin(const ChannelSet& chs, const BeamformerSet& bf, const RobustSetup& setup,
                     int i) {
  const auto& l = chs.links.at(i);
  double m = l.streams + 2 * logabsdet(bf.b[i]) - l.qos_nats;
  for (int j = 0; j < chs.size(); ++j) {
    auto [z, zm] = build_z(chs, bf, setup.dist, setup.p_r, i, j);
    m -= worst_case_norm2(z, zm, channel_radius(chs, setup.delta, i, j));
  }
  return m;
}

double robust_interference(const ChannelSet& chs, const BeamformerSet& bf,
                           const RobustSetup& setup) {
  auto [io, e] = build_iota(chs, bf, setup.dist);
  return worst_case_norm2(io, e, radar_radius(chs, setup.theta));
}

namespace {

double worst_mse_sum(const ChannelSet& chs, const BeamformerSet& bf, const RobustSetup& setup,
                     int i) {
  double w = 0;
  for (int j = 0; j < chs.size(); ++j) {
    auto [z, zm] = build_z(chs, bf, setup.dist, setup.p_r, i, j);
    w += worst_case_norm2(z, zm, channel_radius(chs, setup.delta, i, j));
  }
  return w;
}

// MMSE receiver and B = chol(E^-1), with B rescaled by the factor that
// maximises the robust margin (the worst-case MSE term is quadratic in B).
void receivers_closed_form(const ChannelSet& chs, BeamformerSet& bf, const RobustSetup& setup) {
  const DistortionParams& d = setup.dist;
  for (int i = 0; i < chs.size(); ++i) {
    bf.u[i] = mmse_receiver(chs, bf, d, setup.p_r, i);
    bf.b[i] = update_b_closed_form(chs, bf, d, setup.p_r, i);
  }
  for (int i = 0; i < chs.size(); ++i) {
    double w = worst_mse_sum(chs, bf, setup, i);
    if (w > 0) bf.b[i] *= std::sqrt(chs.links[i].streams / w);
  }
}

// Receivers designed against a diagonally loaded covariance: each channel
// error ball adds r_ij² σ_max(V_j)² of white interference (times `load`).
void receivers_loaded(const ChannelSet& chs, BeamformerSet& bf, const RobustSetup& setup,
                      double load) {
  const DistortionParams& d = setup.dist;
  for (int i = 0; i < chs.size(); ++i) {
    double extra = 0;
    for (int j = 0; j < chs.size(); ++j) {
      if (bf.v[j].size() == 0) continue;
      double r = channel_radius(chs, setup.delta, i, j);
      double s = svd(bf.v[j]).s(0);
      extra += r * r * s * s;
    }
    CMatrix hv = chs.h[i][i] * bf.v[i];
    CMatrix c = hv * hv.adjoint() + sigma_i(chs, bf, d, setup.p_r, i);
    c.diagonal().array() += load * extra;
    CMatrix ci = hpd_inverse(c);
    bf.u[i] = ci * hv;
    CMatrix e = CMatrix::Identity(hv.cols(), hv.cols()) - hv.adjoint() * ci * hv;
    e = (0.5 * (e + e.adjoint())).eval();
    bf.b[i] = cholesky_lower(hpd_inverse(e));
  }
  for (int i = 0; i < chs.size(); ++i) {
    double w = worst_mse_sum(chs, bf, setup, i);
    if (w > 0) bf.b[i] *= std::sqrt(chs.links[i].streams / w);
  }
}

double min_margin(const ChannelSet& chs, const BeamformerSet& bf, const RobustSetup& setup) {
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < chs.size(); ++i) m = std::min(m, robust_margin(chs, bf, setup, i));
  return m;
}


// Per-link powers found by maximising the worst robust QoS margin: the rate
// rows get a common slack s and the objective becomes s.
BeamformerSet max_margin_start(const ChannelSet& chs, const RobustSetup& setup,
                               const AlgorithmConfig& cfg, BeamformerSet bf) {
  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < cfg.init_max_iter; ++it) {
    VStepProblem prob = assemble_p3_vstep(chs, bf, setup, cfg.form);
    SdpProblemSpec& spec = prob.spec;
    const int s_var = spec.n_vars++;
    spec.c = RVector::Zero(spec.n_vars);
    spec.c(s_var) = 1;
    for (size_t l = 0; l < spec.blocks.size(); ++l)
      if (prob.info[l].kind == BlockInfo::Rate) spec.blocks[l].coeffs[s_var] = {{0, 0, 1.0}};
    SdpSolution sol = solve(spec, cfg.sdp_tol, cfg.sdp_max_iter);
    if (sol.status != SdpStatus::Optimal) break;
    BeamformerSet kept = bf;
    for (int j = 0; j < chs.size(); ++j) kept.v[j] = prob.layout.v_of(sol.x, chs, j);
    double m_kept = min_margin(chs, kept, setup);
    if (m_kept >= 0) return kept;
    bf = kept;
    double m = m_kept;
    for (double load : {0.0, 0.25, 1.0, 4.0}) {
      BeamformerSet moved = kept;
      try {
        receivers_loaded(chs, moved, setup, load);
      } catch (const Error&) {
        continue;
      }
      double mm = min_margin(chs, moved, setup);
      if (mm >= 0) return moved;
      if (mm > m) {
        m = mm;
        bf = moved;
      }
    }
    if (m <= prev + 1e-3 * std::abs(prev)) break;
    prev = m;
  }
  throw SdpInfeasible("robust QoS targets cannot be met from any start point");
}

}  // namespace

BeamformerSet initial_beamformers(const ChannelSet& chs, const RobustSetup& setup,
                                  const AlgorithmConfig& cfg) {
  BeamformerSet full = empty_beamformers(chs);
  const int n_dl = chs.num_dl;
  for (int i = 0; i < chs.size(); ++i) {
    const auto& l = chs.links[i];
    Svd s = svd(chs.h[i][i]);
    CMatrix dir = s.vh.adjoint().leftCols(l.streams);
    double p = chs.is_ul(i) ? l.power_w : chs.bs_power_w / n_dl;
    full.v[i] = dir * std::sqrt(p / dir.squaredNorm());
  }
  // UL and DL scales searched separately: DL power feeds the SI distortion
  // seen by every UL link, so a common scale cannot trade the two.
  const int pts = std::max(2, cfg.init_grid_points);
  struct Scan {
    BeamformerSet best;
    double best_i = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, BeamformerSet>> near;
  };
  auto scan = [&](const BeamformerSet& base, const std::vector<double>& loads) {
    Scan out;
    for (int a = 0; a < pts; ++a)
      for (int c = 0; c < pts; ++c) {
        double tu = std::pow(10.0, -8.0 * a / (pts - 1)), td = std::pow(10.0, -8.0 * c / (pts - 1));
        BeamformerSet scaled = base;
        for (int i = 0; i < chs.size(); ++i) scaled.v[i] *= std::sqrt(chs.is_ul(i) ? tu : td);
        for (double load : loads) {
          BeamformerSet b = scaled;
          try {
            if (load == 0)
              receivers_closed_form(chs, b, setup);
            else
              receivers_loaded(chs, b, setup, load);
          } catch (const Error&) {
            continue;
          }
          double m = min_margin(chs, b, setup);
          if (m < 0) {
            if (std::isfinite(m)) out.near.emplace_back(m, b);
            continue;
          }
          double ri = robust_interference(chs, b, setup);
          if (ri < out.best_i) {
            out.best_i = ri;
            out.best = b;
          }
        }
      }
    return out;
  };
  Scan first = scan(full, {0.0});
  if (std::isfinite(first.best_i)) return first.best;
  // Margin maximisation is local, so it is restarted from the closest few grid
  // points; its per-link power split is then scaled down like the plain start.
  auto& near = first.near;
  std::sort(near.begin(), near.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  for (size_t k = 0; k < std::min<size_t>(near.size(), cfg.init_restarts); ++k) {
    BeamformerSet found;
    try {
      found = max_margin_start(chs, setup, cfg, near[k].second);
    } catch (const SdpInfeasible&) {
      continue;
    }
    Scan again = scan(found, {0.0, 0.25, 1.0, 4.0});
    if (again.best_i < robust_interference(chs, found, setup)) return again.best;
    return found;
  }
  throw SdpInfeasible("robust QoS targets cannot be met from any start point");
}

AlternatingResult alternating_solve(const ChannelSet& chs, const AlgorithmConfig& cfg,
                                    const RobustSetup& setup) {
  if (cfg.n_max < 1) throw DomainError("n_max must be positive");
  common_m_tx(chs);
  AlternatingResult res;
  res.bf = initial_beamformers(chs, setup, cfg);
  const int ns = chs.size();
  const double accept = 0;
  for (int n = 1; n <= cfg.n_max; ++n) {
    VStepProblem prob = assemble_p3_vstep(chs, res.bf, setup, cfg.form);
    SdpSolution sol = solve(prob.spec, cfg.sdp_tol, cfg.sdp_max_iter);
    IterationRecord rec;
    rec.status = sol.status;
    rec.sdp_iterations = sol.iterations;
    rec.kkt = sol.kkt;
    if (sol.status != SdpStatus::Optimal) {
      res.status = sol.status;
      res.message = std::string("V-step ") + to_string(sol.status) + " at iteration " +
                    std::to_string(n) + ": " + sol.message;
      if (n == 1 && sol.status == SdpStatus::Infeasible) throw SdpInfeasible(res.message);
      res.records.push_back(rec);
      break;
    }
    const VarLayout& L = prob.layout;
    BeamformerSet cand = res.bf;
    for (int j = 0; j < ns; ++j) cand.v[j] = L.v_of(sol.x, chs, j);
    rec.gamma = L.gamma_scale * sol.x(L.gamma);

    // U/B update, pulled back toward the previous pair if the robust
    // constraints would break. Link i's margin depends only on (U_i, B_i),
    // so each link picks its own step and loading.
    BeamformerSet full = cand;
    receivers_closed_form(chs, full, setup);
    std::vector<BeamformerSet> targets{full};
    for (double load : {0.25, 1.0, 4.0}) {
      BeamformerSet t = cand;
      try {
        receivers_loaded(chs, t, setup, load);
      } catch (const Error&) {
        continue;
      }
      targets.push_back(std::move(t));
    }
    BeamformerSet accepted = cand;
    double blend = 1;
    for (int i = 0; i < ns; ++i) {
      double step = 0, best = -std::numeric_limits<double>::infinity();
      for (double t = 1.0; t >= 1.0 / 64 && step == 0; t *= 0.5)
        for (const BeamformerSet& target : targets) {
          BeamformerSet trial = accepted;
          trial.u[i] = (1 - t) * res.bf.u[i] + t * target.u[i];
          trial.b[i] = (1 - t) * res.bf.b[i] + t * target.b[i];
          double m = robust_margin(chs, trial, setup, i);
          if (m >= accept && m > best) {
            best = m;
            step = t;
            accepted.u[i] = trial.u[i];
            accepted.b[i] = trial.b[i];
          }
        }
      blend = std::min(blend, step);
    }
    rec.blend = blend;
    rec.min_margin = min_margin(chs, accepted, setup);
    rec.interference = interference_to_radar(chs, accepted, setup.dist);
    for (int i = 0; i < ns; ++i)
      rec.rates.push_back(-hpd_logdet(mse_mmse(chs, full, setup.dist, setup.p_r, i)) / std::log(2.0));
    res.bf = accepted;
    res.slacks.gamma = rec.gamma;
    res.slacks.eta = L.gamma_scale * sol.x(L.eta);
    res.slacks.lambda.assign(ns, std::vector<double>(ns));
    res.slacks.epsilon.assign(ns, std::vector<double>(ns));
    for (int i = 0; i < ns; ++i)
      for (int j = 0; j < ns; ++j) {
        res.slacks.lambda[i][j] = sol.x(L.lambda[i][j]);
        res.slacks.epsilon[i][j] = sol.x(L.epsilon[i][j]);
      }
    res.trace.push_back(rec.gamma);
    res.records.push_back(rec);
    res.iterations = n;
    if (n > 1) {
      double prev = res.trace[n - 2];
      if (std::abs(rec.gamma - prev) <= cfg.tol * std::abs(prev)) {
        res.converged = true;
        break;
      }
    }
  }
  if (res.trace.empty() && res.message.empty()) res.message = "no iteration completed";
  return res;
}

double complexity_estimate(const std::vector<int>& sizes, int n_vars) {
  double s1 = 0, s2 = 0, s3 = 0;
  for (int a : sizes) {
    s1 += a;
    s2 += double(a) * a;
    s3 += double(a) * a * a;
  }
  double n = n_vars;
  return std::sqrt(1 + s1) * n * (n * n + n * s2 + s3);
}

double complexity_estimate(const SdpProblemSpec& problem) {
  std::vector<int> sizes;
  for (const auto& b : problem.blocks) sizes.push_back(b.size);
  return complexity_estimate(sizes, problem.n_vars);
}

std::vector<int> BlockAccounting::all_sizes() const {
  std::vector<int> s = qos_sizes;
  s.insert(s.end(), power_sizes.begin(), power_sizes.end());
  s.push_back(interference_size);
  return s;
}

BlockAccounting vstep_block_accounting(const ChannelSet& chs) {
  BlockAccounting a;
  const int ns = chs.size(), r = chs.radar_antennas, m = common_m_tx(chs);
  for (int i = 0; i < ns; ++i)
    for (int j = 0; j < ns; ++j) {
      const auto &li = chs.links[i], &lj = chs.links[j];
      int len = li.streams * lj.streams * (1 + lj.m_tx + li.n_rx);
      if (i == j) len += li.streams * (r + li.n_rx);
      a.qos_sizes.push_back(2 * (1 + len + li.n_rx * lj.m_tx));
    }
  int dl_dim = 0;
  for (int j = 0; j < ns; ++j) {
    const auto& l = chs.links[j];
    a.b_dim += r * l.streams * (1 + l.m_tx);
    a.n_vars += 2 * l.m_tx * l.streams;
    if (chs.is_ul(j))
      a.power_sizes.push_back(2 * (l.m_tx * l.streams + 1));
    else
      dl_dim += l.m_tx * l.streams;
  }
  if (dl_dim > 0) a.power_sizes.push_back(2 * (dl_dim + 1));
  a.interference_size = 2 * (1 + a.b_dim + r * m);
  a.n_vars += 2 * ns * ns + 2;
  a.block_count = static_cast<int>(a.qos_sizes.size() + a.power_sizes.size()) + 1;
  a.scalar_rows = ns + 2 * ns * ns + 1;
  return a;
}

}  // namespace coexist
