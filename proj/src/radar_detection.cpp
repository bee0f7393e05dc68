#include "coexist/radar_detection.hpp"

#include <cmath>

namespace coexist {

double RadarParams::gamma_r() const { return std::norm(alpha_r) * l_samples * p_r / sigma_r2; }

void check_radar_params(const RadarParams& p) {
  if (p.r_antennas < 1 || static_cast<int>(p.element_positions.size()) != p.r_antennas)
    throw DomainError("radar params: element count does not match R");
  if (p.l_samples < 1) throw DomainError("radar params: L must be >= 1");
  if (!(p.p_fa > 0 && p.p_fa < 1)) throw DomainError("radar params: p_fa outside (0,1)");
  if (!(p.sigma_r2 > 0)) throw DomainError("radar params: sigma_r2 must be positive");
  if (!(p.wavelength > 0)) throw DomainError("radar params: wavelength must be positive");
}

RadarParams make_radar_params(const ScenarioConfig& cfg) {
  RadarParams p;
  p.r_antennas = cfg.radar_antennas;
  p.wavelength = kSpeedOfLight / cfg.carrier_hz;
  for (int i = 0; i < p.r_antennas; ++i) p.element_positions.push_back({i * p.wavelength / 2, 0.0});
  p.p_r = db_to_linear(cfg.radar_power_db);
  const double r = cfg.radar_target_range_m;
  double gain = p.wavelength * p.wavelength * cfg.radar_rcs_m2 /
                (std::pow(4 * M_PI, 3) * std::pow(r, 4));
  p.alpha_r = std::sqrt(gain);
  p.phi = cfg.radar_target_angle_deg * M_PI / 180.0;
  p.sigma_r2 = noise_power_w(cfg, cfg.noise_figure_radar_db);
  p.l_samples = cfg.radar_samples;
  p.p_fa = cfg.p_fa;
  return p;
}

CMatrix steering_matrix(const RadarParams& params) {
  check_radar_params(params);
  const int R = params.r_antennas;
  const double k = 2 * M_PI / params.wavelength;
  const double ux = std::sin(params.phi), uy = std::cos(params.phi);
  CMatrix a(R, R);
  for (int i = 0; i < R; ++i)
    for (int r = 0; r < R; ++r) {
      const auto& zi = params.element_positions[i];
      const auto& zr = params.element_positions[r];
      double ph = k * (ux * (zi[0] + zr[0]) + uy * (zi[1] + zr[1]));
      a(i, r) = std::polar(1.0, -ph);
    }
  return a;
}

CMatrix radar_interference_covariance(const ChannelSet& chs, const BeamformerSet& bf, double psi,
                                      double sigma_r2) {
  const int R = chs.radar_antennas;
  if (static_cast<int>(bf.v.size()) != chs.size())
    throw DimensionMismatch("radar_interference_covariance: beamformer count");
  CMatrix chi = sigma_r2 * CMatrix::Identity(R, R);
  for (int j = 0; j < chs.size(); ++j) {
    const CMatrix& g = chs.g[j];
    if (g.rows() != R || g.cols() != bf.v[j].rows())
      throw DimensionMismatch("radar_interference_covariance: G_j " + shape(g) + " vs V_j " +
                              shape(bf.v[j]));
    CMatrix q = bf.v[j] * bf.v[j].adjoint();
    q += psi * diag_part(q);
    chi += g * q * g.adjoint();
  }
  return chi;
}

CMatrix detection_covariance(const CMatrix& chi_hat, const Projector& p, CovarianceModel model) {
  if (chi_hat.rows() != p.p.rows() || chi_hat.cols() != p.p.cols())
    throw DimensionMismatch("detection_covariance: χ̂ " + shape(chi_hat) + " vs P " + shape(p.p));
  const Eigen::Index R = chi_hat.rows();
  if (model == CovarianceModel::MatchedFilter) return kron(p.p.transpose(), chi_hat);
  return kron(CMatrix::Identity(R, R), p.p.adjoint() * chi_hat * p.p);
}

CMatrix whitening_filter(const CMatrix& chi_hat, const Projector& p, CovarianceModel model) {
  cholesky_lower(chi_hat);  // χ̂ must be PD
  CMatrix chi = detection_covariance(chi_hat, p, model);
  chi = (0.5 * (chi + chi.adjoint())).eval();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(chi);
  const RVector& ev = es.eigenvalues();
  double top = ev.size() ? ev(ev.size() - 1) : 0.0;
  if (!(top > 0)) throw NotPositiveDefinite("whitening_filter: covariance is zero");
  int keep = 0;
  for (Eigen::Index k = 0; k < ev.size(); ++k)
    if (ev(k) > 1e-9 * top) ++keep;
  if (keep == 0) throw NotPositiveDefinite("whitening_filter: empty positive-definite subspace");
  CMatrix q = es.eigenvectors().rightCols(keep);
  CMatrix restricted = q.adjoint() * chi * q;
  restricted = (0.5 * (restricted + restricted.adjoint())).eval();
  CMatrix m = cholesky_lower(hpd_inverse(restricted));
  return q * m;
}

double noncentrality_rho(const RadarParams& params, const CMatrix& a, const Projector& p,
                         const CMatrix& chi_hat, CovarianceModel model) {
  if (a.cols() != p.p.rows()) throw DimensionMismatch("noncentrality_rho: A vs P");
  CVector ap = vec(a * p.p);
  if (ap.norm() == 0) return 0.0;
  CMatrix pi;
  try {
    pi = whitening_filter(chi_hat, p, model);
  } catch (const NotPositiveDefinite& e) {
    throw SingularCovariance(std::string("noncentrality_rho: ") + e.what());
  }
  CVector wv = pi.adjoint() * ap;
  return std::norm(params.alpha_r) * params.l_samples * params.p_r * wv.squaredNorm();
}

double noncentrality_rho_trace_form(const RadarParams& params, const CMatrix& a,
                                    const Projector& p, const CMatrix& chi_hat) {
  CMatrix ci;
  try {
    ci = hpd_inverse(chi_hat);
  } catch (const NotPositiveDefinite&) {
    throw SingularCovariance("noncentrality_rho_trace_form: χ̂ singular");
  }
  CMatrix ap = a * p.p;
  double t = (ap * ap.adjoint() * ci).trace().real();
  return params.gamma_r() * params.sigma_r2 * t;
}

double detection_threshold(double p_fa) {
  if (!(p_fa > 0 && p_fa < 1)) throw DomainError("detection_threshold: p_fa outside (0,1)");
  return -2.0 * std::log(p_fa);
}

// Q1(a, b) = Σ_n Poisson(n; a²/2) · P[Gamma(n+1) > b²/2]
double marcum_q1(double a, double b) {
  if (a < 0 || b < 0) throw DomainError("marcum_q1: negative argument");
  if (b == 0) return 1.0;
  if (a - b > 40) return 1.0;
  if (b - a > 40) return 0.0;
  const double lam = 0.5 * a * a, x = 0.5 * b * b;
  const double lnx = std::log(x);
  double gamma_tail = 0;  // P[Gamma(n+1) > x]
  double sum = 0;
  for (long n = 0;; ++n) {
    gamma_tail += std::exp(-x + n * lnx - std::lgamma(n + 1.0));
    gamma_tail = std::min(gamma_tail, 1.0);
    double w = lam > 0 ? std::exp(-lam + n * std::log(lam) - std::lgamma(n + 1.0))
                       : (n == 0 ? 1.0 : 0.0);
    double term = w * gamma_tail;
    sum += term;
    if (n > lam && (term <= 1e-14 * sum || w < 1e-300)) break;
    if (n > 10000000) throw ConvergenceFailure("marcum_q1: series did not terminate");
  }
  return std::clamp(sum, 0.0, 1.0);
}

double prob_detection(double rho, double p_fa) {
  if (rho < 0) throw DomainError("prob_detection: negative rho");
  double thr = detection_threshold(p_fa);
  double pd = marcum_q1(std::sqrt(rho), std::sqrt(thr));
  return std::clamp(pd, p_fa, 1.0);
}

namespace {

struct GlrtKernel {
  CMatrix m;  // P^H A^H χ̂⁻¹
  double den = 0;
};

GlrtKernel glrt_kernel(const CMatrix& a, const Projector& p, const CMatrix& chi_hat) {
  CMatrix ci;
  try {
    ci = hpd_inverse(chi_hat);
  } catch (const NotPositiveDefinite&) {
    throw SingularCovariance("glrt_statistic: χ̂ singular");
  }
  GlrtKernel k;
  k.m = p.p.adjoint() * a.adjoint() * ci;
  CMatrix ap = a * p.p;
  k.den = (ap * ap.adjoint() * ci).trace().real();
  if (k.den < 1e-14) throw DegenerateSteering("glrt_statistic: steering nulled by projector");
  return k;
}

}  // namespace

double glrt_statistic(const CMatrix& y_hat, const CMatrix& a, const Projector& p,
                      const CMatrix& chi_hat) {
  if (y_hat.rows() != a.rows() || y_hat.cols() != p.p.cols() || a.cols() != p.p.rows())
    throw DimensionMismatch("glrt_statistic: Ŷ " + shape(y_hat) + ", A " + shape(a));
  GlrtKernel k = glrt_kernel(a, p, chi_hat);
  return std::norm((y_hat * k.m).trace()) / k.den;
}

namespace {

// Real and imaginary parts each N(0, var): E|z|² = 2 var.
inline cd quad_normal(SeededRng& rng, double sd) { return {sd * rng.normal(), sd * rng.normal()}; }

}  // namespace

DetectionReport simulate_detection(const RadarParams& params, const ChannelSet& chs,
                                   const BeamformerSet& bf, const DistortionParams& d,
                                   const Projector& p, int trials, SeededRng& rng,
                                   const SimulationOptions& opt) {
  if (trials < 1) throw DomainError("simulate_detection: trials must be >= 1");
  check_radar_params(params);
  const int R = params.r_antennas, L = params.l_samples;
  CMatrix a = steering_matrix(params);
  CMatrix chi_hat = radar_interference_covariance(chs, bf, d.psi, params.sigma_r2);
  DetectionReport rep;
  rep.threshold = detection_threshold(params.p_fa);
  rep.rho = noncentrality_rho(params, a, p, chi_hat);
  rep.pod_analytic = prob_detection(rep.rho, params.p_fa);

  CMatrix x_r = project_waveform(p, orthogonal_waveforms(R, L, rng));
  const double inv_sqrt_l = 1.0 / std::sqrt(static_cast<double>(L));
  CMatrix target = params.alpha_r * std::sqrt(params.p_r) * a * x_r;

  std::vector<CMatrix> gv(chs.size());
  std::vector<std::vector<double>> dist_sd(chs.size());
  for (int j = 0; j < chs.size(); ++j) {
    gv[j] = chs.g[j] * bf.v[j];
    CMatrix q = bf.v[j] * bf.v[j].adjoint();
    for (Eigen::Index m = 0; m < q.rows(); ++m)
      dist_sd[j].push_back(std::sqrt(d.psi * q(m, m).real()));
  }
  const double noise_sd = std::sqrt(params.sigma_r2);

  CMatrix y(R, L);
  auto draw_disturbance = [&]() {
    for (int l = 0; l < L; ++l)
      for (int r = 0; r < R; ++r) y(r, l) = quad_normal(rng, noise_sd);
    for (int j = 0; j < chs.size(); ++j) {
      const int dj = static_cast<int>(gv[j].cols());
      const int mj = static_cast<int>(chs.g[j].cols());
      CMatrix s(dj, L), c(mj, L);
      for (int l = 0; l < L; ++l) {
        for (int k = 0; k < dj; ++k) s(k, l) = quad_normal(rng, 1.0);
        for (int m = 0; m < mj; ++m) c(m, l) = quad_normal(rng, dist_sd[j][m]);
      }
      y.noalias() += gv[j] * s;
      if (d.psi > 0) y.noalias() += chs.g[j] * c;
    }
  };
  GlrtKernel kern = glrt_kernel(a, p, chi_hat);
  // tr(Ŷ M) with Ŷ = Y X_R^H / sqrt(L)
  CMatrix xm = inv_sqrt_l * x_r.adjoint() * kern.m;
  auto statistic = [&]() { return std::norm((y * xm).trace()) / kern.den; };

  if (opt.run_h0) {
    long hits = 0;
    for (int t = 0; t < trials; ++t) {
      draw_disturbance();
      if (statistic() > rep.threshold) ++hits;
    }
    rep.pfa_empirical = static_cast<double>(hits) / trials;
  }
  if (opt.run_h1) {
    long hits = 0;
    for (int t = 0; t < trials; ++t) {
      draw_disturbance();
      y += target;
      double s = statistic();
      if (opt.keep_values) rep.glrt_values.push_back(s);
      if (s > rep.threshold) ++hits;
    }
    rep.pod_empirical = static_cast<double>(hits) / trials;
  }
  return rep;
}

}  // namespace coexist
