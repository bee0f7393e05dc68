#include <doctest.h>

#include "coexist/cellular_fd.hpp"
#include "test_util.hpp"

using namespace coexist;

namespace {

struct Instance {
  ChannelSet chs;
  BeamformerSet bf;
  DistortionParams d;
  double p_r;
};

// Channels and beamformers at unit scale so every term matters.
Instance random_instance(SeededRng& rng) {
  ScenarioConfig cfg;
  cfg.radar_antennas = testutil::rand_int(rng, 2, 6);
  Instance in;
  in.chs = draw_channel_set(cfg, rng);
  for (auto& row : in.chs.h)
    for (auto& h : row) h = rng.cgauss(h.rows(), h.cols());
  for (auto& w : in.chs.w) w = rng.cgauss(w.rows(), w.cols());
  for (auto& g : in.chs.g) g = rng.cgauss(g.rows(), g.cols());
  for (auto& l : in.chs.links) l.noise_w = 0.1 + rng.uniform();
  in.bf = empty_beamformers(in.chs);
  for (int i = 0; i < in.chs.size(); ++i) {
    in.bf.v[i] = rng.cgauss(2, 2);
    in.bf.u[i] = rng.cgauss(2, 2);
  }
  in.d = {0.05 * rng.uniform(), 0.05 * rng.uniform()};
  in.p_r = rng.uniform();
  return in;
}

// Loop-level Σ_i.
CMatrix sigma_oracle(const Instance& in, int i) {
  const auto& c = in.chs;
  const int n = c.links[i].n_rx;
  CMatrix s = CMatrix::Zero(n, n);
  for (int j = 0; j < c.size(); ++j) {
    const CMatrix& h = c.h[i][j];
    const CMatrix& v = in.bf.v[j];
    const int m = static_cast<int>(v.rows());
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        cd full = 0, dist = 0;
        for (int p = 0; p < m; ++p)
          for (int q = 0; q < m; ++q) {
            cd vv = 0;
            for (int k = 0; k < v.cols(); ++k) vv += v(p, k) * std::conj(v(q, k));
            cd term = h(a, p) * vv * std::conj(h(b, q));
            full += term;
            if (p == q) dist += term;
          }
        bool cross = j != i && !(c.is_ul(i) && !c.is_ul(j));
        if (cross) s(a, b) += full;
        s(a, b) += in.d.psi * dist;
        if (a == b) s(a, b) += in.d.upsilon * full;
      }
  }
  s += in.p_r * c.w[i] * c.w[i].adjoint();
  s += c.links[i].noise_w * CMatrix::Identity(n, n);
  return s;
}

}  // namespace

TEST_CASE("sigma_i") {
  SeededRng rng(1);
  Instance in = random_instance(rng);
  for (int i = 0; i < in.chs.size(); ++i) {
    CMatrix s = sigma_i(in.chs, in.bf, in.d, in.p_r, i);
    CMatrix o = sigma_oracle(in, i);
    CHECK((s - o).norm() < 1e-10 * o.norm());
    CHECK((s - s.adjoint()).norm() < 1e-12 * s.norm());
  }

  Instance quiet = in;
  quiet.bf = empty_beamformers(in.chs);
  for (int i = 0; i < in.chs.size(); ++i) {
    CMatrix s = sigma_i(quiet.chs, quiet.bf, quiet.d, 0.0, i);
    CHECK((s - quiet.chs.links[i].noise_w * CMatrix::Identity(2, 2)).norm() < 1e-15);
  }

  // single interferer without distortion: DL link 2 sees DL link 3 only
  Instance one = in;
  one.bf = empty_beamformers(in.chs);
  one.bf.v[3] = in.bf.v[3];
  one.d = {0, 0};
  CMatrix hv = in.chs.h[2][3] * in.bf.v[3];
  CMatrix expect = hv * hv.adjoint() + in.chs.links[2].noise_w * CMatrix::Identity(2, 2);
  CHECK((sigma_i(one.chs, one.bf, one.d, 0.0, 2) - expect).norm() < 1e-12 * expect.norm());

  // the SI pair contributes distortion only
  Instance si = one;
  si.bf.v[3] = CMatrix::Zero(2, 2);
  si.bf.v[2] = in.bf.v[2];
  CHECK((sigma_i(si.chs, si.bf, si.d, 0.0, 0) - si.chs.links[0].noise_w * CMatrix::Identity(2, 2))
            .norm() < 1e-15);

  BeamformerSet bad = in.bf;
  bad.v[1] = CMatrix::Zero(3, 2);
  CHECK_THROWS_AS(sigma_i(in.chs, bad, in.d, in.p_r, 0), DimensionMismatch);
}

TEST_CASE("sigma_i grows with any interferer's power") {
  SeededRng rng(2);
  for (int t = 0; t < 20; ++t) {
    Instance in = random_instance(rng);
    int i = testutil::rand_int(rng, 0, 3), j = testutil::rand_int(rng, 0, 3);
    double base = sigma_i(in.chs, in.bf, in.d, in.p_r, i).trace().real();
    in.bf.v[j] *= 1.5;
    double more = sigma_i(in.chs, in.bf, in.d, in.p_r, i).trace().real();
    CHECK(more >= base);
    CMatrix s = sigma_i(in.chs, in.bf, in.d, in.p_r, i);
    CHECK(Eigen::SelfAdjointEigenSolver<CMatrix>(s).eigenvalues()(0) > 0);
  }
}

TEST_CASE("distortion cross terms are second order") {
  SeededRng rng(3);
  for (int t = 0; t < 20; ++t) {
    Instance in = random_instance(rng);
    in.d = {1e-3, 2e-3};
    for (int i = 0; i < in.chs.size(); ++i) {
      CMatrix gap = sigma_i_exact(in.chs, in.bf, in.d, in.p_r, i) - sigma_i(in.chs, in.bf, in.d, in.p_r, i);
      double scale = 0;
      for (int j = 0; j < in.chs.size(); ++j)
        scale += in.chs.h[i][j].squaredNorm() * in.bf.v[j].squaredNorm();
      CHECK(gap.norm() <= in.d.psi * in.d.upsilon * scale);
      CHECK(gap.norm() > 0);
    }
  }
}

TEST_CASE("rates") {
  // SISO: |h|² p / σ² = 3
  ChannelSet c;
  c.links = {{LinkKind::DL, 0, 1, 1, 1, 2.0, 1.0, 0.0}};
  c.num_dl = 1;
  c.radar_antennas = 1;
  c.h = {{CMatrix::Constant(1, 1, cd(0, std::sqrt(6.0)))}};
  c.g = {CMatrix::Zero(1, 1)};
  c.w = {CMatrix::Zero(1, 1)};
  BeamformerSet bf = empty_beamformers(c);
  bf.v[0](0, 0) = 1;
  bf.u[0](0, 0) = 0.7;
  CHECK(achievable_rate(c, bf, {}, 0, 0) == doctest::Approx(2.0).epsilon(1e-12));
  bf.v[0](0, 0) = 0;
  CHECK(achievable_rate(c, bf, {}, 0, 0) == 0.0);
  bf.u[0](0, 0) = 0;
  CHECK_THROWS_AS(achievable_rate(c, bf, {}, 0, 0), SingularCovariance);
}

TEST_CASE("rate-MSE identity at the MMSE receiver") {
  SeededRng rng(4);
  for (int t = 0; t < 50; ++t) {
    Instance in = random_instance(rng);
    for (int i = 0; i < in.chs.size(); ++i) {
      in.bf.u[i] = mmse_receiver(in.chs, in.bf, in.d, in.p_r, i);
      double rate = achievable_rate(in.chs, in.bf, in.d, in.p_r, i);
      CMatrix e = mse_mmse(in.chs, in.bf, in.d, in.p_r, i);
      CHECK(std::abs(rate - (-hpd_logdet(e) / std::log(2.0))) < 1e-9);
      CHECK((mse_matrix(in.chs, in.bf, in.d, in.p_r, i) - e).norm() < 1e-9);
    }
  }
}

TEST_CASE("MMSE receiver") {
  ChannelSet c;
  c.links = {{LinkKind::DL, 0, 1, 1, 1, 1.0, 1.0, 0.0}};
  c.num_dl = 1;
  c.radar_antennas = 1;
  c.h = {{CMatrix::Ones(1, 1)}};
  c.g = {CMatrix::Zero(1, 1)};
  c.w = {CMatrix::Zero(1, 1)};
  BeamformerSet bf = empty_beamformers(c);
  bf.v[0](0, 0) = 1;
  CHECK(std::abs(mmse_receiver(c, bf, {}, 0, 0)(0, 0) - 0.5) < 1e-15);

  SeededRng rng(5);
  Instance in = random_instance(rng);
  for (int i = 0; i < in.chs.size(); ++i) {
    in.bf.u[i] = mmse_receiver(in.chs, in.bf, in.d, in.p_r, i);
    double best = mse_matrix(in.chs, in.bf, in.d, in.p_r, i).trace().real();
    BeamformerSet probe = in.bf;
    for (int k = 0; k < 50; ++k) {
      probe.u[i] = in.bf.u[i] + 1e-3 * rng.cgauss(2, 2);
      CHECK(mse_matrix(in.chs, probe, in.d, in.p_r, i).trace().real() >= best);
    }
  }
}

TEST_CASE("MSE matrix") {
  SeededRng rng(6);
  Instance in = random_instance(rng);
  in.bf.u[1] = CMatrix::Zero(2, 2);
  CHECK((mse_matrix(in.chs, in.bf, in.d, in.p_r, 1) - CMatrix::Identity(2, 2)).norm() == 0.0);
  in.bf.u[1] = rng.cgauss(2, 2);
  CMatrix u = in.bf.u[1];
  CMatrix err = u.adjoint() * in.chs.h[1][1] * in.bf.v[1] - CMatrix::Identity(2, 2);
  CMatrix oracle = err * err.adjoint() + u.adjoint() * sigma_oracle(in, 1) * u;
  CMatrix e = mse_matrix(in.chs, in.bf, in.d, in.p_r, 1);
  CHECK((e - oracle).norm() < 1e-12 * oracle.norm());
  CHECK(Eigen::SelfAdjointEigenSolver<CMatrix>(e).eigenvalues()(0) >= -1e-12);
  in.bf.u[1] = CMatrix::Zero(3, 2);
  CHECK_THROWS_AS(mse_matrix(in.chs, in.bf, in.d, in.p_r, 1), DimensionMismatch);
}

TEST_CASE("interference to radar") {
  SeededRng rng(7);
  Instance in = random_instance(rng);
  BeamformerSet quiet = empty_beamformers(in.chs);
  CHECK(interference_to_radar(in.chs, quiet, in.d) == 0.0);

  ChannelSet one = in.chs;
  one.links.resize(1);
  one.g = {CMatrix::Identity(2, 2)};
  BeamformerSet b;
  b.v = {CMatrix::Identity(2, 2)};
  CHECK(interference_to_radar(one, b, {}) == doctest::Approx(2.0));

  double base = interference_to_radar(in.chs, in.bf, in.d);
  for (double t : {0.0, 0.5, 2.0, 3.7}) {
    BeamformerSet s = in.bf;
    for (auto& v : s.v) v *= t;
    CHECK(interference_to_radar(in.chs, s, in.d) == doctest::Approx(t * t * base).epsilon(1e-12));
  }
  CHECK(bs_power(in.chs, in.bf) ==
        doctest::Approx(in.bf.v[2].squaredNorm() + in.bf.v[3].squaredNorm()));
}
