#include <doctest.h>

#include <sstream>

#include "coexist/sdp_engine.hpp"
#include "test_util.hpp"

using namespace coexist;

namespace {

LmiBlock scalar_block(double a0, std::map<int, double> coeffs) {
  LmiBlock b;
  b.size = 1;
  b.a0 = RMatrix::Constant(1, 1, a0);
  for (auto [k, v] : coeffs) b.coeffs[k] = {{0, 0, v}};
  return b;
}

// Random SDP that is feasible and bounded by construction: pick x0 with
// A0 + Σ x0 A ≻ 0 and Z0 ≻ 0, then set c = A*(Z0).
SdpProblemSpec random_sdp(SeededRng& rng, int m, std::vector<int> sizes) {
  SdpProblemSpec spec;
  spec.n_vars = m;
  RVector x0(m);
  for (int k = 0; k < m; ++k) x0(k) = rng.normal();
  spec.c = RVector::Zero(m);
  for (int n : sizes) {
    LmiBlock b;
    b.size = n;
    RMatrix acc = RMatrix::Zero(n, n);
    for (int k = 0; k < m; ++k) {
      RMatrix a(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
      a = (0.5 * (a + a.transpose())).eval();
      for (int j = 0; j < n; ++j)
        for (int i = 0; i <= j; ++i) b.coeffs[k].push_back({i, j, a(i, j)});
      acc += x0(k) * a;
    }
    b.a0 = RMatrix::Identity(n, n) - acc;
    RMatrix g(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
    RMatrix z0 = g * g.transpose() + RMatrix::Identity(n, n);
    for (int k = 0; k < m; ++k) spec.c(k) += b.coeff_dense(k).cwiseProduct(z0).sum();
    spec.blocks.push_back(b);
  }
  return spec;
}

}  // namespace

TEST_CASE("embed_complex eigenvalues") {
  ComplexLmiBlock cb;
  cb.size = 2;
  cb.a0 = CMatrix::Zero(2, 2);
  cb.a0(0, 0) = 1;
  cb.a0(1, 1) = 2;
  LmiBlock rb = embed_complex(cb);
  CHECK(rb.size == 4);
  CHECK(rb.a0(0, 0) == 1.0);
  CHECK(rb.a0(1, 1) == 2.0);
  CHECK(rb.a0(2, 2) == 1.0);
  CHECK(rb.a0(3, 3) == 2.0);
  CHECK(rb.a0.norm() == doctest::Approx(std::sqrt(10.0)));

  // Hermitian with eigenvalues {-1, 3}
  CMatrix u(2, 2);
  u << cd(1, 0), cd(0, 1), cd(0, 1), cd(1, 0);
  u /= std::sqrt(2.0);
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = -1;
  d(1, 1) = 3;
  cb.a0 = u * d * u.adjoint();
  rb = embed_complex(cb);
  Eigen::SelfAdjointEigenSolver<RMatrix> es(rb.a0);
  RVector ev = es.eigenvalues();
  CHECK(ev(0) == doctest::Approx(-1));
  CHECK(ev(1) == doctest::Approx(-1));
  CHECK(ev(2) == doctest::Approx(3));
  CHECK(ev(3) == doctest::Approx(3));

  SeededRng rng(1);
  int agree = 0;
  for (int t = 0; t < 100; ++t) {
    int n = 1 + t % 5;
    CMatrix h = testutil::rand_herm(rng, n);
    h += (t % 2 ? 2.0 : 0.2) * CMatrix::Identity(n, n);
    cb.size = n;
    cb.a0 = h;
    Eigen::SelfAdjointEigenSolver<CMatrix> ch(h);
    Eigen::SelfAdjointEigenSolver<RMatrix> cr(embed_complex(cb).a0);
    bool psd_c = ch.eigenvalues()(0) >= 0, psd_r = cr.eigenvalues()(0) >= 0;
    if (psd_c == psd_r) ++agree;
    CHECK(std::abs(ch.eigenvalues()(0) - cr.eigenvalues()(0)) < 1e-10);
  }
  CHECK(agree == 100);

  cb.size = 2;
  cb.a0 = CMatrix::Zero(2, 2);
  cb.a0(0, 1) = 1;
  CHECK_THROWS_AS(embed_complex(cb), NotHermitian);
}

TEST_CASE("micro SDPs") {
  SUBCASE("min x s.t. x - a >= 0") {
    SdpProblemSpec spec;
    spec.n_vars = 1;
    spec.c = RVector::Ones(1);
    spec.blocks.push_back(scalar_block(-2.5, {{0, 1.0}}));
    SdpSolution s = solve(spec, 1e-9);
    REQUIRE(s.status == SdpStatus::Optimal);
    CHECK(std::abs(s.x(0) - 2.5) < 1e-8);
  }
  SUBCASE("min c s.t. [[c,1],[1,1]] >= 0") {
    SdpProblemSpec spec;
    spec.n_vars = 1;
    spec.c = RVector::Ones(1);
    LmiBlock b;
    b.size = 2;
    b.a0 = RMatrix::Zero(2, 2);
    b.a0(0, 1) = b.a0(1, 0) = 1;
    b.a0(1, 1) = 1;
    b.coeffs[0] = {{0, 0, 1.0}};
    spec.blocks.push_back(b);
    SdpSolution s = solve(spec, 1e-9);
    REQUIRE(s.status == SdpStatus::Optimal);
    CHECK(std::abs(s.x(0) - 1.0) < 1e-8);
  }
}

TEST_CASE("random feasible SDPs reach small KKT residuals") {
  SeededRng rng(42);
  for (int t = 0; t < 10; ++t) {
    SdpProblemSpec spec = random_sdp(rng, 3 + t % 4, {3, 4, 2});
    SdpSolution s = solve(spec, 1e-8);
    REQUIRE(s.status == SdpStatus::Optimal);
    KktResiduals k = kkt_residuals(spec, s);
    CHECK(k.primal_res <= 1e-6);
    CHECK(k.dual_res <= 1e-6);
    CHECK(k.gap <= 1e-6);
    // weak duality
    CHECK(k.dual_obj <= k.primal_obj + 1e-6 * (1 + std::abs(k.primal_obj)));
  }
}

TEST_CASE("solver is deterministic") {
  SeededRng rng(9);
  SdpProblemSpec spec = random_sdp(rng, 4, {3, 3});
  SdpSolution a = solve(spec), b = solve(spec);
  CHECK(a.status == b.status);
  CHECK((a.x - b.x).norm() == 0.0);
}

TEST_CASE("kkt_residuals") {
  // min x s.t. x - 1 >= 0: optimum x = 1 with dual Z = 1
  SdpProblemSpec spec;
  spec.n_vars = 1;
  spec.c = RVector::Ones(1);
  spec.blocks.push_back(scalar_block(-1.0, {{0, 1.0}}));
  SdpSolution s;
  s.x = RVector::Ones(1);
  s.duals = {RMatrix::Ones(1, 1)};
  KktResiduals k = kkt_residuals(spec, s);
  CHECK(k.primal_res < 1e-10);
  CHECK(k.dual_res < 1e-10);
  CHECK(k.gap < 1e-10);

  // primal residual grows linearly as x moves into the infeasible side
  double prev = 0;
  for (double eps : {0.1, 0.2, 0.4}) {
    s.x(0) = 1 - eps;
    double r = kkt_residuals(spec, s).primal_res;
    CHECK(r == doctest::Approx(eps / 2.0));  // divided by 1 + ||A0||
    CHECK(r > prev);
    prev = r;
  }

  SdpProblemSpec bad;
  bad.n_vars = 0;
  bad.c = RVector::Zero(0);
  LmiBlock b;
  b.size = 2;
  b.a0 = -RMatrix::Identity(2, 2);
  bad.blocks.push_back(b);
  SdpSolution z;
  z.x = RVector::Zero(0);
  CHECK(kkt_residuals(bad, z).min_block_eig == doctest::Approx(-1.0));
}

TEST_CASE("infeasible problems are reported") {
  // x >= 1 and x <= -1
  SdpProblemSpec spec;
  spec.n_vars = 1;
  spec.c = RVector::Ones(1);
  spec.blocks.push_back(scalar_block(-1.0, {{0, 1.0}}));
  spec.blocks.push_back(scalar_block(-1.0, {{0, -1.0}}));
  SdpSolution s = solve(spec);
  CHECK(s.status != SdpStatus::Optimal);
  CHECK(s.status == SdpStatus::Infeasible);
}

TEST_CASE("box bounds") {
  SdpProblemSpec spec;
  spec.n_vars = 2;
  spec.c = RVector(2);
  spec.c << 1, -1;
  spec.blocks.push_back(scalar_block(0.0, {{0, 1.0}, {1, 1.0}}));  // x0 + x1 >= 0
  spec.var_bounds = {{-3, 3}, {-2, 2}};
  SdpSolution s = solve(spec, 1e-9);
  REQUIRE(s.status == SdpStatus::Optimal);
  CHECK(s.x(0) == doctest::Approx(-2).epsilon(1e-7));
  CHECK(s.x(1) == doctest::Approx(2).epsilon(1e-7));
}

TEST_CASE("SDPA round trip") {
  SeededRng rng(4);
  SdpProblemSpec spec = random_sdp(rng, 3, {2, 3});
  std::stringstream ss;
  write_sdpa(spec, ss);
  SdpProblemSpec back = read_sdpa(ss);
  REQUIRE(back.n_vars == spec.n_vars);
  REQUIRE(back.blocks.size() == spec.blocks.size());
  CHECK((back.c - spec.c).norm() == 0.0);
  RVector x = RVector::Random(3);
  for (size_t l = 0; l < spec.blocks.size(); ++l)
    CHECK((back.blocks[l].evaluate(x) - spec.blocks[l].evaluate(x)).norm() < 1e-14);
}
