#include <doctest.h>

#include "coexist/matrix_core.hpp"
#include "test_util.hpp"

using namespace coexist;
using testutil::rand_c;
using testutil::rand_int;
using testutil::rand_pd;

TEST_CASE("vec stacks columns") {
  CMatrix a(2, 2);
  a << 1, 2, 3, 4;
  CVector v = vec(a);
  CHECK(v(0) == cd(1));
  CHECK(v(1) == cd(3));
  CHECK(v(2) == cd(2));
  CHECK(v(3) == cd(4));
  CVector e = vec(CMatrix::Identity(2, 2));
  CHECK(e(0) == cd(1));
  CHECK(e(1) == cd(0));
  CHECK(e(2) == cd(0));
  CHECK(e(3) == cd(1));

  SeededRng rng(3);
  CMatrix r = rand_c(rng, 3, 2);
  CHECK(std::abs(vec(r).squaredNorm() - (r * r.adjoint()).trace().real()) < 1e-12);
  CHECK((unvec(vec(r), 3) - r).norm() == 0.0);
  CHECK_THROWS_AS(unvec(vec(r), 4), DimensionMismatch);
}

TEST_CASE("kron basics and the vec(ABC) identity") {
  CHECK((kron(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2)) - CMatrix::Identity(4, 4)).norm() == 0.0);
  SeededRng rng(5);
  CMatrix b = rand_c(rng, 3, 3);
  CMatrix two(1, 1);
  two(0, 0) = 2;
  CHECK((kron(two, b) - 2.0 * b).norm() == 0.0);

  CMatrix a = rand_c(rng, 2, 2), bb = rand_c(rng, 2, 1), c = rand_c(rng, 1, 2);
  // A(2x2) B(2x1) C(1x2): B must be 2 x 1 for conformity
  CHECK((vec(a * bb * c) - kron(c.transpose(), a) * vec(bb)).norm() < 1e-12);

  for (int t = 0; t < 50; ++t) {
    int m = rand_int(rng, 1, 6), n = rand_int(rng, 1, 6), p = rand_int(rng, 1, 6), q = rand_int(rng, 1, 6);
    CMatrix A = rand_c(rng, m, n), B = rand_c(rng, n, p), C = rand_c(rng, p, q);
    CHECK((vec(A * B * C) - kron(C.transpose(), A) * vec(B)).norm() < 1e-12 * (1 + vec(A * B * C).norm()));
  }
}

TEST_CASE("cholesky_lower") {
  CHECK((cholesky_lower(CMatrix::Identity(3, 3)) - CMatrix::Identity(3, 3)).norm() == 0.0);
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 4;
  d(1, 1) = 9;
  CMatrix l = cholesky_lower(d);
  CHECK(std::abs(l(0, 0) - cd(2)) < 1e-15);
  CHECK(std::abs(l(1, 1) - cd(3)) < 1e-15);
  CHECK(std::abs(l(0, 1)) == 0.0);

  SeededRng rng(7);
  for (int t = 0; t < 40; ++t) {
    int n = rand_int(rng, 1, 16);
    CMatrix a = rand_c(rng, n, n);
    CMatrix m = a.adjoint() * a + CMatrix::Identity(n, n);
    CMatrix f = cholesky_lower(m);
    CHECK((f * f.adjoint() - m).norm() <= 1e-10 * m.norm());
    CHECK(f.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().norm() == 0.0);
  }
  CMatrix neg = -CMatrix::Identity(2, 2);
  CHECK_THROWS_AS(cholesky_lower(neg), NotPositiveDefinite);
  CMatrix sing = CMatrix::Ones(2, 2);
  CHECK_THROWS_AS(cholesky_lower(sing), NotPositiveDefinite);
  CMatrix asym = CMatrix::Identity(2, 2);
  asym(0, 1) = 0.5;
  CHECK_THROWS_AS(cholesky_lower(asym), NotPositiveDefinite);
}

TEST_CASE("svd") {
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = 1;
  Svd s = svd(d);
  CHECK(std::abs(s.s(0) - 3) < 1e-14);
  CHECK(std::abs(s.s(1) - 1) < 1e-14);

  Svd z = svd(CMatrix::Zero(2, 3));
  CHECK(z.s.size() == 2);
  CHECK(z.s.norm() == 0.0);
  CHECK(numerical_rank(z.s, 2, 3) == 0);

  SeededRng rng(11);
  CMatrix m = rand_c(rng, 4, 8);
  Svd r = svd(m);
  CMatrix sd = CMatrix::Zero(4, 8);
  for (int k = 0; k < 4; ++k) sd(k, k) = r.s(k);
  CHECK((r.u * sd * r.vh - m).norm() < 1e-10 * m.norm());
  CHECK((r.u.adjoint() * r.u - CMatrix::Identity(4, 4)).norm() < 1e-10);
  CHECK((r.vh * r.vh.adjoint() - CMatrix::Identity(8, 8)).norm() < 1e-10);
  for (int k = 1; k < 4; ++k) CHECK(r.s(k) <= r.s(k - 1));

  // singular values vs eigenvalues of m^H m
  for (int t = 0; t < 30; ++t) {
    int a = rand_int(rng, 1, 12), b = rand_int(rng, 1, 12);
    CMatrix x = rand_c(rng, a, b);
    Svd sx = svd(x);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(x.adjoint() * x);
    RVector ev = es.eigenvalues().reverse();
    for (int k = 0; k < std::min(a, b); ++k)
      CHECK(std::abs(sx.s(k) - std::sqrt(std::max(0.0, ev(k)))) < 1e-9);
  }
}

TEST_CASE("numerical rank threshold") {
  RVector s(3);
  s << 1.0, 1e-3, 1e-17;
  CHECK(numerical_rank(s, 3, 3) == 2);
  s << 0, 0, 0;
  CHECK(numerical_rank(s, 3, 3) == 0);
}

TEST_CASE("block_diag") {
  CMatrix one = CMatrix::Constant(1, 1, 1), two = CMatrix::Constant(1, 1, 2);
  CMatrix d = block_diag({one, two});
  CHECK(d(0, 0) == cd(1));
  CHECK(d(1, 1) == cd(2));
  CHECK(d(0, 1) == cd(0));
  CHECK(d(1, 0) == cd(0));
  SeededRng rng(13);
  CMatrix k = rand_c(rng, 3, 3);
  CHECK((block_diag({k}) - k).norm() == 0.0);
  std::vector<CMatrix> copies(4, k);
  CHECK((block_diag(copies) - kron(CMatrix::Identity(4, 4), k)).norm() == 0.0);
}

TEST_CASE("hpd helpers") {
  SeededRng rng(17);
  CMatrix m = rand_pd(rng, 5);
  CHECK((hpd_inverse(m) * m - CMatrix::Identity(5, 5)).norm() < 1e-10);
  CHECK(std::abs(hpd_logdet(m) - std::log(m.determinant().real())) < 1e-10);
}
