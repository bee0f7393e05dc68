#include "coexist/matrix_core.hpp"

#include <cmath>
#include <limits>

namespace coexist {

CVector vec(const CMatrix& m) {
  return Eigen::Map<const CVector>(m.data(), m.size());
}

CMatrix unvec(const CVector& v, Eigen::Index rows) {
  if (rows <= 0 || v.size() % rows != 0)
    throw DimensionMismatch("unvec: length " + std::to_string(v.size()) +
                            " not divisible by " + std::to_string(rows));
  return Eigen::Map<const CMatrix>(v.data(), rows, v.size() / rows);
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      k.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return k;
}

bool is_hermitian(const CMatrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  double n = m.norm();
  return (m - m.adjoint()).norm() <= rel_tol * std::max(n, 1e-300);
}

bool all_finite(const CMatrix& m) { return m.allFinite(); }

CMatrix cholesky_lower(const CMatrix& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("cholesky_lower: " + shape(m));
  if (!all_finite(m)) throw NotPositiveDefinite("cholesky_lower: non-finite entries");
  if (!is_hermitian(m)) throw NotPositiveDefinite("cholesky_lower: input not Hermitian");
  const Eigen::Index n = m.rows();
  CMatrix a = 0.5 * (m + m.adjoint());
  const double floor = 1e-14 * a.norm();
  CMatrix l = CMatrix::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j).real();
    for (Eigen::Index k = 0; k < j; ++k) d -= std::norm(l(j, k));
    if (!(d > floor))
      throw NotPositiveDefinite("cholesky_lower: pivot " + std::to_string(d) + " at " +
                                std::to_string(j));
    double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      cd s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * std::conj(l(j, k));
      l(i, j) = s / ljj;
    }
  }
  return l;
}

Svd svd(const CMatrix& m) {
  if (!all_finite(m)) throw ConvergenceFailure("svd: non-finite entries");
  Eigen::JacobiSVD<CMatrix> solver(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Svd out;
  out.u = solver.matrixU();
  out.s = solver.singularValues();
  out.vh = solver.matrixV().adjoint();
  if (!out.u.allFinite() || !out.vh.allFinite())
    throw ConvergenceFailure("svd: factorization did not converge");
  return out;
}

int numerical_rank(const RVector& s, Eigen::Index rows, Eigen::Index cols) {
  if (s.size() == 0) return 0;
  double thr = static_cast<double>(std::max(rows, cols)) *
               std::numeric_limits<double>::epsilon() * s(0);
  int q = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s(k) > thr) ++q;
  return q;
}

CMatrix block_diag(const std::vector<CMatrix>& blocks) {
  Eigen::Index r = 0, c = 0;
  for (const auto& b : blocks) {
    r += b.rows();
    c += b.cols();
  }
  CMatrix out = CMatrix::Zero(r, c);
  r = c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

CMatrix diag_part(const CMatrix& m) {
  CMatrix d = CMatrix::Zero(m.rows(), m.cols());
  for (Eigen::Index k = 0; k < std::min(m.rows(), m.cols()); ++k) d(k, k) = m(k, k);
  return d;
}

CMatrix hpd_inverse(const CMatrix& m) {
  CMatrix l = cholesky_lower(m);
  CMatrix li = l.triangularView<Eigen::Lower>().solve(
      CMatrix::Identity(m.rows(), m.cols()));
  return li.adjoint() * li;
}

double hpd_logdet(const CMatrix& m) {
  CMatrix l = cholesky_lower(m);
  double s = 0;
  for (Eigen::Index k = 0; k < l.rows(); ++k) s += 2.0 * std::log(l(k, k).real());
  return s;
}

std::string shape(const CMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace coexist
