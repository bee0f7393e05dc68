#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace coexist {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

// Error kinds raised across the library. All derive from Error so callers
// can catch the whole family.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
#define COEXIST_ERROR(Name) \
  struct Name : Error {     \
    using Error::Error;     \
  }
COEXIST_ERROR(DimensionMismatch);
COEXIST_ERROR(NotPositiveDefinite);
COEXIST_ERROR(NotHermitian);
COEXIST_ERROR(ConvergenceFailure);
COEXIST_ERROR(DomainError);
COEXIST_ERROR(FullRankNullSpace);
COEXIST_ERROR(SingularCovariance);
COEXIST_ERROR(DegenerateSteering);
COEXIST_ERROR(InfeasibleDimensions);
COEXIST_ERROR(SdpInfeasible);
COEXIST_ERROR(ConfigError);
#undef COEXIST_ERROR

// Column-stacking: vec(A)[i + j*rows] == A(i, j).
CVector vec(const CMatrix& m);
// Inverse of vec for a given row count.
CMatrix unvec(const CVector& v, Eigen::Index rows);

CMatrix kron(const CMatrix& a, const CMatrix& b);

// Lower-triangular L with L*L^H == m. Input is symmetrized first.
// Throws NotPositiveDefinite when ||m - m^H||_F > 1e-10 ||m||_F or a pivot
// drops below 1e-14 ||m||_F.
CMatrix cholesky_lower(const CMatrix& m);

struct Svd {
  CMatrix u;   // rows x rows, unitary
  RVector s;   // min(rows, cols), non-increasing
  CMatrix vh;  // cols x cols, unitary
};
Svd svd(const CMatrix& m);

// Number of singular values above max(rows, cols) * eps * s[0].
int numerical_rank(const RVector& s, Eigen::Index rows, Eigen::Index cols);

CMatrix block_diag(const std::vector<CMatrix>& blocks);

bool is_hermitian(const CMatrix& m, double rel_tol = 1e-10);
bool all_finite(const CMatrix& m);

// diag(diag(m)): keeps only the main diagonal.
CMatrix diag_part(const CMatrix& m);

// Hermitian inverse through the Cholesky factor.
CMatrix hpd_inverse(const CMatrix& m);

// log det of a Hermitian positive-definite matrix.
double hpd_logdet(const CMatrix& m);

std::string shape(const CMatrix& m);

}  // namespace coexist
