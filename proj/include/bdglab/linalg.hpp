#pragma once

/// Dense complex linear algebra shared by every module.
///
/// Matrices are Eigen column-major complex<double>. Hermitian eigenproblems
/// and singular value decompositions go through LAPACK; everything else uses
/// Eigen's own kernels.

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace bdg {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

inline constexpr cplx I{0.0, 1.0};
inline constexpr double pi = 3.14159265358979323846;

/// Raised when an operation's numerical precondition does not hold
/// (gapless spectrum, broken symmetry, incommensurate flux, ...).
class PreconditionError : public std::runtime_error {
 public:
  explicit PreconditionError(const std::string& what) : std::runtime_error(what) {}
};

/// Eigenvalues in ascending order with orthonormal eigenvectors as columns.
struct EighResult {
  RealVector values;
  Matrix vectors;
};

/// Full eigendecomposition of a hermitian matrix (lower triangle is read).
EighResult eigh(const Matrix& a);

/// Eigenpairs with eigenvalues in (lo, hi], ascending.
EighResult eigh_in_interval(const Matrix& a, double lo, double hi);

/// Eigenvalues only.
RealVector eigvalsh(const Matrix& a);

/// a = u * diag(s) * v^*, singular values descending.
struct SvdResult {
  RealVector singular_values;
  Matrix u;
  Matrix v;
};

SvdResult svd(const Matrix& a);

/// max_{ij} |a_ij|
double max_abs(const Matrix& a);

/// Kronecker product a ⊗ b with b as the fast index.
Matrix kron(const Matrix& a, const Matrix& b);

/// ‖a − a*‖_max
double hermitian_residual(const Matrix& a);

}  // namespace bdg
