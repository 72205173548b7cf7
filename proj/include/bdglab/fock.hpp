#pragma once

/// Exact many-body oracle on a fermionic Fock space of M modes.
///
/// Quadratic operators are written in the mode-block ordering
/// ψ = (c_1, …, c_M, c_1^*, …, c_M^*), i.e. A = [[α, β], [γ, −αᵀ]], and
/// second-quantized as 𝐀 = ½ Σ_ab A_ab ψ_a^* ψ_b. Modes follow the global
/// lattice index order (site-major, spin) and Jordan-Wigner strings run over
/// lower mode indices.

#include "bdglab/lattice.hpp"

#include <Eigen/Sparse>
#include <vector>

namespace bdg {

using SparseMatrix = Eigen::SparseMatrix<cplx>;

class FockSpace {
 public:
  static constexpr int max_modes = 14;

  explicit FockSpace(int modes);

  int modes() const { return M_; }
  Eigen::Index dim() const { return Eigen::Index{1} << M_; }

  const SparseMatrix& c(int m) const { return c_[static_cast<std::size_t>(m)]; }
  const SparseMatrix& c_dag(int m) const { return c_dag_[static_cast<std::size_t>(m)]; }
  /// ψ_a: c_a for a < M, c_{a−M}^* otherwise.
  const SparseMatrix& psi(int a) const { return a < M_ ? c(a) : c_dag(a - M_); }
  /// ψ_a^*.
  const SparseMatrix& psi_dag(int a) const { return a < M_ ? c_dag(a) : c(a - M_); }
  const SparseMatrix& number() const { return number_; }
  const SparseMatrix& parity() const { return parity_; }

 private:
  int M_;
  std::vector<SparseMatrix> c_, c_dag_;
  SparseMatrix number_, parity_;
};

struct QuadraticOp {
  Matrix A;
  SparseMatrix bold;
};

/// Throws PreconditionError if A is not of the form [[α, β], [γ, −αᵀ]] with
/// antisymmetric β and γ (relative tolerance `tol`).
QuadraticOp second_quantize(const Matrix& A, const FockSpace& fock, double tol = 1e-13);

/// ‖[𝐀, 𝐀'] − (second quantization of [A, A'])‖_max.
double commutator_identity_check(const Matrix& A, const Matrix& Ap, const FockSpace& fock);

struct BogoliubovResult {
  Matrix W;          ///< W H W^* = diag(D, −D)
  RealVector D;      ///< descending, non-negative
  int zero_modes = 0;  ///< number of pairs with |E| < 1e-12
  double unitarity_residual = 0.0;   ///< ‖W W^* − 1‖
  double ph_residual = 0.0;          ///< ‖K conj(W) K − W‖
  double diagonal_residual = 0.0;    ///< ‖W H W^* − diag(D, −D)‖
};

/// Canonical transformation diagonalizing a BdG matrix in mode-block
/// ordering.
BogoliubovResult bogoliubov_diagonalize(const Matrix& H);

/// Γ_ab = ω_β(ψ_b^* ψ_a) for the Gibbs state of the second-quantized H.
Matrix gibbs_two_point(const Matrix& H, double beta, const FockSpace& fock);

/// ω_β(𝐁) for the Gibbs state of 𝐇 = second quantization of H.
cplx gibbs_expectation(const Matrix& H, double beta, const SparseMatrix& observable, const FockSpace& fock);

/// Converts between the lattice layout (particle-hole fastest) and the
/// mode-block ordering used here.
Matrix to_mode_blocks(const Matrix& lattice_layout);
Matrix from_mode_blocks(const Matrix& mode_blocks);

/// K = [[0, 1], [1, 0]] in mode-block ordering.
Matrix mode_block_swap(int M);

}  // namespace bdg
