#include "bdglab/fock.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

namespace bdg {

FockSpace::FockSpace(int modes) : M_(modes) {
  if (modes < 1 || modes > max_modes) {
    throw PreconditionError("Fock space supports 1.." + std::to_string(max_modes) + " modes, got " +
                            std::to_string(modes));
  }
  const Eigen::Index D = dim();
  c_.resize(static_cast<std::size_t>(M_));
  c_dag_.resize(static_cast<std::size_t>(M_));
  for (int m = 0; m < M_; ++m) {
    std::vector<Eigen::Triplet<cplx>> t;
    t.reserve(static_cast<std::size_t>(D / 2));
    const std::uint64_t bit = std::uint64_t{1} << m;
    for (Eigen::Index s = 0; s < D; ++s) {
      const auto state = static_cast<std::uint64_t>(s);
      if (!(state & bit)) continue;
      const int below = std::popcount(state & (bit - 1));
      t.emplace_back(static_cast<Eigen::Index>(state ^ bit), s, (below % 2 == 0) ? 1.0 : -1.0);
    }
    SparseMatrix cm(D, D);
    cm.setFromTriplets(t.begin(), t.end());
    c_[static_cast<std::size_t>(m)] = cm;
    c_dag_[static_cast<std::size_t>(m)] = SparseMatrix(cm.adjoint());
  }
  std::vector<Eigen::Triplet<cplx>> n, p;
  for (Eigen::Index s = 0; s < D; ++s) {
    const int occ = std::popcount(static_cast<std::uint64_t>(s));
    if (occ) n.emplace_back(s, s, static_cast<double>(occ));
    p.emplace_back(s, s, (occ % 2 == 0) ? 1.0 : -1.0);
  }
  number_.resize(D, D);
  number_.setFromTriplets(n.begin(), n.end());
  parity_.resize(D, D);
  parity_.setFromTriplets(p.begin(), p.end());
}

QuadraticOp second_quantize(const Matrix& A, const FockSpace& fock, double tol) {
  const int M = fock.modes();
  if (A.rows() != 2 * M || A.cols() != 2 * M) {
    throw std::invalid_argument("second_quantize: matrix must be 2M x 2M with M = " + std::to_string(M));
  }
  const double scale = std::max(1.0, max_abs(A));
  const Matrix alpha = A.topLeftCorner(M, M);
  const Matrix beta = A.topRightCorner(M, M);
  const Matrix gamma = A.bottomLeftCorner(M, M);
  const Matrix delta = A.bottomRightCorner(M, M);
  const double sym_beta = 0.5 * max_abs(beta + beta.transpose());
  const double sym_gamma = 0.5 * max_abs(gamma + gamma.transpose());
  if (sym_beta > tol * scale || sym_gamma > tol * scale) {
    throw PreconditionError("second_quantize: off-diagonal blocks have a symmetric part (" +
                            std::to_string(std::max(sym_beta, sym_gamma)) + ") that would silently vanish");
  }
  if (max_abs(delta + alpha.transpose()) > tol * scale) {
    throw PreconditionError("second_quantize: lower-right block is not -alpha^T");
  }
  QuadraticOp out{A, SparseMatrix(fock.dim(), fock.dim())};
  for (int b = 0; b < 2 * M; ++b) {
    for (int a = 0; a < 2 * M; ++a) {
      if (A(a, b) == cplx(0.0, 0.0)) continue;
      out.bold += (0.5 * A(a, b)) * SparseMatrix(fock.psi_dag(a) * fock.psi(b));
    }
  }
  out.bold.prune(cplx(0.0, 0.0));
  return out;
}

double commutator_identity_check(const Matrix& A, const Matrix& Ap, const FockSpace& fock) {
  const QuadraticOp a = second_quantize(A, fock);
  const QuadraticOp b = second_quantize(Ap, fock);
  const QuadraticOp c = second_quantize(A * Ap - Ap * A, fock, 1e-12);
  const SparseMatrix lhs = SparseMatrix(a.bold * b.bold) - SparseMatrix(b.bold * a.bold);
  return max_abs(Matrix(lhs - c.bold));
}

Matrix mode_block_swap(int M) {
  Matrix K = Matrix::Zero(2 * M, 2 * M);
  K.topRightCorner(M, M).setIdentity();
  K.bottomLeftCorner(M, M).setIdentity();
  return K;
}

namespace {

Vector ph_conjugate(const Vector& v) {
  const Eigen::Index M = v.size() / 2;
  Vector out(v.size());
  out.head(M) = v.tail(M).conjugate();
  out.tail(M) = v.head(M).conjugate();
  return out;
}

/// Orthonormal basis of a zero-energy eigenspace made of pairs (v, Kconj(v))
/// with v ⊥ Kconj(v): first a basis of Kconj-real vectors, then complex
/// combinations of consecutive members.
Matrix pair_zero_modes(const Matrix& Z) {
  std::vector<Vector> real_basis;
  auto try_add = [&](Vector r) {
    for (const Vector& q : real_basis) r -= q.dot(r) * q;
    for (const Vector& q : real_basis) r -= q.dot(r) * q;
    const double n = r.norm();
    if (n > 1e-8) real_basis.push_back(r / n);
  };
  for (Eigen::Index k = 0; k < Z.cols() && static_cast<Eigen::Index>(real_basis.size()) < Z.cols(); ++k) {
    Vector z = Z.col(k);
    Eigen::Index pivot = 0;
    z.cwiseAbs().maxCoeff(&pivot);
    z *= std::abs(z(pivot)) / z(pivot);
    const Vector cz = ph_conjugate(z);
    try_add(z + cz);
    try_add(I * (z - cz));
  }
  if (static_cast<Eigen::Index>(real_basis.size()) != Z.cols() || Z.cols() % 2 != 0) {
    throw std::runtime_error("bogoliubov_diagonalize: zero-mode space has no particle-hole adapted basis");
  }
  Matrix out(Z.rows(), Z.cols() / 2);
  for (Eigen::Index k = 0; k < out.cols(); ++k) {
    out.col(k) = (real_basis[static_cast<std::size_t>(2 * k)] + I * real_basis[static_cast<std::size_t>(2 * k + 1)]) /
                 std::sqrt(2.0);
  }
  return out;
}

}  // namespace

BogoliubovResult bogoliubov_diagonalize(const Matrix& H) {
  const Eigen::Index n = H.rows();
  if (n % 2 != 0 || H.cols() != n) throw std::invalid_argument("bogoliubov_diagonalize: H must be 2M x 2M");
  const Eigen::Index M = n / 2;
  const double scale = std::max(1.0, max_abs(H));
  if (hermitian_residual(H) > 1e-12 * scale) throw PreconditionError("bogoliubov_diagonalize: H is not hermitian");
  const Matrix K = mode_block_swap(static_cast<int>(M));
  if (max_abs(K * H.conjugate() * K + H) > 1e-12 * scale) {
    throw PreconditionError("bogoliubov_diagonalize: H violates particle-hole symmetry");
  }
  const EighResult e = eigh(H);
  constexpr double zero_tol = 1e-12;
  std::vector<Eigen::Index> positive, zero;
  for (Eigen::Index k = n - 1; k >= 0; --k) {
    if (e.values(k) > zero_tol) positive.push_back(k);
    else if (e.values(k) >= -zero_tol) zero.push_back(k);
  }
  BogoliubovResult out;
  out.zero_modes = static_cast<int>(zero.size() / 2);
  Matrix X(n, M);
  out.D.resize(M);
  Eigen::Index col = 0;
  for (Eigen::Index k : positive) {
    if (col >= M) break;
    X.col(col) = e.vectors.col(k);
    out.D(col) = e.values(k);
    ++col;
  }
  if (!zero.empty()) {
    Matrix Z(n, static_cast<Eigen::Index>(zero.size()));
    for (std::size_t k = 0; k < zero.size(); ++k) Z.col(static_cast<Eigen::Index>(k)) = e.vectors.col(zero[k]);
    const Matrix paired = pair_zero_modes(Z);
    for (Eigen::Index k = 0; k < paired.cols() && col < M; ++k, ++col) {
      X.col(col) = paired.col(k);
      out.D(col) = 0.0;
    }
  }
  if (col != M) throw std::runtime_error("bogoliubov_diagonalize: spectrum is not symmetric about zero");
  Matrix Wstar(n, n);
  Wstar.leftCols(M) = X;
  for (Eigen::Index k = 0; k < M; ++k) Wstar.col(M + k) = ph_conjugate(X.col(k));
  out.W = Wstar.adjoint();
  Matrix target = Matrix::Zero(n, n);
  for (Eigen::Index k = 0; k < M; ++k) {
    target(k, k) = out.D(k);
    target(M + k, M + k) = -out.D(k);
  }
  out.unitarity_residual = max_abs(out.W * out.W.adjoint() - Matrix::Identity(n, n));
  out.ph_residual = max_abs(K * out.W.conjugate() * K - out.W);
  out.diagonal_residual = max_abs(out.W * H * out.W.adjoint() - target);
  return out;
}

namespace {

struct GibbsState {
  Matrix rho;
};

GibbsState gibbs_state(const Matrix& H, double beta, const FockSpace& fock) {
  if (!(beta >= 0.0)) throw PreconditionError("gibbs state needs beta >= 0");
  if (fock.modes() > 10) throw PreconditionError("gibbs state is limited to M <= 10 modes");
  const Matrix bold = Matrix(second_quantize(H, fock).bold);
  const EighResult e = eigh(bold);
  const double e0 = e.values.minCoeff();
  RealVector w(e.values.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) w(k) = std::exp(-beta * (e.values(k) - e0));
  w /= w.sum();
  return {e.vectors * w.cast<cplx>().asDiagonal() * e.vectors.adjoint()};
}

cplx trace_product(const Matrix& rho, const SparseMatrix& x) {
  cplx acc = 0.0;
  for (Eigen::Index k = 0; k < x.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(x, k); it; ++it) acc += rho(it.col(), it.row()) * it.value();
  }
  return acc;
}

}  // namespace

Matrix gibbs_two_point(const Matrix& H, double beta, const FockSpace& fock) {
  const GibbsState g = gibbs_state(H, beta, fock);
  const int n = 2 * fock.modes();
  Matrix gamma(n, n);
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) gamma(a, b) = trace_product(g.rho, SparseMatrix(fock.psi_dag(b) * fock.psi(a)));
  }
  return gamma;
}

cplx gibbs_expectation(const Matrix& H, double beta, const SparseMatrix& observable, const FockSpace& fock) {
  return trace_product(gibbs_state(H, beta, fock).rho, observable);
}

Matrix to_mode_blocks(const Matrix& a) {
  const Eigen::Index M = a.rows() / 2;
  Matrix out(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) out((i % 2) * M + i / 2, (j % 2) * M + j / 2) = a(i, j);
  }
  return out;
}

Matrix from_mode_blocks(const Matrix& a) {
  const Eigen::Index M = a.rows() / 2;
  Matrix out(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, j) = a((i % 2) * M + i / 2, (j % 2) * M + j / 2);
  }
  return out;
}

}  // namespace bdg
