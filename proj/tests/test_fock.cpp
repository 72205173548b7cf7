#include "doctest.h"
#include "test_util.hpp"

#include "bdglab/fock.hpp"

#include <algorithm>

using namespace bdg;
using bdg::testing::cuniform;

namespace {

Matrix dense(const SparseMatrix& s) { return Matrix(s); }

Matrix random_graded(int M, std::mt19937_64& rng) {
  Matrix alpha(M, M), beta(M, M), gamma(M, M);
  for (int j = 0; j < M; ++j)
    for (int i = 0; i < M; ++i) {
      alpha(i, j) = cuniform(rng);
      beta(i, j) = cuniform(rng);
      gamma(i, j) = cuniform(rng);
    }
  beta = (beta - beta.transpose()).eval();
  gamma = (gamma - gamma.transpose()).eval();
  Matrix A(2 * M, 2 * M);
  A << alpha, beta, gamma, -alpha.transpose();
  return A;
}

Matrix random_bdg(int M, std::mt19937_64& rng) {
  Matrix h(M, M), d(M, M);
  for (int j = 0; j < M; ++j)
    for (int i = 0; i < M; ++i) {
      h(i, j) = cuniform(rng);
      d(i, j) = cuniform(rng);
    }
  h = (h + h.adjoint()).eval();
  d = (d - d.transpose()).eval();
  Matrix H(2 * M, 2 * M);
  H << h, d, -d.conjugate(), -h.conjugate();
  return H;
}

Matrix fermi_of(const Matrix& H, double beta) {
  const EighResult e = eigh(H);
  RealVector f(e.values.size());
  for (Eigen::Index k = 0; k < f.size(); ++k) f(k) = 1.0 / (std::exp(beta * e.values(k)) + 1.0);
  return e.vectors * f.cast<cplx>().asDiagonal() * e.vectors.adjoint();
}

}  // namespace

TEST_CASE("CAR relations are exact") {
  const FockSpace f(5);
  const Matrix one = Matrix::Identity(f.dim(), f.dim());
  for (int m = 0; m < 5; ++m)
    for (int n = 0; n < 5; ++n) {
      const Matrix ac = dense(f.c(m) * f.c_dag(n)) + dense(f.c_dag(n) * f.c(m));
      CHECK(max_abs(ac - (m == n ? one : Matrix::Zero(f.dim(), f.dim()))) == 0.0);
      CHECK(max_abs(dense(f.c(m) * f.c(n)) + dense(f.c(n) * f.c(m))) == 0.0);
    }
  CHECK_THROWS_AS(FockSpace(15), PreconditionError);
}

TEST_CASE("second quantization examples") {
  const int M = 3;
  const FockSpace f(M);
  Matrix A = Matrix::Zero(2 * M, 2 * M);
  A.topLeftCorner(M, M).setIdentity();
  A.bottomRightCorner(M, M) = -Matrix::Identity(M, M);
  const Matrix expect = dense(f.number()) - 0.5 * M * Matrix::Identity(f.dim(), f.dim());
  CHECK(max_abs(dense(second_quantize(A, f).bold) - expect) <= 1e-15);
  CHECK(max_abs(dense(second_quantize(Matrix::Zero(2 * M, 2 * M), f).bold)) == 0.0);

  const FockSpace two(2);
  const SpinRep rep = build_spin_rep(1);
  Matrix S3 = Matrix::Zero(4, 4);
  S3.topLeftCorner(2, 2) = rep.s3;
  S3.bottomRightCorner(2, 2) = -rep.s3.transpose();
  RealVector ev = eigvalsh(dense(second_quantize(S3, two).bold));
  std::sort(ev.data(), ev.data() + ev.size());
  CHECK(ev(0) == doctest::Approx(-0.5));
  CHECK(ev(1) == doctest::Approx(0.0));
  CHECK(ev(2) == doctest::Approx(0.0));
  CHECK(ev(3) == doctest::Approx(0.5));

  std::mt19937_64 rng(2);
  Matrix bad = random_graded(M, rng);
  bad(0, M + 1) += 0.1;
  CHECK_THROWS_AS(second_quantize(bad, f), PreconditionError);

  const Matrix H = random_bdg(M, rng);
  const Matrix bold = dense(second_quantize(H, f).bold);
  CHECK(hermitian_residual(bold) <= 1e-14);
  const Matrix P = dense(f.parity());
  CHECK(max_abs(bold * P - P * bold) <= 1e-14);
  const Matrix G = random_graded(M, rng);
  CHECK(hermitian_residual(dense(second_quantize(G, f).bold)) > 1e-3);
}

TEST_CASE("commutator identity") {
  std::mt19937_64 rng(31);
  const int M = 4;
  const FockSpace f(M);
  SUBCASE("alpha-only pairs") {
    Matrix A = random_graded(M, rng), B = random_graded(M, rng);
    A.topRightCorner(M, M).setZero();
    A.bottomLeftCorner(M, M).setZero();
    B.topRightCorner(M, M).setZero();
    B.bottomLeftCorner(M, M).setZero();
    CHECK(commutator_identity_check(A, B, f) <= 1e-13);
  }
  SUBCASE("pure beta against pure gamma") {
    Matrix A = Matrix::Zero(2 * M, 2 * M), B = Matrix::Zero(2 * M, 2 * M);
    const Matrix ga = random_graded(M, rng);
    const Matrix beta = ga.topRightCorner(M, M);
    const Matrix gamma = ga.bottomLeftCorner(M, M);
    A.topRightCorner(M, M) = beta;
    B.bottomLeftCorner(M, M) = gamma;
    const Matrix bg = beta * gamma;
    // 4[𝐀, 𝐀'] = 2 Σ (βγ')_{nm} c*_n c_m − 2 Σ (βγ')_{mn} c_n c*_m
    Matrix rhs = Matrix::Zero(f.dim(), f.dim());
    for (int n = 0; n < M; ++n)
      for (int m = 0; m < M; ++m) {
        rhs += 2.0 * bg(n, m) * dense(f.c_dag(n) * f.c(m));
        rhs -= 2.0 * bg(m, n) * dense(f.c(n) * f.c_dag(m));
      }
    const Matrix a = dense(second_quantize(A, f).bold), b = dense(second_quantize(B, f).bold);
    CHECK(max_abs(4.0 * (a * b - b * a) - rhs) <= 1e-13);
    CHECK(commutator_identity_check(A, B, f) <= 1e-13);
  }
  SUBCASE("random full pairs at M = 6") {
    const FockSpace f6(6);
    for (int k = 0; k < 10; ++k) CHECK(commutator_identity_check(random_graded(6, rng), random_graded(6, rng), f6) <= 1e-12);
  }
  SUBCASE("second-quantized spins obey su(2)") {
    const SpinRep rep = build_spin_rep(1);
    const FockSpace f4(4);
    Matrix S[3];
    for (int j = 1; j <= 3; ++j) {
      const Matrix s = kron(Matrix::Identity(2, 2), rep.component(j));
      S[j - 1] = Matrix::Zero(8, 8);
      S[j - 1].topLeftCorner(4, 4) = s;
      S[j - 1].bottomRightCorner(4, 4) = -s.transpose();
    }
    const Matrix s1 = dense(second_quantize(S[0], f4).bold);
    const Matrix s2 = dense(second_quantize(S[1], f4).bold);
    const Matrix s3 = dense(second_quantize(S[2], f4).bold);
    CHECK(max_abs(s1 * s2 - s2 * s1 - I * s3) <= 1e-13);
    CHECK(commutator_identity_check(S[0], S[1], f4) <= 1e-13);
  }
}

TEST_CASE("Bogoliubov diagonalization") {
  SUBCASE("already diagonal") {
    Matrix H = Matrix::Zero(4, 4);
    H(0, 0) = 2.0;
    H(1, 1) = 1.0;
    H(2, 2) = -2.0;
    H(3, 3) = -1.0;
    const auto r = bogoliubov_diagonalize(H);
    CHECK(r.D(0) == doctest::Approx(2.0));
    CHECK(r.D(1) == doctest::Approx(1.0));
    CHECK(max_abs(r.W.cwiseAbs().cast<cplx>() - Matrix::Identity(4, 4)) <= 1e-14);
  }
  SUBCASE("one-site s-wave toy") {
    const double mu = 0.7, delta = 0.4;
    Matrix H = Matrix::Zero(4, 4);
    H(0, 0) = H(1, 1) = -mu;
    H(2, 2) = H(3, 3) = mu;
    H(0, 3) = delta;
    H(1, 2) = -delta;
    H(3, 0) = delta;
    H(2, 1) = -delta;
    const auto r = bogoliubov_diagonalize(H);
    CHECK(r.D(0) == doctest::Approx(std::hypot(mu, delta)).epsilon(1e-14));
    CHECK(r.D(1) == doctest::Approx(std::hypot(mu, delta)).epsilon(1e-14));
    CHECK(r.diagonal_residual <= 1e-12);
  }
  SUBCASE("random BdG matrices lie in the canonical group") {
    std::mt19937_64 rng(77);
    for (int k = 0; k < 10; ++k) {
      const auto r = bogoliubov_diagonalize(random_bdg(5, rng));
      CHECK(r.unitarity_residual <= 1e-10);
      CHECK(r.ph_residual <= 1e-10);
      CHECK(r.diagonal_residual <= 1e-10);
      CHECK(r.zero_modes == 0);
      for (int j = 1; j < 5; ++j) CHECK(r.D(j - 1) >= r.D(j));
    }
  }
  SUBCASE("zero modes are flagged and still paired canonically") {
    std::mt19937_64 rng(4);
    Matrix H = random_bdg(3, rng);
    H.row(0).setZero();
    H.col(0).setZero();
    H.row(3).setZero();
    H.col(3).setZero();
    const auto r = bogoliubov_diagonalize(H);
    CHECK(r.zero_modes >= 1);
    CHECK(r.unitarity_residual <= 1e-10);
    CHECK(r.ph_residual <= 1e-10);
    CHECK(r.diagonal_residual <= 1e-10);
    const auto z = bogoliubov_diagonalize(Matrix::Zero(4, 4));
    CHECK(z.zero_modes == 2);
    CHECK(z.ph_residual <= 1e-12);
  }
  SUBCASE("many-body spectrum from quasi-particle energies") {
    std::mt19937_64 rng(6);
    const Matrix H = random_bdg(4, rng);
    const auto r = bogoliubov_diagonalize(H);
    const FockSpace f(4);
    RealVector ev = eigvalsh(dense(second_quantize(H, f).bold));
    std::sort(ev.data(), ev.data() + ev.size());
    std::vector<double> predicted;
    for (int mask = 0; mask < 16; ++mask) {
      double e = -0.5 * r.D.sum();
      for (int k = 0; k < 4; ++k)
        if (mask & (1 << k)) e += r.D(k);
      predicted.push_back(e);
    }
    std::sort(predicted.begin(), predicted.end());
    for (int k = 0; k < 16; ++k) CHECK(std::abs(ev(k) - predicted[static_cast<std::size_t>(k)]) <= 1e-10);
  }
}

TEST_CASE("Gibbs two-point function") {
  std::mt19937_64 rng(12);
  const LatticeSpec spec = LatticeSpec::torus(2, 2, 1);
  const BdGModel m = bdg::testing::random_model(spec, 1, rng);
  const Matrix H = to_mode_blocks(m.H.matrix());
  const FockSpace f(4);
  const Matrix K = mode_block_swap(4);
  const Matrix one = Matrix::Identity(8, 8);
  for (double beta : {0.5, 5.0}) {
    const Matrix G = gibbs_two_point(H, beta, f);
    CHECK(max_abs(G - fermi_of(H, beta)) <= 1e-10);
    CHECK(max_abs(K * G.conjugate() * K - (one - G)) <= 1e-10);
    // The reversed ordering ω(ψ_a ψ_b^*) is the complementary 1 − f_β(H).
    Matrix reversed(8, 8);
    for (int a = 0; a < 8; ++a)
      for (int b = 0; b < 8; ++b)
        reversed(a, b) = gibbs_expectation(H, beta, SparseMatrix(f.psi(a) * f.psi_dag(b)), f);
    CHECK(max_abs(reversed - (one - fermi_of(H, beta))) <= 1e-10);
  }
  CHECK(max_abs(gibbs_two_point(H, 0.0, f) - 0.5 * one) <= 1e-14);
  const RealVector e = eigvalsh(H);
  REQUIRE(e.cwiseAbs().minCoeff() > 0.05);
  const EighResult eh = eigh(H);
  Matrix P = Matrix::Zero(8, 8);
  for (int k = 0; k < 8; ++k)
    if (eh.values(k) < 0) P += eh.vectors.col(k) * eh.vectors.col(k).adjoint();
  CHECK(max_abs(gibbs_two_point(H, 800.0, f) - P) <= 1e-10);
  CHECK_THROWS_AS(gibbs_two_point(H, -1.0, f), PreconditionError);

  Matrix A = random_graded(4, rng);
  A.topLeftCorner(4, 4) -= (A.topLeftCorner(4, 4).trace() / 4.0) * Matrix::Identity(4, 4);
  A.bottomRightCorner(4, 4) = -A.topLeftCorner(4, 4).transpose();
  const cplx w = gibbs_expectation(H, 1.7, second_quantize(A, f).bold, f);
  CHECK(std::abs(w - 0.5 * (fermi_of(H, 1.7) * A).trace()) <= 1e-10);
}
