#include "bdglab/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <vector>

namespace bdg {

namespace {

void check_info(lapack_int info, const char* routine) {
  if (info != 0) {
    throw std::runtime_error(std::string(routine) + " failed with info = " + std::to_string(info));
  }
}

}  // namespace

EighResult eigh(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("eigh: matrix is not square");
  EighResult out;
  const lapack_int n = static_cast<lapack_int>(a.rows());
  out.vectors = a;
  out.values.resize(n);
  if (n == 0) return out;
  auto* data = reinterpret_cast<lapack_complex_double*>(out.vectors.data());
  check_info(LAPACKE_zheevd(LAPACK_COL_MAJOR, 'V', 'L', n, data, n, out.values.data()), "zheevd");
  return out;
}

EighResult eigh_in_interval(const Matrix& a, double lo, double hi) {
  if (a.rows() != a.cols()) throw std::invalid_argument("eigh_in_interval: matrix is not square");
  if (!(lo < hi)) throw std::invalid_argument("eigh_in_interval: empty interval");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  EighResult out;
  if (n == 0) return out;
  Matrix work = a;
  RealVector w(n);
  Matrix z(n, n);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
  lapack_int found = 0;
  check_info(LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'V', 'L', n, reinterpret_cast<lapack_complex_double*>(work.data()),
                            n, lo, hi, 0, 0, 0.0, &found, w.data(),
                            reinterpret_cast<lapack_complex_double*>(z.data()), n, support.data()),
             "zheevr");
  out.values = w.head(found);
  out.vectors = z.leftCols(found);
  return out;
}

RealVector eigvalsh(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("eigvalsh: matrix is not square");
  const lapack_int n = static_cast<lapack_int>(a.rows());
  Matrix work = a;
  RealVector w(n);
  if (n == 0) return w;
  auto* data = reinterpret_cast<lapack_complex_double*>(work.data());
  check_info(LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n, data, n, w.data()), "zheevd");
  return w;
}

SvdResult svd(const Matrix& a) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  const lapack_int k = std::min(m, n);
  Matrix work = a;
  SvdResult out;
  out.singular_values.resize(k);
  out.u.resize(m, m);
  Matrix vt(n, n);
  if (k > 0) {
    check_info(LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'A', m, n,
                              reinterpret_cast<lapack_complex_double*>(work.data()), m,
                              out.singular_values.data(),
                              reinterpret_cast<lapack_complex_double*>(out.u.data()), m,
                              reinterpret_cast<lapack_complex_double*>(vt.data()), n),
               "zgesdd");
  }
  out.v = vt.adjoint();
  return out;
}

double max_abs(const Matrix& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

double hermitian_residual(const Matrix& a) { return max_abs(a - a.adjoint()); }

}  // namespace bdg
