#include "bdglab/spin.hpp"

#include <cmath>

namespace bdg {

const Matrix& SpinRep::component(int j) const {
  switch (j) {
    case 1: return s1;
    case 2: return s2;
    case 3: return s3;
    default: throw std::invalid_argument("spin component must be 1, 2 or 3");
  }
}

SpinRep build_spin_rep(int two_s) {
  if (two_s < 0) throw std::invalid_argument("build_spin_rep: 2s must be a non-negative integer");
  SpinRep rep;
  rep.two_s = two_s;
  const int L = two_s + 1;
  const double s = 0.5 * two_s;

  rep.s3 = Matrix::Zero(L, L);
  rep.s_plus = Matrix::Zero(L, L);
  rep.alpha.resize(two_s);
  for (int l = 1; l <= L; ++l) rep.s3(l - 1, l - 1) = s + 1 - l;
  for (int l = 1; l <= two_s; ++l) {
    rep.alpha(l - 1) = std::sqrt(static_cast<double>(l) * (two_s + 1 - l));
    rep.s_plus(l - 1, l) = rep.alpha(l - 1);
  }
  rep.s_minus = rep.s_plus.adjoint();
  rep.s1 = 0.5 * (rep.s_minus + rep.s_plus);
  rep.s2 = (0.5 * I) * (rep.s_minus - rep.s_plus);

  rep.T_cross = Matrix::Zero(L, L);
  for (int l = 1; l <= L; ++l) rep.T_cross(l - 1, L - l) = (l % 2 == 1) ? 1.0 : -1.0;

  const EighResult e = eigh(rep.s2);
  Vector phase(L);
  for (int k = 0; k < L; ++k) phase(k) = std::exp(I * (pi * e.values(k)));
  const Matrix r = e.vectors * phase.asDiagonal() * e.vectors.adjoint();
  rep.R = r.real().cast<cplx>();
  return rep;
}

}  // namespace bdg
