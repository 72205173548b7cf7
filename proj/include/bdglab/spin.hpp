#pragma once

/// Spin-s irreducible representation matrices.
///
/// The basis is ordered by decreasing magnetic quantum number: component
/// l = 1..L (stored at index l-1) carries s^3 eigenvalue s + 1 - l, L = 2s + 1.

#include "bdglab/linalg.hpp"

namespace bdg {

struct SpinRep {
  int two_s = 0;  ///< 2s, so L = two_s + 1
  Matrix s1, s2, s3;
  Matrix s_plus, s_minus;
  RealVector alpha;  ///< α_l = sqrt(l(2s+1-l)), l = 1..2s
  Matrix T_cross;    ///< T_{l,l'} = χ(l+l' = L+1)(-1)^{l+1}
  Matrix R;          ///< exp(iπ s^2), real

  int L() const { return two_s + 1; }
  double s() const { return 0.5 * two_s; }
  bool half_integer() const { return two_s % 2 == 1; }
  const Matrix& component(int j) const;
};

/// Builds the representation of spin two_s/2.
SpinRep build_spin_rep(int two_s);

}  // namespace bdg
