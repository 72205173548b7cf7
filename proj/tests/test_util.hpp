#pragma once

// Shared helpers for the unit and acceptance tests: reproducible random
// finite-range operators and models.

#include "bdglab/lattice.hpp"
#include "bdglab/models.hpp"

#include <random>

namespace bdg::testing {

inline double uniform(std::mt19937_64& rng, double a = -1.0, double b = 1.0) {
  return std::uniform_real_distribution<double>(a, b)(rng);
}

inline cplx cuniform(std::mt19937_64& rng) { return {uniform(rng), uniform(rng)}; }

/// Random matrix on the space of `spec` whose entries vanish unless the
/// per-direction minimal-image distance of the sites is at most `range`.
inline Matrix random_local_matrix(const LatticeSpec& spec, int range, std::mt19937_64& rng) {
  const int F = spec.fiber_dim();
  Matrix a = Matrix::Zero(spec.dim(), spec.dim());
  for (int sb = 0; sb < spec.sites(); ++sb) {
    for (int sa = 0; sa < spec.sites(); ++sa) {
      bool ny1 = false, ny2 = false;
      const int d1 = displacement(spec, 1, sa, sb, &ny1);
      const int d2 = displacement(spec, 2, sa, sb, &ny2);
      if (ny1 || ny2 || std::abs(d1) > range || std::abs(d2) > range) continue;
      for (int fb = 0; fb < F; ++fb) {
        for (int fa = 0; fa < F; ++fa) a(sa * F + fa, sb * F + fb) = cuniform(rng);
      }
    }
  }
  return a;
}

inline BlockOperator random_local_operator(const LatticeSpec& spec, int range, std::mt19937_64& rng,
                                           bool hermitian = false) {
  Matrix a = random_local_matrix(spec, range, rng);
  if (hermitian) a = 0.5 * (a + a.adjoint()).eval();
  return BlockOperator(spec, std::move(a), hermitian, range);
}

/// Random BdG model with hermitian h and antisymmetric Δ, both of the given
/// per-direction range.
inline BdGModel random_model(const LatticeSpec& spec, int range, std::mt19937_64& rng, bool pairing = true) {
  const LatticeSpec p = spec.with_fiber(spec.fiber_L, false);
  Matrix h = random_local_matrix(p, range, rng);
  h = 0.5 * (h + h.adjoint()).eval();
  Matrix d = Matrix::Zero(p.dim(), p.dim());
  if (pairing) {
    d = random_local_matrix(p, range, rng);
    d = (d - d.transpose()).eval();
  }
  return model_from_blocks(spec, h, d, 0.0, range);
}

/// Random model commuting with S³: h is diagonal in the spin index and Δ
/// pairs spin component l with L − 1 − l.
inline BdGModel random_u1_model(const LatticeSpec& spec, int range, std::mt19937_64& rng) {
  const LatticeSpec p = spec.with_fiber(spec.fiber_L, false);
  const int L = spec.fiber_L;
  Matrix h = random_local_matrix(p, range, rng);
  Matrix d = random_local_matrix(p, range, rng);
  for (Eigen::Index a = 0; a < p.dim(); ++a) {
    for (Eigen::Index b = 0; b < p.dim(); ++b) {
      const int la = static_cast<int>(a % L), lb = static_cast<int>(b % L);
      if (la != lb) h(a, b) = 0.0;
      if (la + lb != L - 1) d(a, b) = 0.0;
    }
  }
  h = 0.5 * (h + h.adjoint()).eval();
  d = (d - d.transpose()).eval();
  return model_from_blocks(spec, h, d, 0.0, range);
}

}  // namespace bdg::testing
