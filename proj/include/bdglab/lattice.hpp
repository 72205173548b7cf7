#pragma once

/// Finite-volume lattice Hilbert spaces and operators on them.
///
/// A LatticeSpec fixes the Hilbert space ℓ²(Λ) ⊗ C^L ⊗ C² where Λ is an
/// n1 × n2 torus or cylinder, L = 2s + 1 is the spin fiber and C² is the
/// particle-hole grading. Basis vectors are enumerated as
///
///     index = ((x2 · n1 + x1) · L + l) · 2 + η
///
/// so the second lattice coordinate is slowest and the particle-hole grade η
/// (0 = particle, 1 = hole) is fastest. Spaces without particle-hole doubling
/// (used for the one-particle Hamiltonian h alone) drop the η factor.

#include "bdglab/linalg.hpp"
#include "bdglab/spin.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

namespace bdg {

enum class Geometry { torus, cylinder };

std::string to_string(Geometry g);

/// Magnetic flux per plaquette in units of the flux quantum, qB/2π = num/den.
struct Flux {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Flux() = default;
  Flux(std::int64_t p, std::int64_t q);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool is_zero() const { return num == 0; }
  /// True when flux · n is an integer.
  bool commensurate_with(int n) const { return (num * n) % den == 0; }
  std::string str() const;
  /// Accepts "p/q", an integer, or "0".
  static Flux parse(const std::string& text);

  friend bool operator==(const Flux&, const Flux&) = default;
};

struct LatticeSpec {
  int n1 = 1;
  int n2 = 1;
  Geometry geometry = Geometry::torus;
  int fiber_L = 1;
  Flux flux{};
  int charge_sign = 1;
  bool particle_hole = true;

  static LatticeSpec torus(int n1, int n2, int fiber_L = 1, Flux flux = {});
  static LatticeSpec cylinder(int n1, int width, int fiber_L = 1, Flux flux = {});

  int sites() const { return n1 * n2; }
  int ph_dim() const { return particle_hole ? 2 : 1; }
  int fiber_dim() const { return fiber_L * ph_dim(); }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(sites()) * fiber_dim(); }

  Eigen::Index site_index(int x1, int x2) const { return static_cast<Eigen::Index>(x2) * n1 + x1; }
  Eigen::Index index(int x1, int x2, int l, int eta = 0) const {
    return (site_index(x1, x2) * fiber_L + l) * ph_dim() + eta;
  }
  int x1_of(Eigen::Index site) const { return static_cast<int>(site % n1); }
  int x2_of(Eigen::Index site) const { return static_cast<int>(site / n1); }
  int coordinate(int j, Eigen::Index site) const { return j == 1 ? x1_of(site) : x2_of(site); }
  int extent(int j) const { return j == 1 ? n1 : n2; }
  bool periodic(int j) const { return j == 1 || geometry == Geometry::torus; }

  /// qB = 2π · charge_sign · flux.
  double qB() const { return 2.0 * pi * charge_sign * flux.value(); }
  /// Commutation phases Ξ = (e^{iqB}, e^{-iqB}) on the particle and hole grades.
  std::pair<cplx, cplx> xi() const;

  /// Throws PreconditionError on inconsistent sizes or incommensurate flux.
  void validate() const;

  LatticeSpec with_fiber(int L, bool ph) const;
  LatticeSpec with_size(int m1, int m2) const;
  LatticeSpec as_cylinder(int width) const;

  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

/// Signed j-displacement x_j(a) − x_j(b) between two sites. On periodic
/// directions the minimal image is used; the ambiguous value n_j/2 of an even
/// period is mapped to 0 and reported through `nyquist`.
int displacement(const LatticeSpec& spec, int j, Eigen::Index site_a, Eigen::Index site_b,
                 bool* nyquist = nullptr);

/// Eigendecomposition attached to a hermitian operator.
struct Spectrum {
  RealVector values;  ///< ascending
  Matrix vectors;     ///< orthonormal eigenvectors as columns
  double reconstruction_residual = 0.0;
};

/// Dense operator on the Hilbert space of a LatticeSpec.
///
/// Operators are immutable after construction. A hermitian operator carries a
/// lazily computed eigendecomposition shared between copies. `range` records
/// the largest per-direction hopping distance when the operator is known to
/// be of finite range; it drives the aliasing guard of `derivation`.
class BlockOperator {
 public:
  BlockOperator() = default;
  BlockOperator(LatticeSpec spec, Matrix data, bool hermitian = false,
                std::optional<int> range = std::nullopt);

  static BlockOperator identity(const LatticeSpec& spec);
  static BlockOperator zero(const LatticeSpec& spec);

  const LatticeSpec& spec() const { return spec_; }
  const Matrix& matrix() const { return data_; }
  bool hermitian() const { return hermitian_; }
  std::optional<int> range() const { return range_; }
  Eigen::Index dim() const { return data_.rows(); }
  cplx operator()(Eigen::Index i, Eigen::Index j) const { return data_(i, j); }

  /// Eigendecomposition, computed once. Requires the hermitian flag.
  const Spectrum& spectrum() const;
  bool has_spectrum() const;

  BlockOperator adjoint() const;
  BlockOperator with_range(std::optional<int> r) const;

  friend BlockOperator operator+(const BlockOperator& a, const BlockOperator& b);
  friend BlockOperator operator-(const BlockOperator& a, const BlockOperator& b);
  friend BlockOperator operator*(const BlockOperator& a, const BlockOperator& b);
  friend BlockOperator operator*(cplx z, const BlockOperator& a);
  friend BlockOperator operator*(double x, const BlockOperator& a);

 private:
  struct Cache {
    std::once_flag once;
    Spectrum value;
  };
  LatticeSpec spec_{};
  Matrix data_{};
  bool hermitian_ = false;
  std::optional<int> range_{};
  std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

/// Commutator [a, b].
BlockOperator commutator(const BlockOperator& a, const BlockOperator& b);

// ---------------------------------------------------------------------------
// Site-level building blocks (matrices on ℓ²(Λ) only)
// ---------------------------------------------------------------------------

/// Shift (V_j ψ)(n) = ψ(n − e_j); on an open direction the hopping across the
/// edge is absent.
Matrix site_shift(const LatticeSpec& spec, int j);

/// Position X_j with eigenvalues x_j ∈ {0, …, n_j − 1}.
Matrix site_position(const LatticeSpec& spec, int j);

/// Diagonal phase e^{iθ x_j}.
Matrix site_phase(const LatticeSpec& spec, int j, double theta);

/// Embeds a site operator and a spin operator into the full space as
/// a ⊗ spin ⊗ 1_ph (or a ⊗ spin without particle-hole grading).
Matrix lift(const LatticeSpec& spec, const Matrix& site_op, const Matrix& spin_op);

/// Builds [[a, b], [c, d]] on the particle-hole grading from operators on
/// ℓ²(Λ) ⊗ C^L.
Matrix assemble_ph(const LatticeSpec& spec, const Matrix& a, const Matrix& b, const Matrix& c,
                   const Matrix& d);

/// Extracts one particle-hole block (eta_row, eta_col) of a graded operator.
Matrix ph_block(const LatticeSpec& spec, const Matrix& full, int eta_row, int eta_col);

/// The particle-hole swap K = 1 ⊗ 1 ⊗ [[0,1],[1,0]].
Matrix ph_swap(const LatticeSpec& spec);

// ---------------------------------------------------------------------------
// Covariant framework
// ---------------------------------------------------------------------------

struct MagneticTranslations {
  BlockOperator U1;
  std::optional<BlockOperator> U2;  ///< absent on a cylinder
};

/// U_j = u_j ⊕ conj(u_j) with u_1 = S_1 and u_2 = e^{-iqB X_1} S_2, so that
/// U_1 U_2 = Ξ U_2 U_1.
MagneticTranslations magnetic_translations(const LatticeSpec& spec);

struct CovarianceReport {
  double residual_1 = 0.0;
  double residual_2 = 0.0;  ///< NaN on a cylinder
  double max() const;
};

/// A disorder-indexed family: family(a1, a2) is the operator for the
/// configuration translated by (a1, a2).
using OperatorFamily = std::function<BlockOperator(int a1, int a2)>;

/// max_j ‖U_j A_{τ^n ω} U_j^* − A_{τ^{n+e_j} ω}‖_max, over n = 0 or over all
/// lattice translations n when `all_base_points` is set.
CovarianceReport check_covariance(const OperatorFamily& family, const LatticeSpec& spec,
                                  bool all_base_points = false);
CovarianceReport check_covariance(const BlockOperator& periodic);

/// ∇_j A = i[A, X_j] realized with minimal-image displacements:
/// (∇_j A)(n, n') = −i d_j(n, n') A(n, n').
BlockOperator derivation(const BlockOperator& a, int j);

/// 𝒯(A) = Tr(A) / (n1 n2). Torus only.
cplx trace_per_volume(const BlockOperator& a);

/// f(A) = V f(D) V^* through the cached eigendecomposition.
BlockOperator spectral_function(const BlockOperator& a, const std::function<double(double)>& f);

/// Same with a complex-valued function (the result is not flagged hermitian).
BlockOperator spectral_function_complex(const BlockOperator& a,
                                        const std::function<cplx(double)>& f);

/// Charge, spin and position operators of a space.
struct ChargeAndSpinOps {
  BlockOperator Q;
  BlockOperator S1, S2, S3;
  BlockOperator X1, X2;
  const BlockOperator& S(int j) const;
  const BlockOperator& X(int j) const;
};

ChargeAndSpinOps charge_and_spin_ops(const LatticeSpec& spec);

/// Fermi-Dirac occupation 1/(e^{βE} + 1), with β = ∞ giving χ(E ≤ 0).
double fermi(double beta, double e);

}  // namespace bdg
