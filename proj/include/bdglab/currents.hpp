#pragma once

/// Local densities, discrete derivatives and continuity equations.
///
/// For an operator A the local density at site n is ρ_A(n) = ½{A, ρ(n)}
/// where ρ(n) projects onto the fiber of n. Its j-th discrete derivative is
///
///     (∂_j ρ_A)(n) = −Σ_{n'} w(n, n') / d_j(n, n') · [ |n⟩A(n,n')⟨n'| + |n'⟩A(n',n)⟨n| ]
///
/// summed over the sites n' with d_j(n, n') ≠ 0, where d_j is the signed
/// displacement and w = 1/k with k the number of directions in which the bond
/// (n, n') has a nonzero displacement. For nearest-neighbour bonds w = 1 which
/// is the factor 2/d at d = 2; bonds with a component in both directions split
/// their weight equally so that the divergence telescopes exactly.

#include "bdglab/lattice.hpp"
#include "bdglab/models.hpp"

#include <array>
#include <optional>
#include <string>

namespace bdg {

/// How bonds at the ambiguous displacement n_j/2 of an even period are handled.
enum class NyquistPolicy {
  reject,     ///< throw if such a bond carries weight
  tie_break,  ///< assign the bond to the image with d_j = +n_j/2 when x_j(a) > x_j(b)
};

/// Signed bond length in direction j used by the density calculus. Away from
/// the Nyquist displacement this is the minimal image. At the Nyquist
/// displacement it follows the tie break, which keeps d_j(a, b) = −d_j(b, a).
int bond_displacement(const LatticeSpec& spec, int j, Eigen::Index site_a, Eigen::Index site_b,
                      bool* nyquist = nullptr);

/// An operator supported on the rows and columns of one site:
/// M = E_n · rows + cols · E_n^T, where `rows` is the fiber-row block
/// (fiber_dim × dim) and `cols` the fiber-column block (dim × fiber_dim) whose
/// own fiber rows are kept at zero so the diagonal block is counted once.
struct SiteOperator {
  LatticeSpec spec;
  Eigen::Index site = 0;
  Matrix rows;
  Matrix cols;

  static SiteOperator zero(const LatticeSpec& spec, Eigen::Index site);
  Matrix dense() const;
  /// [M, H] as a dense matrix, in O(dim² · fiber_dim) operations.
  Matrix commutator_with(const Matrix& H) const;

  SiteOperator& operator+=(const SiteOperator& other);
};

/// ρ_A(n) = ½{A, ρ(n)}.
SiteOperator local_density(const BlockOperator& a, Eigen::Index site);

/// (∂_j ρ_A)(n).
SiteOperator discrete_derivative(const BlockOperator& a, Eigen::Index site, int j,
                                 NyquistPolicy policy = NyquistPolicy::reject);

/// (∂·ρ)(n) = ∂_1 ρ_{B_1}(n) + ∂_2 ρ_{B_2}(n).
SiteOperator divergence(const BlockOperator& b1, const BlockOperator& b2, Eigen::Index site,
                        NyquistPolicy policy = NyquistPolicy::reject);

/// Densities of a fixed operator, produced site by site on request.
class LocalDensityField {
 public:
  explicit LocalDensityField(BlockOperator base, NyquistPolicy policy = NyquistPolicy::reject);

  const BlockOperator& base() const { return base_; }
  SiteOperator density(Eigen::Index site) const { return local_density(base_, site); }
  SiteOperator derivative(Eigen::Index site, int j) const {
    return discrete_derivative(base_, site, j, policy_);
  }
  /// Σ_n ρ_A(n), which reproduces A.
  Matrix sum() const;

 private:
  BlockOperator base_;
  NyquistPolicy policy_;
};

/// Velocity V_j = i[H, X_j] built with bond displacements:
/// V_j(n, n') = −i d_j(n, n') H(n, n').
BlockOperator velocity(const BlockOperator& H, int j, NyquistPolicy policy = NyquistPolicy::reject);

enum class Conserved { matter, charge, spin, energy };

std::string to_string(Conserved c);
Conserved parse_conserved(const std::string& name);

struct ContinuityReport {
  Conserved which = Conserved::matter;
  /// max_n ‖−i[ρ_•(n), H] + (∂·𝒥_•)(n)‖_max
  double residual = 0.0;
  /// True when the conserved quantity does not commute with H; the residual
  /// is then not expected to vanish and `obstruction` carries ‖[H, Q]‖ or
  /// ‖[H, S³]‖.
  bool obstructed = false;
  double obstruction = 0.0;
  /// Number of (ordered) bonds that sat at a Nyquist displacement.
  long nyquist_bonds = 0;

  /// The reported diagnostic: the obstruction norm if obstructed, else the residual.
  double value() const { return obstructed ? obstruction : residual; }
};

/// Checks the continuity equation ∂_t ρ_• = −∂·𝒥_• at every site. Energy
/// uses the effective Hamiltonian H' = ½H² for the current.
ContinuityReport continuity_residual(const BdGModel& m, Conserved which,
                                     NyquistPolicy policy = NyquistPolicy::tie_break);
ContinuityReport continuity_residual(const BlockOperator& H, Conserved which,
                                     NyquistPolicy policy = NyquistPolicy::tie_break);

/// Macroscopic currents. Each pair holds the components j = 1, 2.
struct CurrentOps {
  std::array<BlockOperator, 2> J_matter;
  std::optional<std::array<BlockOperator, 2>> J_Q;   ///< present when [H, Q] = 0
  std::optional<std::array<BlockOperator, 2>> J_S3;  ///< present when [H, S³] = 0
  std::optional<std::array<BlockOperator, 2>> J_H;   ///< absent when H² would alias
};

/// 𝒥 = i[H, X], 𝒥_Q = 𝒥 Q, 𝒥_{S³} = 𝒥 S³, 𝒥_H = (i/2)[H², X].
CurrentOps current_operators(const BdGModel& m, double tol = 1e-10);

/// 𝒯(f_β(H) ∇_j H), the current carried by the Fermi-Dirac state.
cplx equilibrium_current(const BdGModel& m, double beta, int j);

}  // namespace bdg
