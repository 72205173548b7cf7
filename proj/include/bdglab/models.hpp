#pragma once

/// BdG Hamiltonians H = [[h − μ, Δ], [−conj(Δ), −conj(h) + μ]] on a lattice,
/// their symmetry analysis and the SU(2) / U(1) block reductions.

#include "bdglab/lattice.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bdg {

enum class PairingKind {
  none,
  s_wave,
  extended_s,
  p_x,
  p_plus_ip,
  p_minus_ip,
  spinful_p,
  triplet_p,
  d_xy,
  d_x2y2,
  d_plus_id,
  d_minus_id,
};

std::string to_string(PairingKind k);
/// Parses a catalogue name such as "p_plus_ip"; throws std::invalid_argument.
PairingKind parse_pairing(const std::string& name);
std::vector<PairingKind> all_pairings();

struct PairingSpec {
  PairingKind kind = PairingKind::none;
  double amplitude = 1.0;
  /// 2s of the spin the pairing polynomial is written for (0 or 1);
  /// `none` accepts any spin and returns -1.
  int spin_required_two_s() const;
};

enum class Kinetic { laplacian, magnetic_laplacian };

std::string to_string(Kinetic k);
Kinetic parse_kinetic(const std::string& name);

/// One sample of the on-site random potential, uniform on [−W/2, W/2].
/// By default one value is drawn per site and shared by all spin components,
/// which keeps spin-rotation symmetry; `spin_resolved` draws one value per
/// (site, spin component) instead.
struct DisorderRealization {
  std::uint64_t seed = 0;
  double strength_W = 0.0;
  bool spin_resolved = false;
  std::vector<double> values;  ///< indexed by site · L + l
  std::string ensemble_id;

  static DisorderRealization generate(const LatticeSpec& spec, double W, std::uint64_t seed,
                                      std::string ensemble_id = {}, bool spin_resolved = false);
  static DisorderRealization clean(const LatticeSpec& spec);

  /// Potential of the configuration shifted by (a1, a2): V'(n) = V(n − a).
  DisorderRealization translated(const LatticeSpec& spec, int a1, int a2) const;
};

enum class CazClass { D, DIII, C, CI, A, AIII, BDI };

std::string to_string(CazClass c);

struct SymmetryReport {
  double phs_residual = 0.0;
  bool phs = false;
  double trs_residual = 0.0;
  bool trs = false;
  int trs_square = 0;          ///< Θ² = (−1)^{2s}
  int trs_effective_sign = 0;  ///< sign acting on the reduced operator: 0 without TRS
  double u1_residual = 0.0;
  bool u1 = false;
  double su2_residual = 0.0;
  bool su2 = false;
  double charge_residual = 0.0;
  bool charge = false;
  CazClass caz = CazClass::D;
};

struct BdGModel {
  LatticeSpec spec;      ///< particle-hole space
  BlockOperator h;       ///< kinetic + disorder − μ, on the space without ph grading
  BlockOperator Delta;   ///< pairing block, same space as h
  double mu = 0.0;
  BlockOperator H;       ///< assembled BdG Hamiltonian
  CazClass caz_class = CazClass::D;

  PairingSpec pairing{};
  Kinetic kinetic = Kinetic::laplacian;
  DisorderRealization disorder{};

  LatticeSpec particle_spec() const { return spec.with_fiber(spec.fiber_L, false); }
};

/// Kinetic operator on ℓ²(Λ): V1 + V1* + V2 + V2* or its magnetic version
/// W1 + W1* + W2 + W2* with W1 = e^{−iqB X2} S1, W2 = S2.
Matrix kinetic_site_matrix(const LatticeSpec& spec, Kinetic kinetic);

/// Pairing operator on ℓ²(Λ) ⊗ C^L for a catalogue entry.
Matrix pairing_matrix(const LatticeSpec& spec, const PairingSpec& pairing);

BdGModel build_model(const LatticeSpec& spec, const PairingSpec& pairing, double mu,
                     const DisorderRealization& disorder, Kinetic kinetic = Kinetic::laplacian);

/// Assembles a model from explicit blocks. `h` must already contain −μ.
/// Throws if h is not hermitian or Δ is not antisymmetric.
BdGModel model_from_blocks(const LatticeSpec& spec, const Matrix& h, const Matrix& Delta,
                           double mu = 0.0, std::optional<int> range = std::nullopt);

SymmetryReport classify_symmetries(const BdGModel& m, double tol = 1e-10);

/// Operator-level versions usable on any graded BdG operator.
double phs_residual(const BlockOperator& H);
/// Time reversal Θ = (R ⊕ ±R)·conj, R = e^{iπs²} on the spin fiber. The two
/// signs differ by the charge rotation e^{iπQ/2}; the smaller residual is
/// returned.
double trs_residual(const BlockOperator& H);
double su2_residual(const BlockOperator& H);
double u1_residual(const BlockOperator& H);
double charge_residual(const BlockOperator& H);

struct SU2Reduction {
  Matrix h_red;
  Matrix Delta_red;
  BlockOperator H_red;        ///< [[h_red, Δ_red], [σ conj(Δ_red), −conj(h_red)]], σ = (−1)^L
  BlockOperator H_red_prime;  ///< same with Δ_red → −Δ_red
  int multiplicity = 0;       ///< copies of H_red
  int multiplicity_prime = 0; ///< copies of H_red_prime
  double reconstruction_residual = 0.0;
};

SU2Reduction reduce_su2(const BdGModel& m);

/// Sector l = 1..L couples particle spin component l with hole component
/// L + 1 − l; S³ acts on it as (L + 1 − 2l)/2.
std::vector<BlockOperator> reduce_u1(const BdGModel& m);

/// Applies 1_sites ⊗ f on the left or right, f acting on the fiber.
Matrix apply_fiber_left(const Matrix& fiber, const Matrix& a);
Matrix apply_fiber_right(const Matrix& a, const Matrix& fiber);

}  // namespace bdg
