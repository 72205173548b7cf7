#pragma once

/// Half-space physics on a cylinder (periodic in direction 1, Dirichlet
/// boundaries at x₂ = 0 and x₂ = width − 1).
///
/// The boundary trace 𝒯̂(A) = (1/n₁) Σ_{x₁} Σ_{x₂ < depth} tr A(x, x) sums over
/// the lower edge only. The cylinder of circumference n₁ is used as one cell
/// of a half-space that is periodic along direction 1, and traces are averaged
/// over the Bloch phase θ of that cell. A model that is translation invariant
/// along direction 1 uses a cell of one column.

#include "bdglab/invariants.hpp"
#include "bdglab/lattice.hpp"
#include "bdglab/models.hpp"
#include "bdglab/windows.hpp"

#include <optional>
#include <vector>

namespace bdg {

struct HalfSpaceOptions {
  /// Rows x₂ < depth enter the boundary trace; default width / 2.
  std::optional<int> depth;
  /// Bulk spectral gap; computed from the bulk model when absent.
  std::optional<double> bulk_gap;
  /// Minimum of cell width × number of Bloch phases.
  int k_resolution = 512;
};

struct HalfSpaceModel {
  BdGModel bulk;  ///< torus model the half-space was cut from
  BdGModel edge;  ///< restriction to x₂ < width on the cylinder
  int width = 0;
  int depth = 0;
  int range1 = 0;      ///< hopping range along direction 1
  double bulk_gap = 0.0;
  bool translation_invariant = false;
  int cell = 1;     ///< columns per Bloch cell (1 or n₁)
  int phases = 1;   ///< Bloch phases θ_i = 2π(i + ½)/phases

  const BlockOperator& H_hat() const { return edge.H; }
};

/// Restricts a torus model to the rows x₂ < width. The torus needs
/// n₂ ≥ width + range so that no wrapped hopping survives; width < 8 and
/// a gapless bulk are rejected.
HalfSpaceModel build_half_space(const BdGModel& bulk, int width, const HalfSpaceOptions& opts = {});

/// max_{s,t} ‖A(s + e_j, t + e_j) − A(s, t)‖ over the lattice; on a cylinder only j = 1.
double translation_residual(const BlockOperator& a, int j);

/// Boundary trace of a dense operator on the cylinder.
cplx boundary_trace(const HalfSpaceModel& hs, const BlockOperator& a);

struct ZeroCrossing {
  double k = 0.0;
  int edge = 0;       ///< 0 lower edge, 1 upper edge
  int direction = 0;  ///< +1 upward in energy as k increases
};

struct EdgeBands {
  std::vector<double> k;
  std::vector<RealVector> energies;       ///< per k, ascending
  std::vector<RealVector> lower_weight;   ///< per k and state: weight on x₂ < width/2
  std::vector<ZeroCrossing> crossings;
  int chirality_lower = 0;  ///< signed count of zero crossings on the lower edge
  int chirality_upper = 0;
  int in_gap_states = 0;    ///< samples with |E| < bulk gap
  double min_abs_energy = 0.0;
};

/// Band structure along k₁ ∈ 2π(i + ½)/nk. Needs a one-column cell.
EdgeBands edge_band_structure(const HalfSpaceModel& hs, int nk = 256);

/// −½ (1/n₁) Σ_{x₁} tr[(g(Ĥ)∇₁Ĥ)(x, x)] for each row x₂ of the cylinder.
std::vector<double> edge_current_profile(const HalfSpaceModel& hs, const EdgeWindow& w);

/// ĵ(g) = −½ 𝒯̂(g(Ĥ)∇₁Ĥ). Rejects windows reaching the bulk bands.
double edge_current(const HalfSpaceModel& hs, const EdgeWindow& w);

/// −½ 𝒯̂(χ(|Ĥ| ≤ a)∇₁Ĥ), the indicator version that grows like 2a·σ.
double edge_current_indicator(const HalfSpaceModel& hs, double a);

/// ĵ_Q(g) = −½ 𝒯̂(g(Ĥ) Q 𝒥̂_{Q,1}) with 𝒥̂_{Q,1} = ∇₁Ĥ Q; requires charge conservation.
double charge_edge_current(const HalfSpaceModel& hs, const EdgeWindow& w);

struct WindingResult {
  double value = 0.0;   ///< −i 𝒯̂((Û* − 1)∇₁Û), Û = exp(−2πi G(Ĥ)); equals 4π ĵ(g)
  double literal = 0.0; ///< +i 𝒯̂((Û* − 1)∇₁Û)
  int integer_snap = 0;
  double deviation = 0.0;
  double current = 0.0; ///< value / 4π
};

WindingResult winding_number(const HalfSpaceModel& hs, const EdgeWindow& w);

/// Index of Π Û* Π on the region 0 ≤ x₁ < N/2 of a ring of circumference
/// N ≥ `circumference` built from whole cells, counted from singular values
/// below ½ whose vectors sit at the lower corner x₁ ≈ 0. The value agrees
/// with WindingResult::literal, so it is −Ch for the orientation of ĵ.
/// Corner states at the two ends of the region overlap when N is short;
/// N = 96 keeps the overlap below 10⁻².
ChernResult quarter_plane_index(const HalfSpaceModel& hs, const EdgeWindow& w, const IndexOptions& opts = {},
                                int circumference = 96);

struct SpinEdgeResult {
  double total = 0.0;                ///< −½ 𝒯̂(g(Ĥ)(S³)²∇₁Ĥ)
  std::vector<double> sector_current; ///< −½ 𝒯̂(g(Ĥ_l)∇₁Ĥ_l)
  std::vector<double> sector_weight;  ///< ((L + 1 − 2l)/2)²
  double sector_sum = 0.0;
};

SpinEdgeResult spin_edge_current(const HalfSpaceModel& hs, const EdgeWindow& w, double tol = 1e-10);

struct ThermalEdgeOptions {
  double inner = 0.6;  ///< ρ ≡ 1 on |E| ≤ inner · gap
  double outer = 0.95; ///< ρ ≡ 0 on |E| ≥ outer · gap
  double rel_step = 0.05;  ///< κ̂ by central difference at T(1 ± rel_step)
  int k_resolution = 4096;
};

struct ThermalEdgeResult {
  double j_H = 0.0;          ///< −½ 𝒯̂(g_β(Ĥ)∇₁Ĥ)
  double j_H_over_T2 = 0.0;
  double kappa_hat = 0.0;    ///< ∂ĵ_H/∂T
  double kappa_hat_over_T = 0.0;
  double window_integral = 0.0;  ///< ∫ g_β
};

/// Rejects T > gap/10.
ThermalEdgeResult thermal_edge_current(const HalfSpaceModel& hs, double beta, const ThermalEdgeOptions& opts = {});

/// −𝒯̂(g(ĥ)(ĥ − μ′)∇₁ĥ) with g the bump of half-width δ scaled to ∫g = 2δ,
/// the smooth form of 𝒯̂((p̂₋ − p̂₊)(ĥ − μ′)∇₁ĥ). Vanishes for μ′ = 0.
double thermoelectric_edge_check(const HalfSpaceModel& hs, double delta, double mu_prime = 0.0);

}  // namespace bdg
