#pragma once

/// Linear response: the dissipative Kubo formula, its zero-temperature
/// Chern limits, spin Hall weights, the thermal Hall coefficient and the
/// thermoelectric coefficient.
///
/// Units: ħ = k_B = 1, so conductances are quantized in (1/4π)ℤ and T = 1/β.

#include "bdglab/invariants.hpp"
#include "bdglab/lattice.hpp"
#include "bdglab/models.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace bdg {

enum class Perturbation {
  gravitational,     ///< 𝒫 = X₂, current ∇₁H
  electric,          ///< 𝒫 = X₂Q, current ∇₁H·Q
  zeeman,            ///< 𝒫 = X₂S³, current ∇₁H·S³
  thermal_gradient,  ///< handled by kappa_thermal / alpha_thermoelectric
};

std::string to_string(Perturbation p);
Perturbation parse_perturbation(const std::string& name);

struct KuboConfig {
  double beta = std::numeric_limits<double>::infinity();  ///< (0, ∞]
  double delta = 1e-3;                                     ///< > 0
  Perturbation perturbation = Perturbation::gravitational;
  double lambda = 0.0;  ///< recorded only; the coefficient is the linear term
};

/// (δ + ℒ_H)^{-1}(J) with ℒ_H(A) = i[A, H]: in the eigenbasis of H the
/// element J_ab is divided by δ − i(E_a − E_b).
BlockOperator liouvillian_resolvent_apply(const BlockOperator& H, double delta, const BlockOperator& J);

/// δX + i[X, H], the inverse map, for verification.
BlockOperator liouvillian_shift_apply(const BlockOperator& H, double delta, const BlockOperator& X);

/// General coefficient σ_{𝒫,𝒥}(β, δ) = ½ 𝒯(ℒ_𝒫(f_β(H)) (δ + ℒ_H)^{-1}(𝒥)),
/// with ℒ_𝒫(f_β(H)) supplied by the caller.
double kubo_coefficient(const BlockOperator& H, double delta, const BlockOperator& Lp_f,
                        const BlockOperator& J);

/// Hall coefficient for the configured perturbation. `direction` is the
/// direction of the perturbing field (2 by default, current along 1); passing
/// 1 measures the current along 2 instead.
double kubo_sigma(const BdGModel& m, const KuboConfig& cfg, int direction = 2);

/// ½ i 𝒯(P[∇₁P, ∇₂P]) = Ch(P)/4π.
double sigma_zero_temperature(const FermiProjection& fp);

struct SpinHallResult {
  double sigma = 0.0;            ///< (1/16π) Σ_l (L + 1 − 2l)² Ch(P_l)
  double sigma_direct = 0.0;     ///< ½ i 𝒯(P[∇₁^{S³}P, ∇₂^{S³}P])
  std::vector<double> sector_chern;
  std::vector<int> weights;      ///< (L + 1 − 2l)²
  std::optional<double> chern_red;         ///< SU(2) case
  std::optional<double> sigma_closed_form; ///< L(L² − 1)/(48π) Ch(P_red)
  std::optional<bool> chern_red_even;
};

SpinHallResult sigma_spin(const BdGModel& m, double tol = 1e-10);

/// Quadrature nodes and weights on an energy interval.
struct EnergyGrid {
  std::vector<double> points;
  std::vector<double> weights;
  double lo = 0.0;
  double hi = 0.0;
  int panels = 0;

  /// Composite 8-point Gauss-Legendre rule on equal panels.
  static EnergyGrid gauss_legendre(double lo, double hi, int panels);
  /// Symmetric grid covering |E| ≤ tail·T with at least `points_in_gap`
  /// nodes inside (−gap, gap).
  static EnergyGrid for_temperature(double beta, double gap, int points_in_gap = 64, double tail = 36.0);

  EnergyGrid refined() const { return gauss_legendre(lo, hi, 2 * panels); }
  int points_inside(double a, double b) const;
  double integrate(const std::function<double(double)>& f) const;
};

/// f'_β(E) = −β f_β(E)(1 − f_β(E)).
double fermi_derivative(double beta, double e);

/// κ(β) = −½ β ∫ E² f'_β(E) Ch(E)/(2π) dE for a given Ch(E) profile.
double kappa_from_profile(double beta, const EnergyGrid& grid, const std::function<double(double)>& chern);

/// α(β) = ½ β ∫ E f'_β(E) Ch(E)/(2π) dE for a given Ch(E) profile.
double alpha_from_profile(double beta, const EnergyGrid& grid, const std::function<double(double)>& chern);

/// Sommerfeld estimate (π/12) T Ch(P_0).
double kappa_sommerfeld(double beta, double chern_at_zero);

struct ThermalResult {
  double value = 0.0;          ///< κ or α
  double per_T = 0.0;          ///< κ/T (for α: α itself)
  double refined_value = 0.0;  ///< same on the refined grid
  double refinement_rel = 0.0; ///< |value − refined| / max(|refined|, floor)
  int points_in_gap = 0;
  int unreliable_points = 0;   ///< grid points whose P_E fails the localization threshold
};

/// κ(β) using Ch(P_E) from one eigendecomposition. Throws when the grid and
/// its refinement disagree by more than `refine_tol` (relative).
ThermalResult kappa_thermal(const ChernProfile& profile, double beta, const EnergyGrid& grid,
                            double refine_tol = 1e-2, double loc_threshold = default_loc_threshold);
ThermalResult kappa_thermal(const BdGModel& m, double beta, const EnergyGrid& grid);

/// α(β); requires charge conservation. The refinement check uses an absolute
/// floor of 1e-9 since the value is expected to vanish.
ThermalResult alpha_thermoelectric(const ChernProfile& profile, double beta, const EnergyGrid& grid,
                                   double refine_tol = 1e-2);
ThermalResult alpha_thermoelectric(const BdGModel& m, double beta, const EnergyGrid& grid);

/// Collected coefficients with provenance, as emitted by the CLI.
struct TransportResult {
  std::optional<double> sigma;
  std::optional<double> sigma_Q;
  std::optional<double> sigma_S3;
  std::optional<double> kappa_over_T;
  std::optional<double> alpha;
  std::string method;
  double tolerance = 0.0;
};

}  // namespace bdg
