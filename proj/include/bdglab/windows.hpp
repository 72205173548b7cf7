#pragma once

/// Spectral windows for edge observables: normalized smooth bumps g with
/// their antiderivatives G, smooth cutoffs ρ and the thermal weight
/// g_β(E) = E (f_β(E) − f_∞(E)) ρ(E).

#include <limits>
#include <vector>

namespace bdg {

/// g(E) = c · exp(−s / (1 − (E/a)²)) on |E| < a, zero elsewhere, with c
/// chosen so that ∫g = 1.
class EdgeWindow {
 public:
  /// Throws std::invalid_argument unless half_width > 0 and sharpness > 0.
  static EdgeWindow bump(double half_width, double sharpness = 1.0);

  double g(double e) const;
  /// G(E) = ∫_{−∞}^E g; 0 below the support and 1 above it.
  double G(double e) const;
  double half_width() const { return a_; }
  double sharpness() const { return s_; }
  double integral() const;

 private:
  EdgeWindow(double a, double s);
  double shape(double x) const;

  double a_ = 1.0;
  double s_ = 1.0;
  double norm_ = 1.0;
  std::vector<double> cumulative_;  ///< G at the nodes of a uniform grid on [−a, a]
};

/// Even C^∞ cutoff with ρ ≡ 1 on |E| ≤ inner and ρ ≡ 0 on |E| ≥ outer.
struct SmoothCutoff {
  double inner = 0.5;
  double outer = 1.0;
  double operator()(double e) const;
};

/// g_β(E) = E (f_β(E) − f_∞(E)) ρ(E) with f_∞ = χ(E ≤ 0).
struct ThermalWindow {
  double beta = 1.0;
  SmoothCutoff rho;

  double g(double e) const;
  /// ∫ g_β computed by quadrature.
  double integral() const;
  /// (π²/6) T², the value of ∫ g_β without the cutoff.
  double integral_without_cutoff() const;
};

}  // namespace bdg
