#include "bdglab/windows.hpp"

#include "bdglab/linalg.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bdg {

namespace {

using kronrod = boost::math::quadrature::gauss_kronrod<double, 31>;
using gauss = boost::math::quadrature::gauss<double, 20>;

constexpr int table_intervals = 512;

template <class F>
double integrate(F f, double lo, double hi) {
  return kronrod::integrate(f, lo, hi, 12, 1e-13);
}

// Smooth step: 0 for t ≤ 0, 1 for t ≥ 1.
double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t);
  const double b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

}  // namespace

EdgeWindow::EdgeWindow(double a, double s) : a_(a), s_(s) {
  norm_ = 1.0 / integrate([this](double e) { return shape(e / a_); }, -a_, a_);
  const double h = 2.0 * a_ / table_intervals;
  cumulative_.assign(table_intervals + 1, 0.0);
  for (int k = 0; k < table_intervals; ++k) {
    const double lo = -a_ + k * h;
    cumulative_[k + 1] = cumulative_[k] + gauss::integrate([this](double x) { return g(x); }, lo, lo + h);
  }
  const double total = cumulative_.back();
  for (double& c : cumulative_) c /= total;
}

EdgeWindow EdgeWindow::bump(double half_width, double sharpness) {
  if (!(half_width > 0.0) || !(sharpness > 0.0)) {
    throw std::invalid_argument("EdgeWindow: half-width and sharpness must be positive");
  }
  return EdgeWindow(half_width, sharpness);
}

double EdgeWindow::shape(double x) const {
  const double r = 1.0 - x * x;
  return r <= 0.0 ? 0.0 : std::exp(-s_ / r);
}

double EdgeWindow::g(double e) const { return norm_ * shape(e / a_); }

double EdgeWindow::G(double e) const {
  if (e <= -a_) return 0.0;
  if (e >= a_) return 1.0;
  const double h = 2.0 * a_ / table_intervals;
  const int k = std::min(table_intervals - 1, static_cast<int>((e + a_) / h));
  const double lo = -a_ + k * h;
  auto gx = [this](double x) { return g(x); };
  if (e <= 0.0) return cumulative_[k] + gauss::integrate(gx, lo, e);
  return cumulative_[k + 1] - gauss::integrate(gx, e, lo + h);
}

double EdgeWindow::integral() const {
  return integrate([this](double x) { return g(x); }, -a_, a_);
}

double SmoothCutoff::operator()(double e) const {
  const double x = std::abs(e);
  if (x <= inner) return 1.0;
  if (x >= outer) return 0.0;
  return 1.0 - smooth_step((x - inner) / (outer - inner));
}

double ThermalWindow::g(double e) const {
  const double x = std::abs(e);
  if (x == 0.0) return 0.0;
  // E (f_β − f_∞) is even and equals |E| f_β(|E|)
  const double f = 1.0 / (std::exp(beta * x) + 1.0);
  return x * f * rho(e);
}

double ThermalWindow::integral() const {
  double total = 0.0;
  if (rho.inner > 0.0) total += integrate([this](double e) { return g(e); }, 0.0, rho.inner);
  total += integrate([this](double e) { return g(e); }, rho.inner, rho.outer);
  return 2.0 * total;
}

double ThermalWindow::integral_without_cutoff() const { return pi * pi / (6.0 * beta * beta); }

}  // namespace bdg
