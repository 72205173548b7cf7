#include "bdglab/transport.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bdg {

namespace {

Matrix to_eigenbasis(const Spectrum& s, const Matrix& a) {
  return s.vectors.adjoint() * (a * s.vectors);
}

Matrix from_eigenbasis(const Spectrum& s, const Matrix& a) {
  return s.vectors * (a * s.vectors.adjoint());
}

void check_delta(double delta) {
  if (!(delta > 0.0)) throw PreconditionError("Liouvillian resolvent needs δ > 0");
}

BlockOperator fermi_operator(const BlockOperator& H, double beta) {
  if (!(beta > 0.0)) throw PreconditionError("inverse temperature must lie in (0, ∞]");
  if (std::isinf(beta)) return fermi_projection(H).P;
  return spectral_function(H, [beta](double e) { return fermi(beta, e); });
}

}  // namespace

std::string to_string(Perturbation p) {
  switch (p) {
    case Perturbation::gravitational: return "gravitational";
    case Perturbation::electric: return "electric";
    case Perturbation::zeeman: return "zeeman";
    case Perturbation::thermal_gradient: return "thermal_gradient";
  }
  return "?";
}

Perturbation parse_perturbation(const std::string& name) {
  for (Perturbation p : {Perturbation::gravitational, Perturbation::electric, Perturbation::zeeman,
                         Perturbation::thermal_gradient}) {
    if (to_string(p) == name) return p;
  }
  throw std::invalid_argument("unknown perturbation '" + name + "'");
}

BlockOperator liouvillian_resolvent_apply(const BlockOperator& H, double delta, const BlockOperator& J) {
  check_delta(delta);
  const Spectrum& s = H.spectrum();
  Matrix jt = to_eigenbasis(s, J.matrix());
  for (Eigen::Index b = 0; b < jt.cols(); ++b) {
    for (Eigen::Index a = 0; a < jt.rows(); ++a) {
      jt(a, b) /= cplx(delta, -(s.values(a) - s.values(b)));
    }
  }
  return BlockOperator(H.spec(), from_eigenbasis(s, jt));
}

BlockOperator liouvillian_shift_apply(const BlockOperator& H, double delta, const BlockOperator& X) {
  return BlockOperator(H.spec(), delta * X.matrix() + I * (X.matrix() * H.matrix() - H.matrix() * X.matrix()));
}

double kubo_coefficient(const BlockOperator& H, double delta, const BlockOperator& Lp_f,
                        const BlockOperator& J) {
  check_delta(delta);
  const Spectrum& s = H.spectrum();
  const Matrix ft = to_eigenbasis(s, Lp_f.matrix());
  const Matrix jt = to_eigenbasis(s, J.matrix());
  cplx total = 0.0;
  for (Eigen::Index b = 0; b < jt.cols(); ++b) {
    for (Eigen::Index a = 0; a < jt.rows(); ++a) {
      // Tr(F R) = Σ F_ba R_ab with R_ab = J_ab / (δ − i(E_a − E_b))
      total += ft(b, a) * jt(a, b) / cplx(delta, -(s.values(a) - s.values(b)));
    }
  }
  return 0.5 * total.real() / H.spec().sites();
}

double kubo_sigma(const BdGModel& m, const KuboConfig& cfg, int direction) {
  if (direction != 1 && direction != 2) throw std::invalid_argument("direction must be 1 or 2");
  const int other = 3 - direction;
  const ChargeAndSpinOps ops = charge_and_spin_ops(m.spec);
  std::optional<Matrix> weight;
  switch (cfg.perturbation) {
    case Perturbation::gravitational:
      break;
    case Perturbation::electric: {
      const double r = charge_residual(m.H);
      if (r > 1e-10) {
        throw PreconditionError("electric perturbation needs charge conservation: ||[H, Q]|| = " + std::to_string(r));
      }
      weight = ops.Q.matrix();
      break;
    }
    case Perturbation::zeeman: {
      const double r = m.spec.fiber_L > 1 ? u1_residual(m.H) : 0.0;
      if (r > 1e-10) {
        throw PreconditionError("Zeeman perturbation needs U(1) spin symmetry: ||[H, S^3]|| = " + std::to_string(r));
      }
      weight = ops.S3.matrix();
      break;
    }
    case Perturbation::thermal_gradient:
      throw std::invalid_argument("thermal responses are computed by kappa_thermal and alpha_thermoelectric");
  }
  const BlockOperator f = fermi_operator(m.H, cfg.beta);
  Matrix lpf = derivation(f, direction).matrix();
  Matrix j = derivation(m.H, other).matrix();
  if (weight) {
    lpf = lpf * *weight;
    j = j * *weight;
  }
  return kubo_coefficient(m.H, cfg.delta, BlockOperator(m.spec, std::move(lpf)), BlockOperator(m.spec, std::move(j)));
}

double sigma_zero_temperature(const FermiProjection& fp) {
  return chern_trace(fp.P).real() / (4.0 * pi);
}

SpinHallResult sigma_spin(const BdGModel& m, double tol) {
  const int L = m.spec.fiber_L;
  if (L < 2) throw PreconditionError("spin Hall conductance needs a spin fiber with L >= 2");
  const double r = u1_residual(m.H);
  if (r > tol) throw PreconditionError("spin Hall conductance needs [H, S^3] = 0; residual " + std::to_string(r));

  SpinHallResult out;
  const std::vector<BlockOperator> sectors = reduce_u1(m);
  for (int l = 1; l <= L; ++l) {
    const double ch = chern_trace(fermi_projection(sectors[static_cast<std::size_t>(l - 1)]).P).real();
    const int w = (L + 1 - 2 * l) * (L + 1 - 2 * l);
    out.sector_chern.push_back(ch);
    out.weights.push_back(w);
    out.sigma += w * ch;
  }
  out.sigma /= 16.0 * pi;

  const FermiProjection fp = fermi_projection(m);
  const Matrix s3 = charge_and_spin_ops(m.spec).S3.matrix();
  const Matrix a1 = derivation(fp.P, 1).matrix() * s3;
  const Matrix a2 = derivation(fp.P, 2).matrix() * s3;
  const Matrix& P = fp.P.matrix();
  const cplx t = (P * (a1 * a2 - a2 * a1)).trace() / static_cast<double>(m.spec.sites());
  out.sigma_direct = (0.5 * I * t).real();

  if (su2_residual(m.H) <= tol) {
    const SU2Reduction red = reduce_su2(m);
    const double ch_red = chern_trace(fermi_projection(red.H_red).P).real();
    out.chern_red = ch_red;
    out.sigma_closed_form = L * (L * L - 1) / (48.0 * pi) * ch_red;
    out.chern_red_even = snap(ch_red) % 2 == 0;
  }
  return out;
}

// -------------------------------------------------------------- grids ----

EnergyGrid EnergyGrid::gauss_legendre(double lo, double hi, int panels) {
  if (!(hi > lo) || panels < 1) throw std::invalid_argument("EnergyGrid: empty interval");
  using rule = boost::math::quadrature::gauss<double, 8>;
  const auto& x = rule::abscissa();
  const auto& w = rule::weights();
  EnergyGrid g;
  g.lo = lo;
  g.hi = hi;
  g.panels = panels;
  const double h = (hi - lo) / panels;
  for (int p = 0; p < panels; ++p) {
    const double c = lo + (p + 0.5) * h;
    for (std::size_t k = x.size(); k-- > 0;) {
      g.points.push_back(c - 0.5 * h * x[k]);
      g.weights.push_back(0.5 * h * w[k]);
    }
    for (std::size_t k = 0; k < x.size(); ++k) {
      g.points.push_back(c + 0.5 * h * x[k]);
      g.weights.push_back(0.5 * h * w[k]);
    }
  }
  return g;
}

EnergyGrid EnergyGrid::for_temperature(double beta, double gap, int points_in_gap, double tail) {
  if (!(beta > 0.0) || std::isinf(beta)) throw PreconditionError("thermal grid needs a finite β > 0");
  if (!(gap > 0.0)) throw PreconditionError("thermal grid needs a positive gap");
  const double cut = tail / beta;
  // 8 nodes per panel; make the panels inside (−gap, gap) carry enough nodes
  const double width = std::min(2.0 * gap * 8.0 / (points_in_gap + 16), 2.0 * cut / 8.0);
  int panels = static_cast<int>(std::ceil(2.0 * cut / width));
  if (panels % 2 == 1) ++panels;
  return gauss_legendre(-cut, cut, panels);
}

int EnergyGrid::points_inside(double a, double b) const {
  return static_cast<int>(std::count_if(points.begin(), points.end(), [&](double e) { return e > a && e < b; }));
}

double EnergyGrid::integrate(const std::function<double(double)>& f) const {
  double s = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) s += weights[k] * f(points[k]);
  return s;
}

double fermi_derivative(double beta, double e) {
  const double c = std::cosh(0.5 * beta * e);
  return -beta / (4.0 * c * c);
}

double kappa_from_profile(double beta, const EnergyGrid& grid, const std::function<double(double)>& chern) {
  return grid.integrate([&](double e) {
    return -0.5 * beta * e * e * fermi_derivative(beta, e) * chern(e) / (2.0 * pi);
  });
}

double alpha_from_profile(double beta, const EnergyGrid& grid, const std::function<double(double)>& chern) {
  return grid.integrate([&](double e) {
    return 0.5 * beta * e * fermi_derivative(beta, e) * chern(e) / (2.0 * pi);
  });
}

double kappa_sommerfeld(double beta, double chern_at_zero) { return pi / 12.0 / beta * chern_at_zero; }

namespace {

ThermalResult thermal_integral(const ChernProfile& profile, double beta, const EnergyGrid& grid,
                               double refine_tol, double floor, bool kappa, double loc_threshold) {
  auto chern = [&](double e) { return profile.chern_at(e); };
  auto eval = [&](const EnergyGrid& g) {
    return kappa ? kappa_from_profile(beta, g, chern) : alpha_from_profile(beta, g, chern);
  };
  ThermalResult r;
  r.value = eval(grid);
  r.refined_value = eval(grid.refined());
  r.refinement_rel = std::abs(r.value - r.refined_value) / std::max(std::abs(r.refined_value), floor);
  r.per_T = kappa ? r.value * beta : r.value;
  const RealVector& e = profile.energies();
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < e.size(); ++k) gap = std::min(gap, std::abs(e(k)));
  r.points_in_gap = grid.points_inside(-gap, gap);
  for (double x : grid.points) {
    const Eigen::Index c = profile.occupation(x);
    if (c > 0 && c < e.size() && !(profile.loc_metric_for_occupation(c) < loc_threshold)) ++r.unreliable_points;
  }
  if (r.refinement_rel > refine_tol) {
    throw PreconditionError("energy grid too coarse: refined quadrature differs by " +
                            std::to_string(100.0 * r.refinement_rel) + "%");
  }
  return r;
}

}  // namespace

ThermalResult kappa_thermal(const ChernProfile& profile, double beta, const EnergyGrid& grid,
                            double refine_tol, double loc_threshold) {
  return thermal_integral(profile, beta, grid, refine_tol, 1e-12, true, loc_threshold);
}

ThermalResult kappa_thermal(const BdGModel& m, double beta, const EnergyGrid& grid) {
  return kappa_thermal(ChernProfile(m.H), beta, grid);
}

ThermalResult alpha_thermoelectric(const ChernProfile& profile, double beta, const EnergyGrid& grid,
                                   double refine_tol) {
  const double r = charge_residual(profile.hamiltonian());
  if (r > 1e-10) {
    throw PreconditionError("thermoelectric coefficient needs charge conservation: ||[H, Q]|| = " + std::to_string(r));
  }
  return thermal_integral(profile, beta, grid, refine_tol, 1e-9, false, default_loc_threshold);
}

ThermalResult alpha_thermoelectric(const BdGModel& m, double beta, const EnergyGrid& grid) {
  return alpha_thermoelectric(ChernProfile(m.H), beta, grid);
}

}  // namespace bdg
