#include "bdglab/currents.hpp"

#include <cmath>
#include <stdexcept>

namespace bdg {

namespace {

struct Bond {
  Eigen::Index other;
  int d[2];
  int k;
};

// All sites n' ≠ n with their bond displacements relative to n.
std::vector<Bond> bonds_of(const LatticeSpec& spec, Eigen::Index site, NyquistPolicy policy,
                           const Matrix* a, long* nyquist_count) {
  const int F = spec.fiber_dim();
  std::vector<Bond> out;
  out.reserve(static_cast<std::size_t>(spec.sites()));
  for (Eigen::Index s = 0; s < spec.sites(); ++s) {
    if (s == site) continue;
    Bond b{s, {0, 0}, 0};
    bool any_nyquist = false;
    for (int j = 1; j <= 2; ++j) {
      bool ny = false;
      b.d[j - 1] = bond_displacement(spec, j, site, s, &ny);
      any_nyquist = any_nyquist || ny;
      if (b.d[j - 1] != 0) ++b.k;
    }
    if (any_nyquist && a) {
      const bool carries = a->block(site * F, s * F, F, F).cwiseAbs().maxCoeff() > 0.0 ||
                           a->block(s * F, site * F, F, F).cwiseAbs().maxCoeff() > 0.0;
      if (carries) {
        if (policy == NyquistPolicy::reject) {
          throw PreconditionError(
              "discrete derivative: a bond sits at half the period (aliased displacement)");
        }
        if (nyquist_count) ++*nyquist_count;
      }
    }
    out.push_back(b);
  }
  return out;
}

Matrix half_square(const Matrix& h) {
  Matrix h2 = 0.5 * h * h;
  return 0.5 * (h2 + h2.adjoint());
}

void check_direction(int j) {
  if (j != 1 && j != 2) throw std::invalid_argument("direction must be 1 or 2");
}

}  // namespace

int bond_displacement(const LatticeSpec& spec, int j, Eigen::Index site_a, Eigen::Index site_b,
                      bool* nyquist) {
  bool ny = false;
  int d = displacement(spec, j, site_a, site_b, &ny);
  if (ny) d = spec.coordinate(j, site_a) > spec.coordinate(j, site_b) ? spec.extent(j) / 2
                                                                       : -spec.extent(j) / 2;
  if (nyquist) *nyquist = ny;
  return d;
}

SiteOperator SiteOperator::zero(const LatticeSpec& spec, Eigen::Index site) {
  const int F = spec.fiber_dim();
  return SiteOperator{spec, site, Matrix::Zero(F, spec.dim()), Matrix::Zero(spec.dim(), F)};
}

Matrix SiteOperator::dense() const {
  const int F = spec.fiber_dim();
  Matrix out = Matrix::Zero(spec.dim(), spec.dim());
  out.middleCols(site * F, F) = cols;
  out.middleRows(site * F, F) += rows;
  return out;
}

Matrix SiteOperator::commutator_with(const Matrix& H) const {
  const int F = spec.fiber_dim();
  const Eigen::Index s0 = site * F;
  // M H = E_n (rows H) + cols H(n, :),  H M = H(:, n) rows + (H cols) E_n^T
  Matrix out = cols * H.middleRows(s0, F) - H.middleCols(s0, F) * rows;
  out.middleRows(s0, F) += rows * H;
  out.middleCols(s0, F) -= H * cols;
  return out;
}

SiteOperator& SiteOperator::operator+=(const SiteOperator& other) {
  if (other.site != site || other.spec != spec) {
    throw std::invalid_argument("SiteOperator: adding operators at different sites");
  }
  rows += other.rows;
  cols += other.cols;
  return *this;
}

SiteOperator local_density(const BlockOperator& a, Eigen::Index site) {
  const LatticeSpec& spec = a.spec();
  const int F = spec.fiber_dim();
  const Eigen::Index s0 = site * F;
  const Matrix& A = a.matrix();
  SiteOperator out = SiteOperator::zero(spec, site);
  out.rows = 0.5 * A.middleRows(s0, F);
  out.rows.middleCols(s0, F) += 0.5 * A.block(s0, s0, F, F);
  out.cols = 0.5 * A.middleCols(s0, F);
  out.cols.middleRows(s0, F).setZero();
  return out;
}

SiteOperator discrete_derivative(const BlockOperator& a, Eigen::Index site, int j,
                                 NyquistPolicy policy) {
  check_direction(j);
  const LatticeSpec& spec = a.spec();
  if (policy == NyquistPolicy::reject && spec.periodic(j) && a.range() &&
      2 * *a.range() >= spec.extent(j)) {
    throw PreconditionError("discrete derivative: operator range " + std::to_string(*a.range()) +
                            " reaches half the period n" + std::to_string(j));
  }
  const int F = spec.fiber_dim();
  const Eigen::Index s0 = site * F;
  const Matrix& A = a.matrix();
  SiteOperator out = SiteOperator::zero(spec, site);
  for (const Bond& b : bonds_of(spec, site, policy, &A, nullptr)) {
    const int d = b.d[j - 1];
    if (d == 0) continue;
    const double c = -1.0 / (b.k * static_cast<double>(d));
    const Eigen::Index t0 = b.other * F;
    out.rows.middleCols(t0, F) = c * A.block(s0, t0, F, F);
    out.cols.middleRows(t0, F) = c * A.block(t0, s0, F, F);
  }
  return out;
}

SiteOperator divergence(const BlockOperator& b1, const BlockOperator& b2, Eigen::Index site,
                        NyquistPolicy policy) {
  SiteOperator out = discrete_derivative(b1, site, 1, policy);
  out += discrete_derivative(b2, site, 2, policy);
  return out;
}

LocalDensityField::LocalDensityField(BlockOperator base, NyquistPolicy policy)
    : base_(std::move(base)), policy_(policy) {}

Matrix LocalDensityField::sum() const {
  Matrix out = Matrix::Zero(base_.dim(), base_.dim());
  for (Eigen::Index s = 0; s < base_.spec().sites(); ++s) out += density(s).dense();
  return out;
}

BlockOperator velocity(const BlockOperator& H, int j, NyquistPolicy policy) {
  check_direction(j);
  const LatticeSpec& spec = H.spec();
  if (policy == NyquistPolicy::reject) return derivation(H, j);
  const int F = spec.fiber_dim();
  Matrix v = H.matrix();
  for (Eigen::Index sb = 0; sb < spec.sites(); ++sb) {
    for (Eigen::Index sa = 0; sa < spec.sites(); ++sa) {
      const int d = bond_displacement(spec, j, sa, sb);
      v.block(sa * F, sb * F, F, F) *= -I * static_cast<double>(d);
    }
  }
  return BlockOperator(spec, std::move(v), false, H.range());
}

std::string to_string(Conserved c) {
  switch (c) {
    case Conserved::matter: return "matter";
    case Conserved::charge: return "charge";
    case Conserved::spin: return "spin";
    case Conserved::energy: return "energy";
  }
  return "?";
}

Conserved parse_conserved(const std::string& name) {
  for (Conserved c : {Conserved::matter, Conserved::charge, Conserved::spin, Conserved::energy}) {
    if (to_string(c) == name) return c;
  }
  throw std::invalid_argument("unknown conserved quantity '" + name + "'");
}

ContinuityReport continuity_residual(const BlockOperator& H, Conserved which, NyquistPolicy policy) {
  const LatticeSpec& spec = H.spec();
  const ChargeAndSpinOps ops = charge_and_spin_ops(spec);
  ContinuityReport report;
  report.which = which;

  BlockOperator density_base = BlockOperator::identity(spec);
  BlockOperator generator = H;
  std::optional<BlockOperator> weight;
  switch (which) {
    case Conserved::matter:
      break;
    case Conserved::charge:
      density_base = ops.Q;
      weight = ops.Q;
      break;
    case Conserved::spin:
      density_base = ops.S3;
      weight = ops.S3;
      break;
    case Conserved::energy:
      density_base = H;
      generator = BlockOperator(spec, half_square(H.matrix()), true,
                                H.range() ? std::optional<int>(2 * *H.range()) : std::nullopt);
      break;
  }
  if (weight) {
    report.obstruction = max_abs(commutator(H, *weight).matrix());
    report.obstructed = report.obstruction > 1e-10;
  }

  std::array<BlockOperator, 2> current;
  for (int j = 1; j <= 2; ++j) {
    BlockOperator v = velocity(generator, j, policy);
    current[j - 1] = weight ? (*weight) * v : v;
  }

  for (Eigen::Index s = 0; s < spec.sites(); ++s) {
    bonds_of(spec, s, policy, &generator.matrix(), &report.nyquist_bonds);
    const SiteOperator rho = local_density(density_base, s);
    Matrix r = -I * rho.commutator_with(H.matrix());
    r += divergence(current[0], current[1], s, policy).dense();
    report.residual = std::max(report.residual, max_abs(r));
  }
  return report;
}

ContinuityReport continuity_residual(const BdGModel& m, Conserved which, NyquistPolicy policy) {
  return continuity_residual(m.H, which, policy);
}

CurrentOps current_operators(const BdGModel& m, double tol) {
  const LatticeSpec& spec = m.spec;
  const ChargeAndSpinOps ops = charge_and_spin_ops(spec);
  CurrentOps out;
  for (int j = 1; j <= 2; ++j) {
    Matrix v = derivation(m.H, j).matrix();
    out.J_matter[j - 1] = BlockOperator(spec, std::move(v), true, m.H.range());
  }
  auto weighted = [&](const BlockOperator& w) {
    std::array<BlockOperator, 2> r;
    for (int j = 0; j < 2; ++j) {
      r[j] = BlockOperator(spec, out.J_matter[j].matrix() * w.matrix(), true, m.H.range());
    }
    return r;
  };
  if (max_abs(commutator(m.H, ops.Q).matrix()) <= tol) out.J_Q = weighted(ops.Q);
  if (max_abs(commutator(m.H, ops.S3).matrix()) <= tol) out.J_S3 = weighted(ops.S3);

  const std::optional<int> r2 = m.H.range() ? std::optional<int>(2 * *m.H.range()) : std::nullopt;
  bool aliased = !r2.has_value();
  for (int j = 1; j <= 2 && !aliased; ++j) {
    if (spec.periodic(j) && 2 * *r2 >= spec.extent(j)) aliased = true;
  }
  if (!aliased) {
    const BlockOperator half_h2(spec, half_square(m.H.matrix()), true, r2);
    std::array<BlockOperator, 2> jh;
    for (int j = 1; j <= 2; ++j) {
      jh[j - 1] = BlockOperator(spec, derivation(half_h2, j).matrix(), true, r2);
    }
    out.J_H = jh;
  }
  return out;
}

cplx equilibrium_current(const BdGModel& m, double beta, int j) {
  const BlockOperator f = spectral_function(m.H, [beta](double e) { return fermi(beta, e); });
  return trace_per_volume(f * derivation(m.H, j));
}

}  // namespace bdg
