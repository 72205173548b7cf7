#include "bdglab/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace bdg {

namespace {

using RealFn = std::function<double(double)>;

int wrap_coordinate(int x, int n) { return ((x % n) + n) % n; }

int min_image(int d, int n) {
  d = wrap_coordinate(d, n);
  return d > n / 2 ? d - n : d;
}

// Largest |d₁| carried by a nonzero site block.
int direction1_range(const Matrix& a, const LatticeSpec& spec) {
  const int F = static_cast<int>(a.rows() / spec.sites());
  int r = 0;
  for (Eigen::Index t = 0; t < spec.sites(); ++t) {
    for (Eigen::Index s = 0; s < spec.sites(); ++s) {
      const int d = std::abs(min_image(spec.x1_of(s) - spec.x1_of(t), spec.n1));
      if (d <= r) continue;
      if (a.block(s * F, t * F, F, F).cwiseAbs().maxCoeff() > 0.0) r = d;
    }
  }
  return r;
}

/// One Bloch cell of the periodic half-space: `cell` columns of the cylinder,
/// with H(θ) = Σ_D H_D e^{−iθD} and ∇₁H(θ) = Σ_D (−i d ∘ H_D) e^{−iθD}, where
/// H_D couples a site of cell D to the cell at the origin and d is the true
/// direction-1 displacement. Local index (x₂ · cell + x₁) · F + f.
struct BlochCell {
  int cell = 1;
  int rows = 0;
  Eigen::Index fiber = 0;
  std::vector<int> shifts;
  std::vector<Matrix> hop;
  std::vector<Matrix> grad;

  BlochCell(const BlockOperator& op, int c, int range1) : cell(c) {
    const LatticeSpec& spec = op.spec();
    fiber = op.dim() / spec.sites();
    rows = spec.n2;
    const Eigen::Index n = static_cast<Eigen::Index>(rows) * c * fiber;
    const int dmax = (range1 + c - 1) / c;
    for (int D = -dmax; D <= dmax; ++D) {
      Matrix h = Matrix::Zero(n, n);
      Matrix g = Matrix::Zero(n, n);
      bool any = false;
      for (int x2 = 0; x2 < rows; ++x2) {
        for (int x1 = 0; x1 < c; ++x1) {
          for (int y2 = 0; y2 < rows; ++y2) {
            for (int y1 = 0; y1 < c; ++y1) {
              const int d = x1 + c * D - y1;
              if (std::abs(d) > range1) continue;
              const Eigen::Index s = spec.site_index(wrap_coordinate(x1 + c * D, spec.n1), x2);
              const Eigen::Index t = spec.site_index(y1, y2);
              const auto block = op.matrix().block(s * fiber, t * fiber, fiber, fiber);
              const Eigen::Index r0 = (static_cast<Eigen::Index>(x2) * c + x1) * fiber;
              const Eigen::Index c0 = (static_cast<Eigen::Index>(y2) * c + y1) * fiber;
              h.block(r0, c0, fiber, fiber) = block;
              g.block(r0, c0, fiber, fiber) = cplx(0.0, -static_cast<double>(d)) * block;
              any = true;
            }
          }
        }
      }
      if (!any) continue;
      shifts.push_back(D);
      hop.push_back(std::move(h));
      grad.push_back(std::move(g));
    }
  }

  Eigen::Index dim() const { return hop.front().rows(); }

  Matrix at(double theta) const { return sum(hop, theta); }
  Matrix nabla(double theta) const { return sum(grad, theta); }

  /// Local index → index on a ring of `copies` cells, for cell number j.
  std::vector<Eigen::Index> ring_indices(int j, int copies) const {
    std::vector<Eigen::Index> out(static_cast<std::size_t>(dim()));
    const Eigen::Index n1 = static_cast<Eigen::Index>(cell) * copies;
    for (int x2 = 0; x2 < rows; ++x2) {
      for (int x1 = 0; x1 < cell; ++x1) {
        for (Eigen::Index f = 0; f < fiber; ++f) {
          const Eigen::Index local = (static_cast<Eigen::Index>(x2) * cell + x1) * fiber + f;
          out[static_cast<std::size_t>(local)] = (x2 * n1 + static_cast<Eigen::Index>(j) * cell + x1) * fiber + f;
        }
      }
    }
    return out;
  }

 private:
  Matrix sum(const std::vector<Matrix>& parts, double theta) const {
    Matrix m = Matrix::Zero(dim(), dim());
    for (std::size_t i = 0; i < parts.size(); ++i) m += std::exp(cplx(0.0, -theta * shifts[i])) * parts[i];
    return m;
  }
};

double bloch_phase(int i, int phases) { return 2.0 * pi * (i + 0.5) / phases; }

BlochCell cell_of(const HalfSpaceModel& hs, const BlockOperator& op) { return BlochCell(op, hs.cell, hs.range1); }

/// Per-row x₂ values of (1/cell)(1/P) Σ_θ Σ_{x₁} Re tr[(f(H) W ∇₁H W′)(θ)(x, x)],
/// with W, W′ optional fiber matrices.
std::vector<double> row_traces(const BlochCell& cell, int phases, const RealFn& f, const Matrix* fiber_weight,
                               const Matrix* right_weight = nullptr) {
  std::vector<double> rows(static_cast<std::size_t>(cell.rows), 0.0);
  const Eigen::Index per_row = cell.cell * cell.fiber;
  for (int i = 0; i < phases; ++i) {
    const double theta = bloch_phase(i, phases);
    const EighResult e = eigh(cell.at(theta));
    Matrix b = cell.nabla(theta);
    if (fiber_weight) b = apply_fiber_left(*fiber_weight, b);
    if (right_weight) b = apply_fiber_right(b, *right_weight);
    RealVector fe(e.values.size());
    for (Eigen::Index a = 0; a < fe.size(); ++a) fe(a) = f(e.values(a));
    const Matrix A = e.vectors * fe.asDiagonal() * e.vectors.adjoint();
    const Eigen::VectorXcd diag = (A.array() * b.transpose().array()).rowwise().sum();
    for (int x2 = 0; x2 < cell.rows; ++x2) rows[static_cast<std::size_t>(x2)] += diag.segment(x2 * per_row, per_row).sum().real();
  }
  for (double& r : rows) r /= static_cast<double>(phases) * cell.cell;
  return rows;
}

std::vector<double> row_traces(const HalfSpaceModel& hs, const BlockOperator& op, int phases, const RealFn& f,
                               const Matrix* fiber_weight, const Matrix* right_weight = nullptr) {
  return row_traces(cell_of(hs, op), phases, f, fiber_weight, right_weight);
}

double sum_rows(const std::vector<double>& rows, int depth) {
  double t = 0.0;
  for (int x2 = 0; x2 < depth; ++x2) t += rows[static_cast<std::size_t>(x2)];
  return t;
}

void require_window_in_gap(const HalfSpaceModel& hs, double support) {
  if (!(support < hs.bulk_gap)) {
    throw PreconditionError("window support |E| < " + std::to_string(support) +
                            " reaches the bulk bands (bulk gap " + std::to_string(hs.bulk_gap) + ")");
  }
}

double bulk_gap_of(const BdGModel& bulk) {
  const LatticeSpec& spec = bulk.spec;
  const int r = bulk.H.range().value_or(spec.n1);
  const bool bloch = 2 * r < spec.n1 && 2 * r < spec.n2 && translation_residual(bulk.H, 1) <= 1e-12 &&
                     translation_residual(bulk.H, 2) <= 1e-12;
  if (!bloch) return bulk.H.spectrum().values.cwiseAbs().minCoeff();
  const int F = spec.fiber_dim();
  const Eigen::Index origin = spec.site_index(0, 0);
  struct Hop {
    int d1, d2;
    Matrix block;
  };
  std::vector<Hop> hops;
  for (int d2 = -r; d2 <= r; ++d2) {
    for (int d1 = -r; d1 <= r; ++d1) {
      const Eigen::Index s = spec.site_index(wrap_coordinate(d1, spec.n1), wrap_coordinate(d2, spec.n2));
      hops.push_back({d1, d2, bulk.H.matrix().block(s * F, origin * F, F, F)});
    }
  }
  const int nk = 96;
  double gap = std::numeric_limits<double>::infinity();
  for (int a = 0; a < nk; ++a) {
    for (int b = 0; b < nk; ++b) {
      const double k1 = 2.0 * pi * a / nk, k2 = 2.0 * pi * b / nk;
      Matrix h = Matrix::Zero(F, F);
      for (const Hop& hop : hops) h += std::exp(cplx(0.0, -(k1 * hop.d1 + k2 * hop.d2))) * hop.block;
      gap = std::min(gap, eigvalsh(h).cwiseAbs().minCoeff());
    }
  }
  return gap;
}

Vector window_phase(const RealVector& e, const EdgeWindow& w) {
  Vector u(e.size());
  for (Eigen::Index a = 0; a < e.size(); ++a) u(a) = std::exp(cplx(0.0, -2.0 * pi * w.G(e(a))));
  return u;
}

}  // namespace

double translation_residual(const BlockOperator& a, int j) {
  const LatticeSpec& spec = a.spec();
  if (!spec.periodic(j)) throw PreconditionError("translation along an open direction");
  const Eigen::Index F = a.dim() / spec.sites();
  std::vector<Eigen::Index> moved(static_cast<std::size_t>(a.dim()));
  for (Eigen::Index site = 0; site < spec.sites(); ++site) {
    const int x1 = spec.x1_of(site) + (j == 1 ? 1 : 0);
    const int x2 = spec.x2_of(site) + (j == 2 ? 1 : 0);
    const Eigen::Index target = spec.site_index(wrap_coordinate(x1, spec.n1), wrap_coordinate(x2, spec.n2));
    for (Eigen::Index f = 0; f < F; ++f) moved[static_cast<std::size_t>(site * F + f)] = target * F + f;
  }
  const Matrix& m = a.matrix();
  double r = 0.0;
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    const Eigen::Index mc = moved[static_cast<std::size_t>(c)];
    for (Eigen::Index row = 0; row < m.rows(); ++row) {
      r = std::max(r, std::abs(m(moved[static_cast<std::size_t>(row)], mc) - m(row, c)));
    }
  }
  return r;
}

HalfSpaceModel build_half_space(const BdGModel& bulk, int width, const HalfSpaceOptions& opts) {
  const LatticeSpec& spec = bulk.spec;
  if (spec.geometry != Geometry::torus) throw PreconditionError("build_half_space needs the bulk model on a torus");
  if (width < 8) throw PreconditionError("cylinder width below 8: the two edges would tunnel into each other");
  const int range2 = bulk.H.range().value_or(spec.n2);
  if (spec.n2 < width + range2) {
    throw PreconditionError("bulk torus too short: n2 = " + std::to_string(spec.n2) + " < width + range = " +
                            std::to_string(width + range2));
  }
  if (opts.k_resolution < 1) throw std::invalid_argument("k_resolution must be positive");

  HalfSpaceModel hs;
  hs.bulk = bulk;
  hs.width = width;
  hs.depth = opts.depth.value_or(width / 2);
  if (hs.depth < 1 || hs.depth > width) throw std::invalid_argument("boundary trace depth outside [1, width]");

  const LatticeSpec cyl = spec.as_cylinder(width);
  const Eigen::Index n = cyl.with_fiber(cyl.fiber_L, false).dim();
  const Matrix h = bulk.h.matrix().topLeftCorner(n, n);
  const Matrix d = bulk.Delta.matrix().topLeftCorner(n, n);
  hs.edge = model_from_blocks(cyl, h, d, bulk.mu, bulk.H.range());
  hs.edge.pairing = bulk.pairing;
  hs.edge.kinetic = bulk.kinetic;

  hs.range1 = direction1_range(hs.edge.H.matrix(), cyl);
  if (2 * hs.range1 >= spec.n1) throw PreconditionError("hopping range too long for the circumference");
  hs.translation_invariant = translation_residual(hs.edge.H, 1) <= 1e-12;
  hs.cell = hs.translation_invariant ? 1 : spec.n1;
  hs.phases = std::max(1, (opts.k_resolution + hs.cell - 1) / hs.cell);

  hs.bulk_gap = opts.bulk_gap ? *opts.bulk_gap : bulk_gap_of(bulk);
  if (!(hs.bulk_gap > 1e-8)) throw PreconditionError("bulk is gapless; edge analysis needs a bulk gap");
  return hs;
}

cplx boundary_trace(const HalfSpaceModel& hs, const BlockOperator& a) {
  const LatticeSpec& spec = a.spec();
  const Eigen::Index F = a.dim() / spec.sites();
  cplx t = 0.0;
  for (Eigen::Index site = 0; site < spec.sites(); ++site) {
    if (spec.x2_of(site) < hs.depth) t += a.matrix().block(site * F, site * F, F, F).trace();
  }
  return t / static_cast<double>(spec.n1);
}

EdgeBands edge_band_structure(const HalfSpaceModel& hs, int nk) {
  if (hs.cell != 1) throw PreconditionError("edge band structure needs translation invariance along direction 1");
  const BlochCell cell = cell_of(hs, hs.H_hat());
  const Eigen::Index F = cell.fiber;
  const int lower_rows = hs.width / 2;
  EdgeBands out;
  std::vector<Matrix> vectors;
  out.min_abs_energy = std::numeric_limits<double>::infinity();
  for (int i = 0; i < nk; ++i) {
    const double k = bloch_phase(i, nk);
    EighResult e = eigh(cell.at(k));
    RealVector w(e.values.size());
    for (Eigen::Index a = 0; a < w.size(); ++a) w(a) = e.vectors.col(a).head(lower_rows * F).squaredNorm();
    for (Eigen::Index a = 0; a < e.values.size(); ++a) {
      if (std::abs(e.values(a)) < hs.bulk_gap) ++out.in_gap_states;
    }
    out.min_abs_energy = std::min(out.min_abs_energy, e.values.cwiseAbs().minCoeff());
    out.k.push_back(k);
    out.energies.push_back(e.values);
    out.lower_weight.push_back(std::move(w));
    vectors.push_back(std::move(e.vectors));
  }
  // follow each state near E = 0 to the next k by maximal overlap
  for (int i = 0; i < nk; ++i) {
    const auto cur = static_cast<std::size_t>(i);
    const auto next = static_cast<std::size_t>((i + 1) % nk);
    const RealVector& e0 = out.energies[cur];
    const RealVector& e1 = out.energies[next];
    for (Eigen::Index a = 0; a < e0.size(); ++a) {
      if (std::abs(e0(a)) >= 0.5 * hs.bulk_gap) continue;
      const Eigen::VectorXd overlap = (vectors[next].adjoint() * vectors[cur].col(a)).cwiseAbs();
      Eigen::Index b = 0;
      overlap.maxCoeff(&b);
      if ((e0(a) < 0.0) == (e1(b) < 0.0)) continue;
      ZeroCrossing c;
      c.k = out.k[cur] + pi / nk;
      c.edge = out.lower_weight[cur](a) > 0.5 ? 0 : 1;
      c.direction = e1(b) > e0(a) ? 1 : -1;
      (c.edge == 0 ? out.chirality_lower : out.chirality_upper) += c.direction;
      out.crossings.push_back(c);
    }
  }
  return out;
}

std::vector<double> edge_current_profile(const HalfSpaceModel& hs, const EdgeWindow& w) {
  require_window_in_gap(hs, w.half_width());
  std::vector<double> rows = row_traces(hs, hs.H_hat(), hs.phases, [&](double e) { return w.g(e); }, nullptr);
  for (double& r : rows) r *= -0.5;
  return rows;
}

double edge_current(const HalfSpaceModel& hs, const EdgeWindow& w) {
  return sum_rows(edge_current_profile(hs, w), hs.depth);
}

double edge_current_indicator(const HalfSpaceModel& hs, double a) {
  require_window_in_gap(hs, a);
  auto chi = [a](double e) { return std::abs(e) <= a ? 1.0 : 0.0; };
  return -0.5 * sum_rows(row_traces(hs, hs.H_hat(), hs.phases, chi, nullptr), hs.depth);
}

double charge_edge_current(const HalfSpaceModel& hs, const EdgeWindow& w) {
  require_window_in_gap(hs, w.half_width());
  const double r = charge_residual(hs.H_hat());
  if (r > 1e-10) throw PreconditionError("charge edge current needs [Ĥ, Q] = 0; residual " + std::to_string(r));
  const LatticeSpec& spec = hs.edge.spec;
  const Matrix q = charge_and_spin_ops(spec).Q.matrix().topLeftCorner(spec.fiber_dim(), spec.fiber_dim());
  return -0.5 * sum_rows(row_traces(hs, hs.H_hat(), hs.phases, [&](double e) { return w.g(e); }, &q, &q),
                         hs.depth);
}

WindingResult winding_number(const HalfSpaceModel& hs, const EdgeWindow& w) {
  require_window_in_gap(hs, w.half_width());
  const BlochCell cell = cell_of(hs, hs.H_hat());
  const Eigen::Index rows = static_cast<Eigen::Index>(hs.depth) * cell.cell * cell.fiber;
  cplx t = 0.0;
  for (int i = 0; i < hs.phases; ++i) {
    const double theta = bloch_phase(i, hs.phases);
    const EighResult e = eigh(cell.at(theta));
    const Vector u = window_phase(e.values, w);
    // ∇₁Û in the eigenbasis: divided differences of u times (∇₁Ĥ)_ab
    Matrix y = e.vectors.adjoint() * cell.nabla(theta) * e.vectors;
    for (Eigen::Index b = 0; b < y.cols(); ++b) {
      for (Eigen::Index a = 0; a < y.rows(); ++a) {
        const double de = e.values(a) - e.values(b);
        const cplx dd = std::abs(de) > 1e-9 ? (u(a) - u(b)) / de
                                            : cplx(0.0, -2.0 * pi * w.g(0.5 * (e.values(a) + e.values(b)))) * u(a);
        y(a, b) *= dd;
      }
    }
    const Matrix m = e.vectors.topRows(rows).adjoint() * e.vectors.topRows(rows);
    Vector ubar = u.conjugate();
    ubar.array() -= 1.0;
    t += (m * ubar.asDiagonal() * y).trace();
  }
  t /= static_cast<double>(hs.phases) * cell.cell;
  WindingResult r;
  r.literal = (I * t).real();
  r.value = -r.literal;
  r.integer_snap = snap(r.value);
  r.deviation = std::abs(r.value - r.integer_snap);
  r.current = r.value / (4.0 * pi);
  return r;
}

ChernResult quarter_plane_index(const HalfSpaceModel& hs, const EdgeWindow& w, const IndexOptions& opts,
                                int circumference) {
  require_window_in_gap(hs, w.half_width());
  const BlochCell cell = cell_of(hs, hs.H_hat());
  const int copies = std::max(2, (circumference + cell.cell - 1) / cell.cell);
  const int n1 = copies * cell.cell;
  const Eigen::Index F = cell.fiber;
  const Eigen::Index dim = cell.dim() * copies;
  Matrix ring = Matrix::Zero(dim, dim);
  for (int j = 0; j < copies; ++j) {
    const std::vector<Eigen::Index> cols = cell.ring_indices(j, copies);
    for (std::size_t s = 0; s < cell.shifts.size(); ++s) {
      const int target = wrap_coordinate(j + cell.shifts[s], copies);
      ring(cell.ring_indices(target, copies), cols) += cell.hop[s];
    }
  }
  // Û* − 1 vanishes outside the support of g
  const EighResult e = eigh_in_interval(ring, -w.half_width(), w.half_width());
  Vector u = window_phase(e.values, w).conjugate();
  u.array() -= 1.0;

  // Π Û* Π acts as the identity off the region, so only its block on the region is decomposed.
  const int sites = n1 * cell.rows;
  std::vector<Eigen::Index> region;
  std::vector<Eigen::Index> region_sites;
  for (Eigen::Index site = 0; site < sites; ++site) {
    if (site % n1 >= n1 / 2) continue;
    region_sites.push_back(site);
    for (Eigen::Index f = 0; f < F; ++f) region.push_back(site * F + f);
  }
  const Matrix vr = e.vectors(region, Eigen::all);
  Matrix t = vr * u.asDiagonal() * vr.adjoint();
  t.diagonal().array() += 1.0;
  const SvdResult sv = svd(t);

  const double radius = opts.mask_radius > 0.0 ? opts.mask_radius : n1 / 4.0;
  std::vector<Eigen::Index> near;
  for (std::size_t k = 0; k < region_sites.size(); ++k) {
    const Eigen::Index site = region_sites[k];
    const double x = static_cast<double>(site % n1) + 0.5;
    if (x <= radius && site / n1 < hs.depth) near.push_back(static_cast<Eigen::Index>(k));
  }
  auto weight_near = [&](const auto& v) {
    double t = 0.0;
    for (Eigen::Index k : near) t += v.segment(k * F, F).squaredNorm();
    return t;
  };

  ChernResult r;
  r.method = ChernMethod::fredholm_index;
  double closest = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < sv.singular_values.size(); ++k) {
    const double sigma = sv.singular_values(k);
    closest = std::min(closest, std::abs(sigma - opts.threshold));
    if (sigma >= opts.threshold) continue;
    r.value += weight_near(sv.v.col(k)) - weight_near(sv.u.col(k));
  }
  r.min_singular_gap = closest;
  r.integer_snap = snap(r.value);
  r.deviation = std::abs(r.value - r.integer_snap);
  if (closest < opts.band) {
    r.reliable = false;
    r.note = "singular value within the reliability band of the threshold";
  }
  return r;
}

SpinEdgeResult spin_edge_current(const HalfSpaceModel& hs, const EdgeWindow& w, double tol) {
  require_window_in_gap(hs, w.half_width());
  const int L = hs.edge.spec.fiber_L;
  if (L < 2) throw PreconditionError("spin edge current needs a spin fiber with L >= 2");
  const double res = u1_residual(hs.H_hat());
  if (res > tol) throw PreconditionError("spin edge current needs [Ĥ, S^3] = 0; residual " + std::to_string(res));

  auto g = [&](double e) { return w.g(e); };
  const LatticeSpec& spec = hs.edge.spec;
  const Matrix s3 = charge_and_spin_ops(spec).S3.matrix().topLeftCorner(spec.fiber_dim(), spec.fiber_dim());
  const Matrix s3sq = s3 * s3;
  SpinEdgeResult out;
  out.total = -0.5 * sum_rows(row_traces(hs, hs.H_hat(), hs.phases, g, &s3sq), hs.depth);
  const std::vector<BlockOperator> sectors = reduce_u1(hs.edge);
  for (int l = 1; l <= L; ++l) {
    const BlockOperator& block = sectors[static_cast<std::size_t>(l - 1)];
    const double j = -0.5 * sum_rows(row_traces(hs, block, hs.phases, g, nullptr), hs.depth);
    const double m = 0.5 * (L + 1 - 2 * l);
    out.sector_current.push_back(j);
    out.sector_weight.push_back(m * m);
    out.sector_sum += m * m * j;
  }
  return out;
}

ThermalEdgeResult thermal_edge_current(const HalfSpaceModel& hs, double beta, const ThermalEdgeOptions& opts) {
  if (!(beta > 0.0) || std::isinf(beta)) throw PreconditionError("thermal edge current needs a finite β > 0");
  if (1.0 / beta > hs.bulk_gap / 10.0) {
    throw PreconditionError("temperature " + std::to_string(1.0 / beta) + " above gap/10 = " +
                            std::to_string(hs.bulk_gap / 10.0));
  }
  if (!(opts.inner < opts.outer && opts.outer < 1.0)) throw std::invalid_argument("cutoff must satisfy inner < outer < 1");
  const SmoothCutoff rho{opts.inner * hs.bulk_gap, opts.outer * hs.bulk_gap};
  const BlochCell cell = cell_of(hs, hs.H_hat());
  const int phases = std::max(1, (opts.k_resolution + hs.cell - 1) / hs.cell);
  auto current = [&](double b) {
    const ThermalWindow tw{b, rho};
    return -0.5 * sum_rows(row_traces(cell, phases, [&](double e) { return tw.g(e); }, nullptr), hs.depth);
  };
  ThermalEdgeResult r;
  const double T = 1.0 / beta;
  r.j_H = current(beta);
  r.j_H_over_T2 = r.j_H / (T * T);
  const double h = opts.rel_step * T;
  r.kappa_hat = (current(1.0 / (T + h)) - current(1.0 / (T - h))) / (2.0 * h);
  r.kappa_hat_over_T = r.kappa_hat / T;
  r.window_integral = ThermalWindow{beta, rho}.integral();
  return r;
}

double thermoelectric_edge_check(const HalfSpaceModel& hs, double delta, double mu_prime) {
  const double res = charge_residual(hs.H_hat());
  if (res > 1e-10) throw PreconditionError("thermoelectric edge check needs charge conservation; residual " + std::to_string(res));
  if (!(delta > 0.0) || delta >= hs.bulk_gap) throw PreconditionError("offsets μ ± δ must lie inside the bulk gap");
  const EdgeWindow w = EdgeWindow::bump(delta);
  auto f = [&](double e) { return 2.0 * delta * w.g(e) * (e - mu_prime); };
  return -sum_rows(row_traces(hs, hs.edge.h, hs.phases, f, nullptr), hs.depth);
}

}  // namespace bdg
