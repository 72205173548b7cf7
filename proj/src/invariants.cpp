#include "bdglab/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace bdg {

namespace {

void require_torus(const LatticeSpec& spec, const char* what) {
  if (spec.geometry != Geometry::torus) {
    throw PreconditionError(std::string(what) + " needs a torus; use the boundary module on a cylinder");
  }
}

// Tr(A B) without forming the product.
cplx trace_of_product(const Matrix& a, const Matrix& b) {
  return (a.array() * b.transpose().array()).sum();
}

BlockOperator projection_from(const BlockOperator& H, Eigen::Index count) {
  const Spectrum& s = H.spectrum();
  const auto occ = s.vectors.leftCols(count);
  Matrix p = occ * occ.adjoint();
  return BlockOperator(H.spec(), std::move(p), true);
}

void fill_snap(ChernResult& r) {
  r.integer_snap = snap(r.value);
  r.deviation = std::abs(r.value - r.integer_snap);
}

cplx chern_trace_ordered(const BlockOperator& P, int first, int second) {
  require_torus(P.spec(), "Chern number");
  const Matrix d1 = derivation(P, first).matrix();
  const Matrix d2 = derivation(P, second).matrix();
  const Matrix a = P.matrix() * d1;
  const Matrix b = P.matrix() * d2;
  const cplx t = trace_of_product(a, d2) - trace_of_product(b, d1);
  return 2.0 * pi * I * t / static_cast<double>(P.spec().sites());
}

}  // namespace

int snap(double x) { return static_cast<int>(std::lround(x)); }

std::string to_string(ChernMethod m) {
  return m == ChernMethod::realspace_trace ? "realspace_trace" : "fredholm_index";
}

double localization_metric(const BlockOperator& P) {
  const LatticeSpec& spec = P.spec();
  require_torus(spec, "localization metric");
  const int F = spec.fiber_dim();
  double total = 0.0;
  for (Eigen::Index sb = 0; sb < spec.sites(); ++sb) {
    for (Eigen::Index sa = 0; sa < spec.sites(); ++sa) {
      const int d1 = displacement(spec, 1, sa, sb);
      const int d2 = displacement(spec, 2, sa, sb);
      const double w = static_cast<double>(d1 * d1 + d2 * d2);
      if (w == 0.0) continue;
      total += w * P.matrix().block(sa * F, sb * F, F, F).squaredNorm();
    }
  }
  return total / spec.sites();
}

FermiProjection fermi_projection(const BlockOperator& H, double mu_ref, double zero_tol) {
  if (!H.hermitian()) throw PreconditionError("fermi_projection: Hamiltonian is not flagged hermitian");
  const Spectrum& s = H.spectrum();
  std::vector<double> offending;
  double gap = std::numeric_limits<double>::infinity();
  Eigen::Index count = 0;
  for (Eigen::Index k = 0; k < s.values.size(); ++k) {
    const double e = s.values(k);
    gap = std::min(gap, std::abs(e));
    if (std::abs(e) < zero_tol) offending.push_back(e);
    if (e <= 0.0) ++count;
  }
  if (!offending.empty()) {
    std::ostringstream os;
    os << "fermi_projection: eigenvalue(s) at E = 0 make the Fermi projection ambiguous:";
    for (double e : offending) os << ' ' << e;
    throw PreconditionError(os.str());
  }
  FermiProjection fp;
  fp.H = H;
  fp.P = projection_from(H, count);
  fp.mu_ref = mu_ref;
  fp.gap = gap;
  fp.loc_metric = H.spec().geometry == Geometry::torus ? localization_metric(fp.P)
                                                       : std::numeric_limits<double>::quiet_NaN();
  return fp;
}

FermiProjection fermi_projection(const BdGModel& m, double zero_tol) {
  return fermi_projection(m.H, m.mu, zero_tol);
}

cplx chern_trace(const BlockOperator& P) { return chern_trace_ordered(P, 1, 2); }

cplx chern_trace_swapped(const BlockOperator& P) { return chern_trace_ordered(P, 2, 1); }

ChernResult chern_realspace(const FermiProjection& fp, double loc_threshold) {
  const cplx c = chern_trace(fp.P);
  ChernResult r;
  r.method = ChernMethod::realspace_trace;
  r.value = c.real();
  r.imaginary_residue = std::abs(c.imag());
  fill_snap(r);
  if (!(fp.loc_metric < loc_threshold)) {
    r.reliable = false;
    r.note = "localization metric above threshold";
  }
  return r;
}

ChernResult chern_realspace(const std::function<BdGModel(const LatticeSpec&)>& factory,
                            const LatticeSpec& spec, int shrink, double loc_threshold) {
  ChernResult r = chern_realspace(fermi_projection(factory(spec)), loc_threshold);
  const LatticeSpec small = spec.with_size(spec.n1 - shrink, spec.n2 - shrink);
  const ChernResult s = chern_realspace(fermi_projection(factory(small)), loc_threshold);
  r.finite_size_error = std::abs(r.value - s.value);
  return r;
}

Vector dirac_phase(const LatticeSpec& spec, std::pair<double, double> offset) {
  if (!(offset.first > 0.0 && offset.first < 1.0 && offset.second > 0.0 && offset.second < 1.0)) {
    throw PreconditionError("dirac_phase: origin offsets must lie in (0, 1)");
  }
  const int F = spec.fiber_dim();
  Vector f(spec.dim());
  auto wrap = [](double x, int n) { return x - n * std::round(x / n); };
  for (Eigen::Index s = 0; s < spec.sites(); ++s) {
    const double r1 = wrap(spec.x1_of(s) - offset.first, spec.n1);
    const double r2 = wrap(spec.x2_of(s) - offset.second, spec.n2);
    const cplx z = cplx(r1, r2) / std::hypot(r1, r2);
    f.segment(s * F, F).setConstant(z);
  }
  return f;
}

ChernResult chern_index(const FermiProjection& fp, const IndexOptions& opts) {
  const LatticeSpec& spec = fp.P.spec();
  require_torus(spec, "chern_index");
  const Vector f = dirac_phase(spec, opts.origin_offset);
  const Matrix& P = fp.P.matrix();
  const Matrix fp_right = f.asDiagonal() * P;
  Matrix T = P * fp_right - P;
  T.diagonal().array() += 1.0;
  const SvdResult sv = svd(T);

  const double radius = opts.mask_radius > 0.0 ? opts.mask_radius : std::min(spec.n1, spec.n2) / 4.0;
  const int F = spec.fiber_dim();
  std::vector<Eigen::Index> near;
  auto wrap = [](double x, int n) { return x - n * std::round(x / n); };
  for (Eigen::Index s = 0; s < spec.sites(); ++s) {
    const double r1 = wrap(spec.x1_of(s) - opts.origin_offset.first, spec.n1);
    const double r2 = wrap(spec.x2_of(s) - opts.origin_offset.second, spec.n2);
    if (std::hypot(r1, r2) <= radius) near.push_back(s);
  }
  auto weight_near = [&](const auto& v) {
    double w = 0.0;
    for (Eigen::Index s : near) w += v.segment(s * F, F).squaredNorm();
    return w;
  };

  ChernResult r;
  r.method = ChernMethod::fredholm_index;
  double value = 0.0;
  double closest = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < sv.singular_values.size(); ++k) {
    const double sigma = sv.singular_values(k);
    const double wv = weight_near(sv.v.col(k)), wu = weight_near(sv.u.col(k));
    if (std::max(wv, wu) >= opts.band_weight) closest = std::min(closest, std::abs(sigma - opts.threshold));
    if (sigma >= opts.threshold) continue;
    value += wv - wu;
  }
  r.value = value;
  r.min_singular_gap = closest;
  fill_snap(r);
  if (closest < opts.band) {
    r.reliable = false;
    r.note = "singular value within the reliability band of the threshold";
  }
  if (!(fp.loc_metric < default_loc_threshold)) {
    r.reliable = false;
    r.note += r.note.empty() ? "localization metric above threshold" : "; localization metric above threshold";
  }
  return r;
}

// ----------------------------------------------------------- profiles ----

ChernProfile::ChernProfile(BlockOperator H) : H_(std::move(H)) {
  require_torus(H_.spec(), "ChernProfile");
  (void)H_.spectrum();
}

Eigen::Index ChernProfile::occupation(double E) const {
  const RealVector& e = energies();
  return std::upper_bound(e.data(), e.data() + e.size(), E) - e.data();
}

const ChernProfile::Entry& ChernProfile::entry(Eigen::Index count) const {
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(count);
    if (it != cache_.end()) return it->second;
  }
  Entry e;
  if (count > 0 && count < H_.dim()) {
    const BlockOperator P = projection_from(H_, count);
    e.chern = chern_trace(P).real();
    e.loc = localization_metric(P);
  }
  std::lock_guard<std::mutex> lock(mutex_);
  return cache_.emplace(count, e).first->second;
}

double ChernProfile::chern_at(double E) const { return entry(occupation(E)).chern; }

double ChernProfile::chern_for_occupation(Eigen::Index count) const { return entry(count).chern; }

double ChernProfile::loc_metric_for_occupation(Eigen::Index count) const { return entry(count).loc; }

// ---------------------------------------------------------- relations ----

const RelationCheck* ChernRelations::find(const std::string& name) const {
  for (const RelationCheck& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

ChernRelations chern_relations(const BdGModel& m, double tol) {
  const SymmetryReport sym = classify_symmetries(m, tol);
  ChernRelations out;
  const FermiProjection fp = fermi_projection(m);
  out.chern = chern_trace(fp.P).real();
  const int L = m.spec.fiber_L;

  auto add = [&](RelationCheck c, double tolerance) {
    c.lhs = out.chern;
    c.deviation = std::abs(c.lhs - c.rhs);
    c.holds = c.deviation <= tolerance;
    out.checks.push_back(std::move(c));
  };

  if (sym.charge) {
    RelationCheck c;
    c.name = "charge";
    const FermiProjection p = fermi_projection(m.h);
    const double ch_p = chern_trace(p.P).real();
    c.parts = {ch_p};
    c.rhs = 2.0 * ch_p;
    add(std::move(c), 1e-10);
  }
  if (L > 1 && sym.u1) {
    RelationCheck c;
    c.name = "u1";
    for (const BlockOperator& block : reduce_u1(m)) {
      c.parts.push_back(chern_trace(fermi_projection(block).P).real());
    }
    for (double v : c.parts) c.rhs += v;
    add(std::move(c), 1e-8);
  }
  if (L > 1 && sym.su2) {
    RelationCheck c;
    c.name = "su2";
    const SU2Reduction red = reduce_su2(m);
    const double ch_red = chern_trace(fermi_projection(red.H_red).P).real();
    const double ch_red_prime = chern_trace(fermi_projection(red.H_red_prime).P).real();
    c.parts = {ch_red, ch_red_prime};
    c.rhs = red.multiplicity * ch_red + red.multiplicity_prime * ch_red_prime;
    if (L % 2 == 0) {
      const int k = snap(ch_red);
      c.note = "L*Ch(P_red) = " + std::to_string(L * ch_red) +
               (k % 2 == 0 ? "; Ch(P_red) snaps to an even integer" : "; Ch(P_red) snaps to an odd integer");
    }
    add(std::move(c), 1e-8);
  }
  if (sym.trs) {
    RelationCheck c;
    c.name = "trs";
    c.rhs = 0.0;
    add(std::move(c), 1e-2);
  }
  return out;
}

}  // namespace bdg
