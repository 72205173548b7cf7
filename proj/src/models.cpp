#include "bdglab/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace bdg {

namespace {

struct PairingName {
  PairingKind kind;
  const char* name;
};

constexpr PairingName kPairingNames[] = {
    {PairingKind::none, "none"},           {PairingKind::s_wave, "s_wave"},
    {PairingKind::extended_s, "extended_s"}, {PairingKind::p_x, "p_x"},
    {PairingKind::p_plus_ip, "p_plus_ip"}, {PairingKind::p_minus_ip, "p_minus_ip"},
    {PairingKind::spinful_p, "spinful_p"}, {PairingKind::triplet_p, "triplet_p"},
    {PairingKind::d_xy, "d_xy"},           {PairingKind::d_x2y2, "d_x2y2"},
    {PairingKind::d_plus_id, "d_plus_id"}, {PairingKind::d_minus_id, "d_minus_id"},
};

/// Fiber matrix diag(a, b) ⊕ off-diagonal (c, d) on spin ⊗ ph with ph fastest.
Matrix graded_fiber(const Matrix& pp, const Matrix& ph, const Matrix& hp, const Matrix& hh) {
  const Eigen::Index L = pp.rows();
  Matrix f(2 * L, 2 * L);
  for (Eigen::Index b = 0; b < L; ++b) {
    for (Eigen::Index a = 0; a < L; ++a) {
      f(2 * a, 2 * b) = pp(a, b);
      f(2 * a, 2 * b + 1) = ph(a, b);
      f(2 * a + 1, 2 * b) = hp(a, b);
      f(2 * a + 1, 2 * b + 1) = hh(a, b);
    }
  }
  return f;
}

Matrix spin_fiber(const LatticeSpec& spec, const Matrix& s) {
  if (!spec.particle_hole) return s;
  const Eigen::Index L = s.rows();
  return graded_fiber(s, Matrix::Zero(L, L), Matrix::Zero(L, L), -s.transpose());
}

double commutator_with_fiber(const Matrix& a, const Matrix& fiber) {
  return max_abs(apply_fiber_right(a, fiber) - apply_fiber_left(fiber, a));
}

}  // namespace

std::string to_string(PairingKind k) {
  for (const auto& p : kPairingNames) {
    if (p.kind == k) return p.name;
  }
  return "unknown";
}

PairingKind parse_pairing(const std::string& name) {
  for (const auto& p : kPairingNames) {
    if (name == p.name) return p.kind;
  }
  throw std::invalid_argument("unknown pairing preset '" + name + "'");
}

std::vector<PairingKind> all_pairings() {
  std::vector<PairingKind> out;
  for (const auto& p : kPairingNames) {
    if (p.kind != PairingKind::none) out.push_back(p.kind);
  }
  return out;
}

int PairingSpec::spin_required_two_s() const {
  switch (kind) {
    case PairingKind::none: return -1;
    case PairingKind::p_plus_ip:
    case PairingKind::p_minus_ip: return 0;
    default: return 1;
  }
}

std::string to_string(Kinetic k) { return k == Kinetic::laplacian ? "laplacian" : "magnetic_laplacian"; }

Kinetic parse_kinetic(const std::string& name) {
  if (name == "laplacian") return Kinetic::laplacian;
  if (name == "magnetic_laplacian") return Kinetic::magnetic_laplacian;
  throw std::invalid_argument("unknown kinetic term '" + name + "'");
}

std::string to_string(CazClass c) {
  switch (c) {
    case CazClass::D: return "D";
    case CazClass::DIII: return "DIII";
    case CazClass::C: return "C";
    case CazClass::CI: return "CI";
    case CazClass::A: return "A";
    case CazClass::AIII: return "AIII";
    case CazClass::BDI: return "BDI";
  }
  return "?";
}

// ------------------------------------------------------------- disorder ----

DisorderRealization DisorderRealization::generate(const LatticeSpec& spec, double W, std::uint64_t seed,
                                                  std::string ensemble_id, bool spin_resolved) {
  if (W < 0.0) throw std::invalid_argument("disorder strength must be non-negative");
  DisorderRealization d;
  d.seed = seed;
  d.strength_W = W;
  d.spin_resolved = spin_resolved;
  d.ensemble_id = std::move(ensemble_id);
  const int L = spec.fiber_L;
  d.values.resize(static_cast<std::size_t>(spec.sites()) * L);
  std::mt19937_64 engine(seed);
  auto draw = [&] { return W * (static_cast<double>(engine() >> 11) * 0x1.0p-53 - 0.5); };
  for (int s = 0; s < spec.sites(); ++s) {
    const double shared = spin_resolved ? 0.0 : draw();
    for (int l = 0; l < L; ++l) d.values[static_cast<std::size_t>(s) * L + l] = spin_resolved ? draw() : shared;
  }
  return d;
}

DisorderRealization DisorderRealization::clean(const LatticeSpec& spec) {
  DisorderRealization d;
  d.values.assign(static_cast<std::size_t>(spec.sites()) * spec.fiber_L, 0.0);
  return d;
}

DisorderRealization DisorderRealization::translated(const LatticeSpec& spec, int a1, int a2) const {
  DisorderRealization d = *this;
  const int L = spec.fiber_L;
  for (int x2 = 0; x2 < spec.n2; ++x2) {
    for (int x1 = 0; x1 < spec.n1; ++x1) {
      const int y1 = ((x1 - a1) % spec.n1 + spec.n1) % spec.n1;
      const int y2 = ((x2 - a2) % spec.n2 + spec.n2) % spec.n2;
      for (int l = 0; l < L; ++l) {
        d.values[spec.site_index(x1, x2) * L + l] = values[spec.site_index(y1, y2) * L + l];
      }
    }
  }
  return d;
}

// ------------------------------------------------------------ operators ----

Matrix kinetic_site_matrix(const LatticeSpec& spec, Kinetic kinetic) {
  Matrix v1 = site_shift(spec, 1);
  const Matrix v2 = site_shift(spec, 2);
  if (kinetic == Kinetic::magnetic_laplacian) {
    if (spec.geometry == Geometry::torus && !spec.flux.commensurate_with(spec.n2)) {
      throw PreconditionError("magnetic Laplacian on a torus needs flux * n2 integer; flux " + spec.flux.str() +
                              " with n2 = " + std::to_string(spec.n2));
    }
    v1 = site_phase(spec, 2, -spec.qB()) * v1;
  }
  return v1 + v1.adjoint() + v2 + v2.adjoint();
}

Matrix pairing_matrix(const LatticeSpec& spec, const PairingSpec& pairing) {
  const int L = spec.fiber_L;
  const int N = spec.sites();
  if (pairing.kind == PairingKind::none) return Matrix::Zero(N * L, N * L);
  const int need = pairing.spin_required_two_s();
  if (need + 1 != L) {
    throw PreconditionError("pairing " + to_string(pairing.kind) + " is written for spin " +
                            std::to_string(need) + "/2 but the lattice fiber has L = " + std::to_string(L));
  }
  const SpinRep rep = build_spin_rep(L - 1);
  const Matrix v1 = site_shift(spec, 1);
  const Matrix v2 = site_shift(spec, 2);
  const Matrix odd1 = v1 - v1.adjoint();
  const Matrix odd2 = v2 - v2.adjoint();
  const Matrix even1 = v1 + v1.adjoint();
  const Matrix even2 = v2 + v2.adjoint();
  const Matrix one = Matrix::Identity(N, N);
  const Matrix singlet = I * rep.s2;
  const Matrix spin_one = Matrix::Identity(L, L);
  const double d = pairing.amplitude;

  switch (pairing.kind) {
    case PairingKind::s_wave: return d * kron(one, singlet);
    case PairingKind::extended_s: return d * kron(even1 + even2, singlet);
    case PairingKind::p_x: return d * kron(odd1, rep.s1);
    case PairingKind::p_plus_ip: return d * (odd1 + I * odd2);
    case PairingKind::p_minus_ip: return d * (odd1 - I * odd2);
    case PairingKind::spinful_p: return d * kron(odd1 + I * odd2, rep.s1);
    case PairingKind::triplet_p: return d * (kron(odd1, spin_one) + I * kron(odd2, rep.s3));
    case PairingKind::d_xy: return d * kron(odd1 * odd2, singlet);
    case PairingKind::d_x2y2: return d * kron(even1 - even2, singlet);
    case PairingKind::d_plus_id: return d * kron(even1 - even2 + I * (odd1 * odd2), singlet);
    case PairingKind::d_minus_id: return d * kron(even1 - even2 - I * (odd1 * odd2), singlet);
    case PairingKind::none: break;
  }
  return Matrix::Zero(N * L, N * L);
}

BdGModel model_from_blocks(const LatticeSpec& spec, const Matrix& h, const Matrix& Delta, double mu,
                           std::optional<int> range) {
  if (!spec.particle_hole) throw std::invalid_argument("BdG models live on the particle-hole space");
  const LatticeSpec pspec = spec.with_fiber(spec.fiber_L, false);
  if (max_abs(Delta + Delta.transpose()) > 1e-13 * std::max(1.0, max_abs(Delta))) {
    throw PreconditionError("pairing block violates Δ* = −conj(Δ) (Δ must be antisymmetric)");
  }
  BdGModel m;
  m.spec = spec;
  m.mu = mu;
  m.h = BlockOperator(pspec, h, true, range);
  m.Delta = BlockOperator(pspec, Delta, false, range);
  Matrix H = assemble_ph(spec, h, Delta, -Delta.conjugate(), -h.conjugate());
  m.H = BlockOperator(spec, std::move(H), true, range);
  m.caz_class = classify_symmetries(m).caz;
  return m;
}

BdGModel build_model(const LatticeSpec& spec, const PairingSpec& pairing, double mu,
                     const DisorderRealization& disorder, Kinetic kinetic) {
  spec.validate();
  if (!spec.particle_hole) throw std::invalid_argument("build_model needs the particle-hole space");
  const int need = pairing.spin_required_two_s();
  if (need >= 0 && need + 1 != spec.fiber_L) {
    throw PreconditionError("spin mismatch: pairing " + to_string(pairing.kind) + " requires L = " +
                            std::to_string(need + 1) + ", lattice has L = " + std::to_string(spec.fiber_L));
  }
  const bool paired = pairing.kind != PairingKind::none && pairing.amplitude != 0.0;
  if (kinetic == Kinetic::magnetic_laplacian && paired && (4 * spec.flux.num) % spec.flux.den != 0) {
    throw PreconditionError("with a pairing potential the flux qB can only take the values 0, π/2, π, 3π/2; got qB/2π = " +
                            spec.flux.str());
  }
  const int L = spec.fiber_L;
  const std::size_t expected = static_cast<std::size_t>(spec.sites()) * L;
  if (!disorder.values.empty() && disorder.values.size() != expected) {
    throw std::invalid_argument("disorder realization does not match the lattice size");
  }
  Matrix h = kron(kinetic_site_matrix(spec, kinetic), Matrix::Identity(L, L));
  for (Eigen::Index k = 0; k < h.rows(); ++k) {
    h(k, k) -= mu;
    if (!disorder.values.empty()) h(k, k) += disorder.values[static_cast<std::size_t>(k)];
  }
  const Matrix Delta = pairing_matrix(spec, pairing);
  BdGModel m = model_from_blocks(spec, h, Delta, mu, 1);
  m.pairing = pairing;
  m.kinetic = kinetic;
  m.disorder = disorder;
  return m;
}

// ------------------------------------------------------------- symmetry ----

Matrix apply_fiber_left(const Matrix& fiber, const Matrix& a) {
  const Eigen::Index F = fiber.rows();
  Matrix out(a.rows(), a.cols());
  for (Eigen::Index s = 0; s < a.rows() / F; ++s) out.middleRows(s * F, F).noalias() = fiber * a.middleRows(s * F, F);
  return out;
}

Matrix apply_fiber_right(const Matrix& a, const Matrix& fiber) {
  const Eigen::Index F = fiber.rows();
  Matrix out(a.rows(), a.cols());
  for (Eigen::Index s = 0; s < a.cols() / F; ++s) out.middleCols(s * F, F).noalias() = a.middleCols(s * F, F) * fiber;
  return out;
}

double phs_residual(const BlockOperator& H) {
  const Matrix& a = H.matrix();
  double r = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      r = std::max(r, std::abs(std::conj(a(i ^ 1, j ^ 1)) + a(i, j)));
    }
  }
  return r;
}

double trs_residual(const BlockOperator& H) {
  const LatticeSpec& spec = H.spec();
  const SpinRep rep = build_spin_rep(spec.fiber_L - 1);
  const Matrix target = H.matrix().conjugate();
  if (!spec.particle_hole) {
    return max_abs(apply_fiber_right(apply_fiber_left(rep.R, H.matrix()), rep.R.adjoint()) - target);
  }
  double best = std::numeric_limits<double>::infinity();
  for (double sign : {1.0, -1.0}) {
    Matrix g = Matrix::Zero(2, 2);
    g(0, 0) = 1.0;
    g(1, 1) = sign;
    const Matrix R = kron(rep.R, g);
    best = std::min(best, max_abs(apply_fiber_right(apply_fiber_left(R, H.matrix()), R.adjoint()) - target));
  }
  return best;
}

double su2_residual(const BlockOperator& H) {
  const SpinRep rep = build_spin_rep(H.spec().fiber_L - 1);
  double r = 0.0;
  for (int j = 1; j <= 3; ++j) r = std::max(r, commutator_with_fiber(H.matrix(), spin_fiber(H.spec(), rep.component(j))));
  return r;
}

double u1_residual(const BlockOperator& H) {
  const SpinRep rep = build_spin_rep(H.spec().fiber_L - 1);
  return commutator_with_fiber(H.matrix(), spin_fiber(H.spec(), rep.s3));
}

double charge_residual(const BlockOperator& H) {
  const int L = H.spec().fiber_L;
  Matrix q = Matrix::Zero(2, 2);
  q(0, 0) = 1.0;
  q(1, 1) = -1.0;
  return commutator_with_fiber(H.matrix(), kron(Matrix::Identity(L, L), q));
}

SymmetryReport classify_symmetries(const BdGModel& m, double tol) {
  SymmetryReport r;
  const int L = m.spec.fiber_L;
  r.phs_residual = phs_residual(m.H);
  r.phs = r.phs_residual <= tol;
  r.trs_residual = trs_residual(m.H);
  r.trs = r.trs_residual <= tol;
  r.trs_square = (L - 1) % 2 == 1 ? -1 : 1;
  r.charge_residual = charge_residual(m.H);
  r.charge = r.charge_residual <= tol;
  if (L > 1) {
    r.u1_residual = u1_residual(m.H);
    r.u1 = r.u1_residual <= tol;
    r.su2_residual = su2_residual(m.H);
    r.su2 = r.su2_residual <= tol;
  }
  r.trs_effective_sign = !r.trs ? 0 : (r.su2 ? 1 : r.trs_square);
  if (L == 1) {
    r.caz = r.trs ? CazClass::BDI : CazClass::D;
  } else if (r.su2) {
    r.caz = r.trs ? CazClass::CI : CazClass::C;
  } else if (r.u1) {
    r.caz = r.trs ? CazClass::AIII : CazClass::A;
  } else {
    r.caz = r.trs ? CazClass::DIII : CazClass::D;
  }
  return r;
}

// ------------------------------------------------------------ reductions ---

SU2Reduction reduce_su2(const BdGModel& m) {
  const int L = m.spec.fiber_L;
  const double res = L > 1 ? su2_residual(m.H) : 0.0;
  if (res > 1e-10) {
    throw PreconditionError("reduce_su2: H is not SU(2) invariant, max ||[H, S^j]|| = " + std::to_string(res));
  }
  const int N = m.spec.sites();
  const SpinRep rep = build_spin_rep(L - 1);
  SU2Reduction out;
  out.h_red.resize(N, N);
  out.Delta_red.resize(N, N);
  for (int b = 0; b < N; ++b) {
    for (int a = 0; a < N; ++a) {
      out.h_red(a, b) = m.h(static_cast<Eigen::Index>(a) * L, static_cast<Eigen::Index>(b) * L);
      out.Delta_red(a, b) = m.Delta(static_cast<Eigen::Index>(a) * L, static_cast<Eigen::Index>(b) * L + L - 1);
    }
  }
  out.reconstruction_residual =
      std::max(max_abs(kron(out.h_red, Matrix::Identity(L, L)) - m.h.matrix()),
               max_abs(kron(out.Delta_red, rep.T_cross) - m.Delta.matrix()));
  if (out.reconstruction_residual > 1e-12 * std::max(1.0, max_abs(m.H.matrix()))) {
    throw PreconditionError("reduce_su2: h = h_red ⊗ 1, Δ = Δ_red ⊗ T not recovered (residual " +
                            std::to_string(out.reconstruction_residual) + ")");
  }
  const double sigma = L % 2 == 0 ? 1.0 : -1.0;
  const LatticeSpec rspec = m.spec.with_fiber(1, true);
  const Matrix& h = out.h_red;
  const Matrix& D = out.Delta_red;
  out.H_red = BlockOperator(rspec, assemble_ph(rspec, h, D, sigma * D.conjugate(), -h.conjugate()), true, m.H.range());
  out.H_red_prime =
      BlockOperator(rspec, assemble_ph(rspec, h, -D, -sigma * D.conjugate(), -h.conjugate()), true, m.H.range());
  if (L % 2 == 0) {
    out.multiplicity = L / 2;
    out.multiplicity_prime = L / 2;
  } else {
    out.multiplicity = (L + 1) / 2;
    out.multiplicity_prime = (L - 1) / 2;
  }
  return out;
}

std::vector<BlockOperator> reduce_u1(const BdGModel& m) {
  const int L = m.spec.fiber_L;
  const double res = L > 1 ? u1_residual(m.H) : 0.0;
  if (res > 1e-10) {
    throw PreconditionError("reduce_u1: H does not commute with S^3, ||[H, S^3]|| = " + std::to_string(res));
  }
  const int N = m.spec.sites();
  const LatticeSpec rspec = m.spec.with_fiber(1, true);
  std::vector<BlockOperator> sectors;
  for (int l = 1; l <= L; ++l) {
    std::vector<Eigen::Index> idx;
    idx.reserve(2 * static_cast<std::size_t>(N));
    for (int s = 0; s < N; ++s) {
      idx.push_back((static_cast<Eigen::Index>(s) * L + (l - 1)) * 2);
      idx.push_back((static_cast<Eigen::Index>(s) * L + (L - l)) * 2 + 1);
    }
    Matrix block(idx.size(), idx.size());
    for (std::size_t b = 0; b < idx.size(); ++b) {
      for (std::size_t a = 0; a < idx.size(); ++a) block(a, b) = m.H(idx[a], idx[b]);
    }
    sectors.emplace_back(rspec, std::move(block), true, m.H.range());
  }
  return sectors;
}

}  // namespace bdg
