#include "bdglab/lattice.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace bdg {

std::string to_string(Geometry g) { return g == Geometry::torus ? "torus" : "cylinder"; }

// ----------------------------------------------------------------- Flux ----

Flux::Flux(std::int64_t p, std::int64_t q) {
  if (q == 0) throw std::invalid_argument("flux denominator must be nonzero");
  if (q < 0) {
    p = -p;
    q = -q;
  }
  const std::int64_t g = std::gcd(p < 0 ? -p : p, q);
  num = g == 0 ? 0 : p / g;
  den = g == 0 ? 1 : q / g;
}

std::string Flux::str() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

Flux Flux::parse(const std::string& text) {
  const auto slash = text.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      const long long p = std::stoll(text, &used);
      if (used != text.size()) throw std::invalid_argument("trailing characters");
      return Flux(p, 1);
    }
    const std::string a = text.substr(0, slash);
    const std::string b = text.substr(slash + 1);
    const long long p = std::stoll(a, &used);
    if (used != a.size()) throw std::invalid_argument("trailing characters");
    const long long q = std::stoll(b, &used);
    if (used != b.size()) throw std::invalid_argument("trailing characters");
    return Flux(p, q);
  } catch (const std::exception&) {
    throw std::invalid_argument("flux must be written as p/q, got '" + text + "'");
  }
}

// ---------------------------------------------------------- LatticeSpec ----

LatticeSpec LatticeSpec::torus(int n1, int n2, int fiber_L, Flux flux) {
  LatticeSpec s;
  s.n1 = n1;
  s.n2 = n2;
  s.fiber_L = fiber_L;
  s.flux = flux;
  s.validate();
  return s;
}

LatticeSpec LatticeSpec::cylinder(int n1, int width, int fiber_L, Flux flux) {
  LatticeSpec s;
  s.n1 = n1;
  s.n2 = width;
  s.geometry = Geometry::cylinder;
  s.fiber_L = fiber_L;
  s.flux = flux;
  s.validate();
  return s;
}

std::pair<cplx, cplx> LatticeSpec::xi() const {
  return {std::exp(I * qB()), std::exp(-I * qB())};
}

void LatticeSpec::validate() const {
  if (n1 < 1 || n2 < 1) throw PreconditionError("lattice sizes must be positive");
  if (fiber_L < 1) throw PreconditionError("spin fiber dimension must be positive");
  if (charge_sign != 1 && charge_sign != -1) throw PreconditionError("charge_sign must be +1 or -1");
  if (!flux.commensurate_with(n1)) {
    std::ostringstream msg;
    msg << "flux " << flux.str() << " is incommensurate with n1 = " << n1
        << ": magnetic translations do not close; the smallest compatible n1 is " << flux.den;
    throw PreconditionError(msg.str());
  }
}

LatticeSpec LatticeSpec::with_fiber(int L, bool ph) const {
  LatticeSpec s = *this;
  s.fiber_L = L;
  s.particle_hole = ph;
  return s;
}

LatticeSpec LatticeSpec::with_size(int m1, int m2) const {
  LatticeSpec s = *this;
  s.n1 = m1;
  s.n2 = m2;
  s.validate();
  return s;
}

LatticeSpec LatticeSpec::as_cylinder(int width) const {
  LatticeSpec s = *this;
  s.n2 = width;
  s.geometry = Geometry::cylinder;
  s.validate();
  return s;
}

int displacement(const LatticeSpec& spec, int j, Eigen::Index site_a, Eigen::Index site_b,
                 bool* nyquist) {
  int d = spec.coordinate(j, site_a) - spec.coordinate(j, site_b);
  if (nyquist) *nyquist = false;
  if (!spec.periodic(j)) return d;
  const int n = spec.extent(j);
  d = ((d % n) + n) % n;
  if (2 * d > n) d -= n;
  if (2 * d == n) {
    if (nyquist) *nyquist = true;
    return 0;
  }
  return d;
}

// -------------------------------------------------------- BlockOperator ----

BlockOperator::BlockOperator(LatticeSpec spec, Matrix data, bool hermitian, std::optional<int> range)
    : spec_(spec), data_(std::move(data)), hermitian_(hermitian), range_(range) {
  if (data_.rows() != spec_.dim() || data_.cols() != spec_.dim()) {
    throw std::invalid_argument("BlockOperator: matrix size " + std::to_string(data_.rows()) + "x" +
                                std::to_string(data_.cols()) + " does not match dim " +
                                std::to_string(spec_.dim()));
  }
  if (hermitian_) {
    const double r = hermitian_residual(data_);
    if (r > 1e-12 * std::max(1.0, max_abs(data_))) {
      throw PreconditionError("BlockOperator flagged hermitian but ||A - A*||_max = " + std::to_string(r));
    }
  }
}

BlockOperator BlockOperator::identity(const LatticeSpec& spec) {
  return BlockOperator(spec, Matrix::Identity(spec.dim(), spec.dim()), true, 0);
}

BlockOperator BlockOperator::zero(const LatticeSpec& spec) {
  return BlockOperator(spec, Matrix::Zero(spec.dim(), spec.dim()), true, 0);
}

const Spectrum& BlockOperator::spectrum() const {
  if (!hermitian_) throw PreconditionError("spectral calculus requires a hermitian operator");
  std::call_once(cache_->once, [this] {
    EighResult e = eigh(data_);
    Spectrum& s = cache_->value;
    s.values = std::move(e.values);
    s.vectors = std::move(e.vectors);
    const Matrix rebuilt = s.vectors * s.values.cast<cplx>().asDiagonal() * s.vectors.adjoint();
    s.reconstruction_residual = max_abs(rebuilt - data_);
    const double scale = std::max(1.0, max_abs(data_));
    if (s.reconstruction_residual > 1e-10 * scale) {
      throw std::runtime_error("eigendecomposition reconstruction residual too large: " +
                               std::to_string(s.reconstruction_residual));
    }
  });
  return cache_->value;
}

bool BlockOperator::has_spectrum() const { return cache_->value.values.size() == data_.rows(); }

BlockOperator BlockOperator::adjoint() const {
  return BlockOperator(spec_, data_.adjoint(), hermitian_, range_);
}

BlockOperator BlockOperator::with_range(std::optional<int> r) const {
  BlockOperator out = *this;
  out.range_ = r;
  return out;
}

namespace {

std::optional<int> combine_max(std::optional<int> a, std::optional<int> b) {
  if (!a || !b) return std::nullopt;
  return std::max(*a, *b);
}

std::optional<int> combine_sum(std::optional<int> a, std::optional<int> b) {
  if (!a || !b) return std::nullopt;
  return *a + *b;
}

void require_same_space(const BlockOperator& a, const BlockOperator& b) {
  if (!(a.spec() == b.spec())) throw std::invalid_argument("operators live on different lattice spaces");
}

}  // namespace

BlockOperator operator+(const BlockOperator& a, const BlockOperator& b) {
  require_same_space(a, b);
  return BlockOperator(a.spec_, a.data_ + b.data_, false, combine_max(a.range_, b.range_));
}

BlockOperator operator-(const BlockOperator& a, const BlockOperator& b) {
  require_same_space(a, b);
  return BlockOperator(a.spec_, a.data_ - b.data_, false, combine_max(a.range_, b.range_));
}

BlockOperator operator*(const BlockOperator& a, const BlockOperator& b) {
  require_same_space(a, b);
  Matrix c = a.data_ * b.data_;
  return BlockOperator(a.spec_, std::move(c), false, combine_sum(a.range_, b.range_));
}

BlockOperator operator*(cplx z, const BlockOperator& a) {
  return BlockOperator(a.spec_, z * a.data_, false, a.range_);
}

BlockOperator operator*(double x, const BlockOperator& a) {
  return BlockOperator(a.spec_, x * a.data_, a.hermitian_, a.range_);
}

BlockOperator commutator(const BlockOperator& a, const BlockOperator& b) { return a * b - b * a; }

// ------------------------------------------------------ site operators ----

Matrix site_shift(const LatticeSpec& spec, int j) {
  const int N = spec.sites();
  Matrix v = Matrix::Zero(N, N);
  for (int x2 = 0; x2 < spec.n2; ++x2) {
    for (int x1 = 0; x1 < spec.n1; ++x1) {
      int y1 = x1, y2 = x2;
      if (j == 1) {
        y1 = (x1 - 1 + spec.n1) % spec.n1;
      } else {
        if (!spec.periodic(2) && x2 == 0) continue;
        y2 = (x2 - 1 + spec.n2) % spec.n2;
      }
      v(spec.site_index(x1, x2), spec.site_index(y1, y2)) += 1.0;
    }
  }
  return v;
}

Matrix site_position(const LatticeSpec& spec, int j) {
  const int N = spec.sites();
  Matrix x = Matrix::Zero(N, N);
  for (int s = 0; s < N; ++s) x(s, s) = spec.coordinate(j, s);
  return x;
}

Matrix site_phase(const LatticeSpec& spec, int j, double theta) {
  const int N = spec.sites();
  Matrix x = Matrix::Zero(N, N);
  for (int s = 0; s < N; ++s) x(s, s) = std::exp(I * (theta * spec.coordinate(j, s)));
  return x;
}

Matrix lift(const LatticeSpec& spec, const Matrix& site_op, const Matrix& spin_op) {
  const Matrix fiber = spec.particle_hole ? kron(spin_op, Matrix::Identity(2, 2)) : spin_op;
  return kron(site_op, fiber);
}

Matrix assemble_ph(const LatticeSpec& spec, const Matrix& a, const Matrix& b, const Matrix& c,
                   const Matrix& d) {
  if (!spec.particle_hole) throw std::invalid_argument("assemble_ph on a space without particle-hole grading");
  const Eigen::Index n = a.rows();
  Matrix out(2 * n, 2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      out(2 * i, 2 * j) = a(i, j);
      out(2 * i, 2 * j + 1) = b(i, j);
      out(2 * i + 1, 2 * j) = c(i, j);
      out(2 * i + 1, 2 * j + 1) = d(i, j);
    }
  }
  return out;
}

Matrix ph_block(const LatticeSpec& spec, const Matrix& full, int eta_row, int eta_col) {
  if (!spec.particle_hole) throw std::invalid_argument("ph_block on a space without particle-hole grading");
  const Eigen::Index n = full.rows() / 2;
  Matrix out(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) out(i, j) = full(2 * i + eta_row, 2 * j + eta_col);
  }
  return out;
}

Matrix ph_swap(const LatticeSpec& spec) {
  Matrix sx(2, 2);
  sx << 0, 1, 1, 0;
  return kron(Matrix::Identity(spec.sites() * spec.fiber_L, spec.sites() * spec.fiber_L), sx);
}

// --------------------------------------------------- covariant framework ---

MagneticTranslations magnetic_translations(const LatticeSpec& spec) {
  spec.validate();
  const Matrix L = Matrix::Identity(spec.fiber_L, spec.fiber_L);
  auto graded = [&](const Matrix& u) -> BlockOperator {
    if (!spec.particle_hole) return BlockOperator(spec, lift(spec, u, L), false, 1);
    const Eigen::Index n = u.rows() * spec.fiber_L;
    const Matrix full = kron(u, L);
    return BlockOperator(spec, assemble_ph(spec, full, Matrix::Zero(n, n), Matrix::Zero(n, n), full.conjugate()),
                         false, 1);
  };
  MagneticTranslations out;
  out.U1 = graded(site_shift(spec, 1));
  if (spec.geometry == Geometry::torus) {
    out.U2 = graded(site_phase(spec, 1, -spec.qB()) * site_shift(spec, 2));
  }
  return out;
}

double CovarianceReport::max() const {
  return std::isnan(residual_2) ? residual_1 : std::max(residual_1, residual_2);
}

CovarianceReport check_covariance(const OperatorFamily& family, const LatticeSpec& spec,
                                  bool all_base_points) {
  const MagneticTranslations u = magnetic_translations(spec);
  CovarianceReport rep;
  rep.residual_2 = u.U2 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
  const int m1 = all_base_points ? spec.n1 : 1;
  const int m2 = all_base_points ? spec.n2 : 1;
  for (int a2 = 0; a2 < m2; ++a2) {
    for (int a1 = 0; a1 < m1; ++a1) {
      const Matrix a = family(a1, a2).matrix();
      const Matrix& u1 = u.U1.matrix();
      rep.residual_1 = std::max(rep.residual_1, max_abs(u1 * a * u1.adjoint() - family(a1 + 1, a2).matrix()));
      if (u.U2) {
        const Matrix& u2 = u.U2->matrix();
        rep.residual_2 = std::max(rep.residual_2, max_abs(u2 * a * u2.adjoint() - family(a1, a2 + 1).matrix()));
      }
    }
  }
  return rep;
}

CovarianceReport check_covariance(const BlockOperator& periodic) {
  return check_covariance([&](int, int) { return periodic; }, periodic.spec());
}

BlockOperator derivation(const BlockOperator& a, int j) {
  if (j != 1 && j != 2) throw std::invalid_argument("derivation direction must be 1 or 2");
  const LatticeSpec& spec = a.spec();
  if (spec.periodic(j) && a.range() && 2 * *a.range() >= spec.extent(j)) {
    throw PreconditionError("derivation: operator range " + std::to_string(*a.range()) +
                            " reaches half the period n" + std::to_string(j) + " = " +
                            std::to_string(spec.extent(j)) + " (minimal-image displacement is aliased)");
  }
  const int N = spec.sites();
  const int F = spec.fiber_dim();
  Matrix out(a.dim(), a.dim());
  for (int sb = 0; sb < N; ++sb) {
    for (int sa = 0; sa < N; ++sa) {
      const cplx factor = -I * static_cast<double>(displacement(spec, j, sa, sb));
      out.block(static_cast<Eigen::Index>(sa) * F, static_cast<Eigen::Index>(sb) * F, F, F) =
          factor * a.matrix().block(static_cast<Eigen::Index>(sa) * F, static_cast<Eigen::Index>(sb) * F, F, F);
    }
  }
  return BlockOperator(spec, std::move(out), false, a.range());
}

cplx trace_per_volume(const BlockOperator& a) {
  if (a.spec().geometry != Geometry::torus) {
    throw PreconditionError("trace per unit volume is defined on the torus; use the boundary trace on a cylinder");
  }
  return a.matrix().trace() / static_cast<double>(a.spec().sites());
}

BlockOperator spectral_function(const BlockOperator& a, const std::function<double(double)>& f) {
  const Spectrum& s = a.spectrum();
  RealVector fv(s.values.size());
  for (Eigen::Index k = 0; k < fv.size(); ++k) fv(k) = f(s.values(k));
  Matrix out = s.vectors * fv.cast<cplx>().asDiagonal() * s.vectors.adjoint();
  out = 0.5 * (out + out.adjoint()).eval();
  return BlockOperator(a.spec(), std::move(out), true);
}

BlockOperator spectral_function_complex(const BlockOperator& a, const std::function<cplx(double)>& f) {
  const Spectrum& s = a.spectrum();
  Vector fv(s.values.size());
  for (Eigen::Index k = 0; k < fv.size(); ++k) fv(k) = f(s.values(k));
  return BlockOperator(a.spec(), s.vectors * fv.asDiagonal() * s.vectors.adjoint(), false);
}

const BlockOperator& ChargeAndSpinOps::S(int j) const {
  switch (j) {
    case 1: return S1;
    case 2: return S2;
    case 3: return S3;
    default: throw std::invalid_argument("spin component must be 1, 2 or 3");
  }
}

const BlockOperator& ChargeAndSpinOps::X(int j) const { return j == 1 ? X1 : X2; }

ChargeAndSpinOps charge_and_spin_ops(const LatticeSpec& spec) {
  const SpinRep rep = build_spin_rep(spec.fiber_L - 1);
  const Matrix one_sites = Matrix::Identity(spec.sites(), spec.sites());
  const Matrix one_spin = Matrix::Identity(spec.fiber_L, spec.fiber_L);
  ChargeAndSpinOps ops;
  auto spin_op = [&](const Matrix& s) {
    if (!spec.particle_hole) return BlockOperator(spec, kron(one_sites, s), true, 0);
    const Eigen::Index L = spec.fiber_L;
    Matrix fiber = Matrix::Zero(2 * L, 2 * L);
    for (Eigen::Index b = 0; b < L; ++b) {
      for (Eigen::Index a = 0; a < L; ++a) {
        fiber(2 * a, 2 * b) = s(a, b);
        fiber(2 * a + 1, 2 * b + 1) = -s(b, a);
      }
    }
    return BlockOperator(spec, kron(one_sites, fiber), true, 0);
  };
  if (spec.particle_hole) {
    Matrix q = Matrix::Zero(2, 2);
    q(0, 0) = 1.0;
    q(1, 1) = -1.0;
    ops.Q = BlockOperator(spec, kron(one_sites, kron(one_spin, q)), true, 0);
  } else {
    ops.Q = BlockOperator::identity(spec);
  }
  ops.S1 = spin_op(rep.s1);
  ops.S2 = spin_op(rep.s2);
  ops.S3 = spin_op(rep.s3);
  ops.X1 = BlockOperator(spec, lift(spec, site_position(spec, 1), one_spin), true);
  ops.X2 = BlockOperator(spec, lift(spec, site_position(spec, 2), one_spin), true);
  return ops;
}

double fermi(double beta, double e) {
  if (std::isinf(beta)) return e <= 0.0 ? 1.0 : 0.0;
  const double x = beta * e;
  if (x > 0) {
    const double t = std::exp(-x);
    return t / (1.0 + t);
  }
  return 1.0 / (1.0 + std::exp(x));
}

}  // namespace bdg
