#include "doctest.h"
#include "test_util.hpp"

#include "bdglab/models.hpp"

#include <algorithm>

using namespace bdg;

namespace {

Matrix partial_site_transpose(const LatticeSpec& p, const Matrix& a) {
  const int L = p.fiber_L;
  Matrix out(a.rows(), a.cols());
  for (int sb = 0; sb < p.sites(); ++sb)
    for (int sa = 0; sa < p.sites(); ++sa)
      for (int lb = 0; lb < L; ++lb)
        for (int la = 0; la < L; ++la) out(sa * L + la, sb * L + lb) = a(sb * L + la, sa * L + lb);
  return out;
}

Matrix ph_conjugate_swap(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    for (Eigen::Index i = 0; i < a.rows(); ++i) out(i, j) = std::conj(a(i ^ 1, j ^ 1));
  return out;
}

std::vector<double> sorted(const RealVector& v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end());
  return out;
}

double max_gap(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double r = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) r = std::max(r, std::abs(a[k] - b[k]));
  return r;
}

}  // namespace

TEST_CASE("spin representations") {
  for (int two_s = 0; two_s <= 4; ++two_s) {
    const SpinRep r = build_spin_rep(two_s);
    const Matrix& s1 = r.s1;
    const Matrix& s2 = r.s2;
    const Matrix& s3 = r.s3;
    CHECK(max_abs(s1 * s2 - s2 * s1 - I * s3) <= 1e-13);
    CHECK(max_abs(s2 * s3 - s3 * s2 - I * s1) <= 1e-13);
    CHECK(max_abs(s3 * s1 - s1 * s3 - I * s2) <= 1e-13);
    for (int j = 1; j <= 3; ++j) {
      CHECK(max_abs(r.component(j) - r.component(j).adjoint()) == 0.0);
      CHECK(std::abs(r.component(j).trace()) <= 1e-14);
      const double sign = (j % 2 == 0) ? -1.0 : 1.0;
      CHECK(max_abs(r.component(j).conjugate() - sign * r.component(j)) <= 1e-15);
    }
    CHECK(max_abs(r.R.imag().cast<cplx>()) == 0.0);
    const double r2 = (two_s % 2 == 1) ? -1.0 : 1.0;
    CHECK(max_abs(r.R * r.R - r2 * Matrix::Identity(r.L(), r.L())) <= 1e-12);
    const int L = r.L();
    for (int l = 1; l <= L; ++l)
      for (int lp = 1; lp <= L; ++lp) {
        const double want = (l + lp == L + 1) ? ((l % 2 == 1) ? 1.0 : -1.0) : 0.0;
        CHECK(r.T_cross(l - 1, lp - 1) == cplx(want, 0.0));
      }
  }
  const SpinRep half = build_spin_rep(1);
  Matrix sx(2, 2), sy(2, 2), sz(2, 2);
  sx << 0, 1, 1, 0;
  sy << 0, -I, I, 0;
  sz << 1, 0, 0, -1;
  CHECK(max_abs(half.s1 - 0.5 * sx) <= 1e-15);
  CHECK(max_abs(half.s2 - 0.5 * sy) <= 1e-15);
  CHECK(max_abs(half.s3 - 0.5 * sz) <= 1e-15);
  CHECK(half.alpha(0) == doctest::Approx(1.0));
  const SpinRep one = build_spin_rep(2);
  CHECK(one.s3(0, 0) == cplx(1, 0));
  CHECK(one.s3(1, 1) == cplx(0, 0));
  CHECK(one.s3(2, 2) == cplx(-1, 0));
  CHECK(one.alpha(0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(one.alpha(1) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("pairing catalogue") {
  for (PairingKind k : all_pairings()) {
    CAPTURE(to_string(k));
    const PairingSpec ps{k, 0.7};
    const LatticeSpec spec = LatticeSpec::torus(5, 5, ps.spin_required_two_s() + 1);
    const LatticeSpec p = spec.with_fiber(spec.fiber_L, false);
    const Matrix d = pairing_matrix(spec, ps);
    CHECK(max_abs(d.adjoint() + d.conjugate()) <= 1e-13);
    const bool odd = k == PairingKind::p_x || k == PairingKind::p_plus_ip || k == PairingKind::p_minus_ip ||
                     k == PairingKind::spinful_p || k == PairingKind::triplet_p;
    CHECK(max_abs(partial_site_transpose(p, d) - (odd ? -1.0 : 1.0) * d) <= 1e-14);
    CHECK(parse_pairing(to_string(k)) == k);
  }
  CHECK_THROWS(parse_pairing("f_wave"));
  const LatticeSpec spec = LatticeSpec::torus(3, 3, 2);
  const Matrix ds = pairing_matrix(spec, {PairingKind::s_wave, 2.0});
  CHECK(ds(0, 1) == cplx(1.0, 0.0));
  CHECK(ds(1, 0) == cplx(-1.0, 0.0));
}

TEST_CASE("build_model") {
  SUBCASE("gapped p+ip") {
    const LatticeSpec spec = LatticeSpec::torus(12, 12);
    const BdGModel m = build_model(spec, {PairingKind::p_plus_ip, 1.0}, -1.0, DisorderRealization::clean(spec));
    CHECK(m.H.hermitian());
    CHECK(max_abs(ph_conjugate_swap(m.H.matrix()) + m.H.matrix()) <= 1e-12);
    const RealVector e = m.H.spectrum().values;
    const double gap = e.cwiseAbs().minCoeff();
    MESSAGE("p+ip gap on 12x12 at mu = -1: " << gap);
    CHECK(gap > 0.5);
  }
  SUBCASE("clean models are translation invariant") {
    for (PairingKind k : all_pairings()) {
      const PairingSpec ps{k, 0.5};
      const LatticeSpec spec = LatticeSpec::torus(4, 4, ps.spin_required_two_s() + 1);
      const BdGModel m = build_model(spec, ps, 0.4, DisorderRealization::clean(spec));
      CHECK(check_covariance(m.H).max() == 0.0);
    }
  }
  SUBCASE("preconditions") {
    const LatticeSpec spin_half = LatticeSpec::torus(4, 4, 2);
    CHECK_THROWS_AS(build_model(spin_half, {PairingKind::p_plus_ip, 1.0}, 0.0, {}), PreconditionError);
    const LatticeSpec f8 = LatticeSpec::torus(8, 8, 1, Flux(1, 8));
    CHECK_THROWS_AS(build_model(f8, {PairingKind::p_plus_ip, 1.0}, 0.0, {}, Kinetic::magnetic_laplacian),
                    PreconditionError);
    CHECK_NOTHROW(build_model(f8, {}, 0.0, {}, Kinetic::magnetic_laplacian));
    const LatticeSpec f4 = LatticeSpec::torus(8, 8, 1, Flux(1, 4));
    CHECK_NOTHROW(build_model(f4, {PairingKind::p_plus_ip, 1.0}, 0.0, {}, Kinetic::magnetic_laplacian));
  }
  SUBCASE("disorder regeneration is bit exact") {
    const LatticeSpec spec = LatticeSpec::torus(6, 6, 2);
    const auto a = DisorderRealization::generate(spec, 2.0, 99);
    const auto b = DisorderRealization::generate(spec, 2.0, 99);
    CHECK(a.values == b.values);
    CHECK(*std::max_element(a.values.begin(), a.values.end()) <= 1.0);
    CHECK(*std::min_element(a.values.begin(), a.values.end()) >= -1.0);
    const BdGModel m = build_model(spec, {PairingKind::s_wave, 1.0}, 0.0, a);
    CHECK(max_abs(ph_conjugate_swap(m.H.matrix()) + m.H.matrix()) <= 1e-12);
  }
}

TEST_CASE("symmetry classification follows the table") {
  auto classify = [](PairingKind k) {
    const PairingSpec ps{k, 1.0};
    const LatticeSpec spec = LatticeSpec::torus(4, 4, ps.spin_required_two_s() + 1);
    return classify_symmetries(build_model(spec, ps, -1.0, DisorderRealization::clean(spec)));
  };
  const SymmetryReport pip = classify(PairingKind::p_plus_ip);
  CHECK(pip.caz == CazClass::D);
  CHECK_FALSE(pip.trs);
  CHECK(pip.phs);
  const SymmetryReport did = classify(PairingKind::d_plus_id);
  CHECK(did.caz == CazClass::C);
  CHECK(did.su2);
  CHECK(did.u1);
  CHECK_FALSE(did.trs);
  const SymmetryReport sp = classify(PairingKind::spinful_p);
  CHECK(sp.caz == CazClass::A);
  CHECK(sp.u1);
  CHECK_FALSE(sp.su2);
  CHECK(classify(PairingKind::triplet_p).caz == CazClass::DIII);
  CHECK(classify(PairingKind::triplet_p).trs_effective_sign == -1);
  CHECK(classify(PairingKind::d_xy).caz == CazClass::CI);
  CHECK(classify(PairingKind::d_x2y2).caz == CazClass::CI);
  CHECK(classify(PairingKind::d_xy).trs_residual <= 1e-12);
  CHECK(classify(PairingKind::d_xy).trs_effective_sign == 1);
  CHECK(classify(PairingKind::p_x).caz == CazClass::AIII);
  CHECK(classify(PairingKind::s_wave).caz == CazClass::CI);
  CHECK_FALSE(classify(PairingKind::s_wave).charge);
}

TEST_CASE("PHS consequences for functional calculus") {
  std::mt19937_64 rng(8);
  const BdGModel m = bdg::testing::random_model(LatticeSpec::torus(4, 4, 2), 1, rng);
  const Matrix f = spectral_function(m.H, [](double e) { return fermi(1.3, e); }).matrix();
  const Matrix one = Matrix::Identity(f.rows(), f.cols());
  CHECK(max_abs(ph_conjugate_swap(f) - (one - f)) <= 1e-12);
}

TEST_CASE("SU(2) reduction") {
  SUBCASE("d+id spin 1/2") {
    const LatticeSpec spec = LatticeSpec::torus(6, 6, 2);
    const BdGModel m = build_model(spec, {PairingKind::d_plus_id, 1.0}, -1.0, DisorderRealization::generate(spec, 0.5, 3));
    const SU2Reduction r = reduce_su2(m);
    CHECK(r.reconstruction_residual <= 1e-12);
    CHECK(max_abs(r.Delta_red - r.Delta_red.transpose()) <= 1e-14);
    const Matrix v1 = site_shift(spec, 1), v2 = site_shift(spec, 2);
    const Matrix expect = 0.5 * (v1 + v1.adjoint() - v2 - v2.adjoint() + I * (v1 - v1.adjoint()) * (v2 - v2.adjoint()));
    CHECK(max_abs(r.Delta_red - expect) <= 1e-14);
    CHECK(r.multiplicity == 1);
    CHECK(r.multiplicity_prime == 1);
    Matrix Iodd(2, 2);
    Iodd << 0, -1, 1, 0;
    const LatticeSpec rs = spec.with_fiber(1, true);
    const Matrix Ifull = kron(Matrix::Identity(rs.sites(), rs.sites()), Iodd);
    const Matrix& hr = r.H_red.matrix();
    CHECK(max_abs(Ifull.adjoint() * hr.conjugate() * Ifull + hr) <= 1e-12);
    const Matrix f = spectral_function(r.H_red, [](double e) { return fermi(2.0, e); }).matrix();
    const Matrix fc = spectral_function(BlockOperator(rs, hr.conjugate(), true), [](double e) { return fermi(2.0, e); }).matrix();
    CHECK(max_abs(Ifull.adjoint() * fc * Ifull - (Matrix::Identity(f.rows(), f.cols()) - f)) <= 1e-12);
    Matrix J(2, 2);
    J << 1, 0, 0, -1;
    const Matrix Jfull = kron(Matrix::Identity(rs.sites(), rs.sites()), J);
    CHECK(max_abs(Jfull.adjoint() * hr * Jfull - r.H_red_prime.matrix()) == 0.0);

    std::vector<double> uni;
    for (int k = 0; k < r.multiplicity; ++k) {
      const auto e = sorted(r.H_red.spectrum().values);
      uni.insert(uni.end(), e.begin(), e.end());
    }
    for (int k = 0; k < r.multiplicity_prime; ++k) {
      const auto e = sorted(r.H_red_prime.spectrum().values);
      uni.insert(uni.end(), e.begin(), e.end());
    }
    std::sort(uni.begin(), uni.end());
    CHECK(max_gap(uni, sorted(m.H.spectrum().values)) <= 1e-10);
  }
  SUBCASE("integer spin synthetic model") {
    const LatticeSpec spec = LatticeSpec::torus(4, 4, 3);
    const LatticeSpec site = spec.with_fiber(1, false);
    const SpinRep rep = build_spin_rep(2);
    const Matrix lap = kinetic_site_matrix(site, Kinetic::laplacian) - 0.3 * Matrix::Identity(16, 16);
    const Matrix v1 = site_shift(site, 1), v2 = site_shift(site, 2);
    const Matrix dred = (v1 - v1.adjoint()) + I * (v2 - v2.adjoint());
    const BdGModel m = model_from_blocks(spec, kron(lap, Matrix::Identity(3, 3)), kron(dred, rep.T_cross));
    CHECK(su2_residual(m.H) <= 1e-12);
    const SU2Reduction r = reduce_su2(m);
    CHECK(max_abs(r.Delta_red + r.Delta_red.transpose()) <= 1e-14);
    CHECK(r.multiplicity == 2);
    CHECK(r.multiplicity_prime == 1);
    std::vector<double> uni;
    for (int k = 0; k < 2; ++k) {
      const auto e = sorted(r.H_red.spectrum().values);
      uni.insert(uni.end(), e.begin(), e.end());
    }
    const auto e = sorted(r.H_red_prime.spectrum().values);
    uni.insert(uni.end(), e.begin(), e.end());
    std::sort(uni.begin(), uni.end());
    CHECK(max_gap(uni, sorted(m.H.spectrum().values)) <= 1e-10);
  }
  SUBCASE("rejects non-invariant input") {
    const LatticeSpec spec = LatticeSpec::torus(4, 4, 2);
    CHECK_THROWS_AS(reduce_su2(build_model(spec, {PairingKind::spinful_p, 1.0}, 0.0, {})), PreconditionError);
  }
}

TEST_CASE("U(1) reduction") {
  SUBCASE("charge conserving blocks") {
    const LatticeSpec spec = LatticeSpec::torus(4, 4, 2);
    const auto dis = DisorderRealization::generate(spec, 1.0, 4);
    const BdGModel m = build_model(spec, {}, 0.2, dis);
    const auto sectors = reduce_u1(m);
    REQUIRE(sectors.size() == 2);
    const LatticeSpec rs = spec.with_fiber(1, true);
    for (int l = 1; l <= 2; ++l) {
      const Matrix& b = sectors[l - 1].matrix();
      CHECK(max_abs(ph_block(rs, b, 0, 1)) == 0.0);
      Matrix hl(16, 16);
      for (int a = 0; a < 16; ++a)
        for (int c = 0; c < 16; ++c) hl(a, c) = m.h(a * 2 + l - 1, c * 2 + l - 1);
      CHECK(max_abs(ph_block(rs, b, 0, 0) - hl) == 0.0);
    }
  }
  SUBCASE("spinful p gives two p-wave sectors") {
    const LatticeSpec spec = LatticeSpec::torus(6, 6, 2);
    const BdGModel m = build_model(spec, {PairingKind::spinful_p, 1.0}, -1.0, {});
    const auto sectors = reduce_u1(m);
    const LatticeSpec rs = spec.with_fiber(1, true);
    const Matrix pip = pairing_matrix(rs, {PairingKind::p_plus_ip, 0.5});
    CHECK(max_abs(ph_block(rs, sectors[0].matrix(), 0, 1) - pip) <= 1e-14);
    CHECK(max_abs(ph_block(rs, sectors[1].matrix(), 0, 1) - pip) <= 1e-14);
    std::vector<double> uni;
    for (const auto& s : sectors) {
      const auto e = sorted(s.spectrum().values);
      uni.insert(uni.end(), e.begin(), e.end());
    }
    std::sort(uni.begin(), uni.end());
    CHECK(max_gap(uni, sorted(m.H.spectrum().values)) <= 1e-10);
  }
  SUBCASE("rejects broken S3") {
    const LatticeSpec spec = LatticeSpec::torus(4, 4, 2);
    CHECK_THROWS_AS(reduce_u1(build_model(spec, {PairingKind::triplet_p, 1.0}, 0.0, {})), PreconditionError);
  }
}
