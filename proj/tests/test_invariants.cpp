#include "bdglab/invariants.hpp"
#include "test_util.hpp"

#include <doctest.h>

using namespace bdg;

namespace {

BdGModel preset(int n, PairingKind kind, int L, double mu, double W = 0.0, std::uint64_t seed = 0) {
  const LatticeSpec spec = LatticeSpec::torus(n, n, L);
  const DisorderRealization dis =
      W > 0.0 ? DisorderRealization::generate(spec, W, seed) : DisorderRealization::clean(spec);
  return build_model(spec, {kind, 1.0}, mu, dis);
}

// Chern number of the lower band of the p+ip Bloch Hamiltonian from plaquette
// Berry phases. With A_j = ⟨u|∂_j u⟩ the curvature integral equals the sum of
// log plaquette products, and Ch = (i/2π)∫Ω = −(1/2π) Σ arg(plaquette).
double plaquette_chern_p_plus_ip(double mu, int grid) {
  auto lower = [mu](double k1, double k2) {
    const cplx h = 2.0 * std::cos(k1) + 2.0 * std::cos(k2) - mu;
    const cplx d = cplx(2.0 * std::sin(k2), -2.0 * std::sin(k1));
    Eigen::Matrix2cd H;
    H << h, d, std::conj(d), -h;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(H);
    return Eigen::Vector2cd(es.eigenvectors().col(0));
  };
  const double dk = 2.0 * pi / grid;
  std::vector<Eigen::Vector2cd> u(static_cast<std::size_t>(grid * grid));
  for (int a = 0; a < grid; ++a) {
    for (int b = 0; b < grid; ++b) u[static_cast<std::size_t>(a * grid + b)] = lower(a * dk, b * dk);
  }
  auto at = [&](int a, int b) -> const Eigen::Vector2cd& {
    return u[static_cast<std::size_t>(((a + grid) % grid) * grid + (b + grid) % grid)];
  };
  double total = 0.0;
  for (int a = 0; a < grid; ++a) {
    for (int b = 0; b < grid; ++b) {
      const cplx p = at(a, b).dot(at(a + 1, b)) * at(a + 1, b).dot(at(a + 1, b + 1)) *
                     at(a + 1, b + 1).dot(at(a, b + 1)) * at(a, b + 1).dot(at(a, b));
      total += std::arg(p);
    }
  }
  return -total / (2.0 * pi);
}

}  // namespace

TEST_CASE("Fermi projection") {
  SUBCASE("two-level toy") {
    const LatticeSpec spec = LatticeSpec::torus(1, 1, 1);
    Matrix h(2, 2);
    h << 1, 0, 0, -1;
    const FermiProjection fp = fermi_projection(BlockOperator(spec, h, true));
    Matrix expected = Matrix::Zero(2, 2);
    expected(1, 1) = 1.0;
    CHECK(max_abs(fp.P.matrix() - expected) <= 1e-15);
    CHECK(fp.gap == doctest::Approx(1.0));
  }
  SUBCASE("zero mode is rejected with its eigenvalue") {
    const LatticeSpec spec = LatticeSpec::torus(1, 1, 1);
    Matrix h = Matrix::Zero(2, 2);
    try {
      fermi_projection(BlockOperator(spec, h, true));
      FAIL("expected rejection");
    } catch (const PreconditionError& e) {
      CHECK(std::string(e.what()).find("E = 0") != std::string::npos);
    }
  }
  SUBCASE("gapped p+ip") {
    const BdGModel m = preset(12, PairingKind::p_plus_ip, 1, -1.0);
    const FermiProjection fp = fermi_projection(m);
    const Matrix& P = fp.P.matrix();
    const Matrix K = ph_swap(m.spec);
    CHECK(fp.gap > 0.5);
    CHECK(std::isfinite(fp.loc_metric));
    CHECK(max_abs(P * P - P) <= 1e-11);
    CHECK(hermitian_residual(P) <= 1e-11);
    CHECK(max_abs(K * P.conjugate() * K + P - Matrix::Identity(P.rows(), P.cols())) <= 1e-11);
  }
}

TEST_CASE("realspace Chern number") {
  SUBCASE("p+ip phases on 16x16") {
    const ChernResult topo = chern_realspace(fermi_projection(preset(16, PairingKind::p_plus_ip, 1, -1.0)));
    CHECK(std::abs(std::abs(topo.value) - 1.0) <= 1e-2);
    CHECK(topo.imaginary_residue <= 1e-10);
    CHECK(topo.reliable);
    const ChernResult trivial = chern_realspace(fermi_projection(preset(16, PairingKind::p_plus_ip, 1, -5.0)));
    CHECK(std::abs(trivial.value) <= 1e-2);
    CHECK(trivial.integer_snap == 0);
  }
  SUBCASE("agrees with the plaquette Berry phase of the Bloch Hamiltonian") {
    for (double mu : {-1.0, 1.0, -5.0}) {
      const double oracle = plaquette_chern_p_plus_ip(mu, 48);
      CHECK(std::abs(oracle - std::round(oracle)) <= 1e-9);
      const ChernResult c = chern_realspace(fermi_projection(preset(16, PairingKind::p_plus_ip, 1, mu)));
      CHECK(c.integer_snap == snap(oracle));
    }
  }
  SUBCASE("real normal Hamiltonian has zero Chern number") {
    const LatticeSpec spec = LatticeSpec::torus(10, 10, 1);
    const BdGModel m = build_model(spec, {}, -0.7, DisorderRealization::clean(spec));
    CHECK(std::abs(chern_realspace(fermi_projection(m)).value) <= 1e-12);
  }
  SUBCASE("orientation swap flips the sign") {
    const FermiProjection fp = fermi_projection(preset(12, PairingKind::p_plus_ip, 1, -1.5));
    CHECK(std::abs(chern_trace(fp.P) + chern_trace_swapped(fp.P)) <= 1e-13);
  }
  SUBCASE("finite-size estimate") {
    auto factory = [](const LatticeSpec& s) {
      return build_model(s, {PairingKind::p_plus_ip, 1.0}, -1.0, DisorderRealization::clean(s));
    };
    const ChernResult c = chern_realspace(factory, LatticeSpec::torus(16, 16, 1));
    CHECK(std::isfinite(c.finite_size_error));
    CHECK(c.finite_size_error < 5e-2);
    CHECK(c.finite_size_error > 0.0);
  }
  SUBCASE("cylinder is rejected") {
    const LatticeSpec spec = LatticeSpec::cylinder(8, 8, 1);
    const BdGModel m = build_model(spec, {PairingKind::p_plus_ip, 1.0}, -1.0, DisorderRealization::clean(spec));
    CHECK_THROWS_AS(chern_realspace(fermi_projection(m)), PreconditionError);
  }
}

TEST_CASE("index pairing with the Dirac phase") {
  SUBCASE("Dirac phase is unimodular and centred") {
    const LatticeSpec spec = LatticeSpec::torus(6, 6, 1);
    const Vector f = dirac_phase(spec, {0.5, 0.5});
    CHECK((f.cwiseAbs().array() - 1.0).abs().maxCoeff() <= 1e-15);
    // site (1, 0) sits at (1/2, −1/2) relative to the origin
    CHECK(std::abs(f(spec.index(1, 0, 0, 0)) - cplx(1.0, -1.0) / std::sqrt(2.0)) <= 1e-15);
    CHECK_THROWS_AS(dirac_phase(spec, {0.0, 0.5}), PreconditionError);
  }
  SUBCASE("topological and trivial phases") {
    for (double mu : {-1.0, 1.0, -5.0}) {
      const FermiProjection fp = fermi_projection(preset(16, PairingKind::p_plus_ip, 1, mu));
      CHECK(chern_index(fp).integer_snap == chern_realspace(fp).integer_snap);
    }
  }
  SUBCASE("reliability band ignores vectors away from the origin") {
    const FermiProjection fp = fermi_projection(preset(16, PairingKind::p_plus_ip, 1, -1.0));
    const ChernResult local = chern_index(fp);
    CHECK(local.reliable);
    CHECK(local.min_singular_gap >= 0.05);
    IndexOptions all;
    all.band_weight = 0.0;
    const ChernResult global = chern_index(fp, all);
    CHECK(global.value == local.value);
    CHECK(global.min_singular_gap <= local.min_singular_gap);
  }
  SUBCASE("disordered ensemble") {
    std::vector<int> values;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const FermiProjection fp = fermi_projection(preset(16, PairingKind::p_plus_ip, 1, -1.0, 1.0, seed));
      const ChernResult idx = chern_index(fp);
      CHECK(idx.deviation < 0.1);
      values.push_back(idx.integer_snap);
      CHECK(idx.integer_snap == chern_realspace(fp).integer_snap);
    }
    CHECK(std::all_of(values.begin(), values.end(), [&](int v) { return v == values.front(); }));
  }
}

TEST_CASE("energy-resolved Chern numbers") {
  const BdGModel m = preset(12, PairingKind::p_plus_ip, 1, -1.0);
  const ChernProfile profile(m.H);
  const FermiProjection fp = fermi_projection(m);
  CHECK(profile.chern_at(0.0) == doctest::Approx(chern_trace(fp.P).real()).epsilon(1e-13));
  CHECK(profile.occupation(-100.0) == 0);
  CHECK(profile.occupation(100.0) == m.H.dim());
  CHECK(profile.chern_at(-100.0) == 0.0);
  CHECK(profile.chern_at(100.0) == 0.0);
  // inside the gap the value is constant
  CHECK(profile.chern_at(-0.5) == profile.chern_at(0.5));
}

TEST_CASE("Chern relations from symmetries") {
  SUBCASE("charge conservation: Ch(P) = 2 Ch(p)") {
    const LatticeSpec spec = LatticeSpec::torus(16, 16, 1, Flux(1, 4));
    const BdGModel m = build_model(spec, {}, -2.5, DisorderRealization::clean(spec), Kinetic::magnetic_laplacian);
    const ChernRelations r = chern_relations(m);
    const RelationCheck* c = r.find("charge");
    REQUIRE(c != nullptr);
    CHECK(c->deviation <= 1e-10);
    CHECK(std::abs(c->parts[0] - std::round(c->parts[0])) <= 2e-2);
    CHECK(snap(c->parts[0]) != 0);
  }
  SUBCASE("SU(2): d+id") {
    const ChernRelations r = chern_relations(preset(12, PairingKind::d_plus_id, 2, -1.0));
    const RelationCheck* c = r.find("su2");
    REQUIRE(c != nullptr);
    CHECK(c->deviation <= 1e-8);
    CHECK(std::abs(r.chern - 2.0 * c->parts[0]) <= 1e-8);
    CHECK(snap(c->parts[0]) % 2 == 0);
    CHECK(snap(c->parts[0]) != 0);
    const RelationCheck* u = r.find("u1");
    REQUIRE(u != nullptr);
    CHECK(u->deviation <= 1e-8);
    CHECK(r.find("trs") == nullptr);
  }
  SUBCASE("time reversal: d_xy") {
    const ChernRelations r = chern_relations(preset(10, PairingKind::d_xy, 2, -1.0));
    const RelationCheck* c = r.find("trs");
    REQUIRE(c != nullptr);
    CHECK(std::abs(r.chern) <= 1e-2);
    CHECK(c->holds);
  }
}
