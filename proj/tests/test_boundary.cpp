#include "bdglab/boundary.hpp"
#include "bdglab/transport.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <doctest.h>

#include <cmath>

using namespace bdg;

namespace {

BdGModel p_wave(int n1, int n2, double mu, PairingKind kind = PairingKind::p_plus_ip, double W = 0.0,
                std::uint64_t seed = 0) {
  const LatticeSpec spec = LatticeSpec::torus(n1, n2, 1);
  const DisorderRealization dis = W > 0.0 ? DisorderRealization::generate(spec, W, seed) : DisorderRealization::clean(spec);
  return build_model(spec, {kind, 1.0}, mu, dis);
}

BdGModel hofstadter(int n1, int n2) {
  const LatticeSpec spec = LatticeSpec::torus(n1, n2, 1, Flux(1, 4));
  return build_model(spec, {}, -2.5, DisorderRealization::clean(spec), Kinetic::magnetic_laplacian);
}

double bulk_chern(const BdGModel& m) { return chern_trace(fermi_projection(m).P).real(); }

}  // namespace

TEST_CASE("spectral windows") {
  const EdgeWindow w = EdgeWindow::bump(0.7, 1.5);
  CHECK(w.integral() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(w.g(0.75) == 0.0);
  CHECK(w.G(-0.8) == 0.0);
  CHECK(w.G(0.8) == 1.0);
  CHECK(w.G(0.0) == doctest::Approx(0.5).epsilon(1e-12));
  double previous = 0.0;
  for (double e = -0.69; e < 0.7; e += 0.01) {
    CHECK(w.g(e) == doctest::Approx(w.g(-e)).epsilon(1e-14));
    CHECK(w.G(e) + w.G(-e) == doctest::Approx(1.0).epsilon(1e-12));
    const double oracle = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double x) { return w.g(x); }, -0.7, e, 10, 1e-13);
    CHECK(w.G(e) == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(w.G(e) >= previous);
    previous = w.G(e);
  }
  CHECK_THROWS_AS(EdgeWindow::bump(0.0), std::invalid_argument);
  CHECK_THROWS_AS(EdgeWindow::bump(1.0, -1.0), std::invalid_argument);

  const SmoothCutoff rho{0.4, 0.8};
  CHECK(rho(0.4) == 1.0);
  CHECK(rho(-0.3) == 1.0);
  CHECK(rho(0.8) == 0.0);
  for (double e = 0.0; e < 1.0; e += 0.05) {
    CHECK(rho(e) == rho(-e));
    CHECK(rho(e) >= 0.0);
    CHECK(rho(e) <= 1.0);
  }

  const ThermalWindow gb{30.0, {0.6, 0.9}};
  CHECK(gb.g(0.1) == doctest::Approx(gb.g(-0.1)).epsilon(1e-14));
  CHECK(gb.integral() == doctest::Approx(gb.integral_without_cutoff()).epsilon(1e-6));
  CHECK(gb.integral_without_cutoff() == doctest::Approx(pi * pi / (6.0 * 900.0)).epsilon(1e-14));
}

TEST_CASE("half-space construction") {
  const BdGModel m = p_wave(8, 12, -1.0);
  CHECK_THROWS_AS(build_half_space(m, 7), PreconditionError);
  CHECK_THROWS_AS(build_half_space(m, 12), PreconditionError);
  HalfSpaceOptions bad_depth;
  bad_depth.depth = 11;
  CHECK_THROWS_AS(build_half_space(m, 10, bad_depth), std::invalid_argument);

  const HalfSpaceModel hs = build_half_space(m, 10);
  CHECK(hs.translation_invariant);
  CHECK(hs.cell == 1);
  CHECK(hs.depth == 5);
  CHECK(hs.H_hat().spec().n2 == 10);
  CHECK(translation_residual(hs.H_hat(), 1) <= 1e-12);

  const HalfSpaceModel dirty = build_half_space(p_wave(8, 12, -1.0, PairingKind::p_plus_ip, 1.0, 4), 10);
  CHECK_FALSE(dirty.translation_invariant);
  CHECK(dirty.cell == 8);
  CHECK(translation_residual(dirty.H_hat(), 1) > 1e-3);

  SUBCASE("restriction keeps the bulk matrix elements") {
    const Matrix& cyl = hs.H_hat().matrix();
    CHECK(max_abs(cyl - m.H.matrix().topLeftCorner(cyl.rows(), cyl.cols())) == 0.0);
  }
  SUBCASE("boundary trace of the identity counts fiber dimension times depth") {
    const LatticeSpec& spec = hs.H_hat().spec();
    const BlockOperator one(spec, Matrix::Identity(spec.dim(), spec.dim()));
    CHECK(boundary_trace(hs, one).real() == doctest::Approx(2.0 * hs.depth).epsilon(1e-14));
  }
  SUBCASE("window reaching the bulk bands is rejected") {
    CHECK_THROWS_AS(edge_current(hs, EdgeWindow::bump(1.2 * hs.bulk_gap)), PreconditionError);
    CHECK_THROWS_AS(winding_number(hs, EdgeWindow::bump(1.2 * hs.bulk_gap)), PreconditionError);
  }
}

TEST_CASE("edge band structure") {
  const HalfSpaceModel topo = build_half_space(p_wave(8, 12, -1.0), 10);
  const EdgeBands b = edge_band_structure(topo, 128);
  const int ch = snap(bulk_chern(p_wave(12, 12, -1.0)));
  CHECK(std::abs(ch) == 1);
  CHECK(b.in_gap_states > 0);
  CHECK(b.chirality_lower == -ch);
  CHECK(b.chirality_upper == ch);
  CHECK(b.min_abs_energy < 0.05 * topo.bulk_gap);

  for (const BdGModel& trivial : {p_wave(8, 12, -5.0), p_wave(8, 12, -5.0, PairingKind::none)}) {
    const EdgeBands t = edge_band_structure(build_half_space(trivial, 10), 128);
    CHECK(t.in_gap_states == 0);
    CHECK(t.chirality_lower == 0);
    CHECK(t.chirality_upper == 0);
  }
  const HalfSpaceModel dirty = build_half_space(p_wave(8, 12, -1.0, PairingKind::p_plus_ip, 1.0, 4), 10);
  CHECK_THROWS_AS(edge_band_structure(dirty), PreconditionError);
}

TEST_CASE("edge current and winding number") {
  const BdGModel bulk = p_wave(12, 12, -1.0);
  const double ch = bulk_chern(bulk);
  const HalfSpaceModel hs = build_half_space(p_wave(8, 12, -1.0), 10);
  const EdgeWindow w1 = EdgeWindow::bump(0.6 * hs.bulk_gap);
  const EdgeWindow w2 = EdgeWindow::bump(0.9 * hs.bulk_gap, 2.0);

  const double j1 = edge_current(hs, w1);
  const double j2 = edge_current(hs, w2);
  CHECK(4.0 * pi * j1 == doctest::Approx(ch).epsilon(3e-2));
  CHECK(j1 == doctest::Approx(j2).epsilon(1e-2));

  SUBCASE("row profile: both edges carry opposite currents") {
    const std::vector<double> rows = edge_current_profile(hs, w1);
    double lower = 0.0, upper = 0.0;
    for (int x2 = 0; x2 < hs.width; ++x2) (x2 < hs.depth ? lower : upper) += rows[static_cast<std::size_t>(x2)];
    CHECK(lower == doctest::Approx(j1).epsilon(1e-12));
    CHECK(upper == doctest::Approx(-j1).epsilon(1e-8));
    HalfSpaceOptions full;
    full.depth = hs.width;
    CHECK(std::abs(edge_current(build_half_space(p_wave(8, 12, -1.0), 10, full), w1)) <= 1e-8);
  }
  SUBCASE("indicator window grows like 2a σ") {
    const double a = 0.5 * hs.bulk_gap;
    CHECK(edge_current_indicator(hs, a) == doctest::Approx(2.0 * a * ch / (4.0 * pi)).epsilon(3e-2));
  }
  SUBCASE("winding number equals 4π ĵ") {
    const WindingResult r = winding_number(hs, w1);
    CHECK(r.value == doctest::Approx(4.0 * pi * j1).epsilon(1e-3));
    CHECK(r.literal == doctest::Approx(-r.value).epsilon(1e-14));
    CHECK(r.integer_snap == snap(ch));
    CHECK(r.deviation <= 1e-2);
    CHECK(r.current == doctest::Approx(j1).epsilon(1e-3));
  }
  SUBCASE("trivial phase") {
    const HalfSpaceModel t = build_half_space(p_wave(8, 12, -5.0), 10);
    const EdgeWindow w = EdgeWindow::bump(0.6 * t.bulk_gap);
    CHECK(std::abs(edge_current(t, w)) <= 1e-8);
    CHECK(winding_number(t, w).integer_snap == 0);
  }
  SUBCASE("disorder") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const HalfSpaceModel d = build_half_space(p_wave(16, 12, -1.0, PairingKind::p_plus_ip, 1.0, seed), 10);
      const EdgeWindow w = EdgeWindow::bump(0.5 * d.bulk_gap);
      const WindingResult r = winding_number(d, w);
      CHECK(r.integer_snap == snap(ch));
      CHECK(r.deviation <= 2e-2);
      CHECK(4.0 * pi * edge_current(d, w) == doctest::Approx(r.value).epsilon(1e-3));
    }
  }
}

TEST_CASE("quarter-plane index") {
  const IndexOptions opts;
  auto index_and_winding = [&](const BdGModel& m) {
    const HalfSpaceModel hs = build_half_space(m, 8);
    const EdgeWindow w = EdgeWindow::bump(0.6 * hs.bulk_gap);
    return std::make_pair(quarter_plane_index(hs, w, opts), winding_number(hs, w));
  };
  SUBCASE("clean p ± ip") {
    const auto [plus, w_plus] = index_and_winding(p_wave(8, 10, -1.0));
    const auto [minus, w_minus] = index_and_winding(p_wave(8, 10, -1.0, PairingKind::p_minus_ip));
    CHECK(plus.method == ChernMethod::fredholm_index);
    CHECK(plus.reliable);
    CHECK(plus.integer_snap == snap(w_plus.literal));
    CHECK(plus.integer_snap == -w_plus.integer_snap);
    CHECK(std::abs(plus.integer_snap) == 1);
    CHECK(plus.deviation <= 2e-2);
    CHECK(minus.integer_snap == -plus.integer_snap);
    CHECK(w_minus.integer_snap == -w_plus.integer_snap);
  }
  SUBCASE("trivial") {
    const auto [t, wt] = index_and_winding(p_wave(8, 10, -5.0));
    CHECK(t.integer_snap == 0);
    CHECK(t.deviation <= 1e-6);
    CHECK(wt.integer_snap == 0);
  }
  SUBCASE("disordered") {
    const auto [d, wd] = index_and_winding(p_wave(16, 10, -1.0, PairingKind::p_plus_ip, 1.0, 1));
    CHECK(d.reliable);
    CHECK(d.integer_snap == -wd.integer_snap);
    CHECK(d.deviation <= 2e-2);
  }
}

TEST_CASE("spin edge current") {
  const LatticeSpec bulk_spec = LatticeSpec::torus(12, 12, 2);
  const BdGModel bulk = build_model(bulk_spec, {PairingKind::d_minus_id, 1.0}, -1.0, DisorderRealization::clean(bulk_spec));
  const double ch_red = chern_trace(fermi_projection(reduce_su2(bulk).H_red).P).real();
  const double closed_form = 2.0 * (4.0 - 1.0) / (48.0 * pi) * ch_red;

  const LatticeSpec spec = LatticeSpec::torus(8, 12, 2);
  const HalfSpaceModel hs =
      build_half_space(build_model(spec, {PairingKind::d_minus_id, 1.0}, -1.0, DisorderRealization::clean(spec)), 10);
  const SpinEdgeResult r = spin_edge_current(hs, EdgeWindow::bump(0.5 * hs.bulk_gap));
  CHECK(snap(ch_red) == 2);
  CHECK(r.total == doctest::Approx(closed_form).epsilon(3e-2));
  CHECK(r.sector_sum == doctest::Approx(r.total).epsilon(1e-10));
  REQUIRE(r.sector_weight.size() == 2);
  CHECK(r.sector_weight[0] == 0.25);
  CHECK(r.sector_weight[1] == 0.25);

  const HalfSpaceModel trivial =
      build_half_space(build_model(spec, {PairingKind::d_minus_id, 1.0}, -5.0, DisorderRealization::clean(spec)), 10);
  CHECK(std::abs(spin_edge_current(trivial, EdgeWindow::bump(0.5 * trivial.bulk_gap)).total) <= 1e-8);

  const HalfSpaceModel spinless = build_half_space(p_wave(8, 12, -1.0), 10);
  CHECK_THROWS_AS(spin_edge_current(spinless, EdgeWindow::bump(0.5)), PreconditionError);
}

TEST_CASE("thermal edge current") {
  const BdGModel bulk = p_wave(12, 12, -1.0);
  const double ch = bulk_chern(bulk);
  const HalfSpaceModel hs = build_half_space(p_wave(8, 12, -1.0), 10);
  const double T = hs.bulk_gap / 20.0;
  const ThermalEdgeResult r = thermal_edge_current(hs, 1.0 / T);
  CHECK(r.window_integral == doctest::Approx(pi * pi * T * T / 6.0).epsilon(1e-6));
  CHECK(r.j_H_over_T2 == doctest::Approx(pi / 24.0 * ch).epsilon(3e-2));
  const double gap = fermi_projection(bulk).gap;
  const ThermalResult kappa = kappa_thermal(ChernProfile(bulk.H), 1.0 / T, EnergyGrid::for_temperature(1.0 / T, gap));
  CHECK(r.kappa_hat_over_T == doctest::Approx(kappa.per_T).epsilon(3e-2));

  CHECK_THROWS_AS(thermal_edge_current(hs, 8.0 / hs.bulk_gap), PreconditionError);
  const HalfSpaceModel trivial = build_half_space(p_wave(8, 12, -5.0), 10);
  CHECK(std::abs(thermal_edge_current(trivial, 20.0 / trivial.bulk_gap).j_H_over_T2) <= 1e-6);
}

TEST_CASE("charge and thermoelectric edge responses") {
  const double ch_p = chern_trace(fermi_projection(hofstadter(16, 16).h).P).real();
  const HalfSpaceModel hs = build_half_space(hofstadter(8, 28), 24);
  const EdgeWindow w = EdgeWindow::bump(0.5 * hs.bulk_gap);
  const double j = edge_current(hs, w);
  const double jq = charge_edge_current(hs, w);
  CHECK(jq == doctest::Approx(j).epsilon(1e-10));
  CHECK(jq == doctest::Approx(ch_p / (2.0 * pi)).epsilon(3e-2));

  const double delta = 0.25 * hs.bulk_gap;
  CHECK(std::abs(thermoelectric_edge_check(hs, delta)) <= 1e-6);
  const double mu_prime = 0.1;
  CHECK(thermoelectric_edge_check(hs, delta, mu_prime) ==
        doctest::Approx(-mu_prime * 2.0 * delta * ch_p / (2.0 * pi)).epsilon(3e-2));

  CHECK_THROWS_AS(charge_edge_current(build_half_space(p_wave(8, 12, -1.0), 10), w), PreconditionError);
}
