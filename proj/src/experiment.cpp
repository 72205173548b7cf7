#include "bdglab/experiment.hpp"

#include "bdglab/boundary.hpp"
#include "bdglab/currents.hpp"
#include "bdglab/fock.hpp"
#include "bdglab/invariants.hpp"
#include "bdglab/transport.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#ifndef BDGLAB_BUILD_ID
#define BDGLAB_BUILD_ID "unknown"
#endif

namespace bdg::experiment {

namespace {

// ------------------------------------------------------------ schema ----

enum class FieldType { number, integer, boolean, string, numbers, integers, strings, beta, windows, optional_integer };

struct Field {
  const char* name;
  FieldType type;
  json fallback;
};

bool is_number_array(const json& v) {
  return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); });
}

bool is_integer_array(const json& v) {
  return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number_integer(); });
}

bool matches(const json& v, FieldType t) {
  switch (t) {
    case FieldType::number: return v.is_number();
    case FieldType::integer: return v.is_number_integer();
    case FieldType::boolean: return v.is_boolean();
    case FieldType::string: return v.is_string();
    case FieldType::numbers: return is_number_array(v) && !v.empty();
    case FieldType::integers: return is_integer_array(v);
    case FieldType::strings:
      return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_string(); });
    case FieldType::beta: return v.is_number() || (v.is_string() && v.get<std::string>() == "inf");
    case FieldType::windows:
      return v.is_array() && !v.empty() &&
             std::all_of(v.begin(), v.end(), [](const json& w) { return is_number_array(w) && w.size() == 2; });
    case FieldType::optional_integer: return v.is_null() || v.is_number_integer();
  }
  return false;
}

const char* type_name(FieldType t) {
  switch (t) {
    case FieldType::number: return "a number";
    case FieldType::integer: return "an integer";
    case FieldType::boolean: return "a boolean";
    case FieldType::string: return "a string";
    case FieldType::numbers: return "a non-empty array of numbers";
    case FieldType::integers: return "an array of integers";
    case FieldType::strings: return "an array of strings";
    case FieldType::beta: return "a positive number or \"inf\"";
    case FieldType::windows: return "a non-empty array of [half_width_fraction, sharpness] pairs";
    case FieldType::optional_integer: return "an integer or null";
  }
  return "?";
}

/// Checks keys and types of `doc` and returns it merged over the defaults.
json validate_block(const json& doc, const std::string& where, const std::vector<Field>& fields) {
  if (!doc.is_object()) throw SchemaError(where + " must be an object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const bool known = std::any_of(fields.begin(), fields.end(), [&](const Field& f) { return it.key() == f.name; });
    if (!known) throw SchemaError("unknown key '" + it.key() + "' in " + where);
  }
  json out = json::object();
  for (const Field& f : fields) {
    if (doc.contains(f.name)) {
      const json& v = doc.at(f.name);
      if (!matches(v, f.type)) throw SchemaError(where + "." + f.name + " must be " + type_name(f.type));
      out[f.name] = v;
    } else {
      out[f.name] = f.fallback;
    }
  }
  return out;
}

const std::vector<Field>& task_fields(TaskKind k) {
  static const std::map<TaskKind, std::vector<Field>> table = {
      {TaskKind::chern_realspace,
       {{"tolerance", FieldType::number, 1e-2},
        {"finite_size", FieldType::boolean, true},
        {"shrink", FieldType::integer, 4},
        {"loc_threshold", FieldType::number, default_loc_threshold}}},
      {TaskKind::chern_index,
       {{"tolerance", FieldType::number, 1e-2},
        {"threshold", FieldType::number, 0.5},
        {"band", FieldType::number, 0.05}}},
      {TaskKind::symmetry_report, {{"tolerance", FieldType::number, 1e-10}}},
      {TaskKind::edge_current,
       {{"windows", FieldType::windows, json::array({json::array({0.6, 1.0}), json::array({0.9, 2.0})})},
        {"tolerance", FieldType::number, 0.05},
        {"window_agreement", FieldType::number, 0.01},
        {"depth", FieldType::optional_integer, nullptr},
        {"k_resolution", FieldType::integer, 512},
        {"compare_bulk", FieldType::boolean, true}}},
      {TaskKind::winding,
       {{"window", FieldType::numbers, json::array({0.6, 1.0})},
        {"tolerance", FieldType::number, 0.05},
        {"quarter_plane", FieldType::boolean, false},
        {"circumference", FieldType::integer, 96},
        {"depth", FieldType::optional_integer, nullptr},
        {"k_resolution", FieldType::integer, 512},
        {"compare_bulk", FieldType::boolean, true}}},
      {TaskKind::kubo_sweep,
       {{"deltas", FieldType::numbers, json::array({1e-1, 1e-2, 1e-3})},
        {"beta", FieldType::beta, "inf"},
        {"perturbation", FieldType::string, "gravitational"},
        {"direction", FieldType::integer, 2},
        {"tolerance", FieldType::number, 0.02},
        {"onsager", FieldType::boolean, false}}},
      {TaskKind::thermal,
       {{"temperatures_over_gap", FieldType::numbers, json::array({0.025, 0.05, 0.1})},
        {"tolerance", FieldType::number, 0.02},
        {"alpha", FieldType::boolean, false},
        {"edge", FieldType::boolean, false}}},
      {TaskKind::spin_hall, {{"tolerance", FieldType::number, 1e-8}}},
      {TaskKind::oracle_check,
       {{"betas", FieldType::numbers, json::array({0.5, 5.0})},
        {"pairs", FieldType::integer, 200},
        {"pair_modes", FieldType::integer, 6},
        {"max_modes", FieldType::integer, 10},
        {"tolerance", FieldType::number, 1e-10},
        {"commutator_tolerance", FieldType::number, 1e-12}}},
      {TaskKind::continuity_check,
       {{"tolerance", FieldType::number, 1e-11},
        {"beta", FieldType::number, 5.0},
        {"equilibrium_tolerance", FieldType::number, 1e-12}}},
  };
  return table.at(k);
}

const std::vector<TaskKind>& all_task_kinds() {
  static const std::vector<TaskKind> kinds = {
      TaskKind::chern_realspace, TaskKind::chern_index, TaskKind::symmetry_report, TaskKind::edge_current,
      TaskKind::winding,         TaskKind::kubo_sweep,  TaskKind::thermal,         TaskKind::spin_hall,
      TaskKind::oracle_check,    TaskKind::continuity_check};
  return kinds;
}

double beta_of(const json& v) {
  return v.is_string() ? std::numeric_limits<double>::infinity() : v.get<double>();
}

// ------------------------------------------------------------ models ----

struct ModelParams {
  PairingKind pairing = PairingKind::none;
  double amplitude = 1.0;
  double mu = 0.0;
  int fiber_L = 1;
  Flux flux{};
  Kinetic kinetic = Kinetic::laplacian;
  int n1 = 0, n2 = 0;
  std::optional<int> width;
  double W = 0.0;
  bool spin_resolved = false;
  std::string ensemble_id;
};

ModelParams model_params(const ExperimentConfig& cfg) {
  ModelParams p;
  p.pairing = parse_pairing(cfg.model.at("preset").get<std::string>());
  p.amplitude = cfg.model.at("amplitude").get<double>();
  p.mu = cfg.model.at("mu").get<double>();
  p.fiber_L = static_cast<int>(std::lround(2.0 * cfg.model.at("spin").get<double>())) + 1;
  p.flux = Flux::parse(cfg.model.at("flux").get<std::string>());
  p.kinetic = parse_kinetic(cfg.model.at("kinetic").get<std::string>());
  p.n1 = cfg.lattice.at("n1").get<int>();
  p.n2 = cfg.lattice.at("n2").get<int>();
  if (!cfg.lattice.at("width").is_null()) p.width = cfg.lattice.at("width").get<int>();
  p.W = cfg.disorder.at("W").get<double>();
  p.spin_resolved = cfg.disorder.at("spin_resolved").get<bool>();
  p.ensemble_id = cfg.disorder.at("ensemble_id").get<std::string>();
  return p;
}

BdGModel build(const ModelParams& p, const LatticeSpec& spec, std::optional<std::uint64_t> seed) {
  const DisorderRealization dis = seed ? DisorderRealization::generate(spec, p.W, *seed, p.ensemble_id, p.spin_resolved)
                                       : DisorderRealization::clean(spec);
  return build_model(spec, {p.pairing, p.amplitude}, p.mu, dis, p.kinetic);
}

LatticeSpec torus_of(const ModelParams& p) { return LatticeSpec::torus(p.n1, p.n2, p.fiber_L, p.flux); }

HalfSpaceModel half_space(const ModelParams& p, const BdGModel& m, const json& params) {
  if (!p.width) throw SchemaError("edge tasks need lattice.width");
  HalfSpaceOptions o;
  if (!params.at("depth").is_null()) o.depth = params.at("depth").get<int>();
  o.k_resolution = params.at("k_resolution").get<int>();
  return build_half_space(m, *p.width, o);
}

// ------------------------------------------------------------- tasks ----

using Table = std::pair<std::vector<std::string>, std::vector<std::vector<double>>>;

json chern_json(const ChernResult& r) {
  json o;
  o["primary"] = r.value;
  o["integer"] = r.integer_snap;
  o["deviation"] = r.deviation;
  o["method"] = to_string(r.method);
  o["reliable"] = r.reliable;
  if (r.method == ChernMethod::realspace_trace) o["imaginary_residue"] = r.imaginary_residue;
  if (!std::isnan(r.finite_size_error)) o["finite_size_error"] = r.finite_size_error;
  if (!std::isnan(r.min_singular_gap)) o["min_singular_gap"] = r.min_singular_gap;
  if (!r.note.empty()) o["note"] = r.note;
  return o;
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

void task_chern_realspace(const ModelParams& p, std::optional<std::uint64_t> seed, const json& q, ResultRecord& r) {
  const double loc = q.at("loc_threshold").get<double>();
  ChernResult c;
  if (q.at("finite_size").get<bool>()) {
    c = chern_realspace([&](const LatticeSpec& s) { return build(p, s, seed); }, torus_of(p), q.at("shrink").get<int>(),
                        loc);
  } else {
    c = chern_realspace(fermi_projection(build(p, torus_of(p), seed)), loc);
  }
  r.outputs = chern_json(c);
  r.tolerances = {{"deviation", q.at("tolerance")}};
  r.pass = c.reliable && c.deviation <= q.at("tolerance").get<double>();
  r.provenance = "invariants/chern_realspace: 2πi 𝒯(P[∇₁P, ∇₂P])";
}

void task_chern_index(const ModelParams& p, std::optional<std::uint64_t> seed, const json& q, ResultRecord& r) {
  IndexOptions o;
  o.threshold = q.at("threshold").get<double>();
  o.band = q.at("band").get<double>();
  const ChernResult c = chern_index(fermi_projection(build(p, torus_of(p), seed)), o);
  r.outputs = chern_json(c);
  r.tolerances = {{"deviation", q.at("tolerance")}, {"singular_band", o.band}};
  r.pass = c.reliable && c.deviation <= q.at("tolerance").get<double>();
  r.provenance = "invariants/chern_index: singular values of P F P below the threshold";
}

void task_symmetry_report(const ModelParams& p, std::optional<std::uint64_t> seed, const json& q, ResultRecord& r) {
  const double tol = q.at("tolerance").get<double>();
  const SymmetryReport s = classify_symmetries(build(p, torus_of(p), seed), tol);
  r.outputs = {{"primary", s.phs_residual},
               {"caz_class", to_string(s.caz)},
               {"phs", s.phs},
               {"phs_residual", s.phs_residual},
               {"trs", s.trs},
               {"trs_residual", s.trs_residual},
               {"trs_square", s.trs_square},
               {"u1", s.u1},
               {"u1_residual", s.u1_residual},
               {"su2", s.su2},
               {"su2_residual", s.su2_residual},
               {"charge", s.charge},
               {"charge_residual", s.charge_residual}};
  r.tolerances = {{"residual", tol}};
  r.pass = s.phs;
  r.provenance = "bdg-models/classify_symmetries";
}

double bulk_chern_of(const BdGModel& m) { return chern_trace(fermi_projection(m).P).real(); }

void task_edge_current(const ModelParams& p, std::optional<std::uint64_t> seed, const json& q, ResultRecord& r) {
  const BdGModel m = build(p, torus_of(p), seed);
  const HalfSpaceModel hs = half_space(p, m, q);
  json currents = json::array(), scaled = json::array();
  std::vector<EdgeWindow> windows;
  for (const json& w : q.at("windows")) {
    windows.push_back(EdgeWindow::bump(w.at(0).get<double>() * hs.bulk_gap, w.at(1).get<double>()));
    const double j = edge_current(hs, windows.back());
    currents.push_back(j);
    scaled.push_back(4.0 * pi * j);
  }
  const double first = scaled.at(0).get<double>();
  double spread = 0.0;
  for (const json& s : scaled) spread = std::max(spread, rel_diff(s.get<double>(), first));
  const double tol = q.at("tolerance").get<double>();
  const int k = snap(first);
  bool pass = std::abs(first - k) <= tol && spread <= q.at("window_agreement").get<double>();
  r.outputs = {{"primary", first},     {"integer", k},          {"edge_current", currents},
               {"four_pi_j", scaled},  {"window_spread", spread}, {"bulk_gap", hs.bulk_gap},
               {"cell", hs.cell},      {"bloch_phases", hs.phases}, {"depth", hs.depth}};
  if (q.at("compare_bulk").get<bool>()) {
    const double ch = bulk_chern_of(m);
    r.outputs["bulk_chern"] = ch;
    pass = pass && snap(ch) == k;
  }
  const std::vector<double> profile = edge_current_profile(hs, windows.front());
  Table t{{"x2", "edge_current_density"}, {}};
  for (std::size_t x2 = 0; x2 < profile.size(); ++x2) t.second.push_back({static_cast<double>(x2), profile[x2]});
  r.tables.emplace_back("profile", std::move(t));
  r.tolerances = {{"integer", tol}, {"window_agreement", q.at("window_agreement")}};
  r.pass = pass;
  r.provenance = "boundary/edge_current: −½ 𝒯̂(g(Ĥ)∇₁Ĥ), Bloch-averaged cylinder";
}

void task_winding(const ModelParams& p, std::optional<std::uint64_t> seed, const json& q, ResultRecord& r) {
  const BdGModel m = build(p, torus_of(p), seed);
  const HalfSpaceModel hs = half_space(p, m, q);
  const json& wspec = q.at("window");
  if (wspec.size() != 2) throw SchemaError("winding.window must be [half_width_fraction, sharpness]");
  const EdgeWindow w = EdgeWindow::bump(wspec.at(0).get<double>() * hs.bulk_gap, wspec.at(1).get<double>());
  const WindingResult wr = winding_number(hs, w);
  const double tol = q.at("tolerance").get<double>();
  bool pass = wr.deviation <= tol;
  r.outputs = {{"primary", wr.value},  {"integer", wr.integer_snap}, {"deviation", wr.deviation},
               {"literal", wr.literal}, {"edge_current", wr.current}, {"bulk_gap", hs.bulk_gap}};
  if (q.at("quarter_plane").get<bool>()) {
    const ChernResult qp = quarter_plane_index(hs, w, {}, q.at("circumference").get<int>());
    r.outputs["quarter_plane_index"] = qp.value;
    r.outputs["quarter_plane_integer"] = qp.integer_snap;
    r.outputs["quarter_plane_reliable"] = qp.reliable;
    pass = pass && qp.reliable && qp.integer_snap == snap(wr.literal);
  }
  if (q.at("compare_bulk").get<bool>()) {
    const double ch = bulk_chern_of(m);
    r.outputs["bulk_chern"] = ch;
    pass = pass && snap(ch) == wr.integer_snap;
  }
  r.tolerances = {{"deviation", tol}};
  r.pass = pass;
  r.provenance = "boundary/winding_number: −i 𝒯̂((Û* − 1)∇₁Û), Û = exp(−2πi G(Ĥ))";
}

void task_kubo_sweep(const ModelParams& p, std::optional<std::uint64_t> seed, const json& q, ResultRecord& r) {
  const BdGModel m = build(p, torus_of(p), seed);
  KuboConfig kc;
  kc.beta = beta_of(q.at("beta"));
  kc.perturbation = parse_perturbation(q.at("perturbation").get<std::string>());
  const int dir = q.at("direction").get<int>();
  double reference = 0.0;
  std::string ref_name;
  switch (kc.perturbation) {
    case Perturbation::gravitational:
      reference = sigma_zero_temperature(fermi_projection(m));
      ref_name = "Ch/4π";
      break;
    case Perturbation::electric:
      reference = chern_trace(fermi_projection(m.h).P).real() / (2.0 * pi);
      ref_name = "Ch(p)/2π";
      break;
    case Perturbation::zeeman:
      reference = sigma_spin(m).sigma;
      ref_name = "spin Hall sector sum";
      break;
    case Perturbation::thermal_gradient:
      throw SchemaError("kubo_sweep.perturbation thermal_gradient is computed by the thermal task");
  }
  const int sign = dir == 2 ? 1 : -1;
  Table t{{"delta", "sigma", "reference"}, {}};
  double last = 0.0, smallest = std::numeric_limits<double>::infinity();
  json sigmas = json::array();
  for (const json& d : q.at("deltas")) {
    kc.delta = d.get<double>();
    const double s = kubo_sigma(m, kc, dir);
    sigmas.push_back(s);
    t.second.push_back({kc.delta, s, sign * reference});
    if (kc.delta < smallest) {
      smallest = kc.delta;
      last = s;
    }
  }
  const double tol = q.at("tolerance").get<double>();
  const double target = sign * reference;
  r.outputs = {{"primary", last}, {"sigma", sigmas}, {"reference", target}, {"reference_kind", ref_name},
               {"smallest_delta", smallest}};
  bool pass = std::abs(target) > 1e-12 ? rel_diff(last, target) <= tol : std::abs(last) <= tol;
  if (q.at("onsager").get<bool>()) {
    kc.delta = smallest;
    const double other = kubo_sigma(m, kc, 3 - dir);
    r.outputs["onsager_residual"] = std::abs(last + other);
  }
  r.tables.emplace_back("sigma_vs_delta", std::move(t));
  r.tolerances = {{"relative", tol}};
  r.pass = pass;
  r.provenance = "transport/kubo_sigma: Liouvillian resolvent in the eigenbasis of H";
}

void task_thermal(const ModelParams& p, std::optional<std::uint64_t> seed, const json& q, ResultRecord& r) {
  const BdGModel m = build(p, torus_of(p), seed);
  const FermiProjection fp = fermi_projection(m);
  const ChernProfile profile(m.H);
  const double reference = pi / 12.0 * profile.chern_at(0.0);
  const bool with_alpha = q.at("alpha").get<bool>();
  const bool with_edge = q.at("edge").get<bool>();
  std::optional<HalfSpaceModel> hs;
  if (with_edge) {
    json hp = {{"depth", nullptr}, {"k_resolution", 512}};
    hs = half_space(p, m, hp);
  }
  std::vector<std::string> header{"T", "kappa_over_T", "reference"};
  if (with_alpha) header.push_back("alpha");
  if (with_edge) {
    header.push_back("edge_jH_over_T2");
    header.push_back("edge_kappa_over_T");
  }
  Table t{header, {}};
  const double tol = q.at("tolerance").get<double>();
  double worst = 0.0;
  json per_T = json::array();
  for (const json& x : q.at("temperatures_over_gap")) {
    const double T = x.get<double>() * fp.gap;
    const double beta = 1.0 / T;
    const EnergyGrid grid = EnergyGrid::for_temperature(beta, fp.gap);
    const ThermalResult k = kappa_thermal(profile, beta, grid);
    std::vector<double> row{T, k.per_T, reference};
    if (with_alpha) row.push_back(alpha_thermoelectric(profile, beta, grid).value);
    if (with_edge) {
      const ThermalEdgeResult e = thermal_edge_current(*hs, beta);
      row.push_back(e.j_H_over_T2);
      row.push_back(e.kappa_hat_over_T);
    }
    worst = std::max(worst, std::abs(reference) > 1e-12 ? rel_diff(k.per_T, reference) : std::abs(k.per_T));
    per_T.push_back(k.per_T);
    t.second.push_back(std::move(row));
  }
  r.outputs = {{"primary", per_T.at(0)}, {"kappa_over_T", per_T}, {"reference", reference},
               {"worst_relative_deviation", worst}, {"gap", fp.gap}};
  r.tables.emplace_back("kappa_over_T", std::move(t));
  r.tolerances = {{"relative", tol}};
  r.pass = worst <= tol;
  r.provenance = "transport/kappa_thermal: ∫ E² (−f′) Ch(P_E) on a Gauss-Legendre grid";
}

void task_spin_hall(const ModelParams& p, std::optional<std::uint64_t> seed, const json& q, ResultRecord& r) {
  const SpinHallResult s = sigma_spin(build(p, torus_of(p), seed));
  const double tol = q.at("tolerance").get<double>();
  bool pass = std::abs(s.sigma - s.sigma_direct) <= tol;
  r.outputs = {{"primary", s.sigma},
               {"sigma_direct", s.sigma_direct},
               {"sector_chern", s.sector_chern},
               {"weights", s.weights},
               {"four_pi_sigma", 4.0 * pi * s.sigma}};
  if (s.sigma_closed_form) {
    r.outputs["chern_red"] = *s.chern_red;
    r.outputs["sigma_closed_form"] = *s.sigma_closed_form;
    r.outputs["chern_red_even"] = *s.chern_red_even;
    pass = pass && std::abs(s.sigma - *s.sigma_closed_form) <= tol;
  }
  r.tolerances = {{"absolute", tol}};
  r.pass = pass;
  r.provenance = "transport/sigma_spin: U(1) sector Chern numbers";
}

Matrix random_graded(int M, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto rnd = [&](int n) {
    Matrix a(n, n);
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = cplx(u(rng), u(rng));
    return a;
  };
  const Matrix alpha = rnd(M), b = rnd(M), c = rnd(M);
  Matrix A(2 * M, 2 * M);
  A.topLeftCorner(M, M) = alpha;
  A.topRightCorner(M, M) = b - b.transpose();
  A.bottomLeftCorner(M, M) = c - c.transpose();
  A.bottomRightCorner(M, M) = -alpha.transpose();
  return A;
}

void task_oracle_check(const ModelParams& p, std::optional<std::uint64_t> seed, const json& q, ResultRecord& r) {
  const BdGModel m = build(p, torus_of(p), seed);
  const int modes = m.spec.sites() * m.spec.fiber_L;
  const int cap = std::min(q.at("max_modes").get<int>(), FockSpace::max_modes);
  if (modes > cap) {
    throw PreconditionError("oracle check needs at most " + std::to_string(cap) + " modes; the model has " +
                            std::to_string(modes));
  }
  const Matrix H = to_mode_blocks(m.H.matrix());
  const FockSpace fock(modes);
  const EighResult e = eigh(H);
  double gibbs = 0.0;
  json per_beta = json::array();
  for (const json& b : q.at("betas")) {
    const double beta = b.get<double>();
    RealVector f(e.values.size());
    for (Eigen::Index a = 0; a < f.size(); ++a) f(a) = fermi(beta, e.values(a));
    const Matrix fH = e.vectors * f.asDiagonal() * e.vectors.adjoint();
    const double res = max_abs(gibbs_two_point(H, beta, fock) - fH);
    per_beta.push_back(res);
    gibbs = std::max(gibbs, res);
  }
  const BogoliubovResult bog = bogoliubov_diagonalize(H);
  const double membership = std::max({bog.unitarity_residual, bog.ph_residual, bog.diagonal_residual});

  const int pm = std::min(q.at("pair_modes").get<int>(), FockSpace::max_modes);
  const FockSpace small(pm);
  std::mt19937_64 rng(seed.value_or(0) + 0x5eedULL);
  double commutator = 0.0;
  for (int k = 0; k < q.at("pairs").get<int>(); ++k) {
    const Matrix A = random_graded(pm, rng);
    const Matrix B = random_graded(pm, rng);
    commutator = std::max(commutator, commutator_identity_check(A, B, small));
  }
  const double tol = q.at("tolerance").get<double>();
  const double ctol = q.at("commutator_tolerance").get<double>();
  r.outputs = {{"primary", gibbs},
               {"gibbs_residual", per_beta},
               {"bogoliubov_membership_residual", membership},
               {"commutator_identity_residual", commutator},
               {"modes", modes}};
  r.tolerances = {{"gibbs", tol}, {"membership", tol}, {"commutator", ctol}};
  r.pass = gibbs <= tol && membership <= tol && commutator <= ctol;
  r.provenance = "fock-oracle: Jordan-Wigner Fock space vs one-particle formulas";
}

void task_continuity_check(const ModelParams& p, std::optional<std::uint64_t> seed, const json& q, ResultRecord& r) {
  const BdGModel m = build(p, torus_of(p), seed);
  const double tol = q.at("tolerance").get<double>();
  bool pass = true;
  double worst = 0.0;
  json per = json::object();
  for (Conserved c : {Conserved::matter, Conserved::charge, Conserved::spin, Conserved::energy}) {
    const ContinuityReport rep = continuity_residual(m, c);
    json o = {{"residual", rep.residual}, {"obstructed", rep.obstructed}, {"nyquist_bonds", rep.nyquist_bonds}};
    if (rep.obstructed) o["obstruction"] = rep.obstruction;
    per[to_string(c)] = o;
    if (!rep.obstructed) {
      worst = std::max(worst, rep.residual);
      pass = pass && rep.residual <= tol;
    }
  }
  const double beta = q.at("beta").get<double>();
  const double eq = std::max(std::abs(equilibrium_current(m, beta, 1)), std::abs(equilibrium_current(m, beta, 2)));
  const double eq_tol = q.at("equilibrium_tolerance").get<double>();
  r.outputs = {{"primary", worst}, {"continuity", per}, {"equilibrium_current", eq}};
  r.tolerances = {{"residual", tol}, {"equilibrium_current", eq_tol}};
  r.pass = pass && eq <= eq_tol;
  r.provenance = "currents/continuity_residual and equilibrium_current";
}

void execute(TaskKind k, const ModelParams& p, std::optional<std::uint64_t> seed, const json& q, ResultRecord& r) {
  switch (k) {
    case TaskKind::chern_realspace: return task_chern_realspace(p, seed, q, r);
    case TaskKind::chern_index: return task_chern_index(p, seed, q, r);
    case TaskKind::symmetry_report: return task_symmetry_report(p, seed, q, r);
    case TaskKind::edge_current: return task_edge_current(p, seed, q, r);
    case TaskKind::winding: return task_winding(p, seed, q, r);
    case TaskKind::kubo_sweep: return task_kubo_sweep(p, seed, q, r);
    case TaskKind::thermal: return task_thermal(p, seed, q, r);
    case TaskKind::spin_hall: return task_spin_hall(p, seed, q, r);
    case TaskKind::oracle_check: return task_oracle_check(p, seed, q, r);
    case TaskKind::continuity_check: return task_continuity_check(p, seed, q, r);
  }
}

// ------------------------------------------------------------ output ----

std::string format_double(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
}

void write_csv(const std::filesystem::path& path, const Table& t) {
  std::ostringstream s;
  for (std::size_t i = 0; i < t.first.size(); ++i) s << (i ? "," : "") << t.first[i];
  s << "\n";
  for (const auto& row : t.second) {
    for (std::size_t i = 0; i < row.size(); ++i) s << (i ? "," : "") << format_double(row[i]);
    s << "\n";
  }
  write_text(path, s.str());
}

std::string csv_field(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_double(v.get<double>());
  return v.dump();
}

}  // namespace

// ------------------------------------------------------------ public ----

std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::chern_realspace: return "chern_realspace";
    case TaskKind::chern_index: return "chern_index";
    case TaskKind::symmetry_report: return "symmetry_report";
    case TaskKind::edge_current: return "edge_current";
    case TaskKind::winding: return "winding";
    case TaskKind::kubo_sweep: return "kubo_sweep";
    case TaskKind::thermal: return "thermal";
    case TaskKind::spin_hall: return "spin_hall";
    case TaskKind::oracle_check: return "oracle_check";
    case TaskKind::continuity_check: return "continuity_check";
  }
  return "?";
}

TaskKind parse_task_kind(const std::string& name) {
  for (TaskKind k : all_task_kinds()) {
    if (to_string(k) == name) return k;
  }
  throw SchemaError("unknown task '" + name + "'");
}

std::string to_string(RecordStatus s) {
  switch (s) {
    case RecordStatus::ok: return "ok";
    case RecordStatus::check_failed: return "check_failed";
    case RecordStatus::precondition_failed: return "precondition_failed";
    case RecordStatus::invalid_parameter: return "invalid_parameter";
    case RecordStatus::error: return "error";
  }
  return "?";
}

json ExperimentConfig::canonical() const {
  json tasks_json = json::array();
  for (const TaskSpec& t : tasks) {
    json o = t.params;
    o["type"] = to_string(t.kind);
    o["label"] = t.label;
    tasks_json.push_back(o);
  }
  return {{"name", name}, {"model", model},   {"lattice", lattice},
          {"disorder", disorder}, {"tasks", tasks_json}, {"output", output}};
}

std::vector<std::uint64_t> ExperimentConfig::seeds() const {
  if (disorder.at("W").get<double>() == 0.0) return {};
  std::vector<std::uint64_t> out;
  for (const json& s : disorder.at("seeds")) out.push_back(s.get<std::uint64_t>());
  return out;
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw SchemaError("config must be a JSON object");
  static const std::set<std::string> blocks = {"name", "model", "lattice", "disorder", "tasks", "output"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!blocks.count(it.key())) throw SchemaError("unknown top-level key '" + it.key() + "'");
  }
  for (const char* required : {"model", "lattice", "tasks"}) {
    if (!doc.contains(required)) throw SchemaError(std::string("missing block '") + required + "'");
  }
  ExperimentConfig cfg;
  if (doc.contains("name")) {
    if (!doc.at("name").is_string()) throw SchemaError("name must be a string");
    cfg.name = doc.at("name").get<std::string>();
  }

  cfg.model = validate_block(doc.at("model"), "model",
                             {{"preset", FieldType::string, nullptr},
                              {"amplitude", FieldType::number, 1.0},
                              {"mu", FieldType::number, 0.0},
                              {"spin", FieldType::number, nullptr},
                              {"flux", FieldType::string, "0"},
                              {"kinetic", FieldType::string, nullptr}});
  if (cfg.model.at("preset").is_null()) throw SchemaError("model.preset is required");
  PairingKind kind;
  try {
    kind = parse_pairing(cfg.model.at("preset").get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("model.preset: ") + e.what());
  }
  if (cfg.model.at("spin").is_null()) {
    const int two_s = PairingSpec{kind, 1.0}.spin_required_two_s();
    cfg.model["spin"] = two_s > 0 ? 0.5 * two_s : 0.0;
  }
  const double spin = cfg.model.at("spin").get<double>();
  if (spin < 0.0 || std::abs(2.0 * spin - std::round(2.0 * spin)) > 1e-12) {
    throw SchemaError("model.spin must be a non-negative multiple of 1/2");
  }
  Flux flux;
  try {
    flux = Flux::parse(cfg.model.at("flux").get<std::string>());
  } catch (const std::exception& e) {
    throw SchemaError(std::string("model.flux: ") + e.what());
  }
  cfg.model["flux"] = flux.str();
  if (cfg.model.at("kinetic").is_null()) cfg.model["kinetic"] = flux.is_zero() ? "laplacian" : "magnetic_laplacian";
  try {
    parse_kinetic(cfg.model.at("kinetic").get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(std::string("model.kinetic: ") + e.what());
  }

  cfg.lattice = validate_block(doc.at("lattice"), "lattice",
                               {{"n1", FieldType::integer, nullptr},
                                {"n2", FieldType::integer, nullptr},
                                {"geometry", FieldType::string, "torus"},
                                {"width", FieldType::optional_integer, nullptr}});
  if (cfg.lattice.at("geometry") != "torus") {
    throw SchemaError("lattice.geometry must be \"torus\"; edge tasks cut their cylinder from lattice.width");
  }
  if (cfg.lattice.at("n1").is_null() || cfg.lattice.at("n2").is_null()) throw SchemaError("lattice.n1 and lattice.n2 are required");
  if (cfg.lattice.at("n1").get<int>() < 1 || cfg.lattice.at("n2").get<int>() < 1) {
    throw SchemaError("lattice sizes must be positive");
  }

  cfg.disorder = validate_block(doc.value("disorder", json::object()), "disorder",
                                {{"W", FieldType::number, 0.0},
                                 {"seeds", FieldType::integers, nullptr},
                                 {"seed_count", FieldType::integer, nullptr},
                                 {"spin_resolved", FieldType::boolean, false},
                                 {"ensemble_id", FieldType::string, ""}});
  if (cfg.disorder.at("W").get<double>() < 0.0) throw SchemaError("disorder.W must be non-negative");
  const bool has_seeds = !cfg.disorder.at("seeds").is_null();
  const bool has_count = !cfg.disorder.at("seed_count").is_null();
  if (has_seeds && has_count) throw SchemaError("disorder: give either seeds or seed_count");
  if (has_count) {
    const int n = cfg.disorder.at("seed_count").get<int>();
    if (n < 1) throw SchemaError("disorder.seed_count must be positive");
    json seeds = json::array();
    for (int i = 0; i < n; ++i) seeds.push_back(i + 1);
    cfg.disorder["seeds"] = seeds;
  } else if (!has_seeds) {
    cfg.disorder["seeds"] = json::array({1});
  }
  cfg.disorder.erase("seed_count");
  for (const json& s : cfg.disorder.at("seeds")) {
    if (s.get<long long>() < 0) throw SchemaError("disorder.seeds must be non-negative");
  }
  if (cfg.disorder.at("seeds").empty()) throw SchemaError("disorder.seeds must not be empty");

  const json& tasks = doc.at("tasks");
  if (!tasks.is_array()) throw SchemaError("tasks must be an array");
  if (tasks.empty()) throw SchemaError("tasks must not be empty");
  std::set<std::string> labels;
  std::map<std::string, int> counts;
  for (const json& t : tasks) {
    TaskSpec spec;
    json body;
    if (t.is_string()) {
      spec.kind = parse_task_kind(t.get<std::string>());
      body = json::object();
    } else if (t.is_object()) {
      if (!t.contains("type") || !t.at("type").is_string()) throw SchemaError("task objects need a string 'type'");
      spec.kind = parse_task_kind(t.at("type").get<std::string>());
      body = t;
      body.erase("type");
      if (body.contains("label")) {
        if (!body.at("label").is_string() || body.at("label").get<std::string>().empty()) {
          throw SchemaError("task label must be a non-empty string");
        }
        spec.label = body.at("label").get<std::string>();
        body.erase("label");
      }
    } else {
      throw SchemaError("each task is a name or an object");
    }
    const std::string kind_name = to_string(spec.kind);
    spec.params = validate_block(body, "task " + kind_name, task_fields(spec.kind));
    if (spec.label.empty()) {
      const int n = counts[kind_name]++;
      spec.label = n == 0 ? kind_name : kind_name + "_" + std::to_string(n + 1);
    }
    if (spec.label.find_first_of("/\\") != std::string::npos) throw SchemaError("task label must not contain a path separator");
    if (!labels.insert(spec.label).second) throw SchemaError("duplicate task label '" + spec.label + "'");
    if (spec.kind == TaskKind::kubo_sweep) {
      try {
        parse_perturbation(spec.params.at("perturbation").get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("kubo_sweep.perturbation: ") + e.what());
      }
      const int d = spec.params.at("direction").get<int>();
      if (d != 1 && d != 2) throw SchemaError("kubo_sweep.direction must be 1 or 2");
    }
    cfg.tasks.push_back(std::move(spec));
  }

  cfg.output = validate_block(doc.value("output", json::object()), "output",
                              {{"directory", FieldType::string, "results"},
                               {"formats", FieldType::strings, json::array({"json", "csv"})}});
  for (const json& f : cfg.output.at("formats")) {
    if (f != "json" && f != "csv") throw SchemaError("output.formats entries must be \"json\" or \"csv\"");
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw SchemaError("cannot read config " + path.string());
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string build_id() { return BDGLAB_BUILD_ID; }

json ResultRecord::to_json() const {
  json o = {{"config_hash", config_hash}, {"build_id", build_id}, {"task", task},
            {"label", label},             {"parameters", parameters}, {"outputs", outputs},
            {"tolerances", tolerances},   {"pass", pass},         {"provenance", provenance},
            {"status", to_string(status)}, {"wall_time_s", wall_time_s}};
  o["seed"] = seed ? json(*seed) : json(nullptr);
  if (!message.empty()) o["message"] = message;
  return o;
}

int exit_code_for(const std::vector<ResultRecord>& records) {
  auto any = [&](RecordStatus s) {
    return std::any_of(records.begin(), records.end(), [&](const ResultRecord& r) { return r.status == s; });
  };
  if (any(RecordStatus::invalid_parameter)) return 2;
  if (any(RecordStatus::precondition_failed) || any(RecordStatus::error)) return 3;
  if (any(RecordStatus::check_failed)) return 1;
  return 0;
}

RunResult run(const ExperimentConfig& cfg, const RunOptions& opts) {
  const ModelParams params = model_params(cfg);
  std::vector<std::optional<std::uint64_t>> realizations;
  const std::uint64_t base = opts.seed_base.value_or(0);
  for (std::uint64_t s : cfg.seeds()) realizations.emplace_back(base + s);
  if (realizations.empty()) realizations.emplace_back(std::nullopt);

  json canon = cfg.canonical();
  if (opts.seed_base) canon["seed_base"] = *opts.seed_base;
  RunResult out;
  out.config_hash = fnv1a_hex(canon.dump());
  out.out_dir = opts.out_dir ? *opts.out_dir : std::filesystem::path(cfg.output.at("directory").get<std::string>());
  std::filesystem::create_directories(out.out_dir);

  const std::size_t per_task = realizations.size();
  const std::size_t units = cfg.tasks.size() * per_task;
  out.records.resize(units);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t u = next++; u < units; u = next++) {
      const TaskSpec& t = cfg.tasks[u / per_task];
      const std::optional<std::uint64_t> seed = realizations[u % per_task];
      ResultRecord& r = out.records[u];
      r.config_hash = out.config_hash;
      r.build_id = build_id();
      r.task = to_string(t.kind);
      r.label = t.label;
      r.seed = seed;
      r.parameters = t.params;
      r.outputs = json::object();
      r.tolerances = json::object();
      const auto start = std::chrono::steady_clock::now();
      try {
        execute(t.kind, params, seed, t.params, r);
        r.status = r.pass ? RecordStatus::ok : RecordStatus::check_failed;
      } catch (const SchemaError& e) {
        r.status = RecordStatus::invalid_parameter;
        r.message = e.what();
      } catch (const std::invalid_argument& e) {
        r.status = RecordStatus::invalid_parameter;
        r.message = e.what();
      } catch (const PreconditionError& e) {
        r.status = RecordStatus::precondition_failed;
        r.message = e.what();
      } catch (const std::exception& e) {
        r.status = RecordStatus::error;
        r.message = e.what();
      }
      if (r.status != RecordStatus::ok && r.status != RecordStatus::check_failed) r.pass = false;
      r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
  };
  const int workers = std::max(1, std::min<int>(opts.workers, static_cast<int>(units)));
  std::vector<std::thread> pool;
  for (int i = 1; i < workers; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();

  std::string caz = "?";
  try {
    caz = to_string(classify_symmetries(build(params, torus_of(params), std::nullopt)).caz);
  } catch (const std::exception&) {
  }

  auto wants = [&](const char* f) {
    const json& fs = cfg.output.at("formats");
    return std::find(fs.begin(), fs.end(), json(f)) != fs.end();
  };
  const bool csv = wants("csv"), js = wants("json");
  std::ostringstream summary;
  summary << "preset,spin,caz_class,task,label,seed,status,primary,integer,pass\n";
  for (std::size_t ti = 0; ti < cfg.tasks.size(); ++ti) {
    const TaskSpec& t = cfg.tasks[ti];
    json doc = {{"config_hash", out.config_hash}, {"build_id", build_id()}, {"config", canon},
                {"task", to_string(t.kind)},      {"label", t.label},        {"records", json::array()}};
    for (std::size_t k = 0; k < per_task; ++k) {
      const ResultRecord& r = out.records[ti * per_task + k];
      doc["records"].push_back(r.to_json());
      for (const auto& [name, table] : r.tables) {
        if (!csv) break;
        const std::string stem = t.label + (r.seed ? "_seed" + std::to_string(*r.seed) : std::string()) + "_" + name;
        write_csv(out.out_dir / (stem + ".csv"), table);
      }
      summary << cfg.model.at("preset").get<std::string>() << "," << csv_field(cfg.model.at("spin")) << "," << caz
              << "," << r.task << "," << r.label << "," << (r.seed ? std::to_string(*r.seed) : "") << ","
              << to_string(r.status) << "," << csv_field(r.outputs.value("primary", json(nullptr))) << ","
              << csv_field(r.outputs.value("integer", json(nullptr))) << "," << (r.pass ? "true" : "false") << "\n";
    }
    if (js) write_text(out.out_dir / (t.label + ".json"), doc.dump(2) + "\n");
  }
  if (csv) write_text(out.out_dir / "summary.csv", summary.str());
  out.exit_code = exit_code_for(out.records);
  if (!opts.quiet) {
    std::printf("%-18s %-8s %-6s %-20s %-22s %-10s %s\n", "label", "seed", "class", "status", "primary", "integer",
                "pass");
    for (const ResultRecord& r : out.records) {
      const json prim = r.outputs.value("primary", json(nullptr));
      const json integer = r.outputs.value("integer", json(nullptr));
      std::printf("%-18s %-8s %-6s %-20s %-22s %-10s %s\n", r.label.c_str(),
                  r.seed ? std::to_string(*r.seed).c_str() : "-", caz.c_str(), to_string(r.status).c_str(),
                  csv_field(prim).c_str(), csv_field(integer).c_str(), r.pass ? "yes" : "no");
      if (!r.message.empty()) std::printf("    %s\n", r.message.c_str());
    }
    std::printf("results in %s (config %s)\n", out.out_dir.string().c_str(), out.config_hash.c_str());
  }
  return out;
}

std::vector<std::string> sweep_axes() {
  return {"mu", "amplitude", "W", "width", "n", "delta", "beta", "temperature_over_gap"};
}

ExperimentConfig with_axis(const ExperimentConfig& cfg, const std::string& axis, double value) {
  json doc = cfg.canonical();
  auto integer = [&] {
    if (value != std::round(value)) throw SchemaError("sweep axis '" + axis + "' needs integer values");
    return static_cast<int>(value);
  };
  if (axis == "mu") {
    doc["model"]["mu"] = value;
  } else if (axis == "amplitude") {
    doc["model"]["amplitude"] = value;
  } else if (axis == "W") {
    doc["disorder"]["W"] = value;
  } else if (axis == "width") {
    doc["lattice"]["width"] = integer();
  } else if (axis == "n") {
    doc["lattice"]["n1"] = integer();
    doc["lattice"]["n2"] = integer();
  } else if (axis == "delta" || axis == "beta" || axis == "temperature_over_gap") {
    const std::string type = axis == "temperature_over_gap" ? "thermal" : "kubo_sweep";
    bool any = false;
    for (json& t : doc["tasks"]) {
      if (t["type"] != type) continue;
      any = true;
      if (axis == "delta") t["deltas"] = json::array({value});
      if (axis == "beta") t["beta"] = value;
      if (axis == "temperature_over_gap") t["temperatures_over_gap"] = json::array({value});
    }
    if (!any) throw SchemaError("sweep axis '" + axis + "' needs a " + type + " task");
  } else {
    throw SchemaError("unknown sweep axis '" + axis + "'");
  }
  return parse_config(doc);
}

SweepResult sweep(const ExperimentConfig& cfg, const std::string& axis, const std::vector<double>& values,
                  const RunOptions& opts) {
  if (values.empty()) throw SchemaError("sweep needs at least one value");
  std::vector<ExperimentConfig> configs;
  for (double v : values) configs.push_back(with_axis(cfg, axis, v));
  const std::filesystem::path root =
      opts.out_dir ? *opts.out_dir : std::filesystem::path(cfg.output.at("directory").get<std::string>());
  std::filesystem::create_directories(root);
  SweepResult out;
  std::ostringstream curve;
  curve << axis << ",label,seed,status,primary,integer,pass\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    RunOptions o = opts;
    o.out_dir = root / (axis + "_" + std::to_string(i));
    out.runs.push_back(run(configs[i], o));
    for (const ResultRecord& r : out.runs.back().records) {
      curve << format_double(values[i]) << "," << r.label << "," << (r.seed ? std::to_string(*r.seed) : "") << ","
            << to_string(r.status) << "," << csv_field(r.outputs.value("primary", json(nullptr))) << ","
            << csv_field(r.outputs.value("integer", json(nullptr))) << "," << (r.pass ? "true" : "false") << "\n";
    }
    out.exit_code = std::max(out.exit_code, out.runs.back().exit_code);
  }
  out.curve = root / ("sweep_" + axis + ".csv");
  write_text(out.curve, curve.str());
  return out;
}

}  // namespace bdg::experiment
