#include "bdglab/experiment.hpp"
#include "bdglab/models.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

namespace ex = bdg::experiment;

namespace {

struct Common {
  int workers = 1;
  std::string out;
  long long seed_base = -1;
};

ex::RunOptions options_of(const Common& c) {
  ex::RunOptions o;
  o.workers = c.workers;
  if (!c.out.empty()) o.out_dir = c.out;
  if (c.seed_base >= 0) o.seed_base = static_cast<std::uint64_t>(c.seed_base);
  return o;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  app->add_option("--out", c.out, "Output directory (overrides output.directory)");
  app->add_option("--seed-base", c.seed_base, "Offset added to every disorder seed")->check(CLI::NonNegativeNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bdglab: invariants and transport of disordered BdG lattice models"};
  app.require_subcommand(1);

  std::string config_path;
  Common run_opts, sweep_opts;

  auto* run_cmd = app.add_subcommand("run", "Run every task of a config");
  run_cmd->add_option("config", config_path, "JSON config")->required();
  add_common(run_cmd, run_opts);

  std::string axis;
  std::vector<double> values;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a config once per value of one parameter");
  sweep_cmd->add_option("config", config_path, "JSON config")->required();
  sweep_cmd->add_option("--axis", axis, "Parameter to vary")->required()->check(CLI::IsMember(ex::sweep_axes()));
  sweep_cmd->add_option("--values", values, "Values of the parameter")->required()->delimiter(',');
  add_common(sweep_cmd, sweep_opts);

  auto* validate_cmd = app.add_subcommand("validate", "Check a config and print its canonical form");
  validate_cmd->add_option("config", config_path, "JSON config")->required();

  app.add_subcommand("list", "List model presets, tasks and sweep axes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("list")) {
      std::printf("presets: none");
      for (bdg::PairingKind k : bdg::all_pairings()) std::printf(" %s", bdg::to_string(k).c_str());
      std::printf("\ntasks: chern_realspace chern_index symmetry_report edge_current winding kubo_sweep thermal "
                  "spin_hall oracle_check continuity_check\nsweep axes:");
      for (const std::string& a : ex::sweep_axes()) std::printf(" %s", a.c_str());
      std::printf("\n");
      return 0;
    }
    const ex::ExperimentConfig cfg = ex::load_config(config_path);
    if (validate_cmd->parsed()) {
      const ex::json canon = cfg.canonical();
      std::cout << canon.dump(2) << "\nconfig hash " << ex::fnv1a_hex(canon.dump()) << "\n";
      return 0;
    }
    if (run_cmd->parsed()) return ex::run(cfg, options_of(run_opts)).exit_code;
    const ex::SweepResult s = ex::sweep(cfg, axis, values, options_of(sweep_opts));
    std::printf("sweep curve %s\n", s.curve.string().c_str());
    return s.exit_code;
  } catch (const ex::SchemaError& e) {
    std::fprintf(stderr, "invalid config: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
