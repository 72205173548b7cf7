#pragma once

/// Declarative experiment runner behind the command line tool.
///
/// A config is a JSON object with the blocks `model`, `lattice`, `disorder`,
/// `tasks` and `output` (see README.md for the schema). Parsing validates the
/// whole document and fills in defaults before anything is computed; the
/// canonical form of the parsed config is what the config hash is taken of.

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bdg::experiment {

using json = nlohmann::json;

/// Config does not match the schema (exit status 2).
class SchemaError : public std::runtime_error {
 public:
  explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

enum class TaskKind {
  chern_realspace,
  chern_index,
  symmetry_report,
  edge_current,
  winding,
  kubo_sweep,
  thermal,
  spin_hall,
  oracle_check,
  continuity_check,
};

std::string to_string(TaskKind k);
TaskKind parse_task_kind(const std::string& name);

struct TaskSpec {
  TaskKind kind = TaskKind::chern_realspace;
  std::string label;  ///< file stem of the task's outputs, unique within a config
  json params;        ///< task parameters with defaults filled in
};

struct ExperimentConfig {
  json model;     ///< preset, amplitude, mu, spin, flux, kinetic
  json lattice;   ///< n1, n2, width
  json disorder;  ///< W, seeds, spin_resolved
  std::vector<TaskSpec> tasks;
  json output;    ///< directory, formats
  std::string name;

  /// Parsed config with every default made explicit.
  json canonical() const;
  /// Seeds of the disorder ensemble; empty for a clean model.
  std::vector<std::uint64_t> seeds() const;
};

/// Validates and normalizes a config document. Throws SchemaError.
ExperimentConfig parse_config(const json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// FNV-1a 64-bit hash of a string, as 16 hex digits.
std::string fnv1a_hex(const std::string& text);

/// Build identifier compiled into the library.
std::string build_id();

enum class RecordStatus { ok, check_failed, precondition_failed, invalid_parameter, error };

std::string to_string(RecordStatus s);

struct ResultRecord {
  std::string config_hash;
  std::string build_id;
  std::string task;
  std::string label;
  std::optional<std::uint64_t> seed;
  json parameters;
  json outputs;           ///< scalars; `primary` holds the headline number
  json tolerances;
  bool pass = false;
  std::string provenance; ///< module and method
  RecordStatus status = RecordStatus::ok;
  std::string message;
  double wall_time_s = 0.0;
  /// Tables written next to the record as CSV: name → {header, rows}.
  std::vector<std::pair<std::string, std::pair<std::vector<std::string>, std::vector<std::vector<double>>>>> tables;

  json to_json() const;
};

struct RunOptions {
  int workers = 1;
  std::optional<std::filesystem::path> out_dir;  ///< overrides output.directory
  std::optional<std::uint64_t> seed_base;        ///< shifts every seed by this amount
  bool quiet = false;
};

struct RunResult {
  std::vector<ResultRecord> records;  ///< in task order, then seed order
  std::string config_hash;
  std::filesystem::path out_dir;
  int exit_code = 0;
};

/// 0 all checks pass; 1 some check failed; 2 invalid parameter; 3 numerical precondition failed.
int exit_code_for(const std::vector<ResultRecord>& records);

/// Executes every task for every disorder realization and writes
/// `<label>.json`, `<label>[_seed<k>]_<table>.csv` and `summary.csv`.
RunResult run(const ExperimentConfig& cfg, const RunOptions& opts = {});

/// Scalar parameters a sweep may vary.
std::vector<std::string> sweep_axes();

/// Copy of `cfg` with `axis` set to `value`. Throws SchemaError for an unknown axis.
ExperimentConfig with_axis(const ExperimentConfig& cfg, const std::string& axis, double value);

struct SweepResult {
  std::vector<RunResult> runs;
  std::filesystem::path curve;  ///< combined CSV over all values
  int exit_code = 0;
};

/// Runs the config once per value into `<out>/<axis>_<i>/` and writes
/// `<out>/sweep_<axis>.csv`.
SweepResult sweep(const ExperimentConfig& cfg, const std::string& axis, const std::vector<double>& values,
                  const RunOptions& opts = {});

}  // namespace bdg::experiment
