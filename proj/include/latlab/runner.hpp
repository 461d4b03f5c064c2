#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "latlab/lattice.hpp"
#include "latlab/maps.hpp"
#include "latlab/measure.hpp"
#include "latlab/types.hpp"

namespace latlab {

inline constexpr const char* kVersion = "latlab 0.1.0";

using Json = nlohmann::ordered_json;

enum class RunMode {
  kRobustnessSingle,  // one explicit offset, full verdict
  kMeasureSweep,      // the three Monte Carlo estimators
  kQGridScan,         // deterministic offset grid, row table
  kBoundsReport,      // estimators + bounds + consistency checks
};

const char* to_string(RunMode mode);
RunMode run_mode_from_string(const std::string& name);

/// Flat experiment description, loadable from a JSON document. Unknown keys
/// are rejected so that typos fail loudly.
///
/// Named domain predicates: "simplex" (nonnegative orthant, coordinate sum
/// at most one), "ball" (inscribed ball of the box), "L-shape" (box minus
/// its strictly-upper open corner quadrant).
struct ExperimentConfig {
  std::string family;
  std::vector<double> params;
  int dimension = 0;
  Vector lower;
  Vector upper;
  std::string predicate;  // empty = plain box
  double h = 0;
  RunMode mode = RunMode::kBoundsReport;
  Vector q;                   // robustness-single only
  Index n_samples = 100'000;  // measure-sweep / bounds-report
  std::uint64_t seed = 0;
  Index resolution = 0;  // q-grid-scan only
  std::string out_dir = ".";
  std::string format = "json";  // scan table format: "json" embeds rows, "csv" sidecar

  static ExperimentConfig from_json(const Json& doc);
  Json to_json() const;

  MapSpec make_map() const;
  DomainSpec make_domain() const;
  void validate() const;  // throws ConfigError
};

/// Everything a run produces. The serialized body is a pure function of
/// (config, seed); wall time is carried for logging but deliberately kept out
/// of to_json() so identical runs emit identical bytes under any worker
/// count.
struct RunReport {
  ExperimentConfig config;
  Json hypotheses;
  Json payload;
  std::vector<ScanRow> scan_rows;  // q-grid-scan only
  double wall_seconds = 0;
  std::string version = kVersion;
  bool strict_failure = false;  // a bounds consistency check failed

  Json to_json() const;
};

RunReport run(const ExperimentConfig& config, int workers = 0);

/// Writes the report under out_dir: report.json always, scan.csv for scan
/// runs with csv format. Returns the paths written. I/O problems raise
/// IoError.
std::vector<std::string> emit(const RunReport& report, const std::string& out_dir);

/// CLI entry point logic shared with tests: parses argv, runs, emits.
/// Exit codes: 0 ok, 1 strict-mode bound-check failure, 2 config error,
/// 3 I/O error, 4 internal error.
int run_cli(int argc, const char* const* argv);

}  // namespace latlab
