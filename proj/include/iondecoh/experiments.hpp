// Experiment orchestration behind the command-line tool: runs one configured
// experiment, collects its table and invariant checks, and writes the CSV and
// the JSON run report.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "iondecoh/config.hpp"

namespace iondecoh {

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
};

/// Deviation statistics for one engine pair of a compare run.
struct PairDeviation {
  std::string a;
  std::string b;
  double max_abs = 0.0;
  double mean_abs = 0.0;
  double max_z = 0.0;            ///< max |dR| / stderr; 0 without a stochastic engine
  double fraction_within = 1.0;  ///< share of grid points meeting the tolerance
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a header column; throws std::out_of_range.
  std::size_t column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
};

struct ExperimentResult {
  Experiment experiment = Experiment::AnalyticSweep;
  Table table;
  std::vector<Check> checks;
  std::vector<PairDeviation> pairs;
  double max_leakage = 0.0;
  bool leakage_exceeded = false;
  std::vector<std::string> notes;

  bool passed() const;
};

/// Runs `config.experiment`. Throws ConfigError, NumericalError or
/// LeakageError (the latter only when leakage is not allowed).
ExperimentResult run_experiment(const RunConfig& config);

/// ASCII CSV, header row, 17 significant digits.
std::string format_csv(const Table& table);

/// Exit status convention of the command-line tool.
enum ExitCode : int { kOk = 0, kInvariantFailure = 1, kConfigError = 2, kNumericalError = 3, kLeakage = 4 };

struct RunOutcome {
  int exit_code = kOk;
  std::string message;
  std::filesystem::path csv;
  std::filesystem::path report;
};

/// Validates, runs, and writes `<experiment>.csv` and `<experiment>.report.json`
/// into `out_dir`. Never throws for experiment failures; they map to exit codes
/// and are recorded in the report.
RunOutcome execute(const RunConfig& config, const std::filesystem::path& out_dir);

}  // namespace iondecoh
