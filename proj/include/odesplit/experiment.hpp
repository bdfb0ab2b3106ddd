#pragma once

// Experiment runner behind the CLI. Config schema: docs/config.md.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "odesplit/errors.hpp"
#include "odesplit/gauges.hpp"
#include "odesplit/model.hpp"
#include "odesplit/solve.hpp"

namespace odesplit {

/// Bad or missing config value; `key` is the dotted path of the offending entry.
class ConfigError : public Error {
public:
  ConfigError(std::string key, const std::string& message);
  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

enum class ErrorMetric { Companion, Wkb };

struct OutputOptions {
  std::size_t sample_count = 200;
  std::string csv_path = "trajectory.csv";
  bool compare_against_companion = false;
  std::string comparison_csv_path = "comparison.csv";
  std::string summary_path = "summary.txt";
  ErrorMetric error_metric = ErrorMetric::Companion;
};

struct ExperimentConfig {
  std::size_t order = 0;
  std::vector<std::string> coeffs;
  std::string inhom = "0";
  ParamTable params;
  IVP ivp;
  GaugeSpec gauge;
  SolveConfig solver;
  OutputOptions outputs;
};

/// Parses and validates a config. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc);
nlohmann::json load_config(const std::filesystem::path& path);

/// Replaces the numeric value at a dotted key ("params.lambda",
/// "solver.rel_tol"). Throws ConfigError if the key is absent or not numeric.
void set_numeric(nlohmann::json& doc, const std::string& dotted_key, double value);

struct RunResult {
  int exit_code = 0;  ///< 0 ok, 1 config error, 2 numerical failure
  std::string message;
  double max_rel_error = std::numeric_limits<double>::quiet_NaN();
  std::size_t steps = 0;
};

/// One run: writes trajectory CSV, optional comparison CSV and summary into
/// `out_dir` (relative output paths resolve there).
RunResult run_experiment(const nlohmann::json& doc, const std::filesystem::path& out_dir);

/// CLI entry points; messages go to `err` unless quiet (failures always print).
int run_command(const std::filesystem::path& config, const std::filesystem::path& out_dir, bool quiet,
                std::ostream& out, std::ostream& err);
int sweep_command(const std::filesystem::path& config, const std::string& param, const std::vector<double>& values,
                  const std::filesystem::path& out_dir, bool quiet, std::ostream& out, std::ostream& err);

/// Number formatting used by every CSV: 17 significant digits.
std::string format_number(double v);

}  // namespace odesplit
