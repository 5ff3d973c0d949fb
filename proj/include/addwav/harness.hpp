#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "addwav/oracle.hpp"
#include "addwav/serialization.hpp"

namespace addwav {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitVerification = 2, kExitBudget = 3, kExitInterrupted = 130 };

struct ExperimentConfig {
  std::vector<std::string> components;
  double mu = 0.0;
  double noise_halfwidth = 0.0;
  int d = 0;
  double a = 0.0;
  double copula_theta = 0.0;
  std::vector<Eigen::Index> n_grid;
  int reps = 1;
  std::optional<double> kappa_fixed = 1.0;  // empty: calibrated per n
  int calibration_reps = 200;
  int family_R = 2;
  int depth = 12;
  int ell = 1;  // 1-based
  std::string output_dir = "out";
  std::uint64_t master_seed = 0;
  bool median = false;
  std::optional<double> planted_exponent;
  double budget_cap = 1e9;

  ScenarioSpec scenario() const;
  MixingProcessSpec process_template() const;
  double observation_count() const;  // reps * sum(n)
  json to_json() const;
};

/// Parses and validates an experiment config. Errors name the offending field.
ExperimentConfig parse_experiment_config(const json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// ---- basis-check ---------------------------------------------------------

struct CheckResult {
  std::string name;
  double error = 0.0;
  double tolerance = 0.0;
  bool passed() const { return error <= tolerance; }
};

/// Partition of unity, vanishing moments, unit mass and Gram orthonormality
/// for levels up to `max_level`.
std::vector<CheckResult> basis_checks(const BasisTable& table, int max_level = 6);

/// Largest |G - I| over the periodized family {phi_{j0,k}} and {psi_{j,k}}, j0 <= j <= j_max.
double gram_deviation(const BasisTable& table, int j0, int j_max);

int cmd_basis_check(int R, int depth, std::ostream& out, std::ostream& err);

// ---- simulate / estimate -------------------------------------------------

struct SimulateOptions {
  std::filesystem::path config_path;
  std::optional<std::filesystem::path> output_dir;
  std::optional<std::uint64_t> seed;
};

/// Writes dataset_n<n>_r<rep>.{csv,json} for every (n, rep) cell.
std::vector<std::filesystem::path> run_simulate(const ExperimentConfig& config, const std::filesystem::path& dir);
int cmd_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err);

/// Loads a dataset from .json (with provenance) or .csv (uniform design assumed).
DatasetFile load_dataset(const std::filesystem::path& path);

struct EstimateOptions {
  std::filesystem::path dataset_path;
  int ell = 1;
  double kappa = 1.0;
  int family_R = 2;
  int depth = 12;
  std::filesystem::path output_dir = ".";
};

struct EstimateResult {
  ComponentEstimate estimate;
  std::optional<double> ise;
  json summary;
};

EstimateResult run_estimate(const EstimateOptions& opts);
int cmd_estimate(const EstimateOptions& opts, std::ostream& out, std::ostream& err);

// ---- mc-rate -------------------------------------------------------------

struct CellRecord {
  Eigen::Index n = 0;
  int rep = 0;
  std::uint64_t seed = 0;
  double ise = 0.0;
  int kept_count = 0;
  int j1 = 0;
  double lambda_n = 0.0;
  double kappa = 0.0;
  double runtime_ms = 0.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<CellRecord> records;  // ordered by (n, rep)
  std::vector<std::pair<Eigen::Index, double>> per_n;
  std::vector<std::pair<Eigen::Index, KappaCalibration>> calibrations;
  std::optional<RateFit> fit;
  bool complete = true;

  json to_json(bool include_timing = true) const;
  /// FNV-1a digest of the report with every runtime_ms field removed.
  std::string determinism_digest() const;
};

/// Runs the sweep. Cells not finished when `stop` is raised are omitted and
/// the report is marked incomplete. Throws BudgetExceeded unless allowed.
ExperimentReport run_mc_rate(const ExperimentConfig& config, bool allow_over_budget = false,
                             const std::atomic<bool>* stop = nullptr);

struct McRateOptions {
  std::filesystem::path config_path;
  std::optional<std::filesystem::path> output;
  std::optional<std::uint64_t> seed;
  std::optional<double> kappa;
  std::optional<int> family_R;
  std::optional<int> depth;
  bool allow_over_budget = false;
};

int cmd_mc_rate(const McRateOptions& opts, std::ostream& out, std::ostream& err);

/// Raised by the SIGINT handler that cmd_mc_rate installs.
std::atomic<bool>& interrupt_flag();

}  // namespace addwav
