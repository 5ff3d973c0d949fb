#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "addwav/simulator.hpp"
#include "addwav/tensor_marginal.hpp"
#include "addwav/wavelet_basis.hpp"

namespace addwav {

// ---- analytic Haar coefficients --------------------------------------------

enum class HaarCase { linear, constant, step_half };

HaarCase parse_haar_case(std::string_view name);

/// Exact Haar coefficient on [0,1] of h(x) = x, h = c, or h = 1{x >= 1/2}.
double haar_closed_form(HaarCase g, BasisKind kind, int j, int k, double c = 1.0);

// ---- Monte Carlo over simulated datasets -----------------------------------

struct CoeffIndex {
  BasisKind kind = BasisKind::wavelet;
  int j = 0;
  int k = 0;
};

/// Everything a replication loop needs. `process.n` and `process.seed` are
/// replaced per replication; the stream of replication r at sample size n is
/// derive_seed(master_seed, n, r).
struct MonteCarloSetup {
  ScenarioSpec scenario;
  MixingProcessSpec process;
  std::shared_ptr<const BasisTable> table;
  int axis = 0;
  std::uint64_t master_seed = 0;
  double budget = 1e9;  // cap on reps * n
};

/// True a_{j,k,axis} or b_{j,k,axis} of a scenario's regression function: a fine
/// midpoint rule along `axis`, the other components entering through their means.
double scenario_true_coeff(const BasisTable& table, const ScenarioSpec& scenario, CoeffIndex idx, int axis);

struct MomentReport {
  CoeffIndex index;
  int axis = 0;
  int reps = 0;
  Eigen::Index n = 0;
  double mean_hat = 0.0;  // mean of the estimates
  double var_hat = 0.0;   // variance of the estimates about their mean (1/reps)
  double m4_hat = 0.0;    // mean fourth power of estimate - true_value
  double true_value = 0.0;

  double standard_error() const;
};

/// reps x indices matrix of empirical coefficients, one row per replication.
Eigen::MatrixXd mc_coefficients(const MonteCarloSetup& setup, std::span<const CoeffIndex> indices, int reps,
                                Eigen::Index n);

std::vector<MomentReport> mc_moments(const MonteCarloSetup& setup, std::span<const CoeffIndex> indices, int reps,
                                     Eigen::Index n);
MomentReport mc_moments(const MonteCarloSetup& setup, CoeffIndex index, int reps, Eigen::Index n);

/// Empirical frequency of |b-hat - b| >= kappa * lambda_n / 2. Requires
/// 2^j <= n / (ln n)^3.
double tail_frequency(const MonteCarloSetup& setup, CoeffIndex index, double kappa, int reps, Eigen::Index n);

/// Frequencies for several kappas from one set of replications.
std::vector<double> tail_frequencies(const MonteCarloSetup& setup, CoeffIndex index, std::span<const double> kappas,
                                     int reps, Eigen::Index n);

struct KappaCalibration {
  double kappa = 0.0;
  double quantile_value = 0.0;  // quantile of |b-hat - b| / lambda_n under the pilot
  double quantile_level = 0.995;
  int reps = 0;
  int first_level = 0;
  int last_level = 0;
};

/// Pilot null calibration: g = 0 with rho(Y) = +-C2 equiprobable (the largest
/// conditional second moment allowed by |rho| <= C2), drawn on the setup's
/// design process at size n. kappa = 2 * quantile so that kappa lambda_n / 2
/// sits at the requested quantile of the pilot deviations.
KappaCalibration calibrate_kappa(const MonteCarloSetup& setup, Eigen::Index n, int reps, double quantile = 0.995);

// ---- rate regression -----------------------------------------------------

struct RateFit {
  std::vector<std::pair<Eigen::Index, double>> points;  // (n, mean_ise)
  double slope = 0.0;  // exponent e in mean_ise ~ C (ln n / n)^e
  double intercept = 0.0;
  double r_squared = 0.0;
};

RateFit rate_fit(std::vector<std::pair<Eigen::Index, double>> points);

}  // namespace addwav
