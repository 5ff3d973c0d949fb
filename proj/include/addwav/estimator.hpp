#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "addwav/wavelet_basis.hpp"

namespace addwav {

/// Known joint density f of the design on [0,1]^d with a positive floor c.
struct DesignDensity {
  std::function<double(std::span<const double>)> evaluator;
  double floor = 1.0;
  std::string description;
  // Copula parameter when the density is FGM; 0 for the uniform density.
  double copula_theta = 0.0;

  double operator()(std::span<const double> x) const { return evaluator(x); }

  static DesignDensity uniform(int d);
  /// Farlie-Gumbel-Morgenstern density 1 + theta (1-2x1)(1-2x2) on [0,1]^2.
  static DesignDensity fgm(double theta);
};

/// Checks f >= floor on a midpoint grid and that f integrates to 1 within 1e-3 (d <= 3).
void validate_density(const DesignDensity& f, int d);

/// The response transform rho with its L-infinity (C2) and L1 (C1) bounds.
struct RhoSpec {
  std::function<double(double)> rho;
  double sup_bound = std::numeric_limits<double>::infinity();
  double l1_bound = std::numeric_limits<double>::infinity();

  double operator()(double y) const { return rho(y); }
  static RhoSpec identity(double sup_bound);
};

/// n observations (Y_i, X_i), X_i in [0,1]^d, with the known design density.
struct Dataset {
  Eigen::VectorXd y;
  Eigen::MatrixXd x;  // n x d
  DesignDensity density;

  Eigen::Index n() const { return y.size(); }
  int dim() const { return static_cast<int>(x.cols()); }
  void validate() const;
};

struct EstimatorConfig {
  double kappa = 1.0;
  int axis = 0;  // 0-based target coordinate
  std::optional<int> j1_override;
};

struct DetailLevel {
  int j = 0;
  Eigen::VectorXd values;
  Eigen::Array<bool, Eigen::Dynamic, 1> kept;
};

/// Hard-thresholded estimate of one additive component.
struct ComponentEstimate {
  double mu_hat = 0.0;
  int tau = 0;
  int j1 = 0;
  double lambda_n = 0.0;
  double kappa = 1.0;
  int axis = 0;
  int family_R = 1;
  Eigen::VectorXd a_hat;
  std::vector<DetailLevel> levels;

  int kept_count() const;
  int detail_count() const;
};

double estimate_mu(const Dataset& data, const RhoSpec& rho);

/// rho(Y_i) / f(X_i) for every observation. Throws InconsistentDensity when f
/// drops below its declared floor at a design point.
Eigen::VectorXd response_weights(const Dataset& data, const RhoSpec& rho);

/// Empirical a-hat (scaling) or b-hat (wavelet) coefficient for component `axis`:
/// (1/n) sum_i rho(Y_i)/f(X_i) b_{j,k}(X_{axis,i}).
double hat_coeff(const Dataset& data, const RhoSpec& rho, const BasisTable& table, BasisKind kind,
                 int j, int k, int axis);

/// Same, reusing precomputed response weights.
double hat_coeff(const Dataset& data, const Eigen::VectorXd& weights, const BasisTable& table,
                 BasisKind kind, int j, int k, int axis);

/// All 2^j empirical coefficients of one level in a single pass over the data.
Eigen::VectorXd hat_level(const Dataset& data, const Eigen::VectorXd& weights, const BasisTable& table,
                          BasisKind kind, int j, int axis);

/// sqrt(ln n / n).
double threshold_lambda(Eigen::Index n);

/// floor(log2(floor(n / (ln n)^3))), clamped below at tau.
int resolution_j1(Eigen::Index n, int tau);

ComponentEstimate fit_component(const Dataset& data, const RhoSpec& rho, const BasisTable& table,
                                const EstimatorConfig& config);

/// Recomputes every `kept` flag from |value| >= kappa * lambda_n.
void apply_threshold(ComponentEstimate& est);

/// The estimate at x in [0,1]: sum a phi + sum_kept b psi - mu_hat.
double eval_estimate(const ComponentEstimate& est, const BasisTable& table, double x);

/// Evaluates the estimate at every node of a midpoint grid of size n.
Eigen::VectorXd eval_estimate_grid(const ComponentEstimate& est, const BasisTable& table, Eigen::Index n);

/// Integrated squared error against a grid-sampled truth (midpoint rule, >= 2^10 nodes).
double ise(const ComponentEstimate& est, const BasisTable& table, const GridFunction& g_true);

}  // namespace addwav
