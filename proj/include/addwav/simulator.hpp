#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "addwav/estimator.hpp"
#include "addwav/wavelet_basis.hpp"

namespace addwav {

/// Latent per-coordinate Gaussian AR(1) mapped to uniforms, with optional FGM
/// cross-sectional dependence in d = 2.
struct MixingProcessSpec {
  int d = 2;
  Eigen::Index n = 1024;
  double a = 0.0;
  double copula_theta = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Centered test function on [0,1] with its documented smoothness class.
struct TestFunction {
  std::string name;
  std::function<double(double)> f;
  double sup_norm = 0.0;
  std::string smoothness;

  double operator()(double x) const { return f(x); }
  GridFunction sample(Eigen::Index n) const { return GridFunction::sample(f, n); }
};

/// Catalog lookup; throws InvalidArgument for unknown names.
const TestFunction& test_function(std::string_view name);
const std::vector<TestFunction>& test_function_catalog();

/// Additive regression scenario Y = mu + sum_l g_l(X_l) + U, U ~ U[-sigma, sigma].
struct ScenarioSpec {
  std::vector<TestFunction> components;
  double mu = 0.0;
  double noise_halfwidth = 0.0;
  RhoSpec rho;

  static ScenarioSpec make(const std::vector<std::string>& names, double mu, double noise_halfwidth);

  int dim() const { return static_cast<int>(components.size()); }
  double regression(std::span<const double> x) const;
  /// |mu| + sum ||g_l||_inf + sigma, the bound on |rho(Y)| for rho = identity.
  double response_bound() const;
  std::vector<std::string> names() const;
};

/// Latent standardized Gaussian AR(1) paths, one column per coordinate.
Eigen::MatrixXd gen_latent(const MixingProcessSpec& spec);

struct Design {
  Eigen::MatrixXd x;
  DesignDensity density;
};

Design gen_design(const MixingProcessSpec& spec);

/// Maps latent Gaussians to the design: standard normal CDF per coordinate,
/// then the FGM conditional inverse CDF on coordinate 2 when theta != 0.
Eigen::MatrixXd design_from_latent(const Eigen::MatrixXd& latent, double copula_theta);

/// Inverse of x2 -> x2 [1 + theta (1-2 x1)(1 - x2)].
double fgm_conditional_quantile(double x1, double v, double theta);

Eigen::VectorXd gen_responses(const Eigen::MatrixXd& x, const ScenarioSpec& scenario, std::uint64_t seed);

/// Design plus responses; the two draw from independent streams of spec.seed.
Dataset simulate(const MixingProcessSpec& spec, const ScenarioSpec& scenario);

double standard_normal_cdf(double z);

}  // namespace addwav
