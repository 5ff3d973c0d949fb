#include "addwav/simulator.hpp"

#include <cmath>
#include <numbers>

#include "addwav/error.hpp"
#include "addwav/rng.hpp"

namespace addwav {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kBumpWidth = 0.1;

double bump_mean() {
  return kBumpWidth * std::sqrt(kTwoPi) * std::erf(0.5 / (kBumpWidth * std::numbers::sqrt2));
}

std::vector<TestFunction> build_catalog() {
  std::vector<TestFunction> cat;
  cat.push_back({"sine", [](double x) { return std::sin(kTwoPi * x); }, 1.0,
                 "C-infinity and 1-periodic; in B^s_{p,q} for every s < R"});
  const double m = bump_mean();
  cat.push_back({"bump",
                 [m](double x) {
                   const double z = (x - 0.5) / kBumpWidth;
                   return std::exp(-0.5 * z * z) - m;
                 },
                 1.0 - m, "Gaussian bump, width 0.1; smooth, periodic to 4e-6; any s < R"});
  // -h on [0, 0.45), +h' on [0.45, 1] with 0.45 h = 0.55 h' and unit jump.
  cat.push_back({"step", [](double x) { return x < 0.45 ? -0.55 : 0.45; }, 0.55,
                 "jumps at 0.45 and at the periodic seam; B^{1/2}_{2,inf}, B^1_{1,inf}"});
  cat.push_back({"sawtooth-centered", [](double x) { return x - 0.5; }, 0.5,
                 "linear with a jump at the periodic seam; B^{1/2}_{2,inf}"});
  return cat;
}

}  // namespace

void MixingProcessSpec::validate() const {
  if (d < 1) throw InvalidArgument("process: dimension d must be >= 1");
  if (n < 1) throw InvalidArgument("process: length n must be >= 1");
  if (!(std::abs(a) < 1.0)) throw InvalidArgument("process: AR coefficient must satisfy |a| < 1");
  if (!(std::abs(copula_theta) < 1.0)) throw InvalidArgument("process: copula theta must satisfy |theta| < 1");
  if (copula_theta != 0.0 && d != 2)
    throw InvalidArgument("process: FGM copula dependence requires d = 2");
}

const std::vector<TestFunction>& test_function_catalog() {
  static const std::vector<TestFunction> catalog = build_catalog();
  return catalog;
}

const TestFunction& test_function(std::string_view name) {
  for (const auto& tf : test_function_catalog())
    if (tf.name == name) return tf;
  throw InvalidArgument("unknown test function '" + std::string(name) + "'");
}

ScenarioSpec ScenarioSpec::make(const std::vector<std::string>& names, double mu, double noise_halfwidth) {
  if (names.empty()) throw InvalidArgument("scenario: at least one component required");
  if (!(noise_halfwidth >= 0.0)) throw InvalidArgument("scenario: noise half-width must be >= 0");
  ScenarioSpec s;
  for (const auto& n : names) s.components.push_back(test_function(n));
  s.mu = mu;
  s.noise_halfwidth = noise_halfwidth;
  s.rho = RhoSpec::identity(s.response_bound());
  return s;
}

double ScenarioSpec::regression(std::span<const double> x) const {
  double acc = mu;
  for (std::size_t v = 0; v < components.size(); ++v) acc += components[v](x[v]);
  return acc;
}

double ScenarioSpec::response_bound() const {
  double b = std::abs(mu) + noise_halfwidth;
  for (const auto& c : components) b += c.sup_norm;
  return b;
}

std::vector<std::string> ScenarioSpec::names() const {
  std::vector<std::string> out;
  for (const auto& c : components) out.push_back(c.name);
  return out;
}

double standard_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

Eigen::MatrixXd gen_latent(const MixingProcessSpec& spec) {
  spec.validate();
  Engine eng = make_engine(derive_seed(spec.seed, 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double innov = std::sqrt(1.0 - spec.a * spec.a);
  Eigen::MatrixXd z(spec.n, spec.d);
  for (int v = 0; v < spec.d; ++v) z(0, v) = normal(eng);
  for (Eigen::Index i = 1; i < spec.n; ++i)
    for (int v = 0; v < spec.d; ++v) z(i, v) = spec.a * z(i - 1, v) + innov * normal(eng);
  return z;
}

double fgm_conditional_quantile(double x1, double v, double theta) {
  const double b = theta * (1.0 - 2.0 * x1);
  const double lead = 1.0 + b;
  const double disc = std::max(0.0, lead * lead - 4.0 * b * v);
  return 2.0 * v / (lead + std::sqrt(disc));
}

Eigen::MatrixXd design_from_latent(const Eigen::MatrixXd& latent, double copula_theta) {
  Eigen::MatrixXd x = latent.unaryExpr([](double z) { return standard_normal_cdf(z); });
  if (copula_theta != 0.0) {
    if (x.cols() != 2) throw InvalidArgument("FGM copula dependence requires d = 2");
    for (Eigen::Index i = 0; i < x.rows(); ++i) x(i, 1) = fgm_conditional_quantile(x(i, 0), x(i, 1), copula_theta);
  }
  return x;
}

Design gen_design(const MixingProcessSpec& spec) {
  Design out;
  out.x = design_from_latent(gen_latent(spec), spec.copula_theta);
  out.density = spec.copula_theta != 0.0 ? DesignDensity::fgm(spec.copula_theta) : DesignDensity::uniform(spec.d);
  return out;
}

Eigen::VectorXd gen_responses(const Eigen::MatrixXd& x, const ScenarioSpec& scenario, std::uint64_t seed) {
  if (x.cols() != scenario.dim())
    throw InvalidArgument("gen_responses: design dimension differs from scenario dimension");
  Engine eng = make_engine(seed);
  std::uniform_real_distribution<double> noise(-scenario.noise_halfwidth, scenario.noise_halfwidth);
  Eigen::VectorXd y(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double acc = scenario.mu;
    for (int v = 0; v < scenario.dim(); ++v) acc += scenario.components[static_cast<std::size_t>(v)](x(i, v));
    y[i] = scenario.noise_halfwidth > 0.0 ? acc + noise(eng) : acc;
  }
  return y;
}

Dataset simulate(const MixingProcessSpec& spec, const ScenarioSpec& scenario) {
  if (spec.d != scenario.dim()) throw InvalidArgument("simulate: process and scenario dimensions differ");
  Design design = gen_design(spec);
  Dataset data;
  data.y = gen_responses(design.x, scenario, derive_seed(spec.seed, 1));
  data.x = std::move(design.x);
  data.density = std::move(design.density);
  return data;
}

}  // namespace addwav
