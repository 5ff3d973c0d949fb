#include "addwav/estimator.hpp"

#include <cmath>
#include <string>

#include "addwav/error.hpp"

namespace addwav {
namespace {

void check_axis(const Dataset& data, int axis) {
  if (axis < 0 || axis >= data.dim())
    throw InvalidArgument("target coordinate " + std::to_string(axis + 1) + " exceeds dataset dimension " +
                          std::to_string(data.dim()));
}

}  // namespace

DesignDensity DesignDensity::uniform(int d) {
  DesignDensity f;
  f.evaluator = [](std::span<const double>) { return 1.0; };
  f.floor = 1.0;
  f.description = "uniform[0,1]^" + std::to_string(d);
  return f;
}

DesignDensity DesignDensity::fgm(double theta) {
  if (!(std::abs(theta) < 1.0)) throw InvalidArgument("FGM copula parameter must satisfy |theta| < 1");
  DesignDensity f;
  f.evaluator = [theta](std::span<const double> x) {
    return 1.0 + theta * (1.0 - 2.0 * x[0]) * (1.0 - 2.0 * x[1]);
  };
  f.floor = 1.0 - std::abs(theta);
  f.description = "fgm(theta=" + std::to_string(theta) + ")";
  f.copula_theta = theta;
  return f;
}

void validate_density(const DesignDensity& f, int d) {
  if (!(f.floor > 0.0)) throw InvalidArgument("design density floor must be positive");
  if (d < 1 || d > 3) return;
  const Eigen::Index m = d == 1 ? 4096 : (d == 2 ? 256 : 48);
  Eigen::Index total = 1;
  for (int v = 0; v < d; ++v) total *= m;
  std::vector<double> x(static_cast<std::size_t>(d));
  double acc = 0.0;
  for (Eigen::Index flat = 0; flat < total; ++flat) {
    Eigen::Index rem = flat;
    for (int v = d - 1; v >= 0; --v) {
      x[static_cast<std::size_t>(v)] = (static_cast<double>(rem % m) + 0.5) / static_cast<double>(m);
      rem /= m;
    }
    const double fx = f(x);
    if (fx < f.floor) throw InconsistentDensity("design density falls below its declared floor");
    acc += fx;
  }
  if (std::abs(acc / static_cast<double>(total) - 1.0) > 1e-3)
    throw InvalidArgument("design density does not integrate to 1");
}

RhoSpec RhoSpec::identity(double sup_bound) {
  RhoSpec r;
  r.rho = [](double y) { return y; };
  r.sup_bound = sup_bound;
  return r;
}

void Dataset::validate() const {
  if (x.rows() != y.size()) throw InvalidArgument("dataset: x and y lengths differ");
  if (y.size() < 1) throw InvalidArgument("dataset: no observations");
  if (x.size() > 0 && ((x.array() < 0.0).any() || (x.array() > 1.0).any()))
    throw InvalidArgument("dataset: design points must lie in [0,1]");
}

int ComponentEstimate::kept_count() const {
  int c = 0;
  for (const auto& lv : levels) c += static_cast<int>(lv.kept.count());
  return c;
}

int ComponentEstimate::detail_count() const {
  int c = 0;
  for (const auto& lv : levels) c += static_cast<int>(lv.values.size());
  return c;
}

double estimate_mu(const Dataset& data, const RhoSpec& rho) {
  if (data.n() < 1) throw InvalidArgument("estimate_mu: empty dataset");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) acc += rho(data.y[i]);
  return acc / static_cast<double>(data.n());
}

Eigen::VectorXd response_weights(const Dataset& data, const RhoSpec& rho) {
  Eigen::VectorXd w(data.n());
  std::vector<double> xi(static_cast<std::size_t>(data.dim()));
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (int v = 0; v < data.dim(); ++v) xi[static_cast<std::size_t>(v)] = data.x(i, v);
    const double fx = data.density(xi);
    if (!(fx >= data.density.floor))
      throw InconsistentDensity("design density " + std::to_string(fx) + " below declared floor " +
                                std::to_string(data.density.floor) + " at observation " + std::to_string(i));
    w[i] = rho(data.y[i]) / fx;
  }
  return w;
}

double hat_coeff(const Dataset& data, const Eigen::VectorXd& weights, const BasisTable& table,
                 BasisKind kind, int j, int k, int axis) {
  check_axis(data, axis);
  if (j < table.family().tau)
    throw InvalidArgument("hat_coeff: level j=" + std::to_string(j) + " below tau=" +
                          std::to_string(table.family().tau));
  if (k < 0 || k >= (1 << j)) throw InvalidArgument("hat_coeff: translation out of range");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i)
    acc += weights[i] * eval_periodized(table, kind, j, k, data.x(i, axis));
  return acc / static_cast<double>(data.n());
}

double hat_coeff(const Dataset& data, const RhoSpec& rho, const BasisTable& table, BasisKind kind,
                 int j, int k, int axis) {
  return hat_coeff(data, response_weights(data, rho), table, kind, j, k, axis);
}

Eigen::VectorXd hat_level(const Dataset& data, const Eigen::VectorXd& weights, const BasisTable& table,
                          BasisKind kind, int j, int axis) {
  check_axis(data, axis);
  if (j < table.family().tau) throw InvalidArgument("hat_level: level below tau");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(Eigen::Index{1} << j);
  std::span<double> view(out.data(), static_cast<std::size_t>(out.size()));
  for (Eigen::Index i = 0; i < data.n(); ++i)
    accumulate_periodized(table, kind, j, data.x(i, axis), weights[i], view);
  return out / static_cast<double>(data.n());
}

double threshold_lambda(Eigen::Index n) {
  if (n < 2) throw InvalidArgument("threshold_lambda: need n >= 2");
  const double nn = static_cast<double>(n);
  return std::sqrt(std::log(nn) / nn);
}

int resolution_j1(Eigen::Index n, int tau) {
  if (n < 2) throw InvalidArgument("resolution_j1: need n >= 2");
  const double nn = static_cast<double>(n);
  const double raw = std::floor(nn / std::pow(std::log(nn), 3));
  const double bracket = std::max(1.0, raw);
  const int j1 = static_cast<int>(std::floor(std::log2(bracket)));
  return std::max(j1, tau);
}

ComponentEstimate fit_component(const Dataset& data, const RhoSpec& rho, const BasisTable& table,
                                const EstimatorConfig& config) {
  data.validate();
  check_axis(data, config.axis);
  if (!(config.kappa >= 0.0)) throw InvalidArgument("fit_component: kappa must be nonnegative");
  const int tau = table.family().tau;
  if (data.n() < (Eigen::Index{1} << tau) || data.n() < 2)
    throw InvalidArgument("fit_component: need n >= 2^tau observations");

  ComponentEstimate est;
  est.tau = tau;
  est.kappa = config.kappa;
  est.axis = config.axis;
  est.family_R = table.family().R;
  est.lambda_n = threshold_lambda(data.n());
  est.j1 = config.j1_override ? *config.j1_override : resolution_j1(data.n(), tau);
  if (est.j1 < tau) throw InvalidArgument("fit_component: j1 must be >= tau");
  if (est.j1 > 24) throw InvalidArgument("fit_component: j1 too large");
  est.mu_hat = estimate_mu(data, rho);

  const Eigen::VectorXd w = response_weights(data, rho);
  est.a_hat = hat_level(data, w, table, BasisKind::scaling, tau, config.axis);
  for (int j = tau; j <= est.j1; ++j) {
    DetailLevel lv;
    lv.j = j;
    lv.values = hat_level(data, w, table, BasisKind::wavelet, j, config.axis);
    est.levels.push_back(std::move(lv));
  }
  apply_threshold(est);
  return est;
}

void apply_threshold(ComponentEstimate& est) {
  const double t = est.kappa * est.lambda_n;
  for (auto& lv : est.levels) lv.kept = lv.values.array().abs() >= t;
}

namespace {

double level_sum(const BasisTable& table, BasisKind kind, int j, const Eigen::VectorXd& c,
                 const Eigen::Array<bool, Eigen::Dynamic, 1>* kept, double x) {
  const int period = 1 << j;
  const int L = table.family().support_length;
  const double t = std::ldexp(x, j);
  const int base = static_cast<int>(std::floor(t));
  double acc = 0.0;
  for (int n = base - L + 1; n <= base; ++n) {
    int k = n % period;
    if (k < 0) k += period;
    if (kept && !(*kept)[k]) continue;
    acc += c[k] * table.value(kind, t - n);
  }
  return std::sqrt(static_cast<double>(period)) * acc;
}

}  // namespace

double eval_estimate(const ComponentEstimate& est, const BasisTable& table, double x) {
  double acc = level_sum(table, BasisKind::scaling, est.tau, est.a_hat, nullptr, x);
  for (const auto& lv : est.levels)
    if (lv.kept.any()) acc += level_sum(table, BasisKind::wavelet, lv.j, lv.values, &lv.kept, x);
  return acc - est.mu_hat;
}

Eigen::VectorXd eval_estimate_grid(const ComponentEstimate& est, const BasisTable& table, Eigen::Index n) {
  Eigen::VectorXd out(n);
  for (Eigen::Index i = 0; i < n; ++i)
    out[i] = eval_estimate(est, table, (static_cast<double>(i) + 0.5) / static_cast<double>(n));
  return out;
}

double ise(const ComponentEstimate& est, const BasisTable& table, const GridFunction& g_true) {
  if (g_true.size() < 1024) throw InvalidArgument("ise: need at least 2^10 grid nodes");
  const Eigen::VectorXd diff = eval_estimate_grid(est, table, g_true.size()) - g_true.values;
  return diff.squaredNorm() / static_cast<double>(diff.size());
}

}  // namespace addwav
