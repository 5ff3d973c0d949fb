#include "addwav/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "addwav/error.hpp"
#include "addwav/estimator.hpp"
#include "addwav/parallel.hpp"
#include "addwav/rng.hpp"

namespace addwav {
namespace {

double overlap(double lo, double hi, double a, double b) {
  return std::max(0.0, std::min(hi, b) - std::max(lo, a));
}

/// Midpoint integral of a catalog component on 2^20 nodes.
double component_mean(const TestFunction& g) {
  constexpr Eigen::Index n = Eigen::Index{1} << 20;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) acc += g((static_cast<double>(i) + 0.5) / static_cast<double>(n));
  return acc / static_cast<double>(n);
}

void check_budget(const MonteCarloSetup& setup, int reps, Eigen::Index n) {
  if (reps < 1) throw InvalidArgument("Monte Carlo: reps must be >= 1");
  if (static_cast<double>(reps) * static_cast<double>(n) > setup.budget)
    throw BudgetExceeded("Monte Carlo: reps * n = " + std::to_string(static_cast<double>(reps) * n) +
                         " exceeds budget " + std::to_string(setup.budget));
  if (!setup.table) throw InvalidArgument("Monte Carlo: basis table missing");
}

int largest_concentration_level(Eigen::Index n) {
  const double nn = static_cast<double>(n);
  const double cap = nn / std::pow(std::log(nn), 3);
  if (cap < 1.0) return -1;
  return static_cast<int>(std::floor(std::log2(cap)));
}

void check_concentration_hypothesis(int j, Eigen::Index n) {
  const double nn = static_cast<double>(n);
  if (std::ldexp(1.0, j) > nn / std::pow(std::log(nn), 3))
    throw HypothesisViolated("concentration requires 2^j <= n/(ln n)^3; violated for j=" + std::to_string(j) +
                             ", n=" + std::to_string(n));
}

}  // namespace

HaarCase parse_haar_case(std::string_view name) {
  if (name == "linear") return HaarCase::linear;
  if (name == "constant") return HaarCase::constant;
  if (name == "step@0.5") return HaarCase::step_half;
  throw InvalidArgument("haar_closed_form: unsupported function '" + std::string(name) + "'");
}

double haar_closed_form(HaarCase g, BasisKind kind, int j, int k, double c) {
  if (j < 0 || j > 6) throw InvalidArgument("haar_closed_form: need 0 <= j <= 6");
  if (k < 0 || k >= (1 << j)) throw InvalidArgument("haar_closed_form: translation out of range");
  const double w = std::ldexp(1.0, -j);
  const double a = k * w;
  const double m = (k + 0.5) * w;
  const double b = (k + 1) * w;
  const double amp = std::sqrt(std::ldexp(1.0, j));
  switch (g) {
    case HaarCase::linear:
      if (kind == BasisKind::scaling) return amp * (b * b - a * a) / 2.0;
      return amp * ((m * m - a * a) - (b * b - m * m)) / 2.0;
    case HaarCase::constant:
      return kind == BasisKind::scaling ? c / amp : 0.0;
    case HaarCase::step_half:
      if (kind == BasisKind::scaling) return amp * overlap(a, b, 0.5, 1.0);
      return amp * (overlap(a, m, 0.5, 1.0) - overlap(m, b, 0.5, 1.0));
  }
  throw InternalError("haar_closed_form: unreachable");
}

double scenario_true_coeff(const BasisTable& table, const ScenarioSpec& scenario, CoeffIndex idx, int axis) {
  const int d = scenario.dim();
  if (axis < 0 || axis >= d) throw InvalidArgument("scenario_true_coeff: axis out of range");
  if (idx.j < table.family().tau) throw InvalidArgument("scenario_true_coeff: level below tau");
  if (idx.k < 0 || idx.k >= (1 << idx.j)) throw InvalidArgument("scenario_true_coeff: index out of range");
  // h collapses to 2^{j(d-1)/2} b_{j,k}(x_axis), so by Fubini only the means of the
  // other components survive the integration over their coordinates.
  double offset = scenario.mu;
  for (int v = 0; v < d; ++v)
    if (v != axis) offset += component_mean(scenario.components[static_cast<std::size_t>(v)]);
  const TestFunction& g = scenario.components[static_cast<std::size_t>(axis)];
  const Eigen::Index n = Eigen::Index{1} << std::max(20, idx.j + 6);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    acc += (offset + g(x)) * eval_periodized(table, idx.kind, idx.j, idx.k, x);
  }
  return acc / static_cast<double>(n);
}

double MomentReport::standard_error() const { return std::sqrt(var_hat / static_cast<double>(reps)); }

Eigen::MatrixXd mc_coefficients(const MonteCarloSetup& setup, std::span<const CoeffIndex> indices, int reps,
                                Eigen::Index n) {
  check_budget(setup, reps, n);
  if (setup.process.d != setup.scenario.dim())
    throw InvalidArgument("Monte Carlo: process and scenario dimensions differ");

  // Distinct (kind, level) pairs are computed once per replication.
  std::map<std::pair<int, int>, std::size_t> slot;
  std::vector<std::pair<BasisKind, int>> levels;
  for (const auto& idx : indices) {
    const auto key = std::make_pair(static_cast<int>(idx.kind), idx.j);
    if (!slot.count(key)) {
      slot[key] = levels.size();
      levels.emplace_back(idx.kind, idx.j);
    }
  }

  Eigen::MatrixXd out(reps, static_cast<Eigen::Index>(indices.size()));
  const BasisTable& table = *setup.table;
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
    MixingProcessSpec spec = setup.process;
    spec.n = n;
    spec.seed = derive_seed(setup.master_seed, static_cast<std::uint64_t>(n), r);
    const Dataset data = simulate(spec, setup.scenario);
    const Eigen::VectorXd w = response_weights(data, setup.scenario.rho);
    std::vector<Eigen::VectorXd> values;
    values.reserve(levels.size());
    for (const auto& [kind, j] : levels) values.push_back(hat_level(data, w, table, kind, j, setup.axis));
    for (std::size_t c = 0; c < indices.size(); ++c) {
      const auto& idx = indices[c];
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          values[slot.at({static_cast<int>(idx.kind), idx.j})][idx.k];
    }
  });
  return out;
}

std::vector<MomentReport> mc_moments(const MonteCarloSetup& setup, std::span<const CoeffIndex> indices, int reps,
                                     Eigen::Index n) {
  if (reps < 1000) throw InvalidArgument("mc_moments: reps must be >= 1000");
  const Eigen::MatrixXd est = mc_coefficients(setup, indices, reps, n);

  std::vector<MomentReport> out;
  for (std::size_t c = 0; c < indices.size(); ++c) {
    MomentReport rep;
    rep.index = indices[c];
    rep.axis = setup.axis;
    rep.reps = reps;
    rep.n = n;
    rep.true_value = scenario_true_coeff(*setup.table, setup.scenario, indices[c], setup.axis);
    const auto col = est.col(static_cast<Eigen::Index>(c)).array();
    rep.mean_hat = col.mean();
    rep.var_hat = (col - rep.mean_hat).square().mean();
    rep.m4_hat = (col - rep.true_value).square().square().mean();
    out.push_back(rep);
  }
  return out;
}

MomentReport mc_moments(const MonteCarloSetup& setup, CoeffIndex index, int reps, Eigen::Index n) {
  return mc_moments(setup, std::span<const CoeffIndex>(&index, 1), reps, n).front();
}

std::vector<double> tail_frequencies(const MonteCarloSetup& setup, CoeffIndex index, std::span<const double> kappas,
                                     int reps, Eigen::Index n) {
  check_concentration_hypothesis(index.j, n);
  const Eigen::MatrixXd est = mc_coefficients(setup, std::span<const CoeffIndex>(&index, 1), reps, n);
  const double truth = scenario_true_coeff(*setup.table, setup.scenario, index, setup.axis);
  const Eigen::ArrayXd dev = (est.col(0).array() - truth).abs();
  const double lambda = threshold_lambda(n);
  std::vector<double> out;
  for (double kappa : kappas) {
    if (!(kappa >= 0.0)) throw InvalidArgument("tail_frequency: kappa must be >= 0");
    out.push_back((dev >= kappa * lambda / 2.0).cast<double>().mean());
  }
  return out;
}

double tail_frequency(const MonteCarloSetup& setup, CoeffIndex index, double kappa, int reps, Eigen::Index n) {
  return tail_frequencies(setup, index, std::span<const double>(&kappa, 1), reps, n).front();
}

KappaCalibration calibrate_kappa(const MonteCarloSetup& setup, Eigen::Index n, int reps, double quantile) {
  check_budget(setup, reps, n);
  if (!(quantile > 0.0 && quantile < 1.0)) throw InvalidArgument("calibrate_kappa: quantile must lie in (0,1)");
  const double c2 = setup.scenario.rho.sup_bound;
  if (!std::isfinite(c2) || !(c2 > 0.0)) throw InvalidArgument("calibrate_kappa: rho needs a finite sup bound");
  const BasisTable& table = *setup.table;
  const int tau = table.family().tau;
  KappaCalibration cal;
  cal.quantile_level = quantile;
  cal.reps = reps;
  cal.first_level = tau;
  cal.last_level = std::max(tau, largest_concentration_level(n));
  int per_rep = 0;
  for (int j = cal.first_level; j <= cal.last_level; ++j) per_rep += 1 << j;

  const double lambda = threshold_lambda(n);
  Eigen::MatrixXd ratios(reps, per_rep);
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
    MixingProcessSpec spec = setup.process;
    spec.n = n;
    spec.seed = derive_seed(setup.master_seed ^ 0x6b617070612d6e75ULL, static_cast<std::uint64_t>(n), r);
    Design design = gen_design(spec);
    Dataset data;
    data.x = std::move(design.x);
    data.density = std::move(design.density);
    Engine eng = make_engine(derive_seed(spec.seed, 2));
    std::bernoulli_distribution coin(0.5);
    data.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) data.y[i] = coin(eng) ? c2 : -c2;
    const Eigen::VectorXd w = response_weights(data, RhoSpec::identity(c2));
    Eigen::Index col = 0;
    for (int j = cal.first_level; j <= cal.last_level; ++j) {
      const Eigen::VectorXd b = hat_level(data, w, table, BasisKind::wavelet, j, setup.axis);
      for (Eigen::Index k = 0; k < b.size(); ++k) ratios(static_cast<Eigen::Index>(r), col++) = std::abs(b[k]) / lambda;
    }
  });

  std::vector<double> pooled(ratios.data(), ratios.data() + ratios.size());
  std::sort(pooled.begin(), pooled.end());
  const auto rank = static_cast<std::size_t>(std::ceil(quantile * static_cast<double>(pooled.size())));
  cal.quantile_value = pooled[std::min(pooled.size() - 1, rank == 0 ? 0 : rank - 1)];
  cal.kappa = 2.0 * cal.quantile_value;
  return cal;
}

RateFit rate_fit(std::vector<std::pair<Eigen::Index, double>> points) {
  if (points.size() < 4) throw InvalidArgument("rate_fit: need at least 4 points");
  for (std::size_t i = 1; i < points.size(); ++i)
    if (points[i].first <= points[i - 1].first)
      throw InvalidArgument("rate_fit: degenerate regression (sample sizes must be strictly increasing)");
  if (points.front().first < 2) throw InvalidArgument("rate_fit: sample sizes must be >= 2");
  if (static_cast<double>(points.back().first) < 4.0 * static_cast<double>(points.front().first))
    throw InvalidArgument("rate_fit: sample sizes must span at least two octaves");

  const auto m = static_cast<Eigen::Index>(points.size());
  Eigen::VectorXd x(m), y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& [n, e] = points[static_cast<std::size_t>(i)];
    if (!(e > 0.0)) throw InvalidArgument("rate_fit: mean ISE values must be positive");
    const double nn = static_cast<double>(n);
    x[i] = std::log(std::log(nn) / nn);
    y[i] = std::log(e);
  }
  const Eigen::VectorXd xc = x.array() - x.mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  const double sxx = xc.squaredNorm();
  if (sxx == 0.0) throw InvalidArgument("rate_fit: degenerate regression");

  RateFit fit;
  fit.points = std::move(points);
  fit.slope = xc.dot(yc) / sxx;
  fit.intercept = y.mean() - fit.slope * x.mean();
  const double ss_tot = yc.squaredNorm();
  const double ss_res = (yc - fit.slope * xc).squaredNorm();
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

}  // namespace addwav
