#include "support.hpp"

#include <algorithm>
#include <numbers>
#include <set>
#include <vector>

#include "addwav/error.hpp"
#include "addwav/simulator.hpp"

using namespace addwav;
using testing::Gen;

namespace {

MixingProcessSpec process(int d, Eigen::Index n, double a, std::uint64_t seed, double theta = 0.0) {
  MixingProcessSpec p;
  p.d = d;
  p.n = n;
  p.a = a;
  p.copula_theta = theta;
  p.seed = seed;
  return p;
}

// Kolmogorov-Smirnov distance of a sample from the CDF `cdf`.
template <typename Cdf>
double ks_statistic(std::vector<double> s, Cdf cdf) {
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

// Asymptotic 1% critical value.
double ks_critical(std::size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

double simpson(const std::function<double(double)>& f, double lo, double hi, int m = 1 << 14) {
  const double h = (hi - lo) / m;
  double s = f(lo) + f(hi);
  for (int i = 1; i < m; ++i) s += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

// Mean and batch-means standard error of a dependent series.
std::pair<double, double> batch_mean(const Eigen::VectorXd& v, Eigen::Index batch) {
  const Eigen::Index nb = v.size() / batch;
  Eigen::VectorXd means(nb);
  for (Eigen::Index b = 0; b < nb; ++b) means[b] = v.segment(b * batch, batch).mean();
  const double m = means.mean();
  const double var = (means.array() - m).square().sum() / static_cast<double>(nb - 1);
  return {m, std::sqrt(var / static_cast<double>(nb))};
}

}  // namespace

TEST_CASE("process validation") {
  CHECK_NOTHROW(process(2, 10, 0.6, 1, 0.5).validate());
  CHECK_THROWS_AS(process(0, 10, 0.0, 1).validate(), InvalidArgument);
  CHECK_THROWS_AS(process(2, 0, 0.0, 1).validate(), InvalidArgument);
  CHECK_THROWS_AS(process(2, 10, 1.0, 1).validate(), InvalidArgument);
  CHECK_THROWS_AS(process(2, 10, -1.0, 1).validate(), InvalidArgument);
  CHECK_THROWS_AS(process(2, 10, 0.0, 1, 1.0).validate(), InvalidArgument);
  CHECK_THROWS_AS(gen_design(process(3, 10, 0.0, 1, 0.3)), InvalidArgument);
  CHECK_THROWS_AS(gen_design(process(1, 10, 0.0, 1, 0.3)), InvalidArgument);
}

TEST_CASE("scenario validation") {
  CHECK_THROWS_AS(ScenarioSpec::make({"sine", "cosine"}, 0.0, 0.1), InvalidArgument);
  CHECK_THROWS_AS(ScenarioSpec::make({}, 0.0, 0.1), InvalidArgument);
  CHECK_THROWS_AS(ScenarioSpec::make({"sine"}, 0.0, -0.1), InvalidArgument);
  const ScenarioSpec sc = ScenarioSpec::make({"sine", "step"}, 0.0, 0.1);
  CHECK_THROWS_AS(simulate(process(3, 10, 0.0, 1), sc), InvalidArgument);
  CHECK_THROWS_AS(gen_responses(Eigen::MatrixXd::Zero(4, 3), sc, 1), InvalidArgument);
}

TEST_CASE("i.i.d. marginals pass the KS test") {
  int pass = 0;
  const int seeds = 100;
  for (int s = 0; s < seeds; ++s) {
    const Design des = gen_design(process(2, 10000, 0.0, derive_seed(1, s)));
    for (int v = 0; v < 2; ++v) {
      std::vector<double> col(des.x.col(v).data(), des.x.col(v).data() + des.x.rows());
      pass += ks_statistic(col, [](double x) { return x; }) < ks_critical(col.size());
    }
  }
  CHECK(pass >= 2 * seeds * 95 / 100);
}

TEST_CASE("marginals stay uniform for every AR coefficient") {
  // Thinned to lag m with a^m < 0.01.
  for (double a : {0.0, 0.3, 0.6, 0.9}) {
    const Eigen::Index lag = a == 0.0 ? 1 : static_cast<Eigen::Index>(std::ceil(std::log(0.01) / std::log(a)));
    const std::size_t n = 10000;
    int pass = 0;
    const int seeds = 100;
    for (int s = 0; s < seeds; ++s) {
      const Design des = gen_design(process(1, static_cast<Eigen::Index>(n) * lag, a, derive_seed(2, s)));
      std::vector<double> col(n);
      for (std::size_t i = 0; i < n; ++i) col[i] = des.x(static_cast<Eigen::Index>(i) * lag, 0);
      pass += ks_statistic(col, [](double x) { return x; }) < ks_critical(n);
    }
    CAPTURE(a);
    CHECK(pass >= 95);
  }
}

TEST_CASE("FGM density floor and mass") {
  for (double theta : {0.5, -0.7}) {
    const DesignDensity f = DesignDensity::fgm(theta);
    CHECK(f.floor == doctest::Approx(1.0 - std::abs(theta)));
    CHECK(f.copula_theta == theta);
    const int m = 512;
    double mass = 0.0, lo = 10.0;
    for (int i = 0; i < m; ++i)
      for (int k = 0; k < m; ++k) {
        const double x[] = {(i + 0.5) / m, (k + 0.5) / m};
        const double v = f(x);
        mass += v;
        lo = std::min(lo, v);
      }
    CHECK(std::abs(mass / (m * m) - 1.0) < 1e-12);
    CHECK(lo >= f.floor - 1e-12);
  }
  const Design des = gen_design(process(2, 10, 0.0, 1, 0.5));
  CHECK(des.density.floor == doctest::Approx(0.5));
  CHECK(DesignDensity::uniform(3).floor == 1.0);
}

TEST_CASE("FGM conditional quantile inverts the conditional CDF") {
  Gen gen(3);
  for (int i = 0; i < 10000; ++i) {
    const double x1 = gen.uniform(), v = gen.uniform(), theta = gen.uniform(-0.99, 0.99);
    const double q = fgm_conditional_quantile(x1, v, theta);
    const double b = theta * (1.0 - 2.0 * x1);
    CHECK(q >= 0.0);
    CHECK(q <= 1.0);
    CHECK(std::abs(q * (1.0 + b * (1.0 - q)) - v) < 1e-12);
  }
  CHECK(fgm_conditional_quantile(0.5, 0.3, 0.8) == doctest::Approx(0.3));
}

TEST_CASE("FGM design reproduces the copula moment") {
  // E[(1-2X1)(1-2X2)] = theta/9 under the FGM density.
  const double theta = 0.5;
  const Design des = gen_design(process(2, 100000, 0.0, 4, theta));
  const Eigen::ArrayXd prod = (1.0 - 2.0 * des.x.col(0).array()) * (1.0 - 2.0 * des.x.col(1).array());
  const double mean = prod.mean();
  const double se = std::sqrt((prod - mean).square().mean() / static_cast<double>(prod.size()));
  CHECK(std::abs(mean - theta / 9.0) < 4.0 * se);
  std::vector<double> col(des.x.col(1).data(), des.x.col(1).data() + des.x.rows());
  CHECK(ks_statistic(col, [](double x) { return x; }) < 2.0 * ks_critical(col.size()));
}

TEST_CASE("latent autocorrelation decays like a^m") {
  const double a = 0.6;
  const Eigen::MatrixXd z = gen_latent(process(1, 100000, a, 5));
  const Eigen::VectorXd c = z.col(0).array() - z.col(0).mean();
  const double c0 = c.squaredNorm();
  // Least-squares slope of log autocorrelation on lag through the origin.
  double num = 0.0, den = 0.0;
  for (Eigen::Index m = 1; m <= 5; ++m) {
    const double r = c.head(c.size() - m).dot(c.tail(c.size() - m)) / c0;
    num += static_cast<double>(m) * std::log(r);
    den += static_cast<double>(m * m);
  }
  const double slope = num / den;
  CHECK(std::abs(slope / std::log(a) - 1.0) <= 0.15);
}

TEST_CASE("noiseless responses equal the regression function") {
  const ScenarioSpec sc = ScenarioSpec::make({"bump", "step"}, 0.7, 0.0);
  const Dataset data = simulate(process(2, 500, 0.3, 6), sc);
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    const double x[] = {data.x(i, 0), data.x(i, 1)};
    CHECK(data.y[i] == sc.regression(x));
  }
}

TEST_CASE("sample mean of the response concentrates on mu") {
  const ScenarioSpec sc = ScenarioSpec::make({"sine", "step"}, 1.5, 0.5);
  const Eigen::Index n = 1000;
  int within = 0;
  for (int s = 0; s < 1000; ++s) {
    const Dataset data = simulate(process(2, n, 0.0, derive_seed(7, s)), sc);
    const double m = data.y.mean();
    const double sd = std::sqrt((data.y.array() - m).square().mean());
    within += std::abs(m - sc.mu) <= 3.0 * sd / std::sqrt(static_cast<double>(n));
  }
  CHECK(within >= 990);
}

TEST_CASE("zero regression with unit noise gives uniform responses") {
  ScenarioSpec sc;
  sc.components.push_back(TestFunction{"zero", [](double) { return 0.0; }, 0.0, "constant"});
  sc.noise_halfwidth = 1.0;
  sc.rho = RhoSpec::identity(sc.response_bound());
  const Dataset data = simulate(process(1, 20000, 0.0, 8), sc);
  CHECK(data.y.maxCoeff() <= 1.0);
  CHECK(data.y.minCoeff() >= -1.0);
  std::vector<double> y(data.y.data(), data.y.data() + data.n());
  CHECK(ks_statistic(y, [](double v) { return 0.5 * (v + 1.0); }) < ks_critical(y.size()));
}

TEST_CASE("catalog functions are centered and bounded") {
  for (std::string name : {"sine", "bump", "step", "sawtooth-centered"}) {
    CAPTURE(name);
    const TestFunction& g = test_function(name);
    const double integral = simpson(g.f, 0.0, std::nextafter(0.45, 0.0)) + simpson(g.f, 0.45, std::nextafter(1.0, 0.0));
    CHECK(std::abs(integral) <= 1e-8);
    double sup = 0.0;
    for (int i = 0; i <= 100000; ++i) sup = std::max(sup, std::abs(g(std::min(i / 100000.0, 1.0 - 1e-15))));
    CHECK(sup <= g.sup_norm + 1e-12);
    CHECK(sup >= g.sup_norm - 1e-4);
    CHECK_FALSE(g.smoothness.empty());
  }
  CHECK(test_function_catalog().size() >= 4);
  CHECK_THROWS_AS(test_function("cosine"), InvalidArgument);
}

TEST_CASE("step levels satisfy the centering constraint") {
  const TestFunction& g = test_function("step");
  const double h = -g(0.1), h2 = g(0.9);
  CHECK(h > 0.0);
  CHECK(h - h2 == doctest::Approx(0.1));
  CHECK(std::abs(0.45 * h - 0.55 * h2) < 1e-15);
  CHECK(g(0.45) == h2);
  CHECK(g(0.4499999) == -h);
}

TEST_CASE("first and second moments agree across halves") {
  const ScenarioSpec sc = ScenarioSpec::make({"sine", "bump"}, 0.2, 0.5);
  const Eigen::Index n = 100000;
  const Dataset data = simulate(process(2, n, 0.6, 9), sc);
  auto check = [&](const Eigen::VectorXd& v) {
    for (int power : {1, 2}) {
      const Eigen::VectorXd w = power == 1 ? v : Eigen::VectorXd(v.array().square());
      const auto [m1, se1] = batch_mean(w.head(n / 2), 500);
      const auto [m2, se2] = batch_mean(w.tail(n / 2), 500);
      CHECK(std::abs(m1 - m2) <= 4.0 * std::hypot(se1, se2));
    }
  };
  check(data.y);
  check(data.x.col(0));
  check(data.x.col(1));
}

TEST_CASE("responses respect the recorded bound") {
  for (double a : {0.0, 0.9}) {
    const ScenarioSpec sc = ScenarioSpec::make({"step", "sawtooth-centered"}, -0.4, 0.3);
    CHECK(sc.rho.sup_bound == doctest::Approx(0.4 + 0.55 + 0.5 + 0.3));
    const Dataset data = simulate(process(2, 20000, a, 10), sc);
    CHECK(data.y.cwiseAbs().maxCoeff() <= sc.rho.sup_bound);
  }
}

TEST_CASE("identical seeds reproduce the dataset bit for bit") {
  const ScenarioSpec sc = ScenarioSpec::make({"sine", "step"}, 0.0, 0.5);
  const Dataset a = simulate(process(2, 3000, 0.6, 11, 0.5), sc);
  const Dataset b = simulate(process(2, 3000, 0.6, 11, 0.5), sc);
  const Dataset c = simulate(process(2, 3000, 0.6, 12, 0.5), sc);
  CHECK(a.x == b.x);
  CHECK(a.y == b.y);
  CHECK(a.x != c.x);
  CHECK(a.y != c.y);
}

TEST_CASE("derived seeds are distinct") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t master : {0ULL, 1ULL, 42ULL})
    for (std::uint64_t n = 0; n < 64; ++n)
      for (std::uint64_t r = 0; r < 64; ++r) seen.insert(derive_seed(master, n, r));
  CHECK(seen.size() == 3 * 64 * 64);
}
