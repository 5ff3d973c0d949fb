#include "support.hpp"

#include <bit>
#include <limits>
#include <numbers>
#include <vector>

#include "addwav/error.hpp"
#include "addwav/tensor_marginal.hpp"

using namespace addwav;
using testing::Gen;
using testing::table;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Literal sum over k_{-axis} written out directly from 1-D evaluations.
double literal_reference(const BasisTable& t, BasisKind kind, int j, int k, int axis, std::span<const double> x) {
  double prod = eval_periodized(t, kind, j, k, x[static_cast<std::size_t>(axis)]);
  for (std::size_t v = 0; v < x.size(); ++v) {
    if (static_cast<int>(v) == axis) continue;
    double s = 0.0;
    for (int kv = 0; kv < (1 << j); ++kv) s += eval_periodized(t, BasisKind::scaling, j, kv, x[v]);
    prod *= s;
  }
  return prod;
}

}  // namespace

TEST_CASE("direction masks") {
  CHECK(wavelet_coordinates(2, 0) == std::vector<bool>{false, false});
  CHECK(wavelet_coordinates(2, 1) == std::vector<bool>{true, false});
  CHECK(wavelet_coordinates(2, 2) == std::vector<bool>{false, true});
  CHECK(wavelet_coordinates(2, 3) == std::vector<bool>{true, true});
  // d = 3: u = 4..7 are the subsets of size >= 2 in mask order {1,2},{1,3},{2,3},{1,2,3}.
  CHECK(wavelet_coordinates(3, 4) == std::vector<bool>{true, true, false});
  CHECK(wavelet_coordinates(3, 5) == std::vector<bool>{true, false, true});
  CHECK(wavelet_coordinates(3, 6) == std::vector<bool>{false, true, true});
  CHECK(wavelet_coordinates(3, 7) == std::vector<bool>{true, true, true});
  CHECK_THROWS_AS(wavelet_coordinates(2, 4), InvalidArgument);
  CHECK_THROWS_AS(wavelet_coordinates(0, 0), InvalidArgument);
}

TEST_CASE("property: every size >= 2 subset appears exactly once") {
  for (int d = 2; d <= 6; ++d) {
    std::vector<int> seen(std::size_t{1} << d, 0);
    for (unsigned u = static_cast<unsigned>(d) + 1; u < (1u << d); ++u) {
      const auto mask = wavelet_coordinates(d, u);
      unsigned bits = 0;
      int count = 0;
      for (int v = 0; v < d; ++v)
        if (mask[static_cast<std::size_t>(v)]) {
          bits |= 1u << v;
          ++count;
        }
      CHECK(count >= 2);
      ++seen[bits];
    }
    for (unsigned b = 0; b < (1u << d); ++b) CHECK(seen[b] == (std::popcount(b) >= 2 ? 1 : 0));
  }
}

TEST_CASE("haar tensor scaling product") {
  const BasisTable& t = table(1);
  const double x[] = {0.3, 0.3};
  CHECK(eval_tensor(t, {1, {0, 0}, 0}, x) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(eval_tensor(t, {1, {1, 0}, 0}, x) == 0.0);
}

TEST_CASE("tensor index validation") {
  const BasisTable& t = table(2);
  const double x[] = {0.3, 0.3};
  CHECK_THROWS_AS(eval_tensor(t, {2, {0, 4}, 0}, x), InvalidArgument);
  CHECK_THROWS_AS(eval_tensor(t, {2, {0, 0}, 4}, x), InvalidArgument);
  CHECK_THROWS_AS(eval_tensor(t, {2, {0}, 0}, x), InvalidArgument);
}

TEST_CASE("property: swapping the direction equals swapping the coordinates") {
  Gen gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    const int R = gen.integer(1, 4);
    const BasisTable& t = table(R);
    const int j = gen.integer(t.family().tau, 5);
    const int k1 = gen.integer(0, (1 << j) - 1), k2 = gen.integer(0, (1 << j) - 1);
    const double x[] = {gen.uniform(), gen.uniform()};
    const double xs[] = {x[1], x[0]};
    const double a = eval_tensor(t, {j, {k1, k2}, 1}, x);
    const double b = eval_tensor(t, {j, {k2, k1}, 2}, xs);
    CHECK(a == b);
    CHECK(a == doctest::Approx(eval_periodized(t, BasisKind::wavelet, j, k1, x[0]) *
                               eval_periodized(t, BasisKind::scaling, j, k2, x[1])));
  }
}

TEST_CASE("scaling and wavelet tensor elements are orthogonal") {
  const BasisTable& t = table(2);
  const int tau = t.family().tau;
  const Eigen::Index nodes[] = {512, 512};
  for (unsigned u = 1; u < 4; ++u) {
    for (int k = 0; k < (1 << tau); ++k) {
      const TensorIndex phi{tau, {k, k}, 0};
      const TensorIndex psi{tau, {k, k}, u};
      const double ip = integrate_tensor(
          [&](std::span<const double> x) { return eval_tensor(t, phi, x) * eval_tensor(t, psi, x); }, nodes);
      CHECK(std::abs(ip) <= 1e-4);
    }
  }
}

TEST_CASE("collapse in one dimension is the periodized element") {
  const BasisTable& t = table(3);
  Gen gen(9);
  for (int i = 0; i < 100; ++i) {
    const double x[] = {gen.uniform()};
    const int j = gen.integer(3, 7), k = gen.integer(0, (1 << j) - 1);
    for (auto kind : {BasisKind::scaling, BasisKind::wavelet}) {
      CHECK(h_collapse(t, kind, j, k, 0, x) == eval_periodized(t, kind, j, k, x[0]));
      CHECK(h_collapse(t, kind, j, k, 0, x, CollapseMode::literal) == eval_periodized(t, kind, j, k, x[0]));
    }
  }
}

TEST_CASE("literal and collapsed sums agree for haar at j = 4 in d = 2") {
  const BasisTable& t = table(1);
  Gen gen(21);
  for (int i = 0; i < 100; ++i) {
    const double x[] = {gen.uniform(), gen.uniform()};
    const int k = gen.integer(0, 15);
    const int axis = gen.integer(0, 1);
    for (auto kind : {BasisKind::scaling, BasisKind::wavelet}) {
      const double fast = h_collapse(t, kind, 4, k, axis, x);
      CHECK(std::abs(fast - h_collapse(t, kind, 4, k, axis, x, CollapseMode::literal)) <= 1e-10);
      CHECK(std::abs(fast - literal_reference(t, kind, 4, k, axis, x)) <= 1e-10);
    }
  }
}

TEST_CASE("property: literal and collapsed sums agree for smooth families") {
  Gen gen(22);
  for (int trial = 0; trial < 60; ++trial) {
    const int R = gen.integer(2, 4);
    const BasisTable& t = table(R);
    const int d = gen.integer(2, 3);
    const int j = gen.integer(t.family().tau, t.family().tau + (d == 3 ? 1 : 2));
    std::vector<double> x(static_cast<std::size_t>(d));
    for (auto& v : x) v = gen.uniform();
    const int k = gen.integer(0, (1 << j) - 1), axis = gen.integer(0, d - 1);
    for (auto kind : {BasisKind::scaling, BasisKind::wavelet}) {
      const double fast = h_collapse(t, kind, j, k, axis, x);
      CHECK(std::abs(fast - h_collapse(t, kind, j, k, axis, x, CollapseMode::literal)) <= 1e-10);
    }
  }
}

TEST_CASE("collapse validates its arguments") {
  const BasisTable& t = table(2);
  const double x[] = {0.2, 0.4};
  CHECK_THROWS_AS(h_collapse(t, BasisKind::scaling, 1, 0, 0, x), InvalidArgument);
  CHECK_THROWS_AS(h_collapse(t, BasisKind::scaling, 2, 4, 0, x), InvalidArgument);
  CHECK_THROWS_AS(h_collapse(t, BasisKind::scaling, 2, 0, 2, x), InvalidArgument);
}

TEST_CASE("squared collapse integrates to 2^{j(d-1)} in d = 2 at j = 3") {
  const BasisTable& t = table(2);
  const Eigen::Index nodes[] = {1024, 64};
  for (auto kind : {BasisKind::scaling, BasisKind::wavelet}) {
    for (int k : {0, 3, 7}) {
      const double v = integrate_tensor(
          [&](std::span<const double> x) { return std::pow(h_collapse(t, kind, 3, k, 0, x), 2); }, nodes);
      CHECK(std::abs(v - 8.0) <= 1e-3 * 8.0);
    }
  }
}

TEST_CASE("integrate_tensor on separable polynomials") {
  const Eigen::Index nodes[] = {200, 100, 50};
  // Midpoint rule integrates x exactly and x^2 with error 1/(12 N^2).
  const double v = integrate_tensor([](std::span<const double> x) { return x[0] * x[1] * x[2]; }, nodes);
  CHECK(v == doctest::Approx(0.125).epsilon(1e-12));
  const double w = integrate_tensor([](std::span<const double> x) { return x[0] * x[0]; }, nodes);
  CHECK(w == doctest::Approx(1.0 / 3.0 - 1.0 / (12.0 * 200 * 200)).epsilon(1e-12));
  CHECK(integrate_tensor([](std::span<const double>) { return 2.5; }, std::span<const Eigen::Index>()) == 2.5);
}

TEST_CASE("tensor grid layout puts the last axis fastest") {
  const TensorGrid g = TensorGrid::sample([](std::span<const double> x) { return 10 * x[0] + x[1]; }, 2, 4);
  CHECK(g.size() == 16);
  double x[2];
  g.coordinates(1, x);
  CHECK(x[0] == 0.125);
  CHECK(x[1] == 0.375);
  CHECK(g.values[1] == doctest::Approx(10 * 0.125 + 0.375));
}

TEST_CASE("additive projection recovers the component") {
  AdditiveFunction add;
  add.mu = 0.7;
  add.components.push_back(GridFunction::sample([](double x) { return x - 0.5; }, 256));
  add.components.push_back(GridFunction::sample([](double x) { return std::cos(kTwoPi * x); }, 256));
  CHECK(add.max_component_mean() < 1e-12);
  const TensorGrid g = add.to_grid();
  const GridFunction p1 = marginal_project(g, 0);
  const GridFunction p2 = marginal_project(g, 1, 0.7);
  CHECK((p1.values - add.components[0].values).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((p2.values - add.components[1].values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("projection of a constant is zero") {
  const TensorGrid g = TensorGrid::sample([](std::span<const double>) { return 3.25; }, 3, 64);
  for (int axis = 0; axis < 3; ++axis) CHECK(marginal_project(g, axis).values.cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("projection of a sum of sines on a 2^10 grid") {
  const TensorGrid g = TensorGrid::sample(
      [](std::span<const double> x) { return std::sin(kTwoPi * x[0]) + std::sin(kTwoPi * x[1]); }, 2, 1024);
  const GridFunction p = marginal_project(g, 1, 0.0);
  double err = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) err = std::max(err, std::abs(p.values[i] - std::sin(kTwoPi * p.point(i))));
  CHECK(err <= 1e-6);
}

TEST_CASE("projection rejects coarse grids and bad axes") {
  const TensorGrid g = TensorGrid::sample([](std::span<const double>) { return 1.0; }, 2, 32);
  CHECK_THROWS_AS(marginal_project(g, 0), InvalidArgument);
  const TensorGrid ok = TensorGrid::sample([](std::span<const double>) { return 1.0; }, 2, 64);
  CHECK_THROWS_AS(marginal_project(ok, 2), InvalidArgument);
}

TEST_CASE("true coefficient equals the 1-D coefficient of the component") {
  const BasisTable& t = table(2);
  AdditiveFunction add;
  add.mu = -0.4;
  add.components.push_back(GridFunction::sample([](double x) { return std::sin(kTwoPi * x); }, 512));
  add.components.push_back(GridFunction::sample([](double x) { return x < 0.45 ? -0.55 : 0.45; }, 512));
  // The step is centered in L2 but not on a 512-node midpoint grid.
  add.components[1].values.array() -= add.components[1].values.mean();
  REQUIRE(add.max_component_mean() < 1e-12);
  const TensorGrid g = add.to_grid();
  for (int axis = 0; axis < 2; ++axis) {
    const WaveletCoeffs c = coeffs_1d(t, add.components[static_cast<std::size_t>(axis)], 2, 5);
    for (int j = 2; j <= 5; ++j)
      for (int k = 0; k < (1 << j); ++k)
        CHECK(std::abs(true_coeff(t, g, BasisKind::wavelet, j, k, axis) - c.beta.level(j)[k]) <= 1e-4);
    for (int k = 0; k < 4; ++k)
      CHECK(std::abs(true_coeff(t, g, BasisKind::scaling, 2, k, axis) - (c.alpha[k] + add.mu / 2.0)) <= 1e-4);
  }
}

TEST_CASE("true coefficients of a constant") {
  const BasisTable& t = table(3);
  const TensorGrid g = TensorGrid::sample([](std::span<const double>) { return 1.5; }, 2, 512);
  for (int j = 3; j <= 5; ++j)
    for (int k = 0; k < (1 << j); ++k) {
      CHECK(std::abs(true_coeff(t, g, BasisKind::wavelet, j, k, 1)) <= 1e-12);
      CHECK(std::abs(true_coeff(t, g, BasisKind::scaling, j, k, 1) - 1.5 * std::pow(2.0, -j / 2.0)) <= 1e-6);
    }
}

TEST_CASE("haar true coefficient of x1 at j = 0") {
  const BasisTable& t = table(1);
  const TensorGrid g = TensorGrid::sample([](std::span<const double> x) { return x[0]; }, 2, 256);
  CHECK(std::abs(true_coeff(t, g, BasisKind::wavelet, 0, 0, 0) - (-0.25)) <= 1e-12);
  CHECK(std::abs(true_coeff(t, g, BasisKind::wavelet, 0, 0, 1)) <= 1e-12);
}

TEST_CASE("true coefficient rejects a coarse grid") {
  const BasisTable& t = table(2);
  const TensorGrid g = TensorGrid::sample([](std::span<const double>) { return 1.0; }, 2, 64);
  CHECK_THROWS_AS(true_coeff(t, g, BasisKind::wavelet, 3, 0, 0), InvalidArgument);
  CHECK_NOTHROW(true_coeff(t, g, BasisKind::wavelet, 2, 0, 0));
}

TEST_CASE("reconstruction from true coefficients converges to the component") {
  const BasisTable& t = table(2);
  AdditiveFunction add;
  add.mu = 0.2;
  add.components.push_back(GridFunction::sample([](double x) { return std::sin(kTwoPi * x); }, 1024));
  add.components.push_back(GridFunction::sample([](double x) { return x - 0.5; }, 1024));
  const TensorGrid g = add.to_grid();
  double prev = std::numeric_limits<double>::infinity();
  for (int j_max : {2, 3, 4, 5}) {
    WaveletCoeffs c;
    c.alpha.resize(4);
    for (int k = 0; k < 4; ++k) c.alpha[k] = true_coeff(t, g, BasisKind::scaling, 2, k, 0);
    c.beta.first_level = 2;
    for (int j = 2; j <= j_max; ++j) {
      Eigen::VectorXd lv(1 << j);
      for (int k = 0; k < (1 << j); ++k) lv[k] = true_coeff(t, g, BasisKind::wavelet, j, k, 0);
      c.beta.levels.push_back(lv);
    }
    double err = 0.0;
    for (int i = 0; i < 512; ++i) {
      const double x = (i + 0.5) / 512.0;
      err += std::pow(reconstruct_1d(t, c, x) - add.mu - std::sin(kTwoPi * x), 2) / 512.0;
    }
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-4);
}
