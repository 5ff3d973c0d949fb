#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <vector>

#include "addwav/error.hpp"

namespace addwav {

enum class BasisKind { scaling, wavelet };

/// Daubechies family with R vanishing moments (filter length 2R).
///
/// `low_pass` holds the synthesis taps h_0..h_{2R-1} of the refinement
/// relation phi(x) = sqrt(2) sum_k h_k phi(2x - k); phi and psi are both
/// supported on [0, 2R-1].
struct WaveletFamily {
  int R = 1;
  Eigen::VectorXd low_pass;
  int support_length = 1;
  int tau = 1;

  /// Quadrature-mirror taps g_k = (-1)^k h_{2R-1-k}.
  Eigen::VectorXd high_pass() const;
};

WaveletFamily make_family(int R);

/// Samples of phi and psi on the dyadic grid of step 2^-depth over [0, support_length].
///
/// Immutable once built; share freely between threads.
class BasisTable {
 public:
  BasisTable(WaveletFamily family, int depth, Eigen::VectorXd phi, Eigen::VectorXd psi);

  const WaveletFamily& family() const { return family_; }
  int depth() const { return depth_; }
  double step() const { return step_; }
  const Eigen::VectorXd& phi_samples() const { return phi_; }
  const Eigen::VectorXd& psi_samples() const { return psi_; }
  const Eigen::VectorXd& samples(BasisKind kind) const {
    return kind == BasisKind::scaling ? phi_ : psi_;
  }

  /// True for Haar, whose functions are piecewise constant on the grid and
  /// are looked up exactly instead of interpolated.
  bool piecewise_constant() const { return family_.R == 1; }

  /// Mother function value at t (unit scale, no periodization). Zero outside
  /// [0, support_length).
  double value(BasisKind kind, double t) const {
    const double L = family_.support_length;
    if (!(t >= 0.0) || t >= L) return 0.0;
    const Eigen::VectorXd& s = samples(kind);
    const double pos = t * scale_;
    const auto i = static_cast<Eigen::Index>(pos);
    if (piecewise_constant()) return s[i];
    const double frac = pos - static_cast<double>(i);
    return s[i] + frac * (s[i + 1] - s[i]);
  }

 private:
  WaveletFamily family_;
  int depth_;
  double scale_;
  double step_;
  Eigen::VectorXd phi_;
  Eigen::VectorXd psi_;
};

BasisTable cascade_table(const WaveletFamily& family, int depth = 12);

/// Periodized b_{j,k}(x) = sum_m 2^{j/2} b(2^j (x + m) - k) on [0,1].
double eval_periodized(const BasisTable& table, BasisKind kind, int j, int k, double x);

/// out[k] += weight * b_{j,k}(x) for every k whose periodized support holds x.
/// `out` must have 2^j entries. Costs O(support_length) regardless of j.
void accumulate_periodized(const BasisTable& table, BasisKind kind, int j, double x,
                           double weight, std::span<double> out);

/// A function sampled at the midpoints (i + 1/2)/N of a uniform grid on [0,1].
struct GridFunction {
  Eigen::VectorXd values;

  Eigen::Index size() const { return values.size(); }
  double point(Eigen::Index i) const {
    return (static_cast<double>(i) + 0.5) / static_cast<double>(values.size());
  }

  template <typename F>
  static GridFunction sample(F&& f, Eigen::Index n) {
    GridFunction g;
    g.values.resize(n);
    for (Eigen::Index i = 0; i < n; ++i)
      g.values[i] = f((static_cast<double>(i) + 0.5) / static_cast<double>(n));
    return g;
  }
};

/// Detail coefficients beta_{j,k} for consecutive levels starting at `first_level`.
struct DetailCoeffs {
  int first_level = 0;
  std::vector<Eigen::VectorXd> levels;

  int last_level() const { return first_level + static_cast<int>(levels.size()) - 1; }
  const Eigen::VectorXd& level(int j) const { return levels.at(j - first_level); }
};

struct WaveletCoeffs {
  Eigen::VectorXd alpha;  // alpha_{j*,k}, k = 0..2^{j*}-1
  DetailCoeffs beta;      // beta_{j,k}, j = j*..j_max
  int j_star() const { return beta.first_level; }
};

/// alpha_{j*,k} and beta_{j,k} (j* <= j <= j_max) of a grid-sampled h by
/// composite midpoint quadrature. Requires at least 2^{j_max+4} samples.
WaveletCoeffs coeffs_1d(const BasisTable& table, const GridFunction& h, int j_star, int j_max);

/// Evaluates sum_k alpha phi_{j*,k}(x) + sum_{j,k} beta psi_{j,k}(x).
double reconstruct_1d(const BasisTable& table, const WaveletCoeffs& coeffs, double x);

/// Truncated Besov sequence norm over the stored levels:
/// ( sum_j (2^{j(s+1/2-1/p)} ||beta_j||_p)^q )^{1/q}.
///
/// `R` is the number of vanishing moments of the basis that produced `beta`;
/// the norm characterises the Besov ball only for 0 < s < R.
double besov_seminorm(const DetailCoeffs& beta, double s, double p, double q, int R);

/// Hard-thresholds an Eigen expression: entries with |x| >= t are kept.
template <typename Derived>
auto hard_threshold(const Eigen::DenseBase<Derived>& x, typename Derived::Scalar t) {
  using Scalar = typename Derived::Scalar;
  return (x.derived().array().abs() >= t).select(x.derived().array(), Scalar(0));
}

/// l_p norm of an Eigen expression for real p >= 1.
template <typename Derived>
typename Derived::Scalar lp_norm(const Eigen::DenseBase<Derived>& x, double p) {
  using std::pow;
  if (p == 1.0) return x.derived().array().abs().sum();
  if (p == 2.0) return x.derived().matrix().norm();
  return pow(x.derived().array().abs().pow(p).sum(), 1.0 / p);
}

}  // namespace addwav
