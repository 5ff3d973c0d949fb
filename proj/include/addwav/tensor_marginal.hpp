#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

#include "addwav/wavelet_basis.hpp"

namespace addwav {

/// Multi-index (j, k, u) of a tensor-product basis element on [0,1]^d.
/// u = 0 is the pure scaling product; u in 1..d puts psi in coordinate u only;
/// u in d+1..2^d-1 enumerates subsets of size >= 2 in binary-mask order.
struct TensorIndex {
  int j = 0;
  std::vector<int> kvec;
  unsigned u = 0;
};

/// For direction u in dimension d, flags the coordinates that carry psi.
std::vector<bool> wavelet_coordinates(int d, unsigned u);

double eval_tensor(const BasisTable& table, const TensorIndex& idx, std::span<const double> x);

enum class CollapseMode { fast, literal };

/// h^{(1)} (scaling) or h^{(2)} (wavelet): the sum over k_{-axis} in D_j^* of the
/// tensor basis elements, evaluated at x. The fast path uses the periodized
/// identity sum_k phi_{j,k} = 2^{j/2}; literal enumerates all 2^{j(d-1)} terms.
double h_collapse(const BasisTable& table, BasisKind kind, int j, int k, int axis,
                  std::span<const double> x, CollapseMode mode = CollapseMode::fast);

/// A function sampled at the midpoints of a tensor grid on [0,1]^d with
/// `points_per_axis` nodes on every axis. Flattened with the last axis fastest.
struct TensorGrid {
  int dim = 1;
  Eigen::Index points_per_axis = 0;
  Eigen::VectorXd values;

  Eigen::Index size() const { return values.size(); }
  double node(Eigen::Index i) const {
    return (static_cast<double>(i) + 0.5) / static_cast<double>(points_per_axis);
  }
  /// Coordinates of the flattened sample `flat`.
  void coordinates(Eigen::Index flat, std::span<double> x) const;

  template <typename F>
  static TensorGrid sample(F&& f, int dim, Eigen::Index points_per_axis);
};

/// mu plus one centered grid-sampled component per coordinate.
struct AdditiveFunction {
  double mu = 0.0;
  std::vector<GridFunction> components;

  int dim() const { return static_cast<int>(components.size()); }
  /// Samples mu + sum_l g_l(x_l) on a tensor grid with the components' resolution.
  TensorGrid to_grid() const;
  /// Largest |integral of g_l| over the components (midpoint rule).
  double max_component_mean() const;
};

/// x_axis -> integral of g over the other coordinates minus mu. When mu is not
/// supplied it defaults to the grid mean of g.
GridFunction marginal_project(const TensorGrid& g, int axis, std::optional<double> mu = std::nullopt);

/// a_{j,k,axis} (scaling) or b_{j,k,axis} (wavelet) by d-dimensional midpoint
/// quadrature of 2^{-j(d-1)/2} g(x) h(x).
double true_coeff(const BasisTable& table, const TensorGrid& g, BasisKind kind, int j, int k, int axis);

/// Midpoint quadrature of f over [0,1]^d with a per-axis node count.
template <typename F>
double integrate_tensor(F&& f, std::span<const Eigen::Index> points_per_axis);

// -- implementation of templates ---------------------------------------------

template <typename F>
TensorGrid TensorGrid::sample(F&& f, int dim, Eigen::Index points_per_axis) {
  TensorGrid g;
  g.dim = dim;
  g.points_per_axis = points_per_axis;
  Eigen::Index total = 1;
  for (int v = 0; v < dim; ++v) total *= points_per_axis;
  g.values.resize(total);
  std::vector<double> x(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < total; ++i) {
    g.coordinates(i, x);
    g.values[i] = f(std::span<const double>(x));
  }
  return g;
}

template <typename F>
double integrate_tensor(F&& f, std::span<const Eigen::Index> points_per_axis) {
  const std::size_t d = points_per_axis.size();
  if (d == 0) return f(std::span<const double>());
  std::vector<Eigen::Index> idx(d, 0);
  std::vector<double> x(d);
  double cell = 1.0;
  for (std::size_t v = 0; v < d; ++v) {
    cell /= static_cast<double>(points_per_axis[v]);
    x[v] = 0.5 / static_cast<double>(points_per_axis[v]);
  }
  double acc = 0.0;
  while (true) {
    acc += f(std::span<const double>(x));
    std::size_t v = d;
    while (v > 0) {
      --v;
      if (++idx[v] < points_per_axis[v]) {
        x[v] = (static_cast<double>(idx[v]) + 0.5) / static_cast<double>(points_per_axis[v]);
        break;
      }
      idx[v] = 0;
      x[v] = 0.5 / static_cast<double>(points_per_axis[v]);
      if (v == 0) return acc * cell;
    }
  }
}

}  // namespace addwav
