#include "addwav/tensor_marginal.hpp"

#include <bit>
#include <cmath>
#include <string>

namespace addwav {
namespace {

void check_axis(int axis, int d) {
  if (axis < 0 || axis >= d)
    throw InvalidArgument("coordinate index " + std::to_string(axis + 1) + " outside 1.." +
                          std::to_string(d));
}

}  // namespace

std::vector<bool> wavelet_coordinates(int d, unsigned u) {
  if (d < 1 || d > 20) throw InvalidArgument("tensor dimension out of range");
  const unsigned count = 1u << d;
  if (u >= count) throw InvalidArgument("wavelet direction u must be < 2^d");
  std::vector<bool> flags(static_cast<std::size_t>(d), false);
  if (u == 0) return flags;
  if (u <= static_cast<unsigned>(d)) {
    flags[u - 1] = true;
    return flags;
  }
  // Subsets of cardinality >= 2, increasing mask order.
  unsigned rank = u - static_cast<unsigned>(d) - 1;
  for (unsigned mask = 1; mask < count; ++mask) {
    if (std::popcount(mask) < 2) continue;
    if (rank-- == 0) {
      for (int v = 0; v < d; ++v) flags[static_cast<std::size_t>(v)] = (mask >> v) & 1u;
      return flags;
    }
  }
  throw InternalError("wavelet_coordinates: enumeration exhausted");
}

double eval_tensor(const BasisTable& table, const TensorIndex& idx, std::span<const double> x) {
  const int d = static_cast<int>(idx.kvec.size());
  if (d < 1 || static_cast<int>(x.size()) != d)
    throw InvalidArgument("eval_tensor: index and point dimensions differ");
  const auto psi_in = wavelet_coordinates(d, idx.u);
  double prod = 1.0;
  for (int v = 0; v < d; ++v) {
    const auto kind = psi_in[static_cast<std::size_t>(v)] ? BasisKind::wavelet : BasisKind::scaling;
    prod *= eval_periodized(table, kind, idx.j, idx.kvec[static_cast<std::size_t>(v)], x[static_cast<std::size_t>(v)]);
    if (prod == 0.0) break;
  }
  return prod;
}

double h_collapse(const BasisTable& table, BasisKind kind, int j, int k, int axis,
                  std::span<const double> x, CollapseMode mode) {
  const int d = static_cast<int>(x.size());
  check_axis(axis, d);
  if (j < table.family().tau)
    throw InvalidArgument("h_collapse: level j=" + std::to_string(j) + " below tau");
  if (k < 0 || k >= (1 << j)) throw InvalidArgument("h_collapse: translation out of range");

  if (mode == CollapseMode::fast) {
    const double factor = std::exp2(0.5 * j * (d - 1));
    return factor * eval_periodized(table, kind, j, k, x[static_cast<std::size_t>(axis)]);
  }

  TensorIndex idx;
  idx.j = j;
  idx.u = kind == BasisKind::wavelet ? static_cast<unsigned>(axis + 1) : 0u;
  idx.kvec.assign(static_cast<std::size_t>(d), 0);
  idx.kvec[static_cast<std::size_t>(axis)] = k;
  const int period = 1 << j;
  double acc = 0.0;
  while (true) {
    acc += eval_tensor(table, idx, x);
    int v = d - 1;
    for (; v >= 0; --v) {
      if (v == axis) continue;
      auto& kv = idx.kvec[static_cast<std::size_t>(v)];
      if (++kv < period) break;
      kv = 0;
    }
    if (v < 0) break;
  }
  return acc;
}

void TensorGrid::coordinates(Eigen::Index flat, std::span<double> x) const {
  for (int v = dim - 1; v >= 0; --v) {
    x[static_cast<std::size_t>(v)] = node(flat % points_per_axis);
    flat /= points_per_axis;
  }
}

TensorGrid AdditiveFunction::to_grid() const {
  if (components.empty()) throw InvalidArgument("AdditiveFunction: no components");
  const Eigen::Index n = components.front().size();
  for (const auto& c : components)
    if (c.size() != n) throw InvalidArgument("AdditiveFunction: components must share one grid");
  TensorGrid g;
  g.dim = dim();
  g.points_per_axis = n;
  Eigen::Index total = 1;
  for (int v = 0; v < g.dim; ++v) total *= n;
  g.values.resize(total);
  for (Eigen::Index flat = 0; flat < total; ++flat) {
    double acc = mu;
    Eigen::Index rem = flat;
    for (int v = g.dim - 1; v >= 0; --v) {
      acc += components[static_cast<std::size_t>(v)].values[rem % n];
      rem /= n;
    }
    g.values[flat] = acc;
  }
  return g;
}

double AdditiveFunction::max_component_mean() const {
  double worst = 0.0;
  for (const auto& c : components) worst = std::max(worst, std::abs(c.values.mean()));
  return worst;
}

GridFunction marginal_project(const TensorGrid& g, int axis, std::optional<double> mu) {
  check_axis(axis, g.dim);
  if (g.points_per_axis < 64)
    throw InvalidArgument("marginal_project: grid too coarse (need >= 2^6 points per axis)");
  const Eigen::Index n = g.points_per_axis;
  Eigen::Index stride = 1;
  for (int v = g.dim - 1; v > axis; --v) stride *= n;

  GridFunction out;
  out.values = Eigen::VectorXd::Zero(n);
  for (Eigen::Index flat = 0; flat < g.size(); ++flat) out.values[(flat / stride) % n] += g.values[flat];
  out.values /= static_cast<double>(g.size() / n);
  out.values.array() -= mu.value_or(g.values.mean());
  return out;
}

double true_coeff(const BasisTable& table, const TensorGrid& g, BasisKind kind, int j, int k, int axis) {
  check_axis(axis, g.dim);
  if (j < 0 || j > 24 || k < 0 || k >= (1 << j)) throw InvalidArgument("true_coeff: index out of range");
  if (g.points_per_axis < (Eigen::Index{1} << (j + 4)))
    throw InvalidArgument("true_coeff: grid too coarse for level j=" + std::to_string(j));
  const Eigen::Index n = g.points_per_axis;
  Eigen::Index stride = 1;
  for (int v = g.dim - 1; v > axis; --v) stride *= n;

  // 2^{-j(d-1)/2} h(x) collapses to b_{j,k}(x_axis); tabulate it along the axis.
  Eigen::VectorXd along(n);
  for (Eigen::Index i = 0; i < n; ++i) along[i] = eval_periodized(table, kind, j, k, g.node(i));

  double acc = 0.0;
  for (Eigen::Index flat = 0; flat < g.size(); ++flat) acc += g.values[flat] * along[(flat / stride) % n];
  return acc / static_cast<double>(g.size());
}

}  // namespace addwav
