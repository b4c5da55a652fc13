#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <vector>

#include "weylforge/common.hpp"
#include "weylforge/errors.hpp"

// Uniform rectangular coordinate charts (n = 2 or 3, endpoints included) and
// the tensor fields sampled on them, together with the finite-difference
// stencils: second-order central in the interior with second-order one-sided
// closures, and a fourth-order variant used as the independent verifier.

namespace weylforge::weyl {

using NodeIndex = std::array<int, 3>;  // trailing axes stay 0 for n = 2

template <typename Scalar>
struct Chart {
  int n = 2;
  std::array<std::array<Scalar, 2>, 3> extents{};
  std::array<int, 3> resolution{};

  static Chart make(int n, const std::vector<std::array<Scalar, 2>>& ranges,
                    const std::vector<int>& res) {
    if (n != 2 && n != 3) throw InvalidSpec("chart dimension must be 2 or 3");
    if (static_cast<int>(ranges.size()) != n || static_cast<int>(res.size()) != n)
      throw InvalidSpec("chart extent/resolution arity mismatch");
    Chart c;
    c.n = n;
    for (int a = 0; a < n; ++a) {
      if (!(ranges[a][1] > ranges[a][0])) throw InvalidSpec("chart extent must be increasing");
      if (res[a] < 8) throw InvalidSpec("chart resolution must be at least 8 per axis");
      c.extents[a] = ranges[a];
      c.resolution[a] = res[a];
    }
    for (int a = n; a < 3; ++a) {
      c.extents[a] = {Scalar(0), Scalar(1)};
      c.resolution[a] = 1;
    }
    return c;
  }

  Scalar spacing(int axis) const {
    return (extents[axis][1] - extents[axis][0]) / Scalar(resolution[axis] - 1);
  }
  Scalar max_spacing() const {
    Scalar h = Scalar(0);
    for (int a = 0; a < n; ++a) h = std::max(h, spacing(a));
    return h;
  }
  long node_count() const {
    long c = 1;
    for (int a = 0; a < n; ++a) c *= resolution[a];
    return c;
  }
  // Row-major strides: the last axis varies fastest.
  long stride(int axis) const {
    long s = 1;
    for (int a = axis + 1; a < n; ++a) s *= resolution[a];
    return s;
  }
  long flatten(const NodeIndex& ix) const {
    long id = 0;
    for (int a = 0; a < n; ++a) id = id * resolution[a] + ix[a];
    return id;
  }
  NodeIndex unflatten(long id) const {
    NodeIndex ix{0, 0, 0};
    for (int a = n - 1; a >= 0; --a) {
      ix[a] = static_cast<int>(id % resolution[a]);
      id /= resolution[a];
    }
    return ix;
  }
  Scalar coordinate(int axis, int i) const {
    return extents[axis][0] + Scalar(i) * spacing(axis);
  }
  VectorX<Scalar> point(const NodeIndex& ix) const {
    VectorX<Scalar> p(n);
    for (int a = 0; a < n; ++a) p(a) = coordinate(a, ix[a]);
    return p;
  }

  bool operator==(const Chart& o) const {
    if (n != o.n) return false;
    for (int a = 0; a < n; ++a)
      if (extents[a] != o.extents[a] || resolution[a] != o.resolution[a]) return false;
    return true;
  }
};

template <typename Scalar>
void require_same_chart(const Chart<Scalar>& a, const Chart<Scalar>& b) {
  if (!(a == b)) throw InvalidSpec("fields live on different charts");
}

// ---------------------------------------------------------------------------
// Finite-difference stencils
// ---------------------------------------------------------------------------

enum class FdOrder { second, fourth };

namespace detail {

template <typename Scalar>
struct Stencil {
  std::array<int, 5> offsets{};
  std::array<Scalar, 5> weights{};  // already divided by h
  int count = 0;
};

template <typename Scalar>
Stencil<Scalar> fd_stencil(FdOrder order, int i, int nodes, Scalar h) {
  Stencil<Scalar> s;
  auto set = [&](std::initializer_list<int> off, std::initializer_list<Scalar> w, Scalar div) {
    s.count = static_cast<int>(off.size());
    int k = 0;
    for (int o : off) s.offsets[k++] = o;
    k = 0;
    for (Scalar v : w) s.weights[k++] = v / (div * h);
  };
  if (order == FdOrder::second) {
    if (i == 0)
      set({0, 1, 2}, {Scalar(-3), Scalar(4), Scalar(-1)}, Scalar(2));
    else if (i == nodes - 1)
      set({0, -1, -2}, {Scalar(3), Scalar(-4), Scalar(1)}, Scalar(2));
    else
      set({-1, 1}, {Scalar(-1), Scalar(1)}, Scalar(2));
    return s;
  }
  if (i == 0)
    set({0, 1, 2, 3, 4}, {Scalar(-25), Scalar(48), Scalar(-36), Scalar(16), Scalar(-3)},
        Scalar(12));
  else if (i == 1)
    set({-1, 0, 1, 2, 3}, {Scalar(-3), Scalar(-10), Scalar(18), Scalar(-6), Scalar(1)},
        Scalar(12));
  else if (i == nodes - 1)
    set({0, -1, -2, -3, -4}, {Scalar(25), Scalar(-48), Scalar(36), Scalar(-16), Scalar(3)},
        Scalar(12));
  else if (i == nodes - 2)
    set({1, 0, -1, -2, -3}, {Scalar(3), Scalar(10), Scalar(-18), Scalar(6), Scalar(-1)},
        Scalar(12));
  else
    set({-2, -1, 1, 2}, {Scalar(1), Scalar(-8), Scalar(8), Scalar(-1)}, Scalar(12));
  return s;
}

}  // namespace detail

// Partial derivative along one axis of a lattice of values. V may be any type
// with scalar multiplication and +=, e.g. Scalar, VectorX or MatrixX.
template <typename Scalar, typename V>
std::vector<V> lattice_derivative(const Chart<Scalar>& chart, const std::vector<V>& f,
                                  int axis, FdOrder order = FdOrder::second) {
  if (axis < 0 || axis >= chart.n) throw InvalidSpec("derivative axis out of range");
  if (static_cast<long>(f.size()) != chart.node_count())
    throw InvalidSpec("field size does not match the chart");
  const Scalar h = chart.spacing(axis);
  const long stride = chart.stride(axis);
  const int nodes = chart.resolution[axis];
  std::vector<V> out;
  out.reserve(f.size());
  for (long id = 0; id < static_cast<long>(f.size()); ++id) {
    const int i = chart.unflatten(id)[axis];
    const auto s = detail::fd_stencil<Scalar>(order, i, nodes, h);
    V acc = f[id + s.offsets[0] * stride] * s.weights[0];
    for (int k = 1; k < s.count; ++k) acc += f[id + s.offsets[k] * stride] * s.weights[k];
    out.push_back(std::move(acc));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fields
// ---------------------------------------------------------------------------

template <typename Scalar>
struct MetricField {
  Chart<Scalar> chart;
  std::vector<MatrixX<Scalar>> g;  // symmetric positive definite per node
};

template <typename Scalar>
struct OneFormField {
  Chart<Scalar> chart;
  std::vector<VectorX<Scalar>> theta;
};

template <typename Scalar>
struct ScalarField {
  Chart<Scalar> chart;
  std::vector<Scalar> values;
};

template <typename Scalar>
struct VolumeDensityField {
  Chart<Scalar> chart;
  std::vector<Scalar> rho;  // positive coordinate volume density
};

// Connection coefficients: gamma[node][k](i, j) = Gamma^k_ij.
template <typename Scalar>
struct ConnectionField {
  Chart<Scalar> chart;
  std::vector<std::vector<MatrixX<Scalar>>> gamma;
};

// Antisymmetric 2-form per node, omega(i, j) = (d theta)_ij.
template <typename Scalar>
struct TwoFormField {
  Chart<Scalar> chart;
  std::vector<MatrixX<Scalar>> omega;
};

template <typename Scalar>
Scalar min_metric_eigenvalue(const MetricField<Scalar>& g) {
  Scalar lo = std::numeric_limits<Scalar>::infinity();
  for (const auto& m : g.g) {
    Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(m, Eigen::EigenvaluesOnly);
    lo = std::min(lo, eig.eigenvalues().minCoeff());
  }
  return lo;
}

template <typename Scalar>
void require_positive_definite(const MetricField<Scalar>& g) {
  if (!(min_metric_eigenvalue(g) > Scalar(0)))
    throw DegenerateMetric("metric loses positive definiteness on the chart");
}

// max |g| + max |D2 g|, a C^1 magnitude estimate used to scale tolerances.
template <typename Scalar>
Scalar c1_estimate(const MetricField<Scalar>& g) {
  Scalar m = Scalar(0);
  for (const auto& v : g.g) m = std::max(m, v.cwiseAbs().maxCoeff());
  for (int a = 0; a < g.chart.n; ++a) {
    const auto d = lattice_derivative(g.chart, g.g, a, FdOrder::second);
    for (const auto& v : d) m = std::max(m, v.cwiseAbs().maxCoeff());
  }
  return m;
}

template <typename Scalar>
Scalar c1_estimate(const OneFormField<Scalar>& th) {
  Scalar m = Scalar(0);
  for (const auto& v : th.theta) m = std::max(m, v.cwiseAbs().maxCoeff());
  for (int a = 0; a < th.chart.n; ++a) {
    const auto d = lattice_derivative(th.chart, th.theta, a, FdOrder::second);
    for (const auto& v : d) m = std::max(m, v.cwiseAbs().maxCoeff());
  }
  return m;
}

}  // namespace weylforge::weyl
