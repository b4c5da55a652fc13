#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <type_traits>
#include <vector>

#include "weylforge/chart.hpp"
#include "weylforge/common.hpp"
#include "weylforge/errors.hpp"

// Chart-level Weyl-connection calculus: Levi-Civita and Weyl connections built
// from second-order stencils, residual verification against the independent
// fourth-order stencils, Lee-form recovery, closedness and potential
// integration, conformal changes, and the volume-normalized metric.
//
// Sign conventions: the compatibility law is nabla g = theta (x) g, and a
// conformal change with potential f rescales by e^{2f} g' = g. The derived
// formulas (Weyl correction term, Lee transformation, potential sign) are
// validated numerically by the residual suite rather than taken on faith.

namespace weylforge::weyl {

// ---------------------------------------------------------------------------
// Connections
// ---------------------------------------------------------------------------

// Christoffel symbols of g from second-order stencils.
template <typename Scalar>
ConnectionField<Scalar> levi_civita(const MetricField<Scalar>& g) {
  require_positive_definite(g);
  const auto& chart = g.chart;
  const int n = chart.n;
  std::array<std::vector<MatrixX<Scalar>>, 3> dg;
  for (int a = 0; a < n; ++a) dg[a] = lattice_derivative(chart, g.g, a, FdOrder::second);

  ConnectionField<Scalar> out{chart, {}};
  out.gamma.resize(g.g.size());
  for (long id = 0; id < static_cast<long>(g.g.size()); ++id) {
    const MatrixX<Scalar> ginv = g.g[id].inverse();
    auto& gam = out.gamma[id];
    gam.assign(n, MatrixX<Scalar>::Zero(n, n));
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
          Scalar v = Scalar(0);
          for (int l = 0; l < n; ++l)
            v += ginv(k, l) *
                 (dg[i][id](j, l) + dg[j][id](i, l) - dg[l][id](i, j));
          v /= Scalar(2);
          gam[k](i, j) = v;
          gam[k](j, i) = v;
        }
  }
  return out;
}

// The unique torsion-free connection with nabla g = theta (x) g:
//   Gamma^k_ij = LC(g)^k_ij - (theta_i d^k_j + theta_j d^k_i - g_ij theta^k)/2,
// the index raised with g.
template <typename Scalar>
ConnectionField<Scalar> weyl_connection(const MetricField<Scalar>& g,
                                        const OneFormField<Scalar>& theta) {
  require_same_chart(g.chart, theta.chart);
  ConnectionField<Scalar> out = levi_civita(g);
  const int n = g.chart.n;
  for (long id = 0; id < static_cast<long>(g.g.size()); ++id) {
    const VectorX<Scalar>& th = theta.theta[id];
    const VectorX<Scalar> thup = g.g[id].inverse() * th;
    auto& gam = out.gamma[id];
    for (int k = 0; k < n; ++k)
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Scalar corr = Scalar(0);
          if (j == k) corr += th(i);
          if (i == k) corr += th(j);
          corr -= g.g[id](i, j) * thup(k);
          gam[k](i, j) -= corr / Scalar(2);
        }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Residuals
// ---------------------------------------------------------------------------

template <typename Scalar>
struct TorsionField {
  Chart<Scalar> chart;
  std::vector<std::vector<MatrixX<Scalar>>> t;  // T^k_ij = Gamma^k_ij - Gamma^k_ji
  Scalar max_abs = Scalar(0);
};

template <typename Scalar>
TorsionField<Scalar> torsion_of(const ConnectionField<Scalar>& conn) {
  const int n = conn.chart.n;
  TorsionField<Scalar> out{conn.chart, {}, Scalar(0)};
  out.t.resize(conn.gamma.size());
  for (std::size_t id = 0; id < conn.gamma.size(); ++id) {
    out.t[id].reserve(n);
    for (int k = 0; k < n; ++k) {
      MatrixX<Scalar> tk =
          conn.gamma[id][k] - MatrixX<Scalar>(conn.gamma[id][k].transpose());
      out.max_abs = std::max(out.max_abs, tk.cwiseAbs().maxCoeff());
      out.t[id].push_back(std::move(tk));
    }
  }
  return out;
}

// (nabla_i g)_{jl} = d_i g_{jl} - Gamma^m_ij g_{ml} - Gamma^m_il g_{jm} per
// node, with the derivative route selectable. With Gi(m, j) = Gamma^m_ij this
// is dg_i - Gi^T g - g Gi.
template <typename Scalar>
std::vector<std::vector<MatrixX<Scalar>>> covariant_metric_derivative(
    const MetricField<Scalar>& g, const ConnectionField<Scalar>& conn, FdOrder order) {
  require_same_chart(g.chart, conn.chart);
  const int n = g.chart.n;
  std::array<std::vector<MatrixX<Scalar>>, 3> dg;
  for (int a = 0; a < n; ++a) dg[a] = lattice_derivative(g.chart, g.g, a, order);

  std::vector<std::vector<MatrixX<Scalar>>> out(g.g.size());
  for (long id = 0; id < static_cast<long>(g.g.size()); ++id) {
    out[id].reserve(n);
    for (int i = 0; i < n; ++i) {
      MatrixX<Scalar> gi(n, n);  // Gi(m, j) = Gamma^m_ij
      for (int m = 0; m < n; ++m)
        for (int j = 0; j < n; ++j) gi(m, j) = conn.gamma[id][m](i, j);
      out[id].push_back(dg[i][id] - gi.transpose() * g.g[id] - g.g[id] * gi);
    }
  }
  return out;
}

// Max-norm of nabla g - theta (x) g. The default fourth-order route is the
// independent verifier for connections built from the second-order stencils.
template <typename Scalar>
Scalar compatibility_residual(const MetricField<Scalar>& g, const OneFormField<Scalar>& theta,
                              const ConnectionField<Scalar>& conn,
                              FdOrder order = FdOrder::fourth) {
  require_same_chart(g.chart, theta.chart);
  const auto nab = covariant_metric_derivative(g, conn, order);
  Scalar worst = Scalar(0);
  for (std::size_t id = 0; id < nab.size(); ++id)
    for (int i = 0; i < g.chart.n; ++i) {
      const MatrixX<Scalar> resid = nab[id][i] - theta.theta[id](i) * g.g[id];
      worst = std::max(worst, resid.cwiseAbs().maxCoeff());
    }
  return worst;
}

// ---------------------------------------------------------------------------
// Lee form
// ---------------------------------------------------------------------------

template <typename Scalar>
struct LeeRecovery {
  OneFormField<Scalar> theta;
  Scalar fit_residual = Scalar(0);  // max defect of the rank-one fit nabla_i g = theta_i g
  Scalar tol_used = Scalar(0);
};

// Recover theta from nabla g = theta (x) g by the g-traced average
// theta_i = tr(g^{-1} nabla_i g) / n, and reject connections whose covariant
// derivative is not proportional to g.
template <typename Scalar>
LeeRecovery<Scalar> lee_form_of(
    const ConnectionField<Scalar>& conn, const MetricField<Scalar>& g,
    std::optional<std::type_identity_t<Scalar>> not_weyl_tol = std::nullopt) {
  const int n = g.chart.n;
  const auto nab = covariant_metric_derivative(g, conn, FdOrder::second);
  LeeRecovery<Scalar> out{{g.chart, {}}, Scalar(0), Scalar(0)};
  out.theta.theta.resize(g.g.size());
  for (std::size_t id = 0; id < g.g.size(); ++id) {
    const MatrixX<Scalar> ginv = g.g[id].inverse();
    VectorX<Scalar> th(n);
    for (int i = 0; i < n; ++i) {
      th(i) = (ginv * nab[id][i]).trace() / Scalar(n);
      const MatrixX<Scalar> resid = nab[id][i] - th(i) * g.g[id];
      out.fit_residual = std::max(out.fit_residual, resid.cwiseAbs().maxCoeff());
    }
    out.theta.theta[id] = std::move(th);
  }
  const Scalar h = g.chart.max_spacing();
  out.tol_used = not_weyl_tol.value_or(
      Scalar(50) * h * h * (Scalar(1) + c1_estimate(g)) + Scalar(1e-12));
  if (out.fit_residual > out.tol_used)
    throw NotWeyl("covariant derivative of g is not proportional to g");
  return out;
}

// ---------------------------------------------------------------------------
// Exterior derivative and potentials
// ---------------------------------------------------------------------------

template <typename Scalar>
struct ExteriorDerivativeResult {
  TwoFormField<Scalar> dtheta;
  Scalar max_abs = Scalar(0);
  bool closed = false;
  Scalar tol_used = Scalar(0);
};

// (d theta)_ij = d_i theta_j - d_j theta_i by the second-order stencils. The
// closedness tolerance scales with h^2 and a C^1 estimate of theta, floored at
// the absolute default 1e-6.
template <typename Scalar>
ExteriorDerivativeResult<Scalar> exterior_derivative(
    const OneFormField<Scalar>& theta,
    std::optional<std::type_identity_t<Scalar>> closedness_tol = std::nullopt) {
  const auto& chart = theta.chart;
  const int n = chart.n;
  std::array<std::vector<VectorX<Scalar>>, 3> dth;
  for (int a = 0; a < n; ++a)
    dth[a] = lattice_derivative(chart, theta.theta, a, FdOrder::second);

  ExteriorDerivativeResult<Scalar> out{{chart, {}}, Scalar(0), false, Scalar(0)};
  out.dtheta.omega.resize(theta.theta.size());
  for (std::size_t id = 0; id < theta.theta.size(); ++id) {
    MatrixX<Scalar> om = MatrixX<Scalar>::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        const Scalar v = dth[i][id](j) - dth[j][id](i);
        om(i, j) = v;
        om(j, i) = -v;
        out.max_abs = std::max(out.max_abs, std::abs(v));
      }
    out.dtheta.omega[id] = std::move(om);
  }
  const Scalar h = chart.max_spacing();
  out.tol_used = closedness_tol.value_or(
      std::max(Scalar(1e-6), Scalar(10) * h * h * c1_estimate(theta)));
  out.closed = out.max_abs < out.tol_used;
  return out;
}

template <typename Scalar>
struct PotentialResult {
  ScalarField<Scalar> f;           // df = theta, f(basepoint) = 0
  Scalar path_disagreement = 0;    // two axis orderings compared
  Scalar roundtrip_residual = 0;   // max |D2 f - theta|
};

namespace detail {

// Cumulative trapezoid along `axis` through every seed node (seeds have the
// basepoint coordinate on that axis); marches both directions.
template <typename Scalar>
void integrate_axis_lines(const Chart<Scalar>& chart, const std::vector<VectorX<Scalar>>& th,
                          int axis, int base_i, const std::vector<long>& seeds,
                          std::vector<Scalar>& f) {
  const Scalar h = chart.spacing(axis);
  const long stride = chart.stride(axis);
  const int nodes = chart.resolution[axis];
  for (const long seed : seeds) {
    for (int i = base_i; i + 1 < nodes; ++i) {
      const long cur = seed + (i - base_i) * stride;
      f[cur + stride] = f[cur] + h / Scalar(2) * (th[cur](axis) + th[cur + stride](axis));
    }
    for (int i = base_i; i > 0; --i) {
      const long cur = seed + (i - base_i) * stride;
      f[cur - stride] = f[cur] - h / Scalar(2) * (th[cur](axis) + th[cur - stride](axis));
    }
  }
}

template <typename Scalar>
std::vector<Scalar> integrate_ordered(const Chart<Scalar>& chart,
                                      const std::vector<VectorX<Scalar>>& th,
                                      const NodeIndex& base, const std::vector<int>& order) {
  std::vector<Scalar> f(chart.node_count(), Scalar(0));
  for (std::size_t stage = 0; stage < order.size(); ++stage) {
    std::vector<long> seeds;
    for (long id = 0; id < chart.node_count(); ++id) {
      const NodeIndex ix = chart.unflatten(id);
      bool is_seed = ix[order[stage]] == base[order[stage]];
      for (std::size_t later = stage + 1; later < order.size(); ++later)
        is_seed = is_seed && ix[order[later]] == base[order[later]];
      if (is_seed) seeds.push_back(id);
    }
    integrate_axis_lines(chart, th, order[stage], base[order[stage]], seeds, f);
  }
  return f;
}

}  // namespace detail

// Potential f with df = theta and f(basepoint) = 0, by axis-ordered trapezoidal
// path integration. A second, reversed axis ordering cross-checks path
// independence on the (simply connected) chart.
template <typename Scalar>
PotentialResult<Scalar> integrate_potential(
    const OneFormField<Scalar>& theta, NodeIndex basepoint = {0, 0, 0},
    std::optional<std::type_identity_t<Scalar>> path_tol = std::nullopt) {
  const auto& chart = theta.chart;
  const int n = chart.n;
  for (int a = 0; a < n; ++a)
    if (basepoint[a] < 0 || basepoint[a] >= chart.resolution[a])
      throw InvalidSpec("basepoint outside the chart");

  const auto ext = exterior_derivative(theta);
  if (!ext.closed) throw NotClosed("theta is not closed; no potential exists");

  std::vector<int> fwd(n), rev(n);
  for (int a = 0; a < n; ++a) {
    fwd[a] = a;
    rev[a] = n - 1 - a;
  }
  const auto fa = detail::integrate_ordered(chart, theta.theta, basepoint, fwd);
  const auto fb = detail::integrate_ordered(chart, theta.theta, basepoint, rev);

  PotentialResult<Scalar> out{{chart, fa}, Scalar(0), Scalar(0)};
  for (long id = 0; id < chart.node_count(); ++id)
    out.path_disagreement = std::max(out.path_disagreement, std::abs(fa[id] - fb[id]));
  const Scalar h = chart.max_spacing();
  const Scalar tol = path_tol.value_or(
      Scalar(10) * h * h * std::max(Scalar(1), c1_estimate(theta)));
  if (out.path_disagreement > tol)
    throw PathDependence("axis orderings disagree beyond the h^2 tolerance");

  for (int a = 0; a < n; ++a) {
    const auto df = lattice_derivative(chart, out.f.values, a, FdOrder::second);
    for (long id = 0; id < chart.node_count(); ++id)
      out.roundtrip_residual =
          std::max(out.roundtrip_residual, std::abs(df[id] - theta.theta[id](a)));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Conformal changes
// ---------------------------------------------------------------------------

// g' with e^{2f} g' = g, i.e. g' = e^{-2f} g.
template <typename Scalar>
MetricField<Scalar> conformal_change(const MetricField<Scalar>& g,
                                     const ScalarField<Scalar>& f) {
  require_same_chart(g.chart, f.chart);
  MetricField<Scalar> out{g.chart, {}};
  out.g.reserve(g.g.size());
  for (std::size_t id = 0; id < g.g.size(); ++id) {
    if (!std::isfinite(f.values[id])) throw InvalidSpec("conformal factor must be finite");
    out.g.push_back(std::exp(Scalar(-2) * f.values[id]) * g.g[id]);
  }
  return out;
}

template <typename Scalar>
struct LeeTransformReport {
  OneFormField<Scalar> recovered;  // Lee form of Weyl(g, theta) w.r.t. e^{-2f} g
  OneFormField<Scalar> expected;   // theta - 2 df
  Scalar max_deviation = Scalar(0);
};

// Conformal naturality check: the Lee form of the (g, theta)-Weyl connection
// with respect to g' = e^{-2f} g must come out as theta - 2 df.
template <typename Scalar>
LeeTransformReport<Scalar> lee_transform_check(const MetricField<Scalar>& g,
                                               const OneFormField<Scalar>& theta,
                                               const ScalarField<Scalar>& f) {
  require_same_chart(g.chart, theta.chart);
  require_same_chart(g.chart, f.chart);
  const auto conn = weyl_connection(g, theta);
  const auto gp = conformal_change(g, f);
  auto rec = lee_form_of(conn, gp);

  LeeTransformReport<Scalar> out{std::move(rec.theta), {g.chart, {}}, Scalar(0)};
  out.expected.theta.resize(g.g.size());
  std::array<std::vector<Scalar>, 3> df;
  for (int a = 0; a < g.chart.n; ++a)
    df[a] = lattice_derivative(g.chart, f.values, a, FdOrder::second);
  for (long id = 0; id < g.chart.node_count(); ++id) {
    VectorX<Scalar> e(g.chart.n);
    for (int a = 0; a < g.chart.n; ++a) e(a) = theta.theta[id](a) - Scalar(2) * df[a][id];
    out.max_deviation = std::max(
        out.max_deviation,
        (out.recovered.theta[id] - e).template lpNorm<Eigen::Infinity>());
    out.expected.theta[id] = std::move(e);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Local compatible metric for closed Lee forms
// ---------------------------------------------------------------------------

template <typename Scalar>
struct LocalMetricResult {
  ScalarField<Scalar> potential;   // u with du = -theta
  MetricField<Scalar> metric;      // g' = e^u g, parallel under the Weyl connection
  Scalar parallel_residual = 0;    // max |nabla^{Weyl(g, theta)} g'|, fourth-order route
  Scalar potential_residual = 0;   // quality of the integrated potential
  Scalar path_disagreement = 0;
};

// For closed theta, produce g' in the conformal class of g that the Weyl
// connection of (g, theta) makes parallel: du = -theta and g' = e^u g, since
// nabla (e^u g) = (du + theta) (x) (e^u g).
template <typename Scalar>
LocalMetricResult<Scalar> exhibit_local_metric(const MetricField<Scalar>& g,
                                               const OneFormField<Scalar>& theta,
                                               NodeIndex basepoint = {0, 0, 0}) {
  require_same_chart(g.chart, theta.chart);
  OneFormField<Scalar> neg{theta.chart, {}};
  neg.theta.reserve(theta.theta.size());
  for (const auto& v : theta.theta) neg.theta.push_back(-v);
  auto pot = integrate_potential(neg, basepoint);

  LocalMetricResult<Scalar> out{std::move(pot.f), {g.chart, {}}, Scalar(0),
                                pot.roundtrip_residual, pot.path_disagreement};
  out.metric.g.reserve(g.g.size());
  for (std::size_t id = 0; id < g.g.size(); ++id)
    out.metric.g.push_back(std::exp(out.potential.values[id]) * g.g[id]);

  const auto conn = weyl_connection(g, theta);
  OneFormField<Scalar> zero{g.chart, std::vector<VectorX<Scalar>>(
                                         g.g.size(), VectorX<Scalar>::Zero(g.chart.n))};
  out.parallel_residual = compatibility_residual(out.metric, zero, conn, FdOrder::fourth);
  return out;
}

// ---------------------------------------------------------------------------
// Volume-normalized metric
// ---------------------------------------------------------------------------

// g = (v_h^2)^{1/n} h with v_h = rho / sqrt(det h); then det g = rho^2 at every
// node, so oriented g-orthonormal frames have volume 1 for the density rho.
template <typename Scalar>
MetricField<Scalar> volume_normalized_metric(const MetricField<Scalar>& h,
                                             const VolumeDensityField<Scalar>& rho) {
  require_same_chart(h.chart, rho.chart);
  require_positive_definite(h);
  const int n = h.chart.n;
  MetricField<Scalar> out{h.chart, {}};
  out.g.reserve(h.g.size());
  for (std::size_t id = 0; id < h.g.size(); ++id) {
    const Scalar r = rho.rho[id];
    if (!(r > Scalar(0)) || !std::isfinite(r))
      throw DegenerateMetric("volume density must be positive");
    const Scalar det = h.g[id].determinant();
    const Scalar factor = std::pow(r * r / det, Scalar(1) / Scalar(n));
    out.g.push_back(factor * h.g[id]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Report pipeline
// ---------------------------------------------------------------------------

template <typename Scalar>
struct WeylReport {
  Scalar torsion_residual = Scalar(0);
  Scalar compatibility_residual = Scalar(0);
  Scalar dtheta_residual = Scalar(0);
  bool closed = false;
  Scalar closedness_tol = Scalar(0);
  std::optional<Scalar> potential_residual;     // df + theta defect of the potential
  std::optional<Scalar> local_metric_residual;  // |nabla g'| for the exhibited metric
};

// Builds the Weyl connection and runs the full residual suite; the potential
// branch runs only when theta is closed.
template <typename Scalar>
WeylReport<Scalar> verify_weyl_structure(const MetricField<Scalar>& g,
                                         const OneFormField<Scalar>& theta) {
  WeylReport<Scalar> rep;
  const auto conn = weyl_connection(g, theta);
  rep.torsion_residual = torsion_of(conn).max_abs;
  rep.compatibility_residual = compatibility_residual(g, theta, conn, FdOrder::fourth);
  const auto ext = exterior_derivative(theta);
  rep.dtheta_residual = ext.max_abs;
  rep.closed = ext.closed;
  rep.closedness_tol = ext.tol_used;
  if (ext.closed) {
    const auto local = exhibit_local_metric(g, theta);
    rep.potential_residual = local.potential_residual;
    rep.local_metric_residual = local.parallel_residual;
  }
  return rep;
}

}  // namespace weylforge::weyl
