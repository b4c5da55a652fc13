#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "weylforge/common.hpp"
#include "weylforge/errors.hpp"

// The circle example: a discrete scale group H = lambda^Z acting on the frame
// bundle of S^1 gives a principal bundle with no orthonormal reduction when
// lambda != 1, yet the cover metric e^{2ct} dt^2 (c = ln(lambda)/2pi) descends
// to a Weyl connection whose Lee form is closed but has nonzero period.

namespace weylforge::circle {

inline constexpr double two_pi = 6.28318530717958648;

template <typename Scalar>
struct CircleBundleSpec {
  Scalar lambda = Scalar(1);
  int samples = 0;
  // Cech presentation with two arcs and a single nontrivial overlap value at
  // the cut point t = 0; the other overlap carries 1.
  std::vector<Scalar> transitions;
};

template <typename Scalar>
CircleBundleSpec<Scalar> build_circle_structure(Scalar lambda, int samples) {
  if (!(lambda > Scalar(0)) || !std::isfinite(lambda))
    throw InvalidSpec("lambda must be a positive real");
  if (samples < 16) throw InvalidSpec("at least 16 samples are required");
  return {lambda, samples, {lambda}};
}

template <typename Scalar>
struct Obstruction {
  Scalar holonomy = Scalar(1);  // product of the transition values
  bool reducible = false;       // true iff the structure group reduces to {1}
};

template <typename Scalar>
Obstruction<Scalar> reduction_obstruction(const CircleBundleSpec<Scalar>& spec,
                                          Scalar tol = Scalar(defaults::tol)) {
  Scalar h = Scalar(1);
  for (const Scalar t : spec.transitions) h *= t;
  return {h, std::abs(h - Scalar(1)) <= tol};
}

// Metric e^{2ct} dt^2 on the universal cover R; the deck translation
// t -> t + 2pi is then a similarity of ratio lambda = e^{2 pi c}.
template <typename Scalar>
struct CoverMetric {
  Scalar lambda = Scalar(1);
  Scalar c = Scalar(0);

  Scalar value(Scalar t) const { return std::exp(Scalar(2) * c * t); }
};

template <typename Scalar>
CoverMetric<Scalar> cover_metric(Scalar lambda) {
  if (!(lambda > Scalar(0)) || !std::isfinite(lambda))
    throw InvalidSpec("lambda must be a positive real");
  return {lambda, std::log(lambda) / Scalar(two_pi)};
}

// Max relative defect of g(t + 2 pi k) = lambda^{2k} g(t) over a sample grid.
template <typename Scalar>
Scalar deck_similarity_residual(const CoverMetric<Scalar>& cover, int samples, int k = 1) {
  Scalar worst = Scalar(0);
  const Scalar ratio = std::pow(cover.lambda, Scalar(2 * k));
  for (int i = 0; i < samples; ++i) {
    const Scalar t = Scalar(two_pi) * Scalar(i) / Scalar(samples);
    const Scalar lhs = cover.value(t + Scalar(two_pi) * Scalar(k));
    const Scalar rhs = ratio * cover.value(t);
    worst = std::max(worst, std::abs(lhs - rhs) / rhs);
  }
  return worst;
}

template <typename Scalar>
struct DescendedWeyl {
  VectorX<Scalar> t;      // sample points in [0, 2pi)
  VectorX<Scalar> gamma;  // connection coefficient, constant = c
  VectorX<Scalar> theta;  // Lee form w.r.t. the reference metric dt^2, constant = -2c
  Scalar gamma_mean = Scalar(0);
  Scalar theta_mean = Scalar(0);
  Scalar constancy = Scalar(0);           // max |gamma_i - mean|
  Scalar direct_formula_gap = Scalar(0);  // cross-check against (1/2) g^{-1} D g
};

// Levi-Civita coefficient of the cover metric, computed by central differences
// on the cover (ghost samples past the period) and restricted to one period.
// In one dimension Gamma = (1/2) d/dt log g, and the log form keeps the
// computed constants resolution-independent for the exponential family; the
// direct quotient (1/2) g^{-1} D g carries an O(h^2) bias and is kept as a
// cross-check. The result is 2pi-periodic (it is constant), so it descends.
// Against the reference metric dt^2 the Lee form is theta = -2 Gamma dt.
template <typename Scalar>
DescendedWeyl<Scalar> descend_weyl(const CoverMetric<Scalar>& cover, int samples) {
  if (samples < 16) throw InvalidSpec("at least 16 samples are required");
  const Scalar h = Scalar(two_pi) / Scalar(samples);
  DescendedWeyl<Scalar> out;
  out.t.resize(samples);
  out.gamma.resize(samples);
  out.theta.resize(samples);
  for (int i = 0; i < samples; ++i) {
    const Scalar t = Scalar(i) * h;
    out.t(i) = t;
    const Scalar log_plus = std::log(cover.value(t + h));
    const Scalar log_minus = std::log(cover.value(t - h));
    out.gamma(i) = (log_plus - log_minus) / (Scalar(4) * h);
    out.theta(i) = Scalar(-2) * out.gamma(i);
    const Scalar direct =
        (cover.value(t + h) - cover.value(t - h)) / (Scalar(2) * h) /
        (Scalar(2) * cover.value(t));
    out.direct_formula_gap = std::max(out.direct_formula_gap,
                                      std::abs(direct - out.gamma(i)));
  }
  out.gamma_mean = out.gamma.mean();
  out.theta_mean = out.theta.mean();
  out.constancy = (out.gamma.array() - out.gamma_mean).abs().maxCoeff();
  return out;
}

// Period integral of the Lee form over S^1 by the periodic trapezoid rule
// (exact for constants). Nonzero iff the closed Weyl structure is not exact.
template <typename Scalar>
Scalar lee_holonomy(const DescendedWeyl<Scalar>& weyl) {
  const int n = static_cast<int>(weyl.theta.size());
  const Scalar h = Scalar(two_pi) / Scalar(n);
  return h * weyl.theta.sum();
}

template <typename Scalar>
struct InvarianceReport {
  Scalar holonomy_reference = Scalar(0);
  Scalar holonomy_conformal = Scalar(0);
  Scalar holonomy_deviation = Scalar(0);
  Scalar max_pointwise_change = Scalar(0);
};

// Recompute the Lee form against g' with e^{2f} g' = g for a periodic sample f
// of the conformal potential: theta' = theta - 2 df. The period integral is a
// conformal invariant; the pointwise form is not.
template <typename Scalar>
InvarianceReport<Scalar> conformal_class_invariance(const DescendedWeyl<Scalar>& weyl,
                                                    const VectorX<Scalar>& f) {
  const int n = static_cast<int>(weyl.theta.size());
  if (static_cast<int>(f.size()) != n)
    throw InvalidSpec("conformal factor sample count mismatch");
  const Scalar h = Scalar(two_pi) / Scalar(n);
  VectorX<Scalar> theta_prime(n);
  InvarianceReport<Scalar> out;
  for (int i = 0; i < n; ++i) {
    const Scalar df = (f((i + 1) % n) - f((i + n - 1) % n)) / (Scalar(2) * h);
    theta_prime(i) = weyl.theta(i) - Scalar(2) * df;
    out.max_pointwise_change =
        std::max(out.max_pointwise_change, std::abs(theta_prime(i) - weyl.theta(i)));
  }
  out.holonomy_reference = h * weyl.theta.sum();
  out.holonomy_conformal = h * theta_prime.sum();
  out.holonomy_deviation = std::abs(out.holonomy_conformal - out.holonomy_reference);
  return out;
}

}  // namespace weylforge::circle
