#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "weylforge/chart.hpp"
#include "weylforge/common.hpp"
#include "weylforge/errors.hpp"

// Analytic field presets. Every preset comes with closed-form values (and
// gradients where relevant) so that the finite-difference pipeline can be
// checked against an exact oracle.

namespace weylforge::presets {

using weyl::Chart;
using weyl::MetricField;
using weyl::OneFormField;
using weyl::ScalarField;
using weyl::VolumeDensityField;

// Sum of separable sine products: sum_t amp_t * prod_axis sin(freq * x + phase).
// Smooth, bounded, with closed-form partial derivatives.
template <typename Scalar>
class TrigPoly {
 public:
  struct Term {
    Scalar amplitude;
    std::array<Scalar, 3> freq{};
    std::array<Scalar, 3> phase{};
  };

  TrigPoly(int n, std::vector<Term> terms) : n_(n), terms_(std::move(terms)) {}

  int n() const { return n_; }

  Scalar value(const VectorX<Scalar>& x) const {
    Scalar v = Scalar(0);
    for (const auto& t : terms_) {
      Scalar p = t.amplitude;
      for (int a = 0; a < n_; ++a) p *= std::sin(t.freq[a] * x(a) + t.phase[a]);
      v += p;
    }
    return v;
  }

  Scalar partial(const VectorX<Scalar>& x, int axis) const {
    Scalar v = Scalar(0);
    for (const auto& t : terms_) {
      Scalar p = t.amplitude;
      for (int a = 0; a < n_; ++a) {
        const Scalar arg = t.freq[a] * x(a) + t.phase[a];
        p *= (a == axis) ? t.freq[a] * std::cos(arg) : std::sin(arg);
      }
      v += p;
    }
    return v;
  }

  VectorX<Scalar> gradient(const VectorX<Scalar>& x) const {
    VectorX<Scalar> g(n_);
    for (int a = 0; a < n_; ++a) g(a) = partial(x, a);
    return g;
  }

  static TrigPoly random(int n, Rng& rng, Scalar amplitude, int terms = 3,
                         Scalar max_freq = Scalar(1.5)) {
    std::uniform_real_distribution<double> freq(0.5, static_cast<double>(max_freq));
    std::uniform_real_distribution<double> phase(0.0, 6.28318530717958648);
    std::uniform_real_distribution<double> amp(0.3, 1.0);
    std::vector<Term> ts;
    for (int t = 0; t < terms; ++t) {
      Term term;
      term.amplitude = amplitude * static_cast<Scalar>(amp(rng)) / Scalar(terms);
      for (int a = 0; a < n; ++a) {
        term.freq[a] = static_cast<Scalar>(freq(rng));
        term.phase[a] = static_cast<Scalar>(phase(rng));
      }
      ts.push_back(term);
    }
    return TrigPoly(n, std::move(ts));
  }

 private:
  int n_;
  std::vector<Term> terms_;
};

// ---------------------------------------------------------------------------
// Sampling helpers
// ---------------------------------------------------------------------------

template <typename Scalar, typename F>
ScalarField<Scalar> sample_scalar(const Chart<Scalar>& chart, F&& fn) {
  ScalarField<Scalar> out{chart, {}};
  out.values.reserve(chart.node_count());
  for (long id = 0; id < chart.node_count(); ++id)
    out.values.push_back(fn(chart.point(chart.unflatten(id))));
  return out;
}

template <typename Scalar, typename F>
OneFormField<Scalar> sample_oneform(const Chart<Scalar>& chart, F&& fn) {
  OneFormField<Scalar> out{chart, {}};
  out.theta.reserve(chart.node_count());
  for (long id = 0; id < chart.node_count(); ++id)
    out.theta.push_back(fn(chart.point(chart.unflatten(id))));
  return out;
}

template <typename Scalar, typename F>
MetricField<Scalar> sample_metric(const Chart<Scalar>& chart, F&& fn) {
  MetricField<Scalar> out{chart, {}};
  out.g.reserve(chart.node_count());
  for (long id = 0; id < chart.node_count(); ++id)
    out.g.push_back(fn(chart.point(chart.unflatten(id))));
  return out;
}

// ---------------------------------------------------------------------------
// Metric presets
// ---------------------------------------------------------------------------

template <typename Scalar>
MetricField<Scalar> flat_metric(const Chart<Scalar>& chart) {
  return sample_metric(chart, [&](const VectorX<Scalar>&) {
    return MatrixX<Scalar>::Identity(chart.n, chart.n);
  });
}

// Flat plane in polar coordinates (r, phi): g = Diag(1, r^2). Needs n = 2 and
// a strictly positive r-extent.
template <typename Scalar>
MetricField<Scalar> polar_metric(const Chart<Scalar>& chart) {
  if (chart.n != 2) throw InvalidSpec("polar preset is two-dimensional");
  if (!(chart.extents[0][0] > Scalar(0)))
    throw InvalidSpec("polar preset needs r bounded away from 0");
  return sample_metric(chart, [&](const VectorX<Scalar>& x) {
    MatrixX<Scalar> g = MatrixX<Scalar>::Identity(2, 2);
    g(1, 1) = x(0) * x(0);
    return g;
  });
}

// Conformally flat metric e^{2f} I.
template <typename Scalar>
MetricField<Scalar> conformal_metric(const Chart<Scalar>& chart, const TrigPoly<Scalar>& f) {
  return sample_metric(chart, [&](const VectorX<Scalar>& x) {
    return MatrixX<Scalar>(std::exp(Scalar(2) * f.value(x)) *
                           MatrixX<Scalar>::Identity(chart.n, chart.n));
  });
}

// The fixed gentle profile behind the CLI's `conformal` preset; amplitudes are
// small enough that the 128^2 residuals stay well inside the verification
// gates while the truncation term remains measurable.
template <typename Scalar>
TrigPoly<Scalar> default_conformal_profile(int n) {
  using Term = typename TrigPoly<Scalar>::Term;
  const Scalar half_pi = Scalar(1.57079632679489662);
  std::vector<Term> terms;
  Term t1;
  t1.amplitude = Scalar(0.05);
  t1.freq = {Scalar(1), Scalar(1), Scalar(1)};
  t1.phase = {Scalar(0.7), half_pi - Scalar(0.3), Scalar(0.4)};
  Term t2;
  t2.amplitude = Scalar(0.02);
  t2.freq = {Scalar(1.3), Scalar(0.9), Scalar(1.1)};
  t2.phase = {Scalar(-0.2), Scalar(0.4), Scalar(1.1)};
  terms = {t1, t2};
  return TrigPoly<Scalar>(n, std::move(terms));
}

// Identity plus a symmetric trigonometric perturbation; the per-entry amplitude
// keeps the Gershgorin bound away from zero so the field stays SPD.
template <typename Scalar>
MetricField<Scalar> random_spd_metric(const Chart<Scalar>& chart, Rng& rng,
                                      Scalar amplitude = Scalar(0.15)) {
  const int n = chart.n;
  std::vector<std::vector<TrigPoly<Scalar>>> entry;
  for (int i = 0; i < n; ++i) {
    entry.emplace_back();
    for (int j = 0; j < n; ++j)
      entry.back().push_back(TrigPoly<Scalar>::random(n, rng, amplitude / Scalar(n), 2));
  }
  auto out = sample_metric(chart, [&](const VectorX<Scalar>& x) {
    MatrixX<Scalar> g = MatrixX<Scalar>::Identity(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        const Scalar v = entry[i][j].value(x);
        g(i, j) += v;
        if (i != j) g(j, i) += v;
      }
    return g;
  });
  weyl::require_positive_definite(out);
  return out;
}

// ---------------------------------------------------------------------------
// One-form presets
// ---------------------------------------------------------------------------

template <typename Scalar>
OneFormField<Scalar> zero_oneform(const Chart<Scalar>& chart) {
  return sample_oneform(chart, [&](const VectorX<Scalar>&) {
    return VectorX<Scalar>::Zero(chart.n);
  });
}

template <typename Scalar>
OneFormField<Scalar> constant_oneform(const Chart<Scalar>& chart,
                                      const VectorX<Scalar>& coeffs) {
  if (coeffs.size() != chart.n) throw InvalidSpec("coefficient arity mismatch");
  return sample_oneform(chart, [&](const VectorX<Scalar>&) { return coeffs; });
}

// Independent smooth random components; generically not closed.
template <typename Scalar>
OneFormField<Scalar> random_smooth_oneform(const Chart<Scalar>& chart, Rng& rng,
                                           Scalar amplitude = Scalar(0.3)) {
  std::vector<TrigPoly<Scalar>> comps;
  for (int a = 0; a < chart.n; ++a)
    comps.push_back(TrigPoly<Scalar>::random(chart.n, rng, amplitude, 2));
  return sample_oneform(chart, [&](const VectorX<Scalar>& x) {
    VectorX<Scalar> v(chart.n);
    for (int a = 0; a < chart.n; ++a) v(a) = comps[a].value(x);
    return v;
  });
}

template <typename Scalar>
struct ClosedOneForm {
  OneFormField<Scalar> theta;     // theta = d(potential), sampled analytically
  TrigPoly<Scalar> potential;
};

// Exactly closed random one-form: the sampled analytic differential of a
// random trigonometric potential.
template <typename Scalar>
ClosedOneForm<Scalar> closed_random_oneform(const Chart<Scalar>& chart, Rng& rng,
                                            Scalar amplitude = Scalar(0.3)) {
  TrigPoly<Scalar> u = TrigPoly<Scalar>::random(chart.n, rng, amplitude, 2);
  auto th = sample_oneform(chart, [&](const VectorX<Scalar>& x) { return u.gradient(x); });
  return {std::move(th), std::move(u)};
}

template <typename Scalar>
VolumeDensityField<Scalar> constant_density(const Chart<Scalar>& chart, Scalar value) {
  if (!(value > Scalar(0))) throw InvalidSpec("density must be positive");
  return {chart, std::vector<Scalar>(chart.node_count(), value)};
}

}  // namespace weylforge::presets
