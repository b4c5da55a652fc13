#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "weylforge/common.hpp"
#include "weylforge/errors.hpp"

// Classification of closed matrix groups G with SO_n <= G <= GL_n, presented by
// finite generator lists (SO_n is always implicit), together with the matrix
// factorizations the classification rests on: polar decomposition, conformal
// scale detection, the determinant-section splitting, and the diagonal
// commutation witness.

namespace weylforge::matgroup {

// ---------------------------------------------------------------------------
// Matrix factorizations
// ---------------------------------------------------------------------------

template <typename Scalar>
struct PolarFactors {
  MatrixX<Scalar> orthogonal;  // left factor, orthogonal
  MatrixX<Scalar> spd;         // right factor, symmetric positive definite
};

template <typename Derived>
typename Derived::Scalar checked_determinant(const Eigen::MatrixBase<Derived>& a,
                                             typename Derived::Scalar tol_singular) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != a.cols() || a.rows() < 1) throw InvalidSpec("expected a square matrix");
  if (!a.allFinite()) throw InvalidSpec("matrix entries must be finite");
  const Scalar det = MatrixX<Scalar>(a).determinant();
  if (std::abs(det) <= tol_singular) throw SingularInput("matrix is numerically singular");
  return det;
}

// A = orthogonal * spd, computed through the SVD.
template <typename Derived>
PolarFactors<typename Derived::Scalar> polar_decompose(
    const Eigen::MatrixBase<Derived>& a,
    typename Derived::Scalar tol_singular = typename Derived::Scalar(defaults::tol_singular)) {
  using Scalar = typename Derived::Scalar;
  checked_determinant(a, tol_singular);
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  PolarFactors<Scalar> out;
  out.orthogonal = svd.matrixU() * svd.matrixV().transpose();
  out.spd = svd.matrixV() * svd.singularValues().asDiagonal() * svd.matrixV().transpose();
  return out;
}

// Conformal scale of A: the lambda > 0 with A^T A = lambda^2 I, when one exists.
template <typename Derived>
std::optional<typename Derived::Scalar> is_conformal(
    const Eigen::MatrixBase<Derived>& a,
    typename Derived::Scalar tol = typename Derived::Scalar(defaults::tol),
    typename Derived::Scalar tol_singular = typename Derived::Scalar(defaults::tol_singular)) {
  using Scalar = typename Derived::Scalar;
  checked_determinant(a, tol_singular);
  const auto n = a.rows();
  const MatrixX<Scalar> gram = a.transpose() * a;
  const Scalar lambda2 = gram.trace() / Scalar(n);
  const Scalar resid =
      (gram - lambda2 * MatrixX<Scalar>::Identity(n, n)).cwiseAbs().maxCoeff();
  // relative to the Gram scale, so the verdict is invariant under rescaling A
  if (resid > tol * lambda2) return std::nullopt;
  return std::sqrt(lambda2);
}

// ---------------------------------------------------------------------------
// Closed subgroups of R^* from finite data
// ---------------------------------------------------------------------------

enum class PositivePart { trivial, cyclic, continuum };
enum class NegativePart { none, minus_one, negative_generator };

struct CommensurabilityOptions {
  double tol = 1e-9;               // log-space tolerance, scaled by max(1, log magnitude)
  double max_denominator = 1e6;    // integer-relation multiplier bound
  double ambiguity_factor = 32.0;  // near-misses in (tol, factor*tol] are inconclusive
};

// The closed subgroup of R^* generated by a finite set of values. The positive
// part is one of {1}, lambda^Z (lambda > 1) or all of R_+^*; negative elements
// form at most one coset, generated by -1 or by mu < 0 with mu^2 in the
// positive part.
template <typename Scalar>
struct HClass {
  PositivePart positive_part = PositivePart::trivial;
  Scalar lambda = Scalar(1);  // cyclic generator, > 1
  NegativePart negative_part = NegativePart::none;
  Scalar mu = Scalar(0);  // negative coset generator, < 0

  bool contains(Scalar x, Scalar tol = Scalar(defaults::tol)) const {
    if (!(x != Scalar(0)) || !std::isfinite(x)) return false;
    auto in_positive = [&](Scalar p) {
      const Scalar lg = std::log(p);
      switch (positive_part) {
        case PositivePart::trivial:
          return std::abs(lg) <= tol;
        case PositivePart::continuum:
          return true;
        case PositivePart::cyclic: {
          const Scalar step = std::log(lambda);
          const Scalar t = lg / step;
          return std::abs(t - std::round(t)) * step <= tol;
        }
      }
      return false;
    };
    if (x > Scalar(0)) return in_positive(x);
    switch (negative_part) {
      case NegativePart::none:
        return false;
      case NegativePart::minus_one:
        return in_positive(-x);
      case NegativePart::negative_generator:
        return in_positive(x / mu);
    }
    return false;
  }
};

namespace detail {

template <typename Scalar>
struct LogSubgroup {
  enum class Kind { trivial, cyclic, dense } kind = Kind::trivial;
  Scalar generator = Scalar(0);  // cyclic case, > 0
};

// Real gcd of a, b >= 0 by the Euclidean algorithm. The integer coefficients of
// the implied relation q*a - p*b are tracked through the continued-fraction
// convergent recursion; the search stops once the larger coefficient passes
// max_denominator. Outcomes:
//   - gcd within bounds                      -> value
//   - no relation anywhere near tol          -> nullopt (dense at this resolution)
//   - relation beyond the bound, or a near
//     miss inside the ambiguity band         -> AmbiguousCommensurability
template <typename Scalar>
std::optional<Scalar> pair_gcd(Scalar a, Scalar b, Scalar tol_abs,
                               const CommensurabilityOptions& opts) {
  if (a < b) std::swap(a, b);
  if (b <= tol_abs) return a;
  Scalar r0 = a;
  Scalar r1 = b;
  double coeff_prev = 0.0;
  double coeff = 1.0;
  Scalar best_within = std::numeric_limits<Scalar>::infinity();
  for (int iter = 0; iter < 256; ++iter) {
    const Scalar q = std::floor(r0 / r1);
    const double coeff_next = static_cast<double>(q) * coeff + coeff_prev;
    const Scalar r2 = r0 - q * r1;
    if (coeff_next <= opts.max_denominator) {
      if (r2 <= tol_abs) return r1;
      best_within = std::min(best_within, r2);
      r0 = r1;
      r1 = r2;
      coeff_prev = coeff;
      coeff = coeff_next;
      continue;
    }
    // Search exhausted at the bound.
    if (r2 <= tol_abs)
      throw AmbiguousCommensurability(
          "integer-relation found only beyond the denominator bound; raise the bound");
    if (best_within <= Scalar(opts.ambiguity_factor) * tol_abs)
      throw AmbiguousCommensurability(
          "integer-relation search inconclusive: best residual sits in the ambiguity band");
    return std::nullopt;
  }
  throw AmbiguousCommensurability("integer-relation search failed to terminate");
}

// Closed subgroup of (R, +) generated by a finite list of logs.
template <typename Scalar>
LogSubgroup<Scalar> classify_log_subgroup(const std::vector<Scalar>& logs,
                                          const CommensurabilityOptions& opts) {
  Scalar scale = Scalar(0);
  for (const Scalar l : logs) scale = std::max(scale, std::abs(l));
  const Scalar tol_abs = Scalar(opts.tol) * std::max(Scalar(1), scale);

  std::vector<Scalar> active;
  for (const Scalar l : logs)
    if (std::abs(l) > tol_abs) active.push_back(std::abs(l));
  if (active.empty()) return {LogSubgroup<Scalar>::Kind::trivial, Scalar(0)};

  Scalar g = active.front();
  for (std::size_t i = 1; i < active.size(); ++i) {
    const auto folded = pair_gcd(g, active[i], tol_abs, opts);
    if (!folded) return {LogSubgroup<Scalar>::Kind::dense, Scalar(0)};
    g = *folded;
  }

  // Snap the generator to the least-squares fit of the integer multiples, then
  // confirm every input is a multiple within tolerance.
  Scalar num = Scalar(0);
  Scalar den = Scalar(0);
  for (const Scalar l : active) {
    const Scalar m = std::round(l / g);
    if (m > Scalar(opts.max_denominator))
      throw AmbiguousCommensurability("generator multiplier exceeds the denominator bound");
    num += m * l;
    den += m * m;
  }
  g = num / den;
  for (const Scalar l : active)
    if (std::abs(l - std::round(l / g) * g) > Scalar(opts.ambiguity_factor) * tol_abs)
      throw AmbiguousCommensurability("gcd fold failed joint verification");
  return {LogSubgroup<Scalar>::Kind::cyclic, g};
}

}  // namespace detail

// The closed subgroup of R^* generated by `values`. Negative values fold into
// the sign coset: in log space the positive part is generated by the positive
// logs together with sums and differences of pairs of negative logs.
template <typename Scalar>
HClass<Scalar> classify_det_subgroup(const std::vector<Scalar>& values,
                                     const CommensurabilityOptions& opts = {}) {
  if (values.empty()) throw InvalidSpec("determinant list must be nonempty");
  std::vector<Scalar> pos_logs, neg_logs;
  for (const Scalar v : values) {
    if (!std::isfinite(v) || v == Scalar(0))
      throw InvalidSpec("determinant values must be finite and nonzero");
    (v > Scalar(0) ? pos_logs : neg_logs).push_back(std::log(std::abs(v)));
  }

  std::vector<Scalar> positive_generators = pos_logs;
  for (const Scalar m : neg_logs) positive_generators.push_back(Scalar(2) * m);
  for (std::size_t i = 0; i + 1 < neg_logs.size(); ++i)
    for (std::size_t j = i + 1; j < neg_logs.size(); ++j)
      positive_generators.push_back(neg_logs[i] - neg_logs[j]);

  const auto sub = detail::classify_log_subgroup(positive_generators, opts);
  using Kind = typename detail::LogSubgroup<Scalar>::Kind;

  HClass<Scalar> h;
  switch (sub.kind) {
    case Kind::trivial:
      h.positive_part = PositivePart::trivial;
      break;
    case Kind::cyclic:
      h.positive_part = PositivePart::cyclic;
      h.lambda = std::exp(sub.generator);
      break;
    case Kind::dense:
      h.positive_part = PositivePart::continuum;
      break;
  }
  if (neg_logs.empty()) return h;

  if (sub.kind != Kind::cyclic) {
    // Trivial positive part forces the negative coset onto -1 (its square is 1);
    // a dense positive part closes up to all of R^*.
    h.negative_part = NegativePart::minus_one;
    return h;
  }

  Scalar scale = Scalar(0);
  for (const Scalar l : pos_logs) scale = std::max(scale, std::abs(l));
  for (const Scalar l : neg_logs) scale = std::max(scale, std::abs(l));
  const Scalar tol_abs =
      Scalar(opts.tol * opts.ambiguity_factor) * std::max(Scalar(1), scale);

  const Scalar coset = neg_logs.front();
  const Scalar t = coset / sub.generator;
  const Scalar frac = t - std::round(t);
  if (std::abs(frac) * sub.generator <= tol_abs) {
    h.negative_part = NegativePart::minus_one;
  } else if (std::abs(std::abs(frac) - Scalar(0.5)) * sub.generator <= tol_abs) {
    h.negative_part = NegativePart::negative_generator;
    h.mu = -std::exp(sub.generator / Scalar(2));
  } else {
    throw AmbiguousCommensurability("negative coset sits at an inconsistent offset");
  }
  return h;
}

// ---------------------------------------------------------------------------
// Determinant section and the diagonal commutation witness
// ---------------------------------------------------------------------------

// Section of det: x -> |x|^(1/n) Diag(sgn x, 1, ..., 1); a group morphism with
// det(section(x)) = x.
template <typename Scalar>
MatrixX<Scalar> splitting_section(Scalar x, int n) {
  if (n < 1) throw InvalidSpec("dimension must be at least 1");
  if (!std::isfinite(x) || x == Scalar(0)) throw InvalidSpec("x must be finite and nonzero");
  const Scalar root = std::pow(std::abs(x), Scalar(1) / Scalar(n));
  MatrixX<Scalar> m = root * MatrixX<Scalar>::Identity(n, n);
  if (x < Scalar(0)) m(0, 0) = -m(0, 0);
  return m;
}

// B = D^{-1} S^T D S. B is orthogonal exactly when D^2 and S commute.
template <typename DerivedD, typename DerivedS>
MatrixX<typename DerivedD::Scalar> commutation_conjugate(const Eigen::MatrixBase<DerivedD>& d,
                                                    const Eigen::MatrixBase<DerivedS>& s) {
  using Scalar = typename DerivedD::Scalar;
  const MatrixX<Scalar> dm(d);
  return dm.inverse() * s.transpose() * dm * s;
}

template <typename Scalar>
struct CommutationWitness {
  MatrixX<Scalar> rotation;  // S in SO_n with S D^2 != D^2 S
  MatrixX<Scalar> b;         // D^{-1} S^T D S, unimodular and non-orthogonal
};

// For diagonal invertible D with D^2 not a multiple of the identity, produce a
// rotation S and the non-orthogonal unimodular element B it certifies. Returns
// nothing when D^2 is scalar.
template <typename Derived>
std::optional<CommutationWitness<typename Derived::Scalar>> commutation_witness(
    const Eigen::MatrixBase<Derived>& d,
    typename Derived::Scalar tol = typename Derived::Scalar(defaults::tol)) {
  using Scalar = typename Derived::Scalar;
  const int n = static_cast<int>(d.rows());
  checked_determinant(d, Scalar(defaults::tol_singular));
  const MatrixX<Scalar> dm(d);
  if ((dm - MatrixX<Scalar>(dm.diagonal().asDiagonal())).cwiseAbs().maxCoeff() >
      Scalar(defaults::tol_singular))
    throw InvalidSpec("commutation_witness expects a diagonal matrix");

  VectorX<Scalar> sq = dm.diagonal().array().square();
  int bi = 0, bj = 0;
  Scalar best = Scalar(0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(sq(i) - sq(j)) > best) {
        best = std::abs(sq(i) - sq(j));
        bi = i;
        bj = j;
      }
  if (best <= tol * sq.maxCoeff()) return std::nullopt;

  CommutationWitness<Scalar> w;
  w.rotation = plane_rotation<Scalar>(n, bi, bj, Scalar(EIGEN_PI / 4));
  w.b = commutation_conjugate(dm, w.rotation);
  return w;
}

// ---------------------------------------------------------------------------
// The eigenvalue interpolation map psi
// ---------------------------------------------------------------------------

// Largest eigenvalue of the symmetric factor of the polar decomposition.
template <typename Derived>
typename Derived::Scalar psi(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const auto polar = polar_decompose(m);
  Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> eig(polar.spd, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

// For A = Diag(a, 1/a), find theta in [0, pi/2] with psi(A R_theta A) = target.
// The endpoints evaluate to a^2 and 1, so any target in [1, a^2] is bracketed;
// psi is continuous in theta, and bisection keeps the bracket.
template <typename Scalar>
Scalar psi_interpolate(Scalar a, Scalar target, Scalar tol = Scalar(1e-12)) {
  if (!(a > Scalar(1))) throw OutOfRange("anisotropy parameter must exceed 1");
  const Scalar top = a * a;
  if (target < Scalar(1) - tol || target > top + tol)
    throw OutOfRange("target outside [1, a^2]");
  target = std::clamp(target, Scalar(1), top);

  MatrixX<Scalar> stretch(2, 2);
  stretch << a, Scalar(0), Scalar(0), Scalar(1) / a;
  auto eval = [&](Scalar theta) {
    return psi(MatrixX<Scalar>(stretch * rotation2(theta) * stretch));
  };

  Scalar lo = Scalar(0);            // psi = a^2 >= target
  Scalar hi = Scalar(EIGEN_PI / 2);  // psi = 1 <= target
  for (int iter = 0; iter < 160; ++iter) {
    const Scalar mid = (lo + hi) / Scalar(2);
    if (eval(mid) >= target)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < std::numeric_limits<Scalar>::epsilon()) break;
  }
  return (lo + hi) / Scalar(2);
}

// ---------------------------------------------------------------------------
// Group classification
// ---------------------------------------------------------------------------

enum class LinearPart { SO, SL };

// Finite presentation of a closed group G with SO_n <= G <= GL_n: the listed
// generators together with all of SO_n (never listed).
template <typename Scalar>
struct MatrixGroupSpec {
  int n = 0;
  std::vector<MatrixX<Scalar>> generators;
  Scalar tol = Scalar(defaults::tol);
};

template <typename Scalar>
void validate(const MatrixGroupSpec<Scalar>& spec,
              Scalar tol_singular = Scalar(defaults::tol_singular)) {
  if (spec.n < 1) throw InvalidSpec("dimension must be at least 1");
  if (spec.generators.empty()) throw InvalidSpec("generator list must be nonempty");
  for (const auto& g : spec.generators) {
    if (g.rows() != spec.n || g.cols() != spec.n)
      throw InvalidSpec("generator dimension mismatch certifies the group is not in GL_n");
    checked_determinant(g, tol_singular);
  }
}

template <typename Scalar>
struct GroupClassification {
  LinearPart linear_part = LinearPart::SO;
  HClass<Scalar> h;
  std::vector<MatrixX<Scalar>> splitting_witnesses;  // section images of the generator dets
};

// Residual of factoring every generator as (linear part element) * section(det):
// the leftover factor must be unimodular, and orthogonal in the SO case.
template <typename Scalar>
Scalar reconstruction_residual(const MatrixGroupSpec<Scalar>& spec,
                               const GroupClassification<Scalar>& cls) {
  Scalar worst = Scalar(0);
  const MatrixX<Scalar> eye = MatrixX<Scalar>::Identity(spec.n, spec.n);
  for (std::size_t i = 0; i < spec.generators.size(); ++i) {
    const MatrixX<Scalar> l = spec.generators[i] * cls.splitting_witnesses[i].inverse();
    worst = std::max(worst, std::abs(std::abs(l.determinant()) - Scalar(1)));
    if (cls.linear_part == LinearPart::SO)
      worst = std::max(worst, (l.transpose() * l - eye).cwiseAbs().maxCoeff());
  }
  return worst;
}

// The normal-form classification: linear part SL as soon as one generator is
// non-conformal (its symmetric polar factor is non-scalar, so the commutation
// witness and the maximality of SO_n in SL_n force all of SL_n); otherwise all
// generators are conformal and the group stays inside CO_n, whose unimodular
// part is exactly SO_n. H is the closed subgroup of R^* spanned by the
// generator determinants.
template <typename Scalar>
GroupClassification<Scalar> classify_group(const MatrixGroupSpec<Scalar>& spec,
                                           const CommensurabilityOptions& copts = {}) {
  validate(spec);
  GroupClassification<Scalar> out;
  bool all_conformal = true;
  std::vector<Scalar> dets;
  dets.reserve(spec.generators.size());
  for (const auto& g : spec.generators) {
    all_conformal = all_conformal && is_conformal(g, spec.tol).has_value();
    dets.push_back(g.determinant());
  }
  out.linear_part = all_conformal ? LinearPart::SO : LinearPart::SL;
  out.h = classify_det_subgroup(dets, copts);
  out.splitting_witnesses.reserve(dets.size());
  for (const Scalar x : dets) out.splitting_witnesses.push_back(splitting_section(x, spec.n));
  if (reconstruction_residual(spec, out) > spec.tol)
    throw Error("classification failed the reconstruction check");
  return out;
}

}  // namespace weylforge::matgroup
