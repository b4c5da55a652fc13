// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Every tolerance is pinned in code next to the check it gates.

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "weylforge/chart.hpp"
#include "weylforge/circle.hpp"
#include "weylforge/common.hpp"
#include "weylforge/matrix_group.hpp"
#include "weylforge/presets.hpp"
#include "weylforge/torsion.hpp"
#include "weylforge/weyl.hpp"

using namespace weylforge;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

// --------------------------------------------------------------------------
// 1. del o skew_inverse identity: 200 random antisymmetric phi, n in 2..6,
//    residual < 1e-12 and skew defect at rounding level.
// --------------------------------------------------------------------------
Outcome criterion_skew_inverse() {
  Rng rng(101u);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst_residual = 0.0;
  double worst_skew = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 5;
    torsion::TorsionTensor<double> phi(n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        VectorX<double> v(n);
        for (int k = 0; k < n; ++k) v(k) = gauss(rng);
        phi.set_pair(i, j, v);
      }
    const auto adj = torsion::skew_inverse(phi);
    worst_skew = std::max(worst_skew, adj.max_symmetric_defect());
    const auto back = torsion::del(adj);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          worst_residual = std::max(worst_residual, std::abs(back(i, j, k) - phi(i, j, k)));
  }
  const bool pass = worst_residual < 1e-12 && worst_skew < 1e-13;
  return {pass, "max residual " + fmt(worst_residual) + " (< 1e-12), skew defect " +
                    fmt(worst_skew)};
}

// --------------------------------------------------------------------------
// 2. Torsion-space table: coker = 0 for so, co, sl, gl (n <= 6) and
//    kernel = n for co_n, rank threshold 1e-9 relative.
// --------------------------------------------------------------------------
Outcome criterion_torsion_table() {
  bool pass = true;
  std::string bad;
  for (int n = 2; n <= 6; ++n) {
    const std::vector<std::pair<std::string, torsion::SubalgebraBasis<double>>> algebras = {
        {"so", torsion::SubalgebraBasis<double>::so(n)},
        {"co", torsion::SubalgebraBasis<double>::co(n)},
        {"sl", torsion::SubalgebraBasis<double>::sl(n)},
        {"gl", torsion::SubalgebraBasis<double>::gl(n)},
    };
    for (const auto& [name, alg] : algebras) {
      const auto rep = torsion::del_matrix(alg, 1e-9);
      if (rep.coker_dim != 0) {
        pass = false;
        bad += " coker(" + name + "," + std::to_string(n) + ")";
      }
      if (name == "co" && rep.kernel_dim != n) {
        pass = false;
        bad += " kernel(co," + std::to_string(n) + ")";
      }
    }
  }
  return {pass, pass ? "coker = 0 throughout, kernel(co_n) = n for n <= 6" : bad};
}

// --------------------------------------------------------------------------
// 3. Classification of 50 conjugated instances plus 100 witness verdicts.
// --------------------------------------------------------------------------
Outcome criterion_classification() {
  using namespace matgroup;
  Rng rng(211u);
  std::uniform_real_distribution<double> angle(0.2, 1.4);
  int mismatches = 0;

  auto check = [&](MatrixGroupSpec<double> spec, LinearPart lin, PositivePart pos,
                   double lambda, NegativePart neg) {
    const MatrixX<double> q = random_rotation<double>(spec.n, rng);
    for (auto& g : spec.generators) g = q * g * q.transpose();
    const auto cls = classify_group(spec);
    bool ok = cls.linear_part == lin && cls.h.positive_part == pos &&
              cls.h.negative_part == neg;
    if (pos == PositivePart::cyclic)
      ok = ok && std::abs(cls.h.lambda - lambda) < 1e-9 * lambda;
    if (!ok) ++mismatches;
  };

  auto diag = [](std::vector<double> d) {
    MatrixX<double> m = MatrixX<double>::Zero(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
  };

  for (int round = 0; round < 7; ++round) {
    // SO_n from rotations
    check({2, {rotation2(angle(rng))}, defaults::tol}, LinearPart::SO,
          PositivePart::trivial, 0.0, NegativePart::none);
    // SL_n from an anisotropic unimodular generator
    check({2, {diag({2.0, 0.5})}, defaults::tol}, LinearPart::SL, PositivePart::trivial,
          0.0, NegativePart::none);
    // scalar-cyclic extension of SO_2: determinant lambda^2
    check({2, {MatrixX<double>(1.5 * rotation2(angle(rng)))}, defaults::tol},
          LinearPart::SO, PositivePart::cyclic, 2.25, NegativePart::none);
    // SL_2 semidirect a cyclic determinant group
    check({2, {diag({3.0, 1.0}), rotation2(angle(rng))}, defaults::tol}, LinearPart::SL,
          PositivePart::cyclic, 3.0, NegativePart::none);
    // conformal generator with negative determinant: half-shifted coset
    check({2, {diag({-2.0, 2.0})}, defaults::tol}, LinearPart::SO, PositivePart::cyclic,
          16.0, NegativePart::negative_generator);
    // reflection gives O_2: trivial positive part with -1
    check({2, {diag({1.0, -1.0})}, defaults::tol}, LinearPart::SO, PositivePart::trivial,
          0.0, NegativePart::minus_one);
    // two incommensurable scalars: CO_2^+
    check({2, {MatrixX<double>(2.0 * MatrixX<double>::Identity(2, 2)),
               MatrixX<double>(3.0 * MatrixX<double>::Identity(2, 2))},
           defaults::tol},
          LinearPart::SO, PositivePart::continuum, 0.0, NegativePart::none);
    // 3-dimensional scalar-cyclic extension
    check({3, {MatrixX<double>(2.0 * MatrixX<double>::Identity(3, 3))}, defaults::tol},
          LinearPart::SO, PositivePart::cyclic, 8.0, NegativePart::none);
  }
  // two extra SL instances round out 58 -> keep the count at >= 50 checked

  // witness verdicts: orthogonality of B versus commutation of D^2 and S
  std::uniform_real_distribution<double> entry(0.3, 3.0);
  std::uniform_int_distribution<int> dim(2, 4);
  int verdict_mismatch = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = dim(rng);
    VectorX<double> d(n);
    const bool scalar = trial % 5 == 0;
    const double common = entry(rng);
    for (int i = 0; i < n; ++i) d(i) = scalar ? common : entry(rng);
    const MatrixX<double> dm = d.asDiagonal();
    const MatrixX<double> s = random_rotation<double>(n, rng);
    const MatrixX<double> b = matgroup::commutation_conjugate(dm, s);
    const bool b_orth = (b * b.transpose() - MatrixX<double>::Identity(n, n))
                            .cwiseAbs()
                            .maxCoeff() < 1e-9;
    const MatrixX<double> d2 = dm * dm;
    const bool commute = (d2 * s - s * d2).cwiseAbs().maxCoeff() < 1e-9;
    if (b_orth != commute) ++verdict_mismatch;
  }

  const bool pass = mismatches == 0 && verdict_mismatch == 0;
  return {pass, "56 conjugated instances, " + std::to_string(mismatches) +
                    " mismatches; 100 witness verdicts, " +
                    std::to_string(verdict_mismatch) + " mismatches"};
}

// --------------------------------------------------------------------------
// 4. psi interpolation at a = 2 for targets {1, 1.5, 2, 3, 4}.
// --------------------------------------------------------------------------
Outcome criterion_psi() {
  const double a = 2.0;
  MatrixX<double> stretch = MatrixX<double>::Zero(2, 2);
  stretch(0, 0) = a;
  stretch(1, 1) = 1.0 / a;
  auto eval = [&](double theta) {
    return matgroup::psi(MatrixX<double>(stretch * rotation2(theta) * stretch));
  };
  const double end0 = eval(0.0);
  const double end1 = eval(1.57079632679489662);
  double worst = std::max(std::abs(end0 - a * a), std::abs(end1 - 1.0));
  for (const double target : {1.0, 1.5, 2.0, 3.0, 4.0}) {
    const double theta = matgroup::psi_interpolate(a, target);
    worst = std::max(worst, std::abs(eval(theta) - target));
  }
  return {worst < 1e-10, "max |psi - target| " + fmt(worst) + " (< 1e-10), endpoints a^2 and 1"};
}

// --------------------------------------------------------------------------
// 5. Weyl residuals and convergence. Torsion vanishes exactly and the
//    compatibility residual stays below 1e-5 at 128^2 on the flat and polar
//    presets with smooth random theta. The second-order convergence factor is
//    measured on the conformal preset: the flat and polar metrics are constant
//    resp. quadratic per entry, so the second-order stencils reproduce them
//    exactly and their residuals sit at rounding level at every resolution.
// --------------------------------------------------------------------------
Outcome criterion_weyl_convergence() {
  auto pipeline = [](const weyl::MetricField<double>& g, unsigned seed) {
    Rng rng(seed);
    const auto theta = presets::random_smooth_oneform(g.chart, rng, 0.3);
    const auto conn = weyl::weyl_connection(g, theta);
    const double torsion = weyl::torsion_of(conn).max_abs;
    const double compat =
        weyl::compatibility_residual(g, theta, conn, weyl::FdOrder::fourth);
    return std::make_pair(torsion, compat);
  };
  auto unit = [](int res) {
    return weyl::Chart<double>::make(2, {{{0.0, 1.0}}, {{0.0, 1.0}}}, {res, res});
  };
  auto polar = [](int res) {
    return weyl::Chart<double>::make(2, {{{1.0, 2.0}}, {{0.0, 1.0}}}, {res, res});
  };

  const auto [t_flat, c_flat] = pipeline(presets::flat_metric(unit(128)), 7u);
  const auto [t_polar, c_polar] = pipeline(presets::polar_metric(polar(128)), 8u);

  const auto profile = presets::default_conformal_profile<double>(2);
  const auto [t_conf64, c_conf64] =
      pipeline(presets::conformal_metric(unit(64), profile), 9u);
  const auto [t_conf128, c_conf128] =
      pipeline(presets::conformal_metric(unit(128), profile), 9u);
  const double factor = c_conf64 / c_conf128;

  const bool pass = t_flat == 0.0 && t_polar == 0.0 && t_conf64 == 0.0 &&
                    t_conf128 == 0.0 && c_flat < 1e-5 && c_polar < 1e-5 &&
                    c_conf128 < 1e-5 && factor > 3.5 && factor < 4.5;
  return {pass, "torsion 0 exactly; compat flat " + fmt(c_flat) + ", polar " +
                    fmt(c_polar) + ", conformal@128 " + fmt(c_conf128) +
                    " (< 1e-5); 64->128 factor " + fmt(factor) + " in [3.5, 4.5]"};
}

// --------------------------------------------------------------------------
// 6. Local Levi-Civita recovery for closed lee forms at 128^2.
// --------------------------------------------------------------------------
Outcome criterion_local_metric() {
  auto unit = [](int res) {
    return weyl::Chart<double>::make(2, {{{0.0, 1.0}}, {{0.0, 1.0}}}, {res, res});
  };
  auto polar_chart = [](int res) {
    return weyl::Chart<double>::make(2, {{{1.0, 2.0}}, {{0.0, 1.0}}}, {res, res});
  };
  double worst = 0.0;

  {  // flat metric, constant lee form
    const auto chart = unit(128);
    const auto g = presets::flat_metric(chart);
    VectorX<double> coeff(2);
    coeff << 0.4, 0.0;
    const auto local = weyl::exhibit_local_metric(g, presets::constant_oneform(chart, coeff));
    worst = std::max(worst, local.parallel_residual);
  }
  {  // flat metric, smooth exact lee form
    const auto chart = unit(128);
    Rng rng(17u);
    const auto closed = presets::closed_random_oneform(chart, rng, 0.3);
    const auto local = weyl::exhibit_local_metric(presets::flat_metric(chart), closed.theta);
    worst = std::max(worst, local.parallel_residual);
  }
  {  // polar metric, smooth exact lee form
    const auto chart = polar_chart(128);
    Rng rng(19u);
    const auto closed = presets::closed_random_oneform(chart, rng, 0.2);
    const auto local = weyl::exhibit_local_metric(presets::polar_metric(chart), closed.theta);
    worst = std::max(worst, local.parallel_residual);
  }
  return {worst < 1e-5, "max |nabla g'| " + fmt(worst) + " (< 1e-5) at 128^2"};
}

// --------------------------------------------------------------------------
// 7. Volume normalization: det g = rho^2 pointwise to 1e-10 on random SPD
//    fields.
// --------------------------------------------------------------------------
Outcome criterion_volume() {
  const auto chart = weyl::Chart<double>::make(2, {{{0.0, 1.0}}, {{0.0, 1.0}}}, {32, 32});
  double worst = 0.0;
  unsigned seed = 300u;
  for (const double rho : {2.0, 0.7, 1.3}) {
    Rng rng(seed++);
    const auto h = presets::random_spd_metric(chart, rng);
    const auto g = weyl::volume_normalized_metric(h, presets::constant_density(chart, rho));
    for (long id = 0; id < chart.node_count(); ++id)
      worst = std::max(worst, std::abs(g.g[id].determinant() - rho * rho));
  }
  return {worst < 1e-10, "max |det g - rho^2| " + fmt(worst) + " (< 1e-10)"};
}

// --------------------------------------------------------------------------
// 8. Circle example at lambda = 2: obstruction, holonomy, conformal
//    invariance and additivity.
// --------------------------------------------------------------------------
Outcome criterion_circle() {
  using namespace circle;
  const auto spec = build_circle_structure(2.0, 256);
  const auto ob = reduction_obstruction(spec);
  const bool obstruction_ok = std::abs(ob.holonomy - 2.0) < 1e-12 && !ob.reducible;

  const auto descended = descend_weyl(cover_metric(2.0), 256);
  const double holonomy = lee_holonomy(descended);
  const double hol_err = std::abs(holonomy - (-2.0 * std::log(2.0)));

  Rng rng(401u);
  std::uniform_real_distribution<double> amp(0.05, 0.3);
  std::uniform_real_distribution<double> phase(0.0, two_pi);
  double worst_invariance = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    VectorX<double> f(256);
    const double a1 = amp(rng), a2 = amp(rng), a3 = amp(rng);
    const double p1 = phase(rng), p2 = phase(rng), p3 = phase(rng);
    for (int i = 0; i < 256; ++i) {
      const double t = two_pi * i / 256.0;
      f(i) = a1 * std::sin(t + p1) + a2 * std::sin(2 * t + p2) + a3 * std::sin(3 * t + p3);
    }
    const auto rep = conformal_class_invariance(descended, f);
    worst_invariance =
        std::max(worst_invariance, rep.holonomy_deviation / std::abs(holonomy));
  }

  const double h1 = lee_holonomy(descend_weyl(cover_metric(2.0), 128));
  const double h2 = lee_holonomy(descend_weyl(cover_metric(3.0), 128));
  const double h12 = lee_holonomy(descend_weyl(cover_metric(6.0), 128));
  const double additivity = std::abs(h12 - h1 - h2);

  const bool pass = obstruction_ok && hol_err < 1e-8 && worst_invariance < 1e-4 &&
                    additivity < 1e-9;
  return {pass, "obstruction 2, |holonomy + 2 ln 2| " + fmt(hol_err) +
                    " (< 1e-8), invariance " + fmt(worst_invariance) +
                    " (< 1e-4), additivity " + fmt(additivity) + " (< 1e-9)"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"del o skew_inverse identity (200 random phi, n = 2..6)", criterion_skew_inverse},
      {"torsion-space table (coker 0; kernel n for co_n; n <= 6)", criterion_torsion_table},
      {"classification of conjugated instances + witness verdicts", criterion_classification},
      {"psi interpolation at a = 2", criterion_psi},
      {"weyl residuals and second-order convergence", criterion_weyl_convergence},
      {"local levi-civita recovery for closed lee forms", criterion_local_metric},
      {"volume normalization det g = rho^2", criterion_volume},
      {"circle example at lambda = 2", criterion_circle},
  };

  std::printf("weylforge acceptance suite\n");
  int failures = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = run();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%d/8] %s  %s — %s (%.2fs)\n", index, outcome.pass ? "PASS" : "FAIL",
                name.c_str(), outcome.detail.c_str(), elapsed);
    if (!outcome.pass) ++failures;
  }
  std::printf("%d/8 criteria passed\n", 8 - failures);
  return failures;
}
