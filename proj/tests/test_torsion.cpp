#include <doctest.h>

#include <Eigen/Dense>

#include <random>

#include "weylforge/common.hpp"
#include "weylforge/torsion.hpp"

using namespace weylforge;
using namespace weylforge::torsion;

namespace {

template <typename Scalar>
TorsionTensor<Scalar> random_torsion(int n, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  TorsionTensor<Scalar> phi(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      VectorX<Scalar> v(n);
      for (int k = 0; k < n; ++k) v(k) = static_cast<Scalar>(gauss(rng));
      phi.set_pair(i, j, v);
    }
  return phi;
}

ConnectionAdjustment<double> random_adjustment(int n, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto adj = ConnectionAdjustment<double>::zero(n);
  for (auto& m : adj.xi)
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) m(r, c) = gauss(rng);
  return adj;
}

}  // namespace

TEST_CASE("del of zero is zero") {
  const auto phi = del(ConnectionAdjustment<double>::zero(3));
  CHECK(phi.max_abs() == 0.0);
}

TEST_CASE("del evaluates the defining formula") {
  // xi(e1) the standard rotation generator, xi(e2) = 0: phi(e1, e2) = e1.
  auto adj = ConnectionAdjustment<double>::zero(2);
  adj.xi[0] << 0.0, 1.0, -1.0, 0.0;
  const auto phi = del(adj);
  CHECK(phi(0, 1, 0) == doctest::Approx(1.0));
  CHECK(phi(0, 1, 1) == doctest::Approx(0.0));
  CHECK(phi(1, 0, 0) == doctest::Approx(-1.0));
}

TEST_CASE("del of a scalar adjustment") {
  const double c = 0.7;
  const int n = 3;
  auto adj = ConnectionAdjustment<double>::zero(n);
  for (auto& m : adj.xi) m = c * MatrixX<double>::Identity(n, n);
  const auto phi = del(adj);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double expected = c * ((k == j && i != j ? 1.0 : 0.0) -
                                     (k == i && i != j ? 1.0 : 0.0));
        CHECK(phi(i, j, k) == doctest::Approx(expected));
      }
}

TEST_CASE("skew inverse of zero is zero") {
  const auto adj = skew_inverse(TorsionTensor<double>(4));
  CHECK(adj.max_abs() == 0.0);
}

TEST_CASE("skew inverse reproduces the hand-computed plane example") {
  TorsionTensor<double> phi(2);
  VectorX<double> e1(2);
  e1 << 1.0, 0.0;
  phi.set_pair(0, 1, e1);
  const auto adj = skew_inverse(phi);
  MatrixX<double> expected(2, 2);
  expected << 0.0, 1.0, -1.0, 0.0;
  CHECK((adj.xi[0] - expected).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(adj.xi[1].cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("del after skew_inverse is the identity, with skew values") {
  Rng rng(7u);
  for (int n = 2; n <= 6; ++n)
    for (int trial = 0; trial < 10; ++trial) {
      const auto phi = random_torsion<double>(n, rng);
      const auto adj = skew_inverse(phi);
      CHECK(adj.max_symmetric_defect() < 1e-14);
      const auto back = del(adj);
      double worst = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          for (int k = 0; k < n; ++k)
            worst = std::max(worst, std::abs(back(i, j, k) - phi(i, j, k)));
      CHECK(worst < 1e-12);
    }
}

TEST_CASE("float instantiation round-trips at single precision") {
  Rng rng(9u);
  const auto phi = random_torsion<float>(3, rng);
  const auto back = del(skew_inverse(phi));
  float worst = 0.0f;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k)
        worst = std::max(worst, std::abs(back(i, j, k) - phi(i, j, k)));
  CHECK(worst < 1e-5f);
}

TEST_CASE("del and skew_inverse are linear") {
  Rng rng(13u);
  const int n = 4;
  const auto phi1 = random_torsion<double>(n, rng);
  const auto phi2 = random_torsion<double>(n, rng);
  const double a = 0.6, b = -1.3;

  const auto lhs = skew_inverse(a * phi1 + b * phi2);
  const auto r1 = skew_inverse(phi1);
  const auto r2 = skew_inverse(phi2);
  for (int i = 0; i < n; ++i) {
    const MatrixX<double> rhs = a * r1.xi[i] + b * r2.xi[i];
    CHECK((lhs.xi[i] - rhs).cwiseAbs().maxCoeff() < 1e-13);
  }

  const auto adj1 = random_adjustment(n, rng);
  const auto adj2 = random_adjustment(n, rng);
  auto combo = ConnectionAdjustment<double>::zero(n);
  for (int i = 0; i < n; ++i) combo.xi[i] = a * adj1.xi[i] + b * adj2.xi[i];
  const auto d1 = del(adj1);
  const auto d2 = del(adj2);
  const auto dc = del(combo);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        CHECK(dc(i, j, k) ==
              doctest::Approx(a * d1(i, j, k) + b * d2(i, j, k)).epsilon(1e-12));
}

TEST_CASE("torsion tensor construction enforces antisymmetry") {
  std::vector<double> full(8, 0.0);
  full[0 * 4 + 0 * 2 + 1] = 1.0;  // phi(0,0,1) nonzero breaks antisymmetry
  CHECK_THROWS_AS(TorsionTensor<double>::from_components(2, full), InvalidSpec);

  std::vector<double> ok(8, 0.0);
  ok[0 * 4 + 1 * 2 + 0] = 1.0;
  ok[1 * 4 + 0 * 2 + 0] = -1.0;
  const auto phi = TorsionTensor<double>::from_components(2, ok);
  CHECK(phi(0, 1, 0) == doctest::Approx(1.0));
}

TEST_CASE("standard subalgebra bases validate and have the right dimensions") {
  for (int n = 2; n <= 4; ++n) {
    const auto so = SubalgebraBasis<double>::so(n);
    const auto co = SubalgebraBasis<double>::co(n);
    const auto sl = SubalgebraBasis<double>::sl(n);
    const auto gl = SubalgebraBasis<double>::gl(n);
    CHECK(so.dim() == n * (n - 1) / 2);
    CHECK(co.dim() == n * (n - 1) / 2 + 1);
    CHECK(sl.dim() == n * n - 1);
    CHECK(gl.dim() == n * n);
    CHECK_NOTHROW(validate(so));
    CHECK_NOTHROW(validate(co));
    CHECK_NOTHROW(validate(sl));
    CHECK_NOTHROW(validate(gl));
  }
}

TEST_CASE("commutator closure violations are rejected") {
  SubalgebraBasis<double> bad{2, {}};
  MatrixX<double> e11 = MatrixX<double>::Zero(2, 2);
  e11(0, 0) = 1.0;
  MatrixX<double> sym = MatrixX<double>::Zero(2, 2);
  sym(0, 1) = 1.0;
  sym(1, 0) = 1.0;
  bad.basis = {e11, sym};  // [e11, sym] = e12 - e21 is outside the span
  CHECK_THROWS_AS(validate(bad), InvalidSpec);
}

TEST_CASE("del matrix dimensions, ranks and an independent rank oracle") {
  for (int n = 2; n <= 6; ++n) {
    const auto so_rep = del_matrix(SubalgebraBasis<double>::so(n));
    CHECK(so_rep.domain_dim == n * (n * (n - 1) / 2));
    CHECK(so_rep.codomain_dim == n * (n * (n - 1) / 2));
    CHECK(so_rep.kernel_dim == 0);
    CHECK(so_rep.coker_dim == 0);

    const auto co_rep = del_matrix(SubalgebraBasis<double>::co(n));
    CHECK(co_rep.coker_dim == 0);
    CHECK(co_rep.kernel_dim == n);

    const auto sl_rep = del_matrix(SubalgebraBasis<double>::sl(n));
    CHECK(sl_rep.domain_dim == n * (n * n - 1));
    CHECK(sl_rep.coker_dim == 0);
    const auto gl_rep = del_matrix(SubalgebraBasis<double>::gl(n));
    CHECK(gl_rep.domain_dim == n * n * n);
    CHECK(gl_rep.codomain_dim == n * n * (n - 1) / 2);
    CHECK(gl_rep.coker_dim == 0);

    // cross-check the SVD rank with a pivoted LU rank
    const auto m = del_operator_matrix(SubalgebraBasis<double>::co(n));
    Eigen::FullPivLU<MatrixX<double>> lu(m);
    lu.setThreshold(1e-9);
    CHECK(lu.rank() == co_rep.rank);
  }

  const auto zero_rep = del_matrix(SubalgebraBasis<double>::trivial(3));
  CHECK(zero_rep.rank == 0);
  CHECK(zero_rep.coker_dim == 3 * 3 * (3 - 1) / 2);
}

TEST_CASE("for so_n the skew inverse is the matrix inverse of del") {
  for (int n = 2; n <= 5; ++n) {
    const auto alg = SubalgebraBasis<double>::so(n);
    const auto m = del_operator_matrix(alg);
    const int pairs = pair_count(n);
    std::vector<std::pair<int, int>> pair_of;  // lexicographic, matches pair_index
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b) pair_of.emplace_back(a, b);

    // Matrix of skew_inverse in the pair basis (columns) and the so-basis
    // coordinates e_i^* (x) E_ab (rows). The so basis element al is E_{rr,cc}
    // for the al-th lexicographic pair.
    MatrixX<double> s(n * alg.dim(), pairs * n);
    for (int p = 0; p < pairs; ++p)
      for (int k = 0; k < n; ++k) {
        TorsionTensor<double> phi(n);
        VectorX<double> v = VectorX<double>::Zero(n);
        v(k) = 1.0;
        phi.set_pair(pair_of[p].first, pair_of[p].second, v);
        const auto adj = skew_inverse(phi);
        for (int i = 0; i < n; ++i)
          for (int al = 0; al < alg.dim(); ++al)
            s(i * alg.dim() + al, p * n + k) =
                adj.xi[i](pair_of[al].first, pair_of[al].second);
      }
    const MatrixX<double> composed = m * s;
    CHECK((composed - MatrixX<double>::Identity(pairs * n, pairs * n)).cwiseAbs().maxCoeff() <
          1e-10);
  }
}

TEST_CASE("intrinsic torsion residual vanishes whenever so_n is contained") {
  Rng rng(17u);
  for (int n = 2; n <= 4; ++n) {
    const auto phi = random_torsion<double>(n, rng);
    CHECK(intrinsic_torsion_residual(phi, SubalgebraBasis<double>::so(n)) < 1e-10);
    CHECK(intrinsic_torsion_residual(phi, SubalgebraBasis<double>::co(n)) < 1e-10);
    CHECK(intrinsic_torsion_residual(phi, SubalgebraBasis<double>::gl(n)) < 1e-10);
  }
}

TEST_CASE("intrinsic torsion residual against the trivial algebra is the norm") {
  TorsionTensor<double> phi(2);
  VectorX<double> e1(2);
  e1 << 1.0, 0.0;
  phi.set_pair(0, 1, e1);
  CHECK(intrinsic_torsion_residual(phi, SubalgebraBasis<double>::trivial(2)) ==
        doctest::Approx(phi.pair_norm()).epsilon(1e-14));
  CHECK(intrinsic_torsion_residual(TorsionTensor<double>(3),
                                   SubalgebraBasis<double>::so(3)) == doctest::Approx(0.0));
}

TEST_CASE("rank decisions near the threshold raise an error") {
  // single basis element E01 + eps*E10: the del matrix has singular values
  // {1, eps}, so eps lands the rank decision inside, above or below the
  // relative 1e-9 band
  auto basis_for = [](double eps) {
    SubalgebraBasis<double> alg{2, {}};
    MatrixX<double> m = MatrixX<double>::Zero(2, 2);
    m(0, 1) = 1.0;
    m(1, 0) = eps;
    alg.basis = {m};
    return alg;
  };
  CHECK_THROWS_AS(del_matrix(basis_for(3e-9)), RankTolerance);
  CHECK(del_matrix(basis_for(1e-6)).rank == 2);
  CHECK(del_matrix(basis_for(1e-13)).rank == 1);
}
