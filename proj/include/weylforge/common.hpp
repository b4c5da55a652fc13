#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

#include <cmath>
#include <random>

#include "weylforge/errors.hpp"

namespace weylforge {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Rng = std::mt19937_64;

namespace defaults {
// Membership / orthogonality residual tolerance.
inline constexpr double tol = 1e-8;
// Invertibility gate on |det|.
inline constexpr double tol_singular = 1e-12;
// Singular values below rank_rel_tol * sigma_max count as zero.
inline constexpr double rank_rel_tol = 1e-9;
}  // namespace defaults

// Rotation by `theta` in the (i, j) coordinate plane of R^n, identity elsewhere.
template <typename Scalar>
MatrixX<Scalar> plane_rotation(int n, int i, int j, Scalar theta) {
  if (n < 2 || i < 0 || j < 0 || i >= n || j >= n || i == j)
    throw InvalidSpec("plane_rotation: invalid plane indices");
  MatrixX<Scalar> r = MatrixX<Scalar>::Identity(n, n);
  const Scalar c = std::cos(theta);
  const Scalar s = std::sin(theta);
  r(i, i) = c;
  r(j, j) = c;
  r(i, j) = -s;
  r(j, i) = s;
  return r;
}

template <typename Scalar>
MatrixX<Scalar> rotation2(Scalar theta) {
  return plane_rotation<Scalar>(2, 0, 1, theta);
}

// Signed permutation matrix in SO(n) that swaps slots i and j (one sign flip
// keeps the determinant at +1).
template <typename Scalar>
MatrixX<Scalar> so_swap(int n, int i, int j) {
  if (n < 2 || i == j || i < 0 || j < 0 || i >= n || j >= n)
    throw InvalidSpec("so_swap: invalid indices");
  MatrixX<Scalar> p = MatrixX<Scalar>::Identity(n, n);
  p(i, i) = Scalar(0);
  p(j, j) = Scalar(0);
  p(i, j) = Scalar(1);
  p(j, i) = Scalar(-1);
  return p;
}

// Random special orthogonal matrix: QR of a Gaussian sample with the R-diagonal
// sign fix, then one column flip if the determinant lands at -1.
template <typename Scalar>
MatrixX<Scalar> random_rotation(int n, Rng& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  MatrixX<Scalar> a(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) a(r, c) = static_cast<Scalar>(gauss(rng));
  Eigen::HouseholderQR<MatrixX<Scalar>> qr(a);
  MatrixX<Scalar> q = qr.householderQ();
  MatrixX<Scalar> rmat = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (int c = 0; c < n; ++c)
    if (rmat(c, c) < Scalar(0)) q.col(c) *= Scalar(-1);
  if (q.determinant() < Scalar(0)) q.col(0) *= Scalar(-1);
  return q;
}

// Random symmetric positive definite matrix with eigenvalues in [lo, hi].
template <typename Scalar>
MatrixX<Scalar> random_spd(int n, Rng& rng, Scalar lo = Scalar(0.5), Scalar hi = Scalar(2)) {
  std::uniform_real_distribution<double> unif(static_cast<double>(lo), static_cast<double>(hi));
  MatrixX<Scalar> q = random_rotation<Scalar>(n, rng);
  VectorX<Scalar> eigs(n);
  for (int i = 0; i < n; ++i) eigs(i) = static_cast<Scalar>(unif(rng));
  return q * eigs.asDiagonal() * q.transpose();
}

// Random invertible matrix (Gaussian entries, resampled while near-singular).
template <typename Scalar>
MatrixX<Scalar> random_invertible(int n, Rng& rng, Scalar min_abs_det = Scalar(1e-3)) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int attempt = 0; attempt < 64; ++attempt) {
    MatrixX<Scalar> a(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) a(r, c) = static_cast<Scalar>(gauss(rng));
    if (std::abs(a.determinant()) > min_abs_det) return a;
  }
  throw Error("random_invertible: failed to sample a well-conditioned matrix");
}

}  // namespace weylforge
