#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "weylforge/common.hpp"
#include "weylforge/errors.hpp"

// Frame-level torsion machinery: the operator del mapping connection
// adjustments to torsion changes, its explicit skew right inverse, and the
// rank analysis of del restricted to a matrix subalgebra.

namespace weylforge::torsion {

inline int pair_count(int n) { return n * (n - 1) / 2; }

// Index of the unordered pair (a, b), a < b, in lexicographic order.
inline int pair_index(int n, int a, int b) {
  return a * n - a * (a + 1) / 2 + (b - a - 1);
}

// Element phi of Lambda^2 (R^n)^* (x) R^n at a fixed frame. Component
// (i, j, k) is the e_k coordinate of phi(e_i, e_j); antisymmetry in (i, j)
// is maintained by the pair setter.
template <typename Scalar>
class TorsionTensor {
 public:
  explicit TorsionTensor(int n)
      : n_(n), data_(static_cast<std::size_t>(n) * n * n, Scalar(0)) {
    if (n < 1) throw InvalidSpec("dimension must be at least 1");
  }

  // Build from a full component array; rejects inputs whose antisymmetry
  // defect exceeds tol, then stores the exactly antisymmetrized values.
  static TorsionTensor from_components(int n, const std::vector<Scalar>& full,
                                       Scalar tol = Scalar(1e-12)) {
    if (full.size() != static_cast<std::size_t>(n) * n * n)
      throw InvalidSpec("component array has the wrong size");
    Scalar scale = Scalar(0);
    for (const Scalar v : full) scale = std::max(scale, std::abs(v));
    TorsionTensor out(n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const Scalar a = full[flat(n, i, j, k)];
          const Scalar b = full[flat(n, j, i, k)];
          if (std::abs(a + b) > tol * std::max(Scalar(1), scale))
            throw InvalidSpec("components violate antisymmetry");
          out.data_[flat(n, i, j, k)] = (a - b) / Scalar(2);
        }
    return out;
  }

  int n() const { return n_; }

  Scalar operator()(int i, int j, int k) const { return data_[flat(n_, i, j, k)]; }

  // phi(e_i, e_j) = v and phi(e_j, e_i) = -v.
  void set_pair(int i, int j, const VectorX<Scalar>& v) {
    for (int k = 0; k < n_; ++k) {
      data_[flat(n_, i, j, k)] = v(k);
      data_[flat(n_, j, i, k)] = -v(k);
    }
  }

  VectorX<Scalar> pair(int i, int j) const {
    VectorX<Scalar> v(n_);
    for (int k = 0; k < n_; ++k) v(k) = data_[flat(n_, i, j, k)];
    return v;
  }

  // Flattening over (a < b, k), the coordinate vector in the pair basis.
  VectorX<Scalar> pair_vector() const {
    VectorX<Scalar> v(pair_count(n_) * n_);
    for (int a = 0; a < n_; ++a)
      for (int b = a + 1; b < n_; ++b)
        for (int k = 0; k < n_; ++k)
          v(pair_index(n_, a, b) * n_ + k) = (*this)(a, b, k);
    return v;
  }

  Scalar pair_norm() const { return pair_vector().norm(); }

  Scalar max_abs() const {
    Scalar m = Scalar(0);
    for (const Scalar v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  TorsionTensor& operator+=(const TorsionTensor& o) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  TorsionTensor& operator*=(Scalar s) {
    for (auto& v : data_) v *= s;
    return *this;
  }
  friend TorsionTensor operator+(TorsionTensor a, const TorsionTensor& b) { return a += b; }
  friend TorsionTensor operator*(Scalar s, TorsionTensor a) { return a *= s; }

 private:
  static std::size_t flat(int n, int i, int j, int k) {
    return (static_cast<std::size_t>(i) * n + j) * n + k;
  }
  int n_;
  std::vector<Scalar> data_;
};

// Element xi of (R^n)^* (x) End(R^n): xi[i] is the endomorphism xi(e_i).
template <typename Scalar>
struct ConnectionAdjustment {
  std::vector<MatrixX<Scalar>> xi;

  static ConnectionAdjustment zero(int n) {
    ConnectionAdjustment out;
    out.xi.assign(n, MatrixX<Scalar>::Zero(n, n));
    return out;
  }
  int n() const { return static_cast<int>(xi.size()); }

  Scalar max_abs() const {
    Scalar m = Scalar(0);
    for (const auto& x : xi) m = std::max(m, x.cwiseAbs().maxCoeff());
    return m;
  }
  // Largest symmetric part entry; zero iff every xi(e_i) is skew.
  Scalar max_symmetric_defect() const {
    Scalar m = Scalar(0);
    for (const auto& x : xi)
      m = std::max(m, (x + MatrixX<Scalar>(x.transpose())).cwiseAbs().maxCoeff());
    return m;
  }
};

// (del xi)(X, Y) = xi(X) Y - xi(Y) X.
template <typename Scalar>
TorsionTensor<Scalar> del(const ConnectionAdjustment<Scalar>& adj) {
  const int n = adj.n();
  TorsionTensor<Scalar> out(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      out.set_pair(i, j, VectorX<Scalar>(adj.xi[i].col(j) - adj.xi[j].col(i)));
  return out;
}

// The skew right inverse of del:
//   2 xi(X)(Y) = phi(X, Y) - phi(X, .)^*(Y) - phi(Y, .)^*(X),
// adjoints taken in the standard inner product. del(skew_inverse(phi)) = phi
// and every xi(e_i) is skew-symmetric.
template <typename Scalar>
ConnectionAdjustment<Scalar> skew_inverse(const TorsionTensor<Scalar>& phi) {
  const int n = phi.n();
  auto adj = ConnectionAdjustment<Scalar>::zero(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        adj.xi[i](k, j) = (phi(i, j, k) - phi(i, k, j) - phi(j, k, i)) / Scalar(2);
  return adj;
}

// ---------------------------------------------------------------------------
// Matrix subalgebras and the rank analysis of del
// ---------------------------------------------------------------------------

template <typename Scalar>
struct SubalgebraBasis {
  int n = 0;
  std::vector<MatrixX<Scalar>> basis;

  int dim() const { return static_cast<int>(basis.size()); }

  static SubalgebraBasis so(int n) {
    SubalgebraBasis out{n, {}};
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        MatrixX<Scalar> m = MatrixX<Scalar>::Zero(n, n);
        m(i, j) = Scalar(1);
        m(j, i) = Scalar(-1);
        out.basis.push_back(std::move(m));
      }
    return out;
  }
  static SubalgebraBasis co(int n) {
    SubalgebraBasis out = so(n);
    out.basis.push_back(MatrixX<Scalar>::Identity(n, n));
    return out;
  }
  static SubalgebraBasis sl(int n) {
    SubalgebraBasis out{n, {}};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) {
          MatrixX<Scalar> m = MatrixX<Scalar>::Zero(n, n);
          m(i, j) = Scalar(1);
          out.basis.push_back(std::move(m));
        }
    for (int i = 0; i + 1 < n; ++i) {
      MatrixX<Scalar> m = MatrixX<Scalar>::Zero(n, n);
      m(i, i) = Scalar(1);
      m(n - 1, n - 1) = Scalar(-1);
      out.basis.push_back(std::move(m));
    }
    return out;
  }
  static SubalgebraBasis gl(int n) {
    SubalgebraBasis out{n, {}};
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        MatrixX<Scalar> m = MatrixX<Scalar>::Zero(n, n);
        m(i, j) = Scalar(1);
        out.basis.push_back(std::move(m));
      }
    return out;
  }
  static SubalgebraBasis trivial(int n) { return SubalgebraBasis{n, {}}; }
};

namespace detail {
template <typename Scalar>
MatrixX<Scalar> stacked_basis(const SubalgebraBasis<Scalar>& alg) {
  MatrixX<Scalar> m(alg.n * alg.n, alg.dim());
  for (int c = 0; c < alg.dim(); ++c)
    m.col(c) = Eigen::Map<const VectorX<Scalar>>(alg.basis[c].data(), alg.n * alg.n);
  return m;
}
}  // namespace detail

// Checks linear independence of the basis and closure under the commutator.
template <typename Scalar>
void validate(const SubalgebraBasis<Scalar>& alg, Scalar tol = Scalar(defaults::tol)) {
  if (alg.n < 1) throw InvalidSpec("dimension must be at least 1");
  if (alg.dim() == 0) return;
  const MatrixX<Scalar> m = detail::stacked_basis(alg);
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= tol * sv(0))
    throw InvalidSpec("subalgebra basis is linearly dependent");
  for (int a = 0; a < alg.dim(); ++a)
    for (int b = a + 1; b < alg.dim(); ++b) {
      const MatrixX<Scalar> comm =
          alg.basis[a] * alg.basis[b] - alg.basis[b] * alg.basis[a];
      const VectorX<Scalar> rhs =
          Eigen::Map<const VectorX<Scalar>>(comm.data(), alg.n * alg.n);
      const VectorX<Scalar> resid = rhs - m * svd.solve(rhs);
      if (resid.template lpNorm<Eigen::Infinity>() >
          tol * std::max(Scalar(1), rhs.template lpNorm<Eigen::Infinity>()))
        throw InvalidSpec("basis is not closed under the commutator");
    }
}

// del restricted to (R^n)^* (x) g, as a matrix from the domain (dimension
// n * dim g, basis e_i^* (x) B_alpha) to Lambda^2 (R^n)^* (x) R^n (dimension
// n^2 (n-1)/2, pair basis).
template <typename Scalar>
MatrixX<Scalar> del_operator_matrix(const SubalgebraBasis<Scalar>& alg) {
  const int n = alg.n;
  const int rows = pair_count(n) * n;
  const int cols = n * alg.dim();
  MatrixX<Scalar> m = MatrixX<Scalar>::Zero(rows, cols);
  for (int i = 0; i < n; ++i)
    for (int al = 0; al < alg.dim(); ++al) {
      const int col = i * alg.dim() + al;
      const MatrixX<Scalar>& b = alg.basis[al];
      for (int a = 0; a < n; ++a)
        for (int bb = a + 1; bb < n; ++bb)
          for (int k = 0; k < n; ++k) {
            Scalar v = Scalar(0);
            if (i == a) v += b(k, bb);
            if (i == bb) v -= b(k, a);
            m(pair_index(n, a, bb) * n + k, col) = v;
          }
    }
  return m;
}

struct DelMatrixReport {
  Eigen::Index domain_dim = 0;
  Eigen::Index codomain_dim = 0;
  Eigen::Index rank = 0;
  Eigen::Index kernel_dim = 0;
  Eigen::Index coker_dim = 0;
};

// Rank, kernel and cokernel of del restricted to (R^n)^* (x) g, decided by a
// singular value threshold rank_rel_tol * sigma_max. Singular values within a
// factor 10 of the threshold make the rank decision ambiguous.
template <typename Scalar>
DelMatrixReport del_matrix(const SubalgebraBasis<Scalar>& alg,
                           Scalar rank_rel_tol = Scalar(defaults::rank_rel_tol)) {
  const MatrixX<Scalar> m = del_operator_matrix(alg);
  DelMatrixReport rep;
  rep.domain_dim = m.cols();
  rep.codomain_dim = m.rows();
  if (m.cols() == 0 || m.rows() == 0) {
    rep.kernel_dim = m.cols();
    rep.coker_dim = m.rows();
    return rep;
  }
  Eigen::BDCSVD<MatrixX<Scalar>> svd(m);
  const auto& sv = svd.singularValues();
  const Scalar smax = sv(0);
  if (smax <= Scalar(0)) {
    rep.kernel_dim = m.cols();
    rep.coker_dim = m.rows();
    return rep;
  }
  const Scalar thr = rank_rel_tol * smax;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > thr / Scalar(10) && sv(i) < thr * Scalar(10))
      throw RankTolerance("singular values cluster at the rank threshold");
  rep.rank = (sv.array() > thr).count();
  rep.kernel_dim = rep.domain_dim - rep.rank;
  rep.coker_dim = rep.codomain_dim - rep.rank;
  return rep;
}

// Norm of the component of phi orthogonal to the image of del restricted to
// (R^n)^* (x) g, in the pair-basis inner product. Vanishes whenever so_n <= g.
template <typename Scalar>
Scalar intrinsic_torsion_residual(const TorsionTensor<Scalar>& phi,
                                  const SubalgebraBasis<Scalar>& alg,
                                  Scalar rank_rel_tol = Scalar(defaults::rank_rel_tol)) {
  if (phi.n() != alg.n) throw InvalidSpec("dimension mismatch");
  const VectorX<Scalar> v = phi.pair_vector();
  if (alg.dim() == 0) return v.norm();
  const MatrixX<Scalar> m = del_operator_matrix(alg);
  Eigen::JacobiSVD<MatrixX<Scalar>> svd(m, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const Scalar smax = sv(0);
  if (smax <= Scalar(0)) return v.norm();
  const Scalar thr = rank_rel_tol * smax;
  const Eigen::Index rank = (sv.array() > thr).count();
  const auto u = svd.matrixU().leftCols(rank);
  return (v - u * (u.transpose() * v)).norm();
}

}  // namespace weylforge::torsion
