#pragma once

// Exact integer matrix algebra: Hermite and Smith normal forms with
// unimodular certificates, linear systems over Z, integer kernels and
// lattice membership. Everything is templated on the scalar so the same
// routines run over Integer (the default everywhere) or a machine integer
// in tests.

#include "einterp/integer.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace einterp {

template <typename Scalar>
struct HnfResult {
  Matrix<Scalar> H;  ///< row echelon, positive pivots, above-pivot entries in [0, pivot)
  Matrix<Scalar> U;  ///< unimodular, U * A == H
  std::vector<Index> pivots;  ///< pivot column of each nonzero row of H
  Index rank() const { return static_cast<Index>(pivots.size()); }
};

template <typename Scalar>
struct SnfResult {
  Matrix<Scalar> D;  ///< diagonal, d1 | d2 | ... | dr > 0 then zeros
  Matrix<Scalar> U;  ///< unimodular, U * A * V == D
  Matrix<Scalar> V;
  std::vector<Scalar> invariants;  ///< the nonzero diagonal entries
  Index rank() const { return static_cast<Index>(invariants.size()); }
};

/// Integer solution set of A x = b: empty, or particular + span of kernel.
template <typename Scalar>
struct AffineLattice {
  std::optional<Vector<Scalar>> particular;
  std::vector<Vector<Scalar>> kernel_basis;
  bool empty() const { return !particular.has_value(); }
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

// Replace rows (i, j) of M by (s*Ri + t*Rj, v*Ri + w*Rj).
template <typename Scalar>
void combine_rows(Matrix<Scalar>& M, Index i, Index j, const Scalar& s,
                  const Scalar& t, const Scalar& v, const Scalar& w) {
  for (Index c = 0; c < M.cols(); ++c) {
    Scalar a = M(i, c), b = M(j, c);
    M(i, c) = s * a + t * b;
    M(j, c) = v * a + w * b;
  }
}

template <typename Scalar>
void combine_cols(Matrix<Scalar>& M, Index i, Index j, const Scalar& s,
                  const Scalar& t, const Scalar& v, const Scalar& w) {
  for (Index r = 0; r < M.rows(); ++r) {
    Scalar a = M(r, i), b = M(r, j);
    M(r, i) = s * a + t * b;
    M(r, j) = v * a + w * b;
  }
}

template <typename Scalar>
void add_row_multiple(Matrix<Scalar>& M, Index dst, Index src, const Scalar& k) {
  if (k == 0) return;
  for (Index c = 0; c < M.cols(); ++c) M(dst, c) += k * M(src, c);
}

template <typename Scalar>
void add_col_multiple(Matrix<Scalar>& M, Index dst, Index src, const Scalar& k) {
  if (k == 0) return;
  for (Index r = 0; r < M.rows(); ++r) M(r, dst) += k * M(r, src);
}

}  // namespace detail

/// Row-style Hermite normal form with certificate U * A == H.
template <typename Scalar>
HnfResult<Scalar> hnf(const Matrix<Scalar>& A) {
  const Index m = A.rows(), n = A.cols();
  HnfResult<Scalar> res;
  res.H = A;
  res.U = Matrix<Scalar>::Identity(m, m);
  Matrix<Scalar>& H = res.H;
  Matrix<Scalar>& U = res.U;

  Index row = 0;
  for (Index col = 0; col < n && row < m; ++col) {
    // Fold every entry below `row` into H(row, col) by gcd steps.
    for (Index i = row + 1; i < m; ++i) {
      if (H(i, col) == 0) continue;
      if (H(row, col) == 0) {
        H.row(row).swap(H.row(i));
        U.row(row).swap(U.row(i));
        continue;
      }
      Scalar s, t;
      Scalar a = H(row, col), b = H(i, col);
      Scalar g = ext_gcd(a, b, s, t);
      Scalar v = -(b / g), w = a / g;
      detail::combine_rows(H, row, i, s, t, v, w);
      detail::combine_rows(U, row, i, s, t, v, w);
    }
    if (H(row, col) == 0) continue;
    if (H(row, col) < 0) {
      H.row(row) = -H.row(row);
      U.row(row) = -U.row(row);
    }
    const Scalar pivot = H(row, col);
    for (Index i = 0; i < row; ++i) {
      Scalar q = floor_div(H(i, col), pivot);
      detail::add_row_multiple(H, i, row, Scalar(-q));
      detail::add_row_multiple(U, i, row, Scalar(-q));
    }
    res.pivots.push_back(col);
    ++row;
  }
  return res;
}

/// Smith normal form with certificate U * A * V == D.
/// Pivots on the smallest nonzero absolute value to curb coefficient growth.
template <typename Scalar>
SnfResult<Scalar> snf(const Matrix<Scalar>& A) {
  const Index m = A.rows(), n = A.cols();
  SnfResult<Scalar> res;
  res.D = A;
  res.U = Matrix<Scalar>::Identity(m, m);
  res.V = Matrix<Scalar>::Identity(n, n);
  Matrix<Scalar>& D = res.D;
  Matrix<Scalar>& U = res.U;
  Matrix<Scalar>& V = res.V;

  for (Index t = 0; t < std::min(m, n); ++t) {
    for (;;) {
      // smallest nonzero entry of the trailing block
      Index pr = -1, pc = -1;
      Scalar best = 0;
      for (Index i = t; i < m; ++i)
        for (Index j = t; j < n; ++j)
          if (D(i, j) != 0) {
            Scalar a = detail::abs_value(D(i, j));
            if (pr < 0 || a < best) {
              best = a;
              pr = i;
              pc = j;
            }
          }
      if (pr < 0) break;
      if (pr != t) {
        D.row(pr).swap(D.row(t));
        U.row(pr).swap(U.row(t));
      }
      if (pc != t) {
        D.col(pc).swap(D.col(t));
        V.col(pc).swap(V.col(t));
      }
      bool clean = true;
      const Scalar pivot = D(t, t);
      for (Index i = t + 1; i < m; ++i) {
        if (D(i, t) == 0) continue;
        Scalar q = floor_div(D(i, t), pivot);
        detail::add_row_multiple(D, i, t, Scalar(-q));
        detail::add_row_multiple(U, i, t, Scalar(-q));
        if (D(i, t) != 0) clean = false;
      }
      for (Index j = t + 1; j < n; ++j) {
        if (D(t, j) == 0) continue;
        Scalar q = floor_div(D(t, j), pivot);
        detail::add_col_multiple(D, j, t, Scalar(-q));
        detail::add_col_multiple(V, j, t, Scalar(-q));
        if (D(t, j) != 0) clean = false;
      }
      if (!clean) continue;
      // divisibility: fold an offending row into row t and go again
      Index bad = -1;
      for (Index i = t + 1; i < m && bad < 0; ++i)
        for (Index j = t + 1; j < n; ++j)
          if (D(i, j) % pivot != 0) {
            bad = i;
            break;
          }
      if (bad < 0) break;
      detail::add_row_multiple(D, t, bad, Scalar(1));
      detail::add_row_multiple(U, t, bad, Scalar(1));
    }
    if (D(t, t) < 0) {
      D.row(t) = -D.row(t);
      U.row(t) = -U.row(t);
    }
    if (D(t, t) == 0) break;
    res.invariants.push_back(D(t, t));
  }
  return res;
}

/// Determinant by fraction-free (Bareiss) elimination.
template <typename Scalar>
Scalar determinant(const Matrix<Scalar>& A) {
  if (A.rows() != A.cols()) throw DimensionError("determinant of a non-square matrix");
  const Index n = A.rows();
  if (n == 0) return Scalar(1);
  Matrix<Scalar> M = A;
  Scalar sign = 1, prev = 1;
  for (Index k = 0; k < n - 1; ++k) {
    if (M(k, k) == 0) {
      Index swap = -1;
      for (Index i = k + 1; i < n; ++i)
        if (M(i, k) != 0) {
          swap = i;
          break;
        }
      if (swap < 0) return Scalar(0);
      M.row(k).swap(M.row(swap));
      sign = -sign;
    }
    for (Index i = k + 1; i < n; ++i)
      for (Index j = k + 1; j < n; ++j)
        M(i, j) = (M(i, j) * M(k, k) - M(i, k) * M(k, j)) / prev;
    prev = M(k, k);
  }
  return sign * M(n - 1, n - 1);
}

template <typename Scalar>
bool is_unimodular(const Matrix<Scalar>& U) {
  if (U.rows() != U.cols()) return false;
  Scalar d = determinant(U);
  return d == 1 || d == -1;
}

/// Basis of the integer kernel {x : A x = 0}, as HNF rows (canonical).
template <typename Scalar>
std::vector<Vector<Scalar>> kernel_basis(const Matrix<Scalar>& A) {
  const Index n = A.cols();
  HnfResult<Scalar> h = hnf<Scalar>(A.transpose());
  const Index r = h.rank();
  if (r == n) return {};
  Matrix<Scalar> K = h.U.bottomRows(n - r);
  Matrix<Scalar> KH = hnf<Scalar>(K).H;
  std::vector<Vector<Scalar>> out;
  for (Index i = 0; i < KH.rows(); ++i) {
    if (KH.row(i).isZero()) continue;
    out.push_back(KH.row(i).transpose());
  }
  return out;
}

/// Reduce v modulo the row lattice spanned by `basis` so that the last
/// coordinates are minimal: pivots are taken from the right.
template <typename Scalar>
Vector<Scalar> reduce_from_right(Vector<Scalar> v, const std::vector<Vector<Scalar>>& basis) {
  if (basis.empty()) return v;
  const Index n = v.size();
  Matrix<Scalar> B(static_cast<Index>(basis.size()), n);
  for (Index i = 0; i < B.rows(); ++i)
    for (Index j = 0; j < n; ++j) B(i, j) = basis[static_cast<std::size_t>(i)](n - 1 - j);
  HnfResult<Scalar> h = hnf<Scalar>(B);
  for (Index i = 0; i < h.rank(); ++i) {
    Index pc = h.pivots[static_cast<std::size_t>(i)];
    Index col = n - 1 - pc;
    Scalar q = floor_div(v(col), h.H(i, pc));
    if (q == 0) continue;
    for (Index j = 0; j < n; ++j) v(n - 1 - j) -= q * h.H(i, j);
  }
  return v;
}

/// All integer solutions of A x = b.
template <typename Scalar>
AffineLattice<Scalar> solve_linear(const Matrix<Scalar>& A, const Vector<Scalar>& b) {
  if (A.rows() != b.size())
    throw DimensionError("solve_linear: matrix has " + std::to_string(A.rows()) +
                         " rows but right-hand side has " + std::to_string(b.size()));
  const Index n = A.cols();
  AffineLattice<Scalar> out;
  HnfResult<Scalar> h = hnf<Scalar>(A.transpose());  // U A^T = H, so A = H^T U^{-T}
  const Index r = h.rank();
  // Solve H^T y = b, then x = U^T y.
  Vector<Scalar> y = Vector<Scalar>::Zero(n);
  for (Index k = 0; k < r; ++k) {
    Index pc = h.pivots[static_cast<std::size_t>(k)];
    Scalar acc = b(pc);
    for (Index i = 0; i < k; ++i) acc -= h.H(i, pc) * y(i);
    if (acc % h.H(k, pc) != 0) return out;
    y(k) = acc / h.H(k, pc);
  }
  Vector<Scalar> residual = h.H.transpose() * y - b;
  if (!residual.isZero()) return out;
  out.kernel_basis = kernel_basis<Scalar>(A);
  Vector<Scalar> x = h.U.transpose() * y;
  out.particular = reduce_from_right<Scalar>(x, out.kernel_basis);
  return out;
}

/// Coordinates c with sum_i c_i basis_i == v, coordinatewise modulo the given
/// moduli (a zero modulus, or no moduli at all, means exact equality).
template <typename Scalar>
std::optional<Vector<Scalar>> lattice_member(const Vector<Scalar>& v,
                                             const std::vector<Vector<Scalar>>& basis,
                                             const std::vector<Scalar>& moduli = {}) {
  const Index d = v.size();
  if (!moduli.empty() && static_cast<Index>(moduli.size()) != d)
    throw DimensionError("lattice_member: moduli length differs from vector length");
  for (const auto& b : basis)
    if (b.size() != d) throw DimensionError("lattice_member: basis vector of wrong length");
  std::vector<Index> modded;
  for (Index j = 0; j < static_cast<Index>(moduli.size()); ++j)
    if (moduli[static_cast<std::size_t>(j)] != 0) modded.push_back(j);
  const Index k = static_cast<Index>(basis.size());
  Matrix<Scalar> M = Matrix<Scalar>::Zero(d, k + static_cast<Index>(modded.size()));
  for (Index i = 0; i < k; ++i) M.col(i) = basis[static_cast<std::size_t>(i)];
  for (std::size_t t = 0; t < modded.size(); ++t)
    M(modded[t], k + static_cast<Index>(t)) = moduli[static_cast<std::size_t>(modded[t])];
  AffineLattice<Scalar> sol = solve_linear<Scalar>(M, v);
  if (sol.empty()) return std::nullopt;
  return Vector<Scalar>(sol.particular->head(k));
}

}  // namespace einterp
