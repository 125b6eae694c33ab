#pragma once

// Reference computations used only by the tests. Deliberately naive.

#include "einterp/integer.hpp"
#include "einterp/intlinalg.hpp"

#include <boost/multiprecision/gmp.hpp>

#include <optional>
#include <random>
#include <vector>

namespace oracle {

using einterp::Index;
using einterp::IntMatrix;
using einterp::IntVector;
using einterp::Integer;
using Rational = boost::multiprecision::mpq_rational;

inline Integer laplace_det(const IntMatrix& A) {
  const Index n = A.rows();
  if (n == 0) return 1;
  if (n == 1) return A(0, 0);
  Integer d = 0;
  for (Index j = 0; j < n; ++j) {
    if (A(0, j) == 0) continue;
    IntMatrix minor(n - 1, n - 1);
    for (Index r = 1; r < n; ++r)
      for (Index c = 0, cc = 0; c < n; ++c)
        if (c != j) minor(r - 1, cc++) = A(r, c);
    Integer term = A(0, j) * laplace_det(minor);
    d += (j % 2 == 0) ? term : Integer(-term);
  }
  return d;
}

inline IntMatrix random_matrix(std::mt19937_64& rng, Index m, Index n, long lo, long hi) {
  std::uniform_int_distribution<long> dist(lo, hi);
  IntMatrix A(m, n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) A(i, j) = dist(rng);
  return A;
}

/// Rational coordinates of v in a linearly independent family, by Gauss-Jordan.
inline std::optional<std::vector<Rational>> rational_coords(const IntVector& v, const std::vector<IntVector>& basis) {
  const Index n = v.size();
  const Index k = static_cast<Index>(basis.size());
  std::vector<std::vector<Rational>> M(static_cast<std::size_t>(n), std::vector<Rational>(static_cast<std::size_t>(k + 1)));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < k; ++j) M[i][j] = Rational(basis[static_cast<std::size_t>(j)](i));
    M[i][k] = Rational(v(i));
  }
  Index row = 0;
  std::vector<Index> pivcol;
  for (Index c = 0; c < k && row < n; ++c) {
    Index p = row;
    while (p < n && M[p][c] == 0) ++p;
    if (p == n) return std::nullopt;  // dependent family
    std::swap(M[p], M[row]);
    Rational inv = 1 / M[row][c];
    for (auto& x : M[row]) x *= inv;
    for (Index r = 0; r < n; ++r)
      if (r != row && M[r][c] != 0) {
        Rational f = M[r][c];
        for (Index cc = 0; cc <= k; ++cc) M[r][cc] -= f * M[row][cc];
      }
    pivcol.push_back(c);
    ++row;
  }
  if (row < k) return std::nullopt;
  for (Index r = row; r < n; ++r)
    if (M[r][k] != 0) return std::nullopt;
  std::vector<Rational> out(static_cast<std::size_t>(k));
  for (Index r = 0; r < row; ++r) out[static_cast<std::size_t>(pivcol[r])] = M[r][k];
  return out;
}

/// v in the Z-span of an independent family.
inline bool in_span(const IntVector& v, const std::vector<IntVector>& basis) {
  if (basis.empty()) return v.isZero();
  auto c = rational_coords(v, basis);
  if (!c) return false;
  for (const Rational& q : *c)
    if (denominator(q) != 1) return false;
  return true;
}

/// v in the row lattice of M (rows assumed independent).
inline bool in_row_lattice(const IntVector& v, const IntMatrix& M) {
  std::vector<IntVector> rows;
  for (Index r = 0; r < M.rows(); ++r) rows.push_back(M.row(r).transpose());
  return in_span(v, rows);
}

/// Row echelon with positive pivots and reduced entries above them.
inline bool hnf_shape_ok(const einterp::HnfResult<Integer>& h) {
  const IntMatrix& H = h.H;
  Index prev = -1;
  for (Index r = 0; r < H.rows(); ++r) {
    Index lead = -1;
    for (Index c = 0; c < H.cols(); ++c)
      if (H(r, c) != 0) {
        lead = c;
        break;
      }
    if (lead < 0) {
      for (Index rr = r; rr < H.rows(); ++rr)
        if (!H.row(rr).isZero()) return false;
      return r == h.rank();
    }
    if (lead <= prev || H(r, lead) <= 0) return false;
    for (Index above = 0; above < r; ++above)
      if (H(above, lead) < 0 || H(above, lead) >= H(r, lead)) return false;
    prev = lead;
  }
  return true;
}

/// Diagonal with the divisibility chain.
inline bool snf_shape_ok(const einterp::SnfResult<Integer>& s) {
  const IntMatrix& D = s.D;
  for (Index i = 0; i < D.rows(); ++i)
    for (Index j = 0; j < D.cols(); ++j)
      if (i != j && D(i, j) != 0) return false;
  Index r = s.rank();
  for (Index i = 0; i < std::min(D.rows(), D.cols()); ++i) {
    if (i < r) {
      if (D(i, i) <= 0) return false;
      if (i > 0 && D(i, i) % D(i - 1, i - 1) != 0) return false;
    } else if (D(i, i) != 0) {
      return false;
    }
  }
  return true;
}

/// All x with |x_i| <= bound and A x = b (three unknowns).
inline std::vector<IntVector> box_solutions(const IntMatrix& A, const IntVector& b, long bound) {
  std::vector<IntVector> out;
  const Index m = A.rows();
  std::vector<long> a(static_cast<std::size_t>(m * 3)), rhs(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < 3; ++j) a[static_cast<std::size_t>(i * 3 + j)] = A(i, j).convert_to<long>();
    rhs[static_cast<std::size_t>(i)] = b(i).convert_to<long>();
  }
  for (long x = -bound; x <= bound; ++x)
    for (long y = -bound; y <= bound; ++y)
      for (long z = -bound; z <= bound; ++z) {
        bool ok = true;
        for (Index i = 0; i < m && ok; ++i) {
          const long* r = &a[static_cast<std::size_t>(i * 3)];
          ok = r[0] * x + r[1] * y + r[2] * z == rhs[static_cast<std::size_t>(i)];
        }
        if (ok) {
          IntVector v(3);
          v << x, y, z;
          out.push_back(v);
        }
      }
  return out;
}

}  // namespace oracle

namespace oracle {

/// Upper unitriangular 3x3 matrix [[1,x,z],[0,1,y],[0,0,1]].
struct UT3 {
  long x = 0, y = 0, z = 0;
  UT3 operator*(const UT3& o) const { return {x + o.x, y + o.y, z + o.z + x * o.y}; }
  UT3 inverse() const { return {-x, -y, x * y - z}; }
  bool operator==(const UT3& o) const { return x == o.x && y == o.y && z == o.z; }
  UT3 pow(long k) const {
    UT3 r, b = k >= 0 ? *this : inverse();
    for (long i = 0; i < (k >= 0 ? k : -k); ++i) r = r * b;
    return r;
  }
};

/// a^e1 b^e2 c^e3 with a = I+e12, b = I+e23, c = I+e13.
inline UT3 ut3_from_normal_form(long e1, long e2, long e3) { return {e1, e2, e1 * e2 + e3}; }

}  // namespace oracle
