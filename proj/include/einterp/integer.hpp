#pragma once

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/gmp.hpp>

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace einterp {

/// Arbitrary-precision integer. Expression templates are off so the type
/// composes cleanly with Eigen's own expression machinery.
using Integer = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                              boost::multiprecision::et_off>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using IntMatrix = Matrix<Integer>;
using IntVector = Vector<Integer>;
using Index = Eigen::Index;

namespace detail {
inline Integer abs_value(const Integer& a) { return boost::multiprecision::abs(a); }
inline long long abs_value(long long a) { return a < 0 ? -a : a; }
inline long abs_value(long a) { return a < 0 ? -a : a; }
inline int abs_value(int a) { return a < 0 ? -a : a; }
}  // namespace detail

/// Quotient rounded toward negative infinity.
template <typename Scalar>
Scalar floor_div(const Scalar& a, const Scalar& b) {
  Scalar q = a / b;
  Scalar r = a - q * b;
  if (r != 0 && ((r < 0) != (b < 0))) q -= 1;
  return q;
}

/// Least non-negative residue of a modulo |m|.
template <typename Scalar>
Scalar mod_floor(const Scalar& a, const Scalar& m) {
  Scalar mm = detail::abs_value(m);
  Scalar r = a % mm;
  if (r < 0) r += mm;
  return r;
}

/// Extended gcd: returns g >= 0 with g = s*a + t*b.
template <typename Scalar>
Scalar ext_gcd(const Scalar& a, const Scalar& b, Scalar& s, Scalar& t) {
  Scalar old_r = a, r = b, old_s = 1, ss = 0, old_t = 0, tt = 1;
  while (r != 0) {
    Scalar q = old_r / r;
    Scalar tmp = old_r - q * r;
    old_r = r;
    r = tmp;
    tmp = old_s - q * ss;
    old_s = ss;
    ss = tmp;
    tmp = old_t - q * tt;
    old_t = tt;
    tt = tmp;
  }
  if (old_r < 0) {
    old_r = -old_r;
    old_s = -old_s;
    old_t = -old_t;
  }
  s = old_s;
  t = old_t;
  return old_r;
}

inline std::string to_string(const Integer& a) { return a.str(); }

inline Integer parse_integer(const std::string& text) { return Integer(text); }

/// Hash of a coordinate vector, used for hashed containers of exponent vectors.
template <typename Range>
std::size_t hash_range(const Range& r) {
  std::size_t h = 0x9e3779b97f4a7c15ULL;
  for (const auto& x : r) {
    std::size_t v = std::hash<long long>{}(static_cast<long long>(x));
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

}  // namespace einterp
