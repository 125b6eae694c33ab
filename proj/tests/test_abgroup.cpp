#include "doctest.h"
#include "einterp/abgroup.hpp"
#include "oracles.hpp"

#include <random>
#include <set>

using namespace einterp;

namespace {

IntMatrix rows(std::initializer_list<std::initializer_list<long>> rs, Index n) {
  IntMatrix M(static_cast<Index>(rs.size()), n);
  Index i = 0;
  for (const auto& r : rs) {
    Index j = 0;
    for (long x : r) M(i, j++) = x;
    ++i;
  }
  return M;
}

IntVector vec(std::initializer_list<long> xs) {
  IntVector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (long x : xs) v(i++) = x;
  return v;
}

std::vector<long> torsion_of(const AbGroup& A) {
  std::vector<long> t;
  for (const auto& d : A.torsion()) t.push_back(d.convert_to<long>());
  return t;
}

}  // namespace

TEST_CASE("ab_from_relations examples") {
  auto Z2 = ab_free(2);
  CHECK(Z2->free_rank() == 2);
  CHECK(Z2->torsion().empty());
  CHECK(Z2->describe() == "Z^2");

  auto A = ab_from_relations(2, rows({{0, 2}}, 2));
  CHECK(A->free_rank() == 1);
  CHECK(torsion_of(*A) == std::vector<long>{2});
  CHECK(A->describe() == "Z + Z/2");

  auto B = ab_from_relations(2, rows({{2, 4}, {6, 8}}, 2));
  CHECK(B->free_rank() == 0);
  CHECK(torsion_of(*B) == std::vector<long>{2, 4});

  CHECK(ab_free(0)->describe() == "0");
  CHECK_THROWS_AS(ab_from_relations(3, rows({{1, 2}}, 2)), DimensionError);
}

TEST_CASE("ab element arithmetic") {
  auto A = ab_from_relations(2, rows({{0, 2}}, 2));
  AbElement x(A, vec({1, 1})), y(A, vec({0, 1}));
  CHECK((x + y).coords() == vec({1, 0}));
  CHECK((x + -x).is_zero());
  CHECK((x - x) == AbElement::zero(A));

  auto Z4 = ab_from_relations(1, rows({{4}}, 1));
  AbElement three(Z4, vec({3}));
  CHECK((three + three).coords() == vec({2}));

  auto other = ab_free(2);
  CHECK_THROWS_AS((void)(x + AbElement::generator(other, 0)), OwnerMismatch);
  // equal relation lattices count as the same group
  auto A2 = ab_from_relations(2, rows({{0, -2}, {0, 4}}, 2));
  CHECK((x + AbElement(A2, vec({0, 1}))).coords() == vec({1, 0}));
}

TEST_CASE("canonical form is idempotent and rank matches the zero invariants") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    Index n = 1 + static_cast<Index>(rng() % 4), r = static_cast<Index>(rng() % 4);
    IntMatrix L = oracle::random_matrix(rng, r, n, -5, 5);
    auto A = ab_from_relations(n, L);
    IntVector v = oracle::random_matrix(rng, n, 1, -20, 20).col(0);
    IntVector c = A->reduce(v);
    CHECK(A->reduce(c) == c);
    // the difference lies in the relation lattice
    CHECK(A->is_zero(v - c));
    auto s = snf<Integer>(L);
    Index zeros = n - s.rank();
    CHECK(A->free_rank() == zeros);
    for (Index i = 0; i < r; ++i) CHECK(A->is_zero(L.row(i).transpose()));
  }
}

TEST_CASE("endomorphism basis examples") {
  auto E = endomorphism_basis(ab_free(2));
  CHECK(E.basis.size() == 4);
  CHECK(E.additive->describe() == "Z^4");
  REQUIRE(E.coordinates(IntMatrix::Identity(2, 2)));

  auto Z2 = ab_from_relations(1, rows({{2}}, 1));
  E = endomorphism_basis(Z2);
  CHECK(E.additive->describe() == "Z/2");

  auto A = ab_from_relations(2, rows({{0, 2}}, 2));
  E = endomorphism_basis(A);
  CHECK(E.additive->free_rank() == 1);
  CHECK(torsion_of(*E.additive) == std::vector<long>{2, 2});
  REQUIRE(E.coordinates(IntMatrix::Identity(2, 2)));
}

TEST_CASE("End(Z + Z/2) agrees with a brute-force search") {
  // X descends to Z + Z/2 exactly when X maps (0,2) into 2Z in the second
  // coordinate and to 0 in the first, i.e. X(0,1) = 0.
  auto A = ab_from_relations(2, rows({{0, 2}}, 2));
  EndBasis E = endomorphism_basis(A);
  for (const IntMatrix& B : E.basis) CHECK(B(0, 1) == 0);
  std::set<std::vector<long>> classes;
  for (long a = -2; a <= 2; ++a)
    for (long b = -2; b <= 2; ++b)
      for (long c = -2; c <= 2; ++c)
        for (long d = -2; d <= 2; ++d) {
          IntMatrix X(2, 2);
          X << a, b, c, d;
          bool endo = (b == 0);
          CHECK(is_endomorphism(*A, X) == endo);
          auto coords = E.coordinates(X);
          CHECK(coords.has_value() == endo);
          if (!endo) continue;
          // same endomorphism iff first column agrees exactly and the rest mod 2
          std::vector<long> key{a, ((c % 2) + 2) % 2, ((d % 2) + 2) % 2};
          classes.insert(key);
          CHECK(E.additive->is_zero(*coords - *E.coordinates(E.combine(*coords))));
        }
  CHECK(classes.size() == 5 * 2 * 2);
}

TEST_CASE("endomorphism basis closure on random groups") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 30; ++t) {
    Index n = 1 + static_cast<Index>(rng() % 3), r = static_cast<Index>(rng() % 3);
    IntMatrix L = oracle::random_matrix(rng, r, n, -3, 3);
    auto A = ab_from_relations(n, L);
    EndBasis E = endomorphism_basis(A);
    for (const IntMatrix& X : E.basis) {
      for (Index i = 0; i < L.rows(); ++i) CHECK(A->in_relation_lattice(X * L.row(i).transpose()));
    }
    CHECK(E.coordinates(IntMatrix::Identity(n, n)));
    for (const IntMatrix& X : E.basis)
      for (const IntMatrix& Y : E.basis) CHECK(E.coordinates(X * Y));
  }
}

TEST_CASE("ab_quotient examples") {
  auto Z2 = ab_free(2);
  auto q = ab_quotient(Z2, {AbElement(Z2, vec({0, 1}))});
  CHECK(q.quotient->describe() == "Z");

  auto Z = ab_free(1);
  q = ab_quotient(Z, {AbElement(Z, vec({2}))});
  CHECK(q.quotient->describe() == "Z/2");

  auto A = ab_from_relations(2, rows({{0, 2}}, 2));
  q = ab_quotient(A, {AbElement(A, vec({1, 1}))});
  CHECK(q.quotient->describe() == "Z/2");
  // coset enumeration: (x,y) ~ (x',y') iff x+y and x'+y' have the same parity
  std::set<std::vector<long>> reps;
  for (long x = -4; x <= 4; ++x)
    for (long y = 0; y <= 1; ++y) {
      IntVector c = q.quotient->reduce(vec({x, y}));
      reps.insert({c(0).convert_to<long>(), c(1).convert_to<long>()});
      IntVector parity = q.quotient->reduce(vec({((x + y) % 2 + 2) % 2, 0}));
      CHECK(c == parity);
    }
  CHECK(reps.size() == 2);
}
