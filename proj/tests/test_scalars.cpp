#include "doctest.h"
#include "einterp/scalars.hpp"
#include "scalar_oracle.hpp"

using namespace einterp;

namespace {

IntVector vec(std::initializer_list<long> xs) {
  IntVector v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (long x : xs) v(i++) = x;
  return v;
}

PcPresentationPtr group(const std::string& name) { return load_presentation("data/groups/" + name + ".pc"); }

}  // namespace

TEST_CASE("commutator map of H") {
  auto cm = commutator_bilinear_map(group("heisenberg"));
  CHECK(cm.f.A->describe() == "Z^2");
  CHECK(cm.f.B->describe() == "Z");
  // f((x1,y1),(x2,y2)) = x1 y2 - y1 x2, checked on a grid
  for (long x1 = -2; x1 <= 2; ++x1)
    for (long y1 = -2; y1 <= 2; ++y1)
      for (long x2 = -2; x2 <= 2; ++x2)
        for (long y2 = -2; y2 <= 2; ++y2)
          CHECK(cm.f.apply(vec({x1, y1}), vec({x2, y2})) == vec({x1 * y2 - y1 * x2}));
  auto fr = check_full_nondegenerate(cm.f);
  CHECK(fr.full);
  CHECK(fr.nondegenerate());
  CHECK_THROWS_AS(commutator_bilinear_map(group("abelian_z2")), PreconditionError);
}

TEST_CASE("commutator map of UT3 over a quadratic order") {
  auto cm = commutator_bilinear_map(group("ut3_d2"));
  CHECK(cm.f.A->describe() == "Z^4");
  CHECK(cm.f.B->describe() == "Z^2");
  // x = (x0 + x1 t) in E12, y = (y0 + y1 t) in E23: f = (x0 y0' + 2 x1 y1' - ..., ...)
  auto det_form = [](long a0, long a1, long b0, long b1, long c0, long c1, long d0, long d1) {
    // (a b') - (b a') with a = a0 + a1 t etc. over Z[t]/(t^2 - 2), first element (a, b)
    long p0 = a0 * d0 + 2 * a1 * d1, p1 = a0 * d1 + a1 * d0;
    long q0 = b0 * c0 + 2 * b1 * c1, q1 = b0 * c1 + b1 * c0;
    return vec({p0 - q0, p1 - q1});
  };
  for (long a0 = -1; a0 <= 1; ++a0)
    for (long a1 = -1; a1 <= 1; ++a1)
      for (long b1 = -1; b1 <= 1; ++b1)
        for (long d0 = -1; d0 <= 1; ++d0) {
          long b0 = 1, c0 = -1, c1 = 1, d1 = 1;
          CHECK(cm.f.apply(vec({a0, a1, b0, b1}), vec({c0, c1, d0, d1})) == det_form(a0, a1, b0, b1, c0, c1, d0, d1));
        }
}

TEST_CASE("fullness and radicals") {
  BilinearMap zero;
  zero.A = ab_free(2);
  zero.B = ab_free(1);
  zero.tensor.assign(2, std::vector<IntVector>(2, vec({0})));
  auto fr = check_full_nondegenerate(zero);
  CHECK(!fr.full);
  CHECK(fr.left_radical.size() == 2);

  BilinearMap g;
  g.A = ab_free(1);
  g.B = ab_free(2);
  g.tensor = {{vec({1, 0})}};
  fr = check_full_nondegenerate(g);
  CHECK(!fr.full);
  CHECK(fr.nondegenerate());
  CHECK_THROWS_AS(largest_ring_of_scalars(g), PreconditionError);
}

TEST_CASE("largest ring of scalars of H and free class-2 groups") {
  for (const char* name : {"heisenberg", "free2_r2", "free2_r3", "free2_r4", "heisenberg2", "heisenberg3"}) {
    INFO(name);
    auto cm = commutator_bilinear_map(group(name));
    auto R = largest_ring_of_scalars(cm.f);
    auto rec = ring_recognize(R);
    CHECK(rec.rank == 1);
    CHECK(rec.is_z);
    CHECK(rec.describe() == "Z");
    const Index n = cm.f.A->ngens();
    CHECK(R.alpha_of(R.unit) == IntMatrix::Identity(n, n));
  }
}

TEST_CASE("quadratic scalar rings") {
  for (long d : {-1L, 2L, 3L}) {
    std::string name = d < 0 ? "ut3_dm1" : "ut3_d" + std::to_string(d);
    INFO(name);
    auto cm = commutator_bilinear_map(group(name));
    auto R = largest_ring_of_scalars(cm.f);
    auto rec = ring_recognize(R);
    CHECK(rec.rank == 2);
    REQUIRE(rec.quadratic);
    CHECK(rec.quadratic->trace == 0);
    CHECK(rec.quadratic->norm == d);
    // multiplication by t on A: (x0, x1) -> (d x1, x0) on both E12 and E23 blocks
    IntMatrix T = IntMatrix::Zero(4, 4);
    T(1, 0) = 1;
    T(0, 1) = d;
    T(3, 2) = 1;
    T(2, 3) = d;
    IntMatrix Tb = IntMatrix::Zero(2, 2);
    Tb(1, 0) = 1;
    Tb(0, 1) = d;
    CHECK(oracle::in_ring(R, cm.f, T, Tb));
    CHECK(!oracle::in_ring(R, cm.f, T, IntMatrix::Identity(2, 2)));
  }
}

TEST_CASE("ring recognition of abstract rings") {
  // Z/6 on one generator
  auto R = ring_from_table(ab_from_relations(1, (IntMatrix(1, 1) << 6).finished()), vec({1}), {{vec({1})}});
  auto rec = ring_recognize(R);
  CHECK(rec.rank == 0);
  CHECK(!rec.is_z);
  // Z[i] with basis 1, i
  std::vector<std::vector<IntVector>> mul{{vec({1, 0}), vec({0, 1})}, {vec({0, 1}), vec({-1, 0})}};
  R = ring_from_table(ab_free(2), vec({1, 0}), mul);
  rec = ring_recognize(R);
  REQUIRE(rec.quadratic);
  CHECK(rec.quadratic->norm == -1);
  CHECK(rec.describe() == "rank 2, t^2 = -1");
  // basis 1, 1 + t with t^2 = 3: (1+t)^2 = 4 + 2t = 2(1+t) + 2
  mul = {{vec({1, 0}), vec({0, 1})}, {vec({0, 1}), vec({2, 2})}};
  rec = ring_recognize(ring_from_table(ab_free(2), vec({1, 0}), mul));
  REQUIRE(rec.quadratic);
  CHECK(rec.quadratic->trace == 0);
  CHECK(rec.quadratic->norm == 3);
  // trace-one order Z[(1+sqrt5)/2]: t^2 = t + 1
  mul = {{vec({1, 0}), vec({0, 1})}, {vec({0, 1}), vec({1, 1})}};
  rec = ring_recognize(ring_from_table(ab_free(2), vec({1, 0}), mul));
  REQUIRE(rec.quadratic);
  CHECK(rec.describe() == "rank 2, t^2 = t + 1");
  CHECK_THROWS(ring_from_table(ab_free(2), vec({1, 0}), {{vec({1, 0}), vec({0, 1})}, {vec({1, 0}), vec({0, 1})}}));
}

TEST_CASE("c-small elements") {
  auto H = group("heisenberg");
  CHECK(is_c_small(H, GroupElement::generator(H, 0)));
  CHECK(is_c_small(H, GroupElement::generator(H, 1)));
  CHECK(!is_c_small(H, GroupElement::generator(H, 2)));
  auto H2 = group("heisenberg2");
  CHECK(!is_c_small(H2, GroupElement::generator(H2, 0)));
  auto F3 = group("free2_r3");
  CHECK(is_c_small(F3, GroupElement::generator(F3, 0)));
}

TEST_CASE("solver lattice agrees with box enumeration") {
  std::mt19937_64 rng(17);
  auto maps = oracle::random_full_maps(rng, 6);
  for (const auto& m : maps) {
    auto r = oracle::compare_with_box(m, 3);
    INFO(r.detail);
    CHECK(r.equal);
    CHECK(r.box_pairs > 0);
    auto R = largest_ring_of_scalars(m.to_map());
    if (m.to_map().B->free_rank() <= 2) CHECK(R.additive->free_rank() <= 2);
  }
}
