#include "doctest.h"
#include "einterp/verify.hpp"
#include "oracles.hpp"

#include <functional>
#include <random>
#include <set>

using namespace einterp;

namespace {

PcPresentationPtr group(const std::string& name) {
  static std::map<std::string, PcPresentationPtr> cache;
  auto& p = cache[name];
  if (!p) p = load_presentation("data/groups/" + name + ".pc");
  return p;
}

// UT3 over Z/m, entries reduced
oracle::UT3 reduce(oracle::UT3 u, long m) {
  auto r = [m](long v) { return ((v % m) + m) % m; };
  return {r(u.x), r(u.y), r(u.z)};
}

// Solve by trying every assignment of free and existential variables.
std::set<std::vector<Value>> naive_solutions(const EquationSystem& s, const Carrier& C, std::int64_t box) {
  auto elems = C.elements(box, false);
  std::vector<std::string> all = s.all_vars();
  std::set<std::vector<Value>> out;
  std::map<std::string, Value> env;
  std::function<void(std::size_t)> rec = [&](std::size_t i) {
    if (i == all.size()) {
      if (satisfies(s, C, env)) {
        std::vector<Value> t;
        for (const auto& v : s.vars) t.push_back(env.at(v));
        out.insert(t);
      }
      return;
    }
    for (const auto& e : elems) {
      env[all[i]] = e;
      rec(i + 1);
    }
  };
  rec(0);
  return out;
}

}  // namespace

TEST_CASE("commutator equation in the Heisenberg group mod 3") {
  auto H = group("heisenberg");
  auto Q = finite_quotient(H, 3);
  auto s = parse_system("sort group heisenberg\nvar x y\neq [x,y] = c", H.get());
  auto r = solve_finite(s, Q);

  long expected = 0;
  oracle::UT3 c{0, 0, 1};
  for (long e = 0; e < 27 * 27; ++e) {
    long p = e % 27, q = e / 27;
    auto x = reduce(oracle::ut3_from_normal_form(p % 3, p / 3 % 3, p / 9), 3);
    auto y = reduce(oracle::ut3_from_normal_form(q % 3, q / 3 % 3, q / 9), 3);
    expected += reduce(x.inverse() * y.inverse() * x * y, 3) == c;
  }
  CHECK(expected == 216);
  CHECK(r.count() == 216);
  CHECK(r.vars == std::vector<std::string>{"x", "y"});
  CHECK(std::is_sorted(r.solutions.begin(), r.solutions.end()));

  auto center = solve_finite(center_edef(*H), Q);
  CHECK(center.count() == 3);
  for (const auto& sol : center.solutions) CHECK((sol[0][0] == 0 && sol[0][1] == 0));
}

TEST_CASE("small finite carriers") {
  CHECK(solve_finite(parse_system("sort ring mod 5\nvar x\neq x = x"), 5).count() == 5);
  auto sq = solve_finite(parse_system("sort ring mod 7\nvar x\neq x*x = 2"), 7);
  CHECK(sq.count() == 2);  // 3^2 = 4^2 = 2 mod 7

  auto Z = group("cyclic_z");
  auto s = parse_system("sort group cyclic_z\nvar x\neq x^2 = a", Z.get());
  auto r = solve_finite(s, finite_quotient(Z, 3));
  REQUIRE(r.count() == 1);
  CHECK(r.solutions[0][0] == Value{2});

  auto Zc = center_edef(*Z);
  CHECK(solve_finite(Zc, finite_quotient(Z, 5)).count() == 5);
}

TEST_CASE("bounded search over a torsion-free group") {
  auto H = group("heisenberg");
  auto r = solve_bounded(parse_system("sort group heisenberg\nvar x\neq x = a", H.get()), H, 1);
  REQUIRE(r.count() == 1);
  CHECK(r.solutions[0][0] == Value{1, 0, 0});
  CHECK(r.box_relative);

  auto cr = solve_bounded(parse_system("sort group heisenberg\nvar x y\neq [x,y] = c", H.get()), H, 1);
  long expected = 0;
  for (long p = 0; p < 27; ++p)
    for (long q = 0; q < 27; ++q) {
      auto x = oracle::ut3_from_normal_form(p % 3 - 1, p / 3 % 3 - 1, p / 9 - 1);
      auto y = oracle::ut3_from_normal_form(q % 3 - 1, q / 3 % 3 - 1, q / 9 - 1);
      expected += x.inverse() * y.inverse() * x * y == oracle::UT3{0, 0, 1};
    }
  CHECK(cr.count() == static_cast<std::size_t>(expected));

  // a witness outside the free box
  const char* text = "sort group heisenberg\nvar x\nexists w\neq w = x^3\neq x = a";
  CHECK(solve_bounded(parse_system(text, H.get()), H, 1).count() == 0);
  SolveOptions wide;
  wide.exist_box = 3;
  auto w = solve_bounded(parse_system(text, H.get()), H, 1, wide);
  REQUIRE(w.count() == 1);
  CHECK(w.solutions[0][0] == Value{1, 0, 0});
  CHECK(w.witnesses[0].at("w") == Value{3, 0, 0});
}

TEST_CASE("solver agrees with exhaustive enumeration") {
  auto H = group("heisenberg");
  auto Q = finite_quotient(H, 3);
  GroupCarrier G(Q);
  const char* systems[] = {
      "var x\nexists w\neq [w,a] = x",
      "var x y\nexists w\neq x*w = y\neq [w,b] = 1",
      "var x\nexists u v\neq [u,v] = x",
      "var x\nexists w\neq w^2 = x\neq [w,x] = 1",
      "var x y\neq x*y = y*x\neq x^3 = 1",
      "var x\nexists u\neq [u,a]*[u,b] = x*c^-1",
      // same bracket shape, different constants
      "var x\nexists u v\neq [u,b] = c\neq [v,b] = c^2\neq u*v = x",
  };
  for (const char* text : systems) {
    auto s = parse_system(std::string("sort group heisenberg\n") + text, H.get());
    INFO(text);
    auto fast = solve(s, G);
    std::set<std::vector<Value>> got(fast.solutions.begin(), fast.solutions.end());
    CHECK(got == naive_solutions(s, G, 0));
    for (std::size_t i = 0; i < fast.count(); ++i) {
      std::map<std::string, Value> env = fast.witnesses[i];
      for (std::size_t k = 0; k < s.vars.size(); ++k) env[s.vars[k]] = fast.solutions[i][k];
      CHECK(satisfies(s, G, env));
    }
  }

  IntCarrier Z7(7);
  std::mt19937_64 rng(3);
  for (int n = 0; n < 20; ++n) {
    long a = static_cast<long>(rng() % 7), b = static_cast<long>(rng() % 7);
    auto s = parse_system("sort ring mod 7\nvar x\nexists w\neq x*w = " + std::to_string(a) + "\neq w + " +
                          std::to_string(b) + " = x");
    auto fast = solve(s, Z7);
    std::set<std::vector<Value>> got(fast.solutions.begin(), fast.solutions.end());
    CHECK(got == naive_solutions(s, Z7, 0));
  }
}

TEST_CASE("bracket witnesses in a box agree with exhaustive enumeration") {
  auto H = group("heisenberg");
  GroupCarrier G(H);
  const char* systems[] = {
      "var x\nexists u v\neq [u,a] = 1\neq [v,b] = 1\neq [u,b] = x\neq [a,v] = c^2",
      "var x\nexists u\neq [u,a*b] = 1\neq [u,b] = x",
      "var x\nexists u\neq [u,a^2] = c^2\neq [b,u] = x",
      "var x\nexists u\neq [u,a] = c\neq [u,b] = 1\neq x*x = c^2",
  };
  for (const char* text : systems) {
    auto s = parse_system(std::string("sort group heisenberg\n") + text, H.get());
    INFO(text);
    SolveOptions o;
    o.box = 2;
    auto fast = solve(s, G, o);
    std::set<std::vector<Value>> got(fast.solutions.begin(), fast.solutions.end());
    CHECK(got == naive_solutions(s, G, 2));
  }
}

TEST_CASE("search cap") {
  auto H = group("heisenberg");
  SolveOptions o;
  o.cap = 1000;
  auto s = parse_system("sort group heisenberg\nvar x y\neq x*y = y*x", H.get());
  CHECK_THROWS_AS(solve_bounded(s, H, 3, o), SearchTooLarge);
}

TEST_CASE("interval bound") {
  auto s = parse_system("sort ring Z\nvar x y z\neq x*y*z = 1");
  CHECK(interval_bound(s, 10) == 1000);
  CHECK(interval_bound(parse_system("sort ring Z\nvar x y\neq x*y + -6 = 0"), 8) == 70);
  CHECK(interval_bound(parse_system("sort ring Z\nvar x\neq x = 3"), 2) == 3);
}

TEST_CASE("correspondence for the integer interpretation") {
  auto H = group("heisenberg");
  auto I = int_interpretation_class2(H);
  auto s = parse_system("system worked\nsort ring Z\nvar x y\neq x*y = 6\neq x + y = 5");

  auto box = check_correspondence(I, s, {CarrierSpec::Box, 8});
  CHECK(box.equal());
  std::set<std::vector<Value>> expect{{{2}, {3}}, {{3}, {2}}};
  CHECK(std::set<std::vector<Value>>(box.source_solutions.begin(), box.source_solutions.end()) == expect);
  CHECK(std::set<std::vector<Value>>(box.decoded_solutions.begin(), box.decoded_solutions.end()) == expect);
  CHECK(box.host_exist_box >= 8);

  auto mod = check_correspondence(I, parse_system("sort ring Z\nvar x y\neq x*y = 6"), {CarrierSpec::Mod, 5});
  CHECK(mod.verdict() == "equal");
  CHECK(mod.source_solutions.size() == 4);  // xy = 1 mod 5
  CHECK(report_to_text(mod).find("equal") != std::string::npos);
}

TEST_CASE("correspondence for quotient and identity interpretations") {
  auto H = group("heisenberg");
  auto Q = center_quotient_interpretation(H);
  auto comm = parse_system("sort group heisenberg_c1\nvar x y\neq x*y = y*x", Q.source.group.get());
  auto r = check_correspondence(Q, comm, {CarrierSpec::Mod, 3});
  CHECK(r.equal());
  CHECK(r.source_solutions.size() == 81);

  auto Iid = identity_interpretation(H);
  auto s = parse_system("sort group heisenberg\nvar x y\neq [x,y] = c", H.get());
  auto id = check_correspondence(Iid, s, {CarrierSpec::Mod, 3});
  CHECK(id.equal());
  CHECK(id.source_solutions.size() == 216);
}

TEST_CASE("correspondence for the scalar interpretation") {
  auto H = group("heisenberg");
  auto I = scalar_interpretation(H);
  auto s = parse_system("sort ring Z\nvar x\neq x*x = 1");
  auto r = check_correspondence(I, s, {CarrierSpec::Mod, 3});
  CHECK(r.equal());
  CHECK(r.source_solutions.size() == 2);
  CHECK_THROWS_AS(check_correspondence(I, s, {CarrierSpec::Box, 2}), PreconditionError);
}

TEST_CASE("a weakened domain is detected") {
  auto H = group("heisenberg");
  auto I = int_interpretation_class2(H);
  auto& eqs = I.domain.eqs;
  eqs.erase(eqs.begin());  // drop [x,a] = 1
  auto r = check_correspondence(I, parse_system("sort ring Z\nvar x\neq x = x"), {CarrierSpec::Mod, 3});
  CHECK(r.verdict() == "mismatch");
  CHECK_FALSE(r.witnesses.empty());
}
