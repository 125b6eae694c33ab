#include "doctest.h"
#include "einterp/eqlang.hpp"
#include "einterp/verify.hpp"

#include <random>

using namespace einterp;

namespace {

PcPresentationPtr group(const std::string& name) {
  static std::map<std::string, PcPresentationPtr> cache;
  auto& p = cache[name];
  if (!p) p = load_presentation("data/groups/" + name + ".pc");
  return p;
}

TermPtr random_group_term(std::mt19937_64& rng, const std::vector<std::string>& vars, int depth) {
  const char* gens[] = {"a", "b", "c"};
  int pick = static_cast<int>(rng() % (depth > 0 ? 6 : 3));
  switch (pick) {
    case 0:
      return Term::var(vars[rng() % vars.size()]);
    case 1:
      return Term::gen(gens[rng() % 3]);
    case 2:
      return rng() % 4 == 0 ? Term::one() : Term::var(vars[rng() % vars.size()]);
    case 3:
      return Term::mul(random_group_term(rng, vars, depth - 1), random_group_term(rng, vars, depth - 1));
    case 4:
      return Term::pow(random_group_term(rng, vars, depth - 1), static_cast<std::int64_t>(rng() % 7) - 3);
    default:
      return Term::comm(random_group_term(rng, vars, depth - 1), random_group_term(rng, vars, depth - 1));
  }
}

TermPtr random_ring_term(std::mt19937_64& rng, const std::vector<std::string>& vars, int depth) {
  int pick = static_cast<int>(rng() % (depth > 0 ? 6 : 2));
  switch (pick) {
    case 0:
      return Term::var(vars[rng() % vars.size()]);
    case 1:
      return Term::integer(static_cast<std::int64_t>(rng() % 21) - 10);
    case 2:
      return Term::add(random_ring_term(rng, vars, depth - 1), random_ring_term(rng, vars, depth - 1));
    case 3:
      return Term::sub(random_ring_term(rng, vars, depth - 1), random_ring_term(rng, vars, depth - 1));
    case 4:
      return Term::mul(random_ring_term(rng, vars, depth - 1), random_ring_term(rng, vars, depth - 1));
    default:
      return Term::neg(random_ring_term(rng, vars, depth - 1));
  }
}

void require_same_systems(const EInterpretation& a, const EInterpretation& b) {
  CHECK(a.code_dim == b.code_dim);
  CHECK(same_system(a.domain, b.domain));
  CHECK(same_system(a.equality, b.equality));
  REQUIRE(a.ops.size() == b.ops.size());
  for (const auto& [name, s] : a.ops) {
    INFO(name << "\n" << print_system(s) << "vs\n" << print_system(b.ops.at(name)));
    CHECK(same_system(s, b.ops.at(name)));
  }
}

}  // namespace

TEST_CASE("parse group and ring equations") {
  auto H = group("heisenberg");
  auto s = parse_system("system s\nsort group heisenberg\nvar x\neq [x,a] = 1\n", H.get());
  REQUIRE(s.eqs.size() == 1);
  CHECK(same_term(s.eqs[0].lhs, Term::comm(Term::var("x"), Term::gen("a"))));
  CHECK(s.eqs[0].rhs->kind == TermKind::One);

  auto r = parse_system("system r\nsort ring Z\nvar x y\neq x*y + -6 = 0\n");
  REQUIRE(r.eqs.size() == 1);
  CHECK(same_term(r.eqs[0].lhs, Term::add(Term::mul(Term::var("x"), Term::var("y")), Term::integer(-6))));
  CHECK(same_term(r.eqs[0].rhs, Term::integer(0)));

  auto m = parse_system("sort ring mod 7\nvar x\neq -x - -(3) = 1");
  CHECK(m.sort.modulus == 7);
  CHECK(same_term(m.eqs[0].lhs, Term::sub(Term::neg(Term::var("x")), Term::neg(Term::integer(3)))));

  auto nested = parse_system("sort group heisenberg\nvar x y\neq [x,y,a] = (x*y)^-2", H.get());
  CHECK(same_term(nested.eqs[0].lhs, Term::comm(Term::comm(Term::var("x"), Term::var("y")), Term::gen("a"))));
  CHECK(same_term(nested.eqs[0].rhs, Term::pow(Term::mul(Term::var("x"), Term::var("y")), -2)));
}

TEST_CASE("parse errors carry positions") {
  auto H = group("heisenberg");
  try {
    parse_system("sort group heisenberg\nvar x\neq x* = 1\n", H.get());
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(e.column() == 5);
    CHECK(std::string(e.what()).find("dangling '*'") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_system("sort group heisenberg\nvar x\neq [x,d] = 1", H.get()), ParseError);
  CHECK_THROWS_AS(parse_system("sort field Q\nvar x"), ParseError);
  CHECK_THROWS_AS(parse_system("sort ring Z\nvar x\neq x + q = 1"), ParseError);
  CHECK_THROWS_AS(parse_system("sort group heisenberg\nvar a\neq a = 1", H.get()), ParseError);
  CHECK_THROWS_AS(parse_system("sort ring mod 1\nvar x"), ParseError);
  CHECK_THROWS_AS(parse_system("var x\neq x = x"), ParseError);
  CHECK_THROWS_AS(parse_system("sort ring Z\nvar x x"), ParseError);
  CHECK_THROWS_AS(parse_system("sort ring Z\nvar x\neq x + = 1"), ParseError);
  CHECK_THROWS_AS(parse_system("sort group heisenberg\nvar x\neq [x] = 1", H.get()), ParseError);
}

TEST_CASE("print and parse round trip on random systems") {
  std::mt19937_64 rng(20261019);
  auto H = group("heisenberg");
  for (int n = 0; n < 200; ++n) {
    EquationSystem s;
    s.name = "r" + std::to_string(n);
    const bool ring = n % 2 == 1;
    s.sort = ring ? Sort{Sort::RingZ, "", 0} : Sort{Sort::Group, "heisenberg", 0};
    if (n % 6 == 3) s.sort = {Sort::RingMod, "", 5};
    s.vars = {"x", "y"};
    if (n % 3 == 0) s.exists = {"w"};
    auto all = s.all_vars();
    int k = 1 + static_cast<int>(rng() % 3);
    for (int i = 0; i < k; ++i) {
      if (ring) s.eqs.push_back({random_ring_term(rng, all, 3), random_ring_term(rng, all, 3)});
      else s.eqs.push_back({random_group_term(rng, all, 3), random_group_term(rng, all, 3)});
    }
    std::string text = print_system(s);
    INFO(text);
    EquationSystem back = parse_system(text, ring ? nullptr : H.get());
    CHECK(same_system(s, back));
    CHECK(print_system(back) == text);
  }
}

TEST_CASE("center e-definition") {
  auto H = group("heisenberg");
  auto s = center_edef(*H);
  CHECK(s.vars == std::vector<std::string>{"x"});
  CHECK(s.exists.empty());
  REQUIRE(s.eqs.size() == 2);
  CHECK(print_term(s.eqs[0].lhs) == "[x,a]");
  CHECK(print_term(s.eqs[1].lhs) == "[x,b]");
  CHECK(center_edef(*group("free2_r3")).eqs.size() == 3);
  CHECK(center_edef(*group("cyclic_z")).eqs.size() == 1);
}

TEST_CASE("verbal and maximal-nilpotent e-definitions") {
  auto H = group("heisenberg");
  auto w = VerbalWord::commutator(2);
  auto s = verbal_edef(w, 1, *H);
  REQUIRE(s.eqs.size() == 1);
  CHECK(s.exists.size() == 4);
  CHECK(print_term(s.eqs[0].rhs) == "[y1_1,y1_2]*[z1_1,z1_2]^-1");
  CHECK_THROWS_AS(verbal_edef(w, 0, *H), PreconditionError);
  CHECK(default_commutator_width(*group("free2_r3")) == 3);
  CHECK(verbal_edef(w, 3, *group("free2_r3")).exists.size() == 12);

  std::vector<GroupElement> two{GroupElement::generator(H, 0), GroupElement::generator(H, 1)};
  CHECK(maxnilp_edef(*H, two, 2).eqs.size() == 27);
  std::vector<GroupElement> one{GroupElement::generator(H, 0)};
  auto m11 = maxnilp_edef(*H, one, 1);
  CHECK(m11.eqs.size() == 4);
  auto pruned = maxnilp_edef(*H, one, 1, true);
  CHECK(pruned.eqs.size() == 3);
  for (const auto& e : pruned.eqs) {
    std::set<std::string> vs;
    collect_vars(e.lhs, vs);
    CHECK(vs.count("x") == 1);
  }
}

TEST_CASE("integer interpretation in the Heisenberg group") {
  auto H = group("heisenberg");
  auto I = int_interpretation_class2(H);
  CHECK(structural_problem(I).empty());
  CHECK(I.code_dim == 1);
  Exps c = H->gen(2);
  CHECK(*I.decoder->decode({H->pow(c, 6)}) == Value{6});
  CHECK(*I.decoder->decode({H->identity()}) == Value{0});
  CHECK(*I.decoder->decode({H->pow(c, -4)}) == Value{-4});
  CHECK_FALSE(I.decoder->decode({H->gen(0)}).has_value());

  // (c^2, c^3, c^6) with witnesses p = a^2, q = b^3
  GroupCarrier G(H);
  std::map<std::string, Value> env{{"x", H->pow(c, 2)}, {"y", H->pow(c, 3)}, {"z", H->pow(c, 6)},
                                   {"_w1", H->gen(0, 2)}, {"_w2", H->gen(1, 3)}};
  const auto& mul = I.ops.at("mul");
  REQUIRE(mul.eqs.size() == 5);
  for (const auto& e : mul.eqs) CHECK(G.eval(e.lhs, env) == G.eval(e.rhs, env));
  env["z"] = H->pow(c, 5);
  CHECK_FALSE(satisfies(mul, G, env));

  CHECK_THROWS_AS(int_interpretation_class2(group("heisenberg2")), PreconditionError);
  CHECK_THROWS_AS(int_interpretation_class2(group("free3_r2")), PreconditionError);
  auto H2 = group("heisenberg2");
  CHECK_THROWS_AS(int_interpretation_class2(H2, GroupElement::generator(H2, 0), GroupElement::generator(H2, 2)),
                  PreconditionError);
}

TEST_CASE("translation through the integer interpretation") {
  auto H = group("heisenberg");
  auto I = int_interpretation_class2(H);
  auto sigma = parse_system("system s\nsort ring Z\nvar x y\neq x + y = 5\n");
  auto T = translate_system(I, sigma);
  CHECK(print_system(T) ==
        "system s\nsort group heisenberg\nvar x y\n"
        "eq [x,a] = 1\neq [x,b] = 1\n"
        "eq [y,a] = 1\neq [y,b] = 1\n"
        "eq c^5 = x*y\n");

  auto prod = translate_system(I, parse_system("sort ring Z\nvar x y\neq x*y = 6\neq x + y = 5"));
  CHECK(prod.exists == std::vector<std::string>{"_w1", "_w2"});
  CHECK(prod.eqs.size() == 4 + 5 + 1);

  // nested products need fresh codes
  auto nested = translate_system(I, parse_system("sort ring Z\nvar x y z\neq x*y*z - 2 = x"));
  CHECK(nested.exists.front() == "_t1");
  CHECK(structural_problem(I).empty());

  auto trivial = translate_system(I, parse_system("sort ring Z\nvar x\neq x = x"));
  CHECK(trivial.eqs.size() == 3);
  CHECK(print_term(trivial.eqs.back().lhs) == "x");

  CHECK_THROWS_AS(translate_system(I, parse_system("sort group heisenberg\nvar x\neq x = a", H.get())),
                  PreconditionError);
}

TEST_CASE("quotient interpretations") {
  auto H = group("heisenberg");
  EquationSystem trivialN = parse_system("sort group heisenberg\nvar x\neq x = 1", H.get());
  auto Iid = quotient_interpretation(H, trivialN, QuotientKind::Trivial);
  require_same_systems(Iid, identity_interpretation(H));

  auto Q = center_quotient_interpretation(H);
  CHECK(structural_problem(Q).empty());
  CHECK(Q.source.group->ngens() == 2);
  CHECK(print_system(Q.equality).find("eq [x*y^-1,a] = 1") != std::string::npos);
  CHECK(*Q.decoder->decode({Exps{2, -1, 7}}) == Value{2, -1});
  CHECK_NOTHROW(center_quotient_interpretation(group("heisenberg2")));
  auto HZ = parse_presentation("group hz; class 2; gen a 1; gen b 1; gen d 1; gen c 2; comm b a = c^-1");
  CHECK_THROWS_AS(center_quotient_interpretation(HZ), PreconditionError);
  CHECK_THROWS_AS(center_quotient_interpretation(group("abelian_z2")), PreconditionError);

  // class-3 group modulo gamma_3 given verbally: decoding is the truncation
  auto F = group("free3_r2");
  auto V = lower_central_quotient_interpretation(F, 2, true);
  CHECK(structural_problem(V).empty());
  auto Tr = truncate_to_class(F, 2);
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<Exp> d(-4, 4);
  for (int n = 0; n < 100; ++n) {
    Exps g(5), h(5);
    for (auto& x : g) x = d(rng);
    for (auto& x : h) x = d(rng);
    auto dg = V.decoder->decode({g}), dh = V.decoder->decode({h}), dgh = V.decoder->decode({F->mul(g, h)});
    REQUIRE(dg);
    REQUIRE(dh);
    REQUIRE(dgh);
    CHECK(*dgh == Tr.presentation->mul(*dg, *dh));
  }
}

TEST_CASE("scalar interpretation of the Heisenberg group") {
  auto H = group("heisenberg");
  auto I = scalar_interpretation(H);
  CHECK(structural_problem(I).empty());
  CHECK(I.code_dim == 2);
  REQUIRE(I.constants.at("one").size() == 2);
  CHECK(print_term(I.constants.at("one")[0]) == "a");
  CHECK(print_term(I.constants.at("one")[1]) == "b");
  GroupCarrier G(H);
  // the scalar 2 is coded by (a^2, b^2) up to the centre
  std::map<std::string, Value> env{{"x_1", H->mul(H->gen(0, 2), H->gen(2, 5))}, {"x_2", H->gen(1, 2)}};
  CHECK(satisfies(I.domain, G, env));
  auto two = I.decoder->decode({env["x_1"], env["x_2"]});
  auto one = I.decoder->decode({H->gen(0), H->gen(1)});
  REQUIRE(two);
  REQUIRE(one);
  CHECK(*two == Value{2 * (*one)[0]});
  env["x_2"] = H->gen(1, 3);
  CHECK_FALSE(satisfies(I.domain, G, env));
  CHECK_THROWS_AS(scalar_interpretation(group("free3_r2")), PreconditionError);
}

TEST_CASE("scalar interpretation codes multiplication by t over Z[t]/(t^2-2)") {
  auto P = group("ut3_d2");
  auto I = scalar_interpretation(P);
  CHECK(structural_problem(I).empty());
  CHECK(I.code_dim == 4);
  // t acts by x0 -> x1, x1 -> 2 x0, y0 -> y1, y1 -> 2 y0
  GroupCarrier G(P);
  std::map<std::string, Value> env{
      {"x_1", P->gen(1)}, {"x_2", P->gen(0, 2)}, {"x_3", P->gen(3)}, {"x_4", P->gen(2, 2)}};
  CHECK(satisfies(I.domain, G, env));
  auto t = I.decoder->decode({env["x_1"], env["x_2"], env["x_3"], env["x_4"]});
  REQUIRE(t);
  CHECK(t->size() == 2);
  env["x_2"] = P->gen(0, 3);
  CHECK_FALSE(satisfies(I.domain, G, env));
}

TEST_CASE("composition") {
  auto H = group("heisenberg");
  auto Iint = int_interpretation_class2(H);
  require_same_systems(compose(Iint, identity_interpretation(H)), Iint);

  auto Q = center_quotient_interpretation(H);
  require_same_systems(compose(identity_interpretation(Q.source.group), Q), Q);

  auto F = group("free3_r2");
  auto inner = lower_central_quotient_interpretation(F, 2, false);
  auto outer = int_interpretation_class2(inner.source.group);
  auto C = compose(outer, inner);
  CHECK(C.code_dim == 1);
  CHECK(structural_problem(C).empty());
  CHECK(C.source.sort.kind == Sort::RingZ);
  CHECK(C.templates.count("add") == 1);
  // [a,b] = c^-1 codes 1 in the quotient; lifts ignore gamma_3
  Exps c = F->gen(2);
  CHECK(*C.decoder->decode({F->mul(F->pow(c, -3), F->gen(3, 5))}) == Value{3});
  CHECK_THROWS_AS(compose(Iint, Q), PreconditionError);
}

TEST_CASE("chain files round trip") {
  auto H = group("heisenberg");
  auto F = group("free3_r2");
  auto inner = lower_central_quotient_interpretation(F, 2, false);
  std::vector<EInterpretation> all{int_interpretation_class2(H), scalar_interpretation(H),
                                   center_quotient_interpretation(H), identity_interpretation(H),
                                   compose(int_interpretation_class2(inner.source.group), inner),
                                   int_interpretation_class2(group("free2_r3"))};
  for (const auto& I : all) {
    std::string text = interpretation_to_text(I);
    INFO(text);
    EInterpretation back = interpretation_from_text(text);
    CHECK(interpretation_to_text(back) == text);
    require_same_systems(back, I);
    CHECK(back.templates.size() == I.templates.size());
    CHECK(back.decoder->to_text() == I.decoder->to_text());
  }
  CHECK_THROWS_AS(interpretation_from_text("interpretation x\nsource ring Q\n"), ParseError);
}

TEST_CASE("integer interpretation with a larger centre adds a pinning witness") {
  auto P = group("free2_r3");
  auto I = int_interpretation_class2(P);
  CHECK(I.domain.exists == std::vector<std::string>{"_w1"});
  CHECK(I.domain.eqs.size() == 3 + 2);
  auto Hh = int_interpretation_class2(group("heisenberg"));
  CHECK(Hh.domain.exists.empty());
}
