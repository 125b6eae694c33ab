#include "einterp/eqlang.hpp"
#include "einterp/scalars.hpp"

namespace einterp {

std::string SourceDescriptor::str() const { return sort.str(); }

std::vector<std::string> standard_code_vars(int k, int dim) {
  static const char* letters[] = {"x", "y", "z", "u", "v", "w"};
  std::string base = k < 6 ? letters[k] : "c" + std::to_string(k);
  if (dim == 1) return {base};
  std::vector<std::string> out;
  for (int i = 1; i <= dim; ++i) out.push_back(base + "_" + std::to_string(i));
  return out;
}

std::vector<std::string> EInterpretation::op_names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : ops) out.push_back(k);
  return out;
}

std::vector<std::string> EInterpretation::code_vars(int k) const { return standard_code_vars(k, code_dim); }

std::vector<TermPtr> EInterpretation::encode_int(std::int64_t n) const {
  auto it = constants.find("one");
  if (it == constants.end()) throw PreconditionError(name + ": source has no integer constants");
  std::vector<TermPtr> out;
  for (const TermPtr& t : it->second) {
    if (n == 0) out.push_back(Term::one());
    else if (n == 1) out.push_back(t);
    else out.push_back(Term::pow(t, n));
  }
  return out;
}

std::vector<TermPtr> EInterpretation::encode_gen(const std::string& g) const {
  auto it = constants.find(g);
  if (it == constants.end()) throw PreconditionError(name + ": no code for constant '" + g + "'");
  return it->second;
}

namespace {

std::vector<TermPtr> var_terms(const std::vector<std::string>& names) {
  std::vector<TermPtr> out;
  for (const auto& n : names) out.push_back(Term::var(n));
  return out;
}

EquationSystem host_system(const PcPresentation& P, const std::string& name, std::vector<std::string> vars) {
  EquationSystem s;
  s.name = name;
  s.sort = {Sort::Group, P.name(), 0};
  s.vars = std::move(vars);
  return s;
}

std::vector<std::string> concat_vars(const EInterpretation& I, int count) {
  std::vector<std::string> out;
  for (int k = 0; k < count; ++k) {
    auto v = I.code_vars(k);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

// Instantiate a one-variable system with its variable replaced by `t`;
// witnesses become _w1, _w2, ...
void instantiate_into(EquationSystem& out, const EquationSystem& n_edef, const TermPtr& t) {
  if (n_edef.vars.size() != 1) throw PreconditionError("expected a system in one free variable");
  std::map<std::string, TermPtr> sub{{n_edef.vars[0], t}};
  int k = 0;
  for (const auto& w : n_edef.exists) {
    std::string name;
    do name = "_w" + std::to_string(++k);
    while (out.is_var(name));
    out.exists.push_back(name);
    sub[w] = Term::var(name);
  }
  for (const auto& e : n_edef.eqs) out.eqs.push_back({substitute(e.lhs, sub), substitute(e.rhs, sub)});
}

bool homomorphic(const EInterpretation& I) {
  if (I.source.sort.is_ring() || I.code_dim != 1) return false;
  auto m = I.templates.find("mul");
  auto i = I.templates.find("inv");
  if (m == I.templates.end() || i == I.templates.end()) return false;
  return same_term(m->second[0], Term::mul(Term::var("x"), Term::var("y"))) &&
         same_term(i->second[0], Term::inv(Term::var("x")));
}

}  // namespace

EInterpretation identity_interpretation(const PcPresentationPtr& P) {
  EInterpretation I;
  I.name = "identity_" + P->name();
  I.source = {{Sort::Group, P->name(), 0}, P};
  I.host = P;
  I.code_dim = 1;
  I.domain = host_system(*P, "domain", {"x"});
  I.equality = host_system(*P, "equality", {"x", "y"});
  I.equality.eqs.push_back({Term::var("x"), Term::var("y")});
  EquationSystem mul = host_system(*P, "mul", {"x", "y", "z"});
  mul.eqs.push_back({Term::var("z"), Term::mul(Term::var("x"), Term::var("y"))});
  I.ops["mul"] = mul;
  I.templates["mul"] = {Term::mul(Term::var("x"), Term::var("y"))};
  I.templates["inv"] = {Term::inv(Term::var("x"))};
  for (const auto& g : P->generators()) I.constants[g.name] = {Term::gen(g.name)};
  I.decoder = truncate_decoder(P, P->nilpotency_class());
  return I;
}

EInterpretation quotient_interpretation(const PcPresentationPtr& P, const EquationSystem& n_edef, QuotientKind kind,
                                        int keep_class) {
  if (n_edef.vars.size() != 1) throw PreconditionError("quotient_interpretation: N must be given in one variable");
  if (n_edef.sort.kind != Sort::Group || n_edef.sort.group != P->name())
    throw PreconditionError("quotient_interpretation: N is not over " + P->name());
  const std::string& xv = n_edef.vars[0];
  if (n_edef.exists.empty() && n_edef.eqs.size() == 1 && same_term(n_edef.eqs[0].lhs, Term::var(xv)) &&
      same_term(n_edef.eqs[0].rhs, Term::one()))
    return identity_interpretation(P);

  int keep = P->nilpotency_class();
  if (kind == QuotientKind::Center) {
    if (P->nilpotency_class() < 2) throw PreconditionError("center quotient of an abelian group is trivial");
    keep = keep_class > 0 ? keep_class : P->nilpotency_class() - 1;
    if (P->nilpotency_class() == 2) {
      for (const GroupElement& z : center_class2(P))
        for (int i = 0; i < P->ngens(); ++i)
          if (P->weight(i) == 1 && z.exponents()[static_cast<std::size_t>(i)] != 0)
            throw PreconditionError("center quotient decoding needs Z(G) = gamma_2(G)");
    }
  } else if (kind == QuotientKind::LowerCentral) {
    if (keep_class < 1) throw PreconditionError("lower central quotient needs a class >= 1");
    keep = keep_class;
  }
  Truncation tr = truncate_to_class(P, keep);

  EInterpretation I;
  I.name = "quotient_" + P->name();
  I.source = {{Sort::Group, tr.presentation->name(), 0}, tr.presentation};
  I.host = P;
  I.code_dim = 1;
  I.domain = host_system(*P, "domain", {"x"});
  I.equality = host_system(*P, "equality", {"x", "y"});
  instantiate_into(I.equality, n_edef, Term::mul(Term::var("x"), Term::inv(Term::var("y"))));
  EquationSystem mul = host_system(*P, "mul", {"x", "y", "z"});
  instantiate_into(mul, n_edef, Term::mul(Term::mul(Term::var("x"), Term::var("y")), Term::inv(Term::var("z"))));
  I.ops["mul"] = mul;
  I.templates["mul"] = {Term::mul(Term::var("x"), Term::var("y"))};
  I.templates["inv"] = {Term::inv(Term::var("x"))};
  for (const auto& g : tr.presentation->generators()) I.constants[g.name] = {Term::gen(g.name)};
  I.decoder = truncate_decoder(P, keep);
  return I;
}

EInterpretation center_quotient_interpretation(const PcPresentationPtr& P) {
  EInterpretation I = quotient_interpretation(P, center_edef(*P), QuotientKind::Center);
  I.name = "center_quotient_" + P->name();
  return I;
}

EInterpretation lower_central_quotient_interpretation(const PcPresentationPtr& P, int k, bool verbal) {
  if (k < 1 || k >= P->nilpotency_class())
    throw PreconditionError("lower central quotient: k must lie in [1, class)");
  EquationSystem n;
  if (verbal) {
    int width = 0;
    for (int i = 0; i < P->ngens(); ++i) width += P->weight(i) == k + 1;
    n = verbal_edef(VerbalWord::commutator(k + 1), std::max(width, 1), *P);
  } else {
    if (k + 1 != P->nilpotency_class())
      throw PreconditionError("lower central quotient via the center needs k = class - 1");
    n = center_edef(*P);
  }
  EInterpretation I = quotient_interpretation(P, n, QuotientKind::LowerCentral, k);
  I.name = "lcs_quotient_" + P->name() + "_" + std::to_string(k);
  return I;
}

EInterpretation int_interpretation_class2(const PcPresentationPtr& P, const GroupElement& a, const GroupElement& b) {
  if (P->nilpotency_class() != 2) throw PreconditionError("int interpretation requires a class-2 presentation");
  if (!is_c_small(P, a)) throw PreconditionError(a.str() + " is not c-small");
  if (!is_c_small(P, b)) throw PreconditionError(b.str() + " is not c-small");
  GroupElement c = commutator(a, b);
  if (c.is_identity()) throw PreconditionError("[a,b] is trivial");
  for (int i = 0; i < P->ngens(); ++i)
    if (c.exponents()[static_cast<std::size_t>(i)] != 0 && P->power(i))
      throw PreconditionError("[a,b] must have infinite order");

  const TermPtr ta = word_term(*P, a.exponents()), tb = word_term(*P, b.exponents());
  auto x = Term::var("x"), y = Term::var("y"), z = Term::var("z");
  EInterpretation I;
  I.name = "int_" + P->name();
  I.source = {{Sort::RingZ, "", 0}, nullptr};
  I.host = P;
  I.code_dim = 1;

  I.domain = center_edef(*P);
  I.domain.name = "domain";
  // when Z(G) is larger than <c>, pin x to the image of [C(a), b]
  std::vector<GroupElement> Z = center_class2(P);
  bool center_cyclic = true;
  {
    std::vector<IntVector> span{IntVector::Zero(P->ngens())};
    for (int i = 0; i < P->ngens(); ++i) span[0](i) = c.exponents()[static_cast<std::size_t>(i)];
    for (const GroupElement& g : Z) {
      IntVector v(P->ngens());
      for (int i = 0; i < P->ngens(); ++i) v(i) = g.exponents()[static_cast<std::size_t>(i)];
      if (!lattice_member<Integer>(v, span)) center_cyclic = false;
    }
  }
  if (!center_cyclic) {
    I.domain.exists.push_back("_w1");
    I.domain.eqs.push_back({Term::comm(Term::var("_w1"), ta), Term::one()});
    I.domain.eqs.push_back({Term::comm(Term::var("_w1"), tb), x});
  }

  I.equality = host_system(*P, "equality", {"x", "y"});
  I.equality.eqs.push_back({x, y});

  EquationSystem add = host_system(*P, "add", {"x", "y", "z"});
  add.eqs.push_back({z, Term::mul(x, y)});
  I.ops["add"] = add;

  EquationSystem mul = host_system(*P, "mul", {"x", "y", "z"});
  auto p = Term::var("_w1"), q = Term::var("_w2");
  mul.exists = {"_w1", "_w2"};
  mul.eqs.push_back({Term::comm(p, ta), Term::one()});
  mul.eqs.push_back({Term::comm(q, tb), Term::one()});
  mul.eqs.push_back({Term::comm(p, tb), x});
  mul.eqs.push_back({Term::comm(ta, q), y});
  mul.eqs.push_back({Term::comm(p, q), z});
  I.ops["mul"] = mul;

  I.templates["add"] = {Term::mul(x, y)};
  I.templates["neg"] = {Term::inv(x)};
  I.constants["one"] = {word_term(*P, c.exponents())};
  I.decoder = int_power_decoder(P, c.exponents());
  return I;
}

EInterpretation int_interpretation_class2(const PcPresentationPtr& P) {
  if (P->nilpotency_class() != 2) throw PreconditionError("int interpretation requires a class-2 presentation");
  std::vector<GroupElement> small;
  for (int i = 0; i < P->ngens(); ++i)
    if (P->weight(i) == 1) {
      GroupElement g = GroupElement::generator(P, i);
      if (is_c_small(P, g)) small.push_back(g);
    }
  for (std::size_t i = 0; i < small.size(); ++i)
    for (std::size_t j = i + 1; j < small.size(); ++j)
      if (!commutator(small[i], small[j]).is_identity()) return int_interpretation_class2(P, small[i], small[j]);
  throw PreconditionError("no pair of c-small generators with nontrivial commutator in " + P->name());
}

EInterpretation scalar_interpretation(const PcPresentationPtr& P) {
  CommutatorMap cm = commutator_bilinear_map(P);
  FullnessReport fr = check_full_nondegenerate(cm.f);
  if (!fr.full || !fr.nondegenerate())
    throw PreconditionError("scalar interpretation requires a full non-degenerate commutator map");
  const int k = static_cast<int>(cm.lifts.size());
  const Index d = cm.f.B->ngens();

  EInterpretation I;
  I.name = "scalars_" + P->name();
  I.source = {{Sort::RingScalars, "", 0}, nullptr};
  I.host = P;
  I.code_dim = k;
  std::vector<TermPtr> e;
  for (int i : cm.lifts) e.push_back(Term::gen(P->generator(i).name));
  auto U = var_terms(I.code_vars(0)), V = var_terms(I.code_vars(1)), W = var_terms(I.code_vars(2));

  I.domain = host_system(*P, "domain", I.code_vars(0));
  for (int i = 0; i < k; ++i)
    for (int j = i; j < k; ++j) I.domain.eqs.push_back({Term::comm(U[i], e[j]), Term::comm(e[i], U[j])});
  const IntMatrix& AR = cm.f.A->relations();
  for (Index r = 0; r < AR.rows(); ++r) {
    TermPtr prod;
    for (int i = 0; i < k; ++i) {
      std::int64_t c = AR(r, i).convert_to<std::int64_t>();
      if (c == 0) continue;
      TermPtr f = c == 1 ? U[i] : Term::pow(U[i], c);
      prod = prod ? Term::mul(prod, f) : f;
    }
    if (!prod) continue;
    for (int j = 0; j < k; ++j) I.domain.eqs.push_back({Term::comm(prod, e[j]), Term::one()});
  }
  // relations among the values f(e_p, e_q)
  IntMatrix M(d, k * k);
  for (int p = 0; p < k; ++p)
    for (int q = 0; q < k; ++q) M.col(p * k + q) = cm.f.tensor[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
  IntMatrix BR = cm.f.B->relations().transpose();
  for (const IntVector& lam : kernel_modulo(M, BR)) {
    TermPtr prod;
    for (int p = 0; p < k; ++p)
      for (int q = 0; q < k; ++q) {
        std::int64_t c = lam(p * k + q).convert_to<std::int64_t>();
        if (c == 0) continue;
        TermPtr f = Term::comm(U[p], e[q]);
        if (c != 1) f = Term::pow(f, c);
        prod = prod ? Term::mul(prod, f) : f;
      }
    if (prod) I.domain.eqs.push_back({prod, Term::one()});
  }

  I.equality = host_system(*P, "equality", concat_vars(I, 2));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      I.equality.eqs.push_back({Term::comm(Term::mul(U[i], Term::inv(V[i])), e[j]), Term::one()});

  EquationSystem add = host_system(*P, "add", concat_vars(I, 3));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      add.eqs.push_back({Term::comm(Term::mul(W[i], Term::inv(Term::mul(U[i], V[i]))), e[j]), Term::one()});
  I.ops["add"] = add;

  EquationSystem mul = host_system(*P, "mul", concat_vars(I, 3));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) mul.eqs.push_back({Term::comm(W[i], e[j]), Term::comm(V[i], U[j])});
  I.ops["mul"] = mul;

  std::vector<TermPtr> tadd, tneg;
  for (int i = 0; i < k; ++i) {
    tadd.push_back(Term::mul(U[i], V[i]));
    tneg.push_back(Term::inv(U[i]));
  }
  I.templates["add"] = tadd;
  I.templates["neg"] = tneg;
  I.constants["one"] = e;
  I.decoder = scalar_decoder(P);
  return I;
}

// ---------------------------------------------------------------- translation

std::vector<std::string> translated_vars(const EInterpretation& I, const std::string& v) {
  if (I.code_dim == 1) {
    std::string n = v;
    while (I.host->find_generator(n)) n += "_";
    return {n};
  }
  std::vector<std::string> out;
  for (int i = 1; i <= I.code_dim; ++i) {
    std::string n = v + "_" + std::to_string(i);
    while (I.host->find_generator(n)) n += "_";
    out.push_back(n);
  }
  return out;
}

namespace {

using Code = std::vector<TermPtr>;

class Translator {
 public:
  Translator(const EInterpretation& I, const EquationSystem& sigma, const TranslateOptions& opts)
      : I_(I), sigma_(sigma), opts_(opts), homomorphic_(homomorphic(I)) {
    check_sort();
    out_.name = sigma_.name;
    out_.sort = {Sort::Group, I_.host->name(), 0};
    for (const auto& v : sigma_.all_vars())
      for (const auto& h : translated_vars(I_, v)) used_.insert(h);
    for (const auto& v : sigma_.vars) {
      codes_[v] = var_terms(translated_vars(I_, v));
      for (const auto& h : translated_vars(I_, v)) out_.vars.push_back(h);
    }
    for (const auto& v : sigma_.exists) {
      codes_[v] = var_terms(translated_vars(I_, v));
      for (const auto& h : translated_vars(I_, v)) out_.exists.push_back(h);
    }
  }

  EquationSystem run() {
    if (opts_.constrain_free)
      for (const auto& v : sigma_.vars) instance(I_.domain, {codes_[v]});
    for (const auto& v : sigma_.exists) instance(I_.domain, {codes_[v]});
    for (const auto& e : sigma_.eqs) equation(e);
    return out_;
  }

  // Code of a term using templates only; nullopt if a graph would be needed.
  std::optional<Code> templated(const TermPtr& t) {
    templated_only_ = true;
    try {
      return code(t);
    } catch (const NeedsGraph&) {
      return std::nullopt;
    }
  }

 private:
  struct NeedsGraph {};

  void check_sort() {
    const Sort& s = I_.source.sort;
    if (s.is_ring() != sigma_.sort.is_ring())
      throw PreconditionError("translate: system sort '" + sigma_.sort.str() + "' does not match source '" + s.str() + "'");
    if (!s.is_ring() && s.group != sigma_.sort.group)
      throw PreconditionError("translate: system is over " + sigma_.sort.group + ", source is " + s.group);
  }

  void instance(const EquationSystem& S, const std::vector<Code>& codes) {
    std::map<std::string, TermPtr> sub;
    std::size_t pos = 0;
    for (const Code& c : codes)
      for (const TermPtr& t : c) {
        if (pos >= S.vars.size()) throw std::logic_error("instance: arity mismatch for " + S.name);
        sub[S.vars[pos++]] = t;
      }
    if (pos != S.vars.size()) throw std::logic_error("instance: arity mismatch for " + S.name);
    for (const auto& w : S.exists) {
      std::string name;
      do name = "_w" + std::to_string(++witness_counter_);
      while (used_.count(name) || I_.host->find_generator(name));
      used_.insert(name);
      out_.exists.push_back(name);
      sub[w] = Term::var(name);
    }
    for (const auto& e : S.eqs) out_.eqs.push_back({substitute(e.lhs, sub), substitute(e.rhs, sub)});
  }

  Code fresh() {
    if (templated_only_) throw NeedsGraph{};
    ++fresh_counter_;
    std::vector<std::string> names;
    for (int i = 1; i <= I_.code_dim; ++i) {
      std::string n = "_t" + std::to_string(fresh_counter_);
      if (I_.code_dim > 1) n += "_" + std::to_string(i);
      while (used_.count(n) || I_.host->find_generator(n)) n += "_";
      used_.insert(n);
      names.push_back(n);
      out_.exists.push_back(n);
    }
    Code c = var_terms(names);
    instance(I_.domain, {c});
    return c;
  }

  const EquationSystem& graph(const std::string& op) {
    auto it = I_.ops.find(op);
    if (it == I_.ops.end()) throw PreconditionError(I_.name + ": no graph for operation '" + op + "'");
    return it->second;
  }

  Code apply_template(const std::vector<TermPtr>& tpl, const std::vector<Code>& args) {
    std::map<std::string, TermPtr> sub;
    for (std::size_t k = 0; k < args.size(); ++k) {
      auto names = I_.code_vars(static_cast<int>(k));
      for (std::size_t i = 0; i < names.size(); ++i) sub[names[i]] = args[k][i];
    }
    Code out;
    for (const TermPtr& t : tpl) out.push_back(substitute(t, sub));
    return out;
  }

  Code binary(const std::string& op, const Code& a, const Code& b) {
    auto it = I_.templates.find(op);
    if (it != I_.templates.end()) return apply_template(it->second, {a, b});
    Code w = fresh();
    instance(graph(op), {a, b, w});
    return w;
  }

  Code zero_or_one() {
    if (I_.source.sort.is_ring()) return I_.encode_int(0);
    auto it = I_.constants.find("1");
    if (it != I_.constants.end()) return it->second;
    return Code(static_cast<std::size_t>(I_.code_dim), Term::one());
  }

  // inverse (groups) or negation (rings)
  Code invert(const Code& a) {
    const bool ring = I_.source.sort.is_ring();
    auto it = I_.templates.find(ring ? "neg" : "inv");
    if (it != I_.templates.end()) return apply_template(it->second, {a});
    Code w = fresh();
    instance(graph(ring ? "add" : "mul"), {a, w, zero_or_one()});
    return w;
  }

  Code power(const Code& a, std::int64_t k) {
    if (k == 0) return zero_or_one();
    Code base = k < 0 ? invert(a) : a;
    Code acc = base;
    for (std::int64_t i = 1; i < (k < 0 ? -k : k); ++i) acc = binary("mul", acc, base);
    return acc;
  }

  Code code(const TermPtr& t) {
    if (homomorphic_ && !sigma_.sort.is_ring() && t->kind != TermKind::Var) return {homomorphic_image(t)};
    switch (t->kind) {
      case TermKind::Var: {
        auto it = codes_.find(t->name);
        if (it == codes_.end()) throw PreconditionError("translate: undeclared variable " + t->name);
        return it->second;
      }
      case TermKind::Gen:
        return I_.encode_gen(t->name);
      case TermKind::Int:
        return I_.encode_int(t->value);
      case TermKind::One:
        return zero_or_one();
      case TermKind::Mul:
        return binary("mul", code(t->args[0]), code(t->args[1]));
      case TermKind::Add:
        return binary("add", code(t->args[0]), code(t->args[1]));
      case TermKind::Sub: {
        Code a = code(t->args[0]), b = code(t->args[1]);
        if (I_.templates.count("add") && I_.templates.count("neg")) return binary("add", a, invert(b));
        Code w = fresh();
        instance(graph("add"), {w, b, a});
        return w;
      }
      case TermKind::Neg:
        return invert(code(t->args[0]));
      case TermKind::Pow:
        return power(code(t->args[0]), t->value);
      case TermKind::Comm: {
        Code a = code(t->args[0]), b = code(t->args[1]);
        return binary("mul", binary("mul", invert(a), invert(b)), binary("mul", a, b));
      }
    }
    throw std::logic_error("translate: unknown term");
  }

  TermPtr homomorphic_image(const TermPtr& t) {
    if (t->kind == TermKind::Var) return code(t)[0];
    if (t->kind == TermKind::Gen) return I_.encode_gen(t->name)[0];
    if (t->args.empty()) return t;
    std::vector<TermPtr> args;
    for (const auto& a : t->args) args.push_back(homomorphic_image(a));
    if (t->kind == TermKind::Mul) return Term::mul(args[0], args[1]);
    if (t->kind == TermKind::Pow) return Term::pow(args[0], t->value);
    return Term::comm(args[0], args[1]);
  }

  static bool atomic(const TermPtr& t) {
    return t->kind == TermKind::Var || t->kind == TermKind::Gen || t->kind == TermKind::Int ||
           t->kind == TermKind::One;
  }

  static const char* graph_op(const TermPtr& t) {
    if (t->kind == TermKind::Add) return "add";
    if (t->kind == TermKind::Mul) return "mul";
    return nullptr;
  }

  void equation(const Equation& e) {
    for (int side = 0; side < 2; ++side) {
      const TermPtr& a = side == 0 ? e.lhs : e.rhs;
      const TermPtr& op = side == 0 ? e.rhs : e.lhs;
      const char* name = graph_op(op);
      if (atomic(a) && name && I_.ops.count(name)) {
        Code l = code(op->args[0]);
        Code r = code(op->args[1]);
        instance(graph(name), {l, r, code(a)});
        return;
      }
    }
    Code l = code(e.lhs);
    Code r = code(e.rhs);
    instance(I_.equality, {l, r});
  }

  const EInterpretation& I_;
  const EquationSystem& sigma_;
  TranslateOptions opts_;
  bool homomorphic_;
  bool templated_only_ = false;
  EquationSystem out_;
  std::set<std::string> used_;
  std::map<std::string, Code> codes_;
  int witness_counter_ = 0, fresh_counter_ = 0;
};

}  // namespace

EquationSystem translate_system(const EInterpretation& I, const EquationSystem& sigma, const TranslateOptions& opts) {
  return Translator(I, sigma, opts).run();
}

// ---------------------------------------------------------------- composition

EInterpretation compose(const EInterpretation& outer, const EInterpretation& inner) {
  if (inner.source.sort.kind != Sort::Group || !inner.source.group)
    throw PreconditionError("compose: the inner interpretation must interpret a group");
  if (outer.host->to_text() != inner.source.group->to_text())
    throw PreconditionError("compose: host of " + outer.name + " is not the source of " + inner.name);
  const int m1 = outer.code_dim, m2 = inner.code_dim;

  EInterpretation C;
  C.name = outer.name + "_via_" + inner.name;
  C.source = outer.source;
  C.host = inner.host;
  C.code_dim = m1 * m2;

  // rename inner code variables of outer variable x_j to composite names
  auto push = [&](const EquationSystem& S, int ncodes, bool constrain) {
    EquationSystem T = translate_system(inner, S, {constrain});
    std::map<std::string, TermPtr> ren;
    std::vector<std::string> vars;
    for (int k = 0; k < ncodes; ++k) {
      auto ov = outer.code_vars(k);
      auto cv = C.code_vars(k);
      for (int j = 0; j < m1; ++j) {
        auto hv = translated_vars(inner, ov[static_cast<std::size_t>(j)]);
        for (int i = 0; i < m2; ++i) ren[hv[static_cast<std::size_t>(i)]] = Term::var(cv[static_cast<std::size_t>(j * m2 + i)]);
      }
      vars.insert(vars.end(), cv.begin(), cv.end());
    }
    for (auto& e : T.eqs) e = {substitute(e.lhs, ren), substitute(e.rhs, ren)};
    T.vars = vars;
    T.name = S.name;
    return T;
  };
  C.domain = push(outer.domain, 1, true);
  C.equality = push(outer.equality, 2, false);
  for (const auto& [name, S] : outer.ops) C.ops[name] = push(S, 3, false);

  auto flatten_code = [&](const std::vector<TermPtr>& comps, const EquationSystem& ctx) -> std::optional<std::vector<TermPtr>> {
    std::vector<TermPtr> out;
    for (const TermPtr& t : comps) {
      Translator tr(inner, ctx, {false});
      auto c = tr.templated(t);
      if (!c) return std::nullopt;
      out.insert(out.end(), c->begin(), c->end());
    }
    return out;
  };
  EquationSystem ctx = host_system(*outer.host, "ctx", {});
  for (const auto& [name, tpl] : outer.templates) {
    // template variables are outer code variables; rename through the inner naming
    EquationSystem tctx = host_system(*outer.host, "tpl", concat_vars(outer, 2));
    std::vector<TermPtr> out;
    bool ok = true;
    std::map<std::string, TermPtr> ren;
    for (int k = 0; k < 2; ++k) {
      auto ov = outer.code_vars(k);
      auto cv = C.code_vars(k);
      for (int j = 0; j < m1; ++j) {
        auto hv = translated_vars(inner, ov[static_cast<std::size_t>(j)]);
        for (int i = 0; i < m2; ++i) ren[hv[static_cast<std::size_t>(i)]] = Term::var(cv[static_cast<std::size_t>(j * m2 + i)]);
      }
    }
    for (const TermPtr& t : tpl) {
      Translator tr(inner, tctx, {false});
      auto c = tr.templated(t);
      if (!c) {
        ok = false;
        break;
      }
      for (const TermPtr& h : *c) out.push_back(substitute(h, ren));
    }
    if (ok) C.templates[name] = out;
  }
  for (const auto& [name, comps] : outer.constants) {
    auto c = flatten_code(comps, ctx);
    if (!c) throw PreconditionError("compose: constant '" + name + "' has no templated code");
    C.constants[name] = *c;
  }
  C.decoder = composite_decoder(outer.decoder, inner.decoder, m1, m2);
  return C;
}

}  // namespace einterp
