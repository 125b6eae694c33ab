#include "einterp/verify.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <optional>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

namespace einterp {

// ---------------------------------------------------------------- carriers

Value Carrier::pow(const Value& a, std::int64_t k) const {
  if (k < 0) return pow(neg(a), -k);
  Value acc = constant(*Term::one());
  for (std::int64_t i = 0; i < k; ++i) acc = mul(acc, a);
  return acc;
}

Value Carrier::comm(const Value&, const Value&) const { throw std::logic_error("commutator in a ring"); }
Value Carrier::add(const Value&, const Value&) const { throw std::logic_error("addition in a group"); }
Value Carrier::neg(const Value&) const { throw std::logic_error("negation in a group"); }

Value Carrier::eval(const TermPtr& t, const std::map<std::string, Value>& env) const {
  switch (t->kind) {
    case TermKind::Var: {
      auto it = env.find(t->name);
      if (it == env.end()) throw std::logic_error("unassigned variable " + t->name);
      return it->second;
    }
    case TermKind::Gen:
    case TermKind::One:
    case TermKind::Int:
      return constant(*t);
    case TermKind::Mul:
      return mul(eval(t->args[0], env), eval(t->args[1], env));
    case TermKind::Pow:
      return pow(eval(t->args[0], env), t->value);
    case TermKind::Comm:
      return comm(eval(t->args[0], env), eval(t->args[1], env));
    case TermKind::Add:
      return add(eval(t->args[0], env), eval(t->args[1], env));
    case TermKind::Sub:
      return add(eval(t->args[0], env), neg(eval(t->args[1], env)));
    case TermKind::Neg:
      return neg(eval(t->args[0], env));
  }
  throw std::logic_error("eval: unknown term");
}

namespace {

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) return std::numeric_limits<std::uint64_t>::max();
  return r;
}

void lex_product(const std::vector<std::pair<std::int64_t, std::int64_t>>& ranges, std::vector<Value>& out) {
  Value cur(ranges.size());
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (ranges[i].first > ranges[i].second) return;
    cur[i] = ranges[i].first;
  }
  while (true) {
    out.push_back(cur);
    std::size_t k = ranges.size();
    while (k > 0) {
      --k;
      if (cur[k] < ranges[k].second) {
        ++cur[k];
        for (std::size_t j = k + 1; j < ranges.size(); ++j) cur[j] = ranges[j].first;
        break;
      }
      if (k == 0) return;
    }
    if (ranges.empty()) return;
  }
}

std::vector<std::pair<std::int64_t, std::int64_t>> group_ranges(const PcPresentation& P, std::int64_t box, bool central_zero) {
  std::vector<std::pair<std::int64_t, std::int64_t>> r;
  for (int i = 0; i < P.ngens(); ++i) {
    if (central_zero && P.weight(i) >= 2) r.push_back({0, 0});
    else if (P.power(i)) r.push_back({0, P.power(i)->order - 1});
    else r.push_back({-box, box});
  }
  return r;
}

}  // namespace

std::string GroupCarrier::describe() const {
  auto o = P_->order();
  return "group " + P_->name() + (o ? " (order " + std::to_string(*o) + ")" : "");
}

std::vector<Value> GroupCarrier::elements(std::int64_t box, bool central_zero) const {
  std::vector<Value> out;
  lex_product(group_ranges(*P_, box, central_zero), out);
  return out;
}

std::uint64_t GroupCarrier::element_count(std::int64_t box, bool central_zero) const {
  std::uint64_t n = 1;
  for (const auto& [lo, hi] : group_ranges(*P_, box, central_zero)) n = sat_mul(n, static_cast<std::uint64_t>(hi - lo + 1));
  return n;
}

bool GroupCarrier::in_box(const Value& v, std::int64_t box) const {
  auto ranges = group_ranges(*P_, box, false);
  for (std::size_t i = 0; i < ranges.size(); ++i)
    if (v[i] < ranges[i].first || v[i] > ranges[i].second) return false;
  return true;
}

Value GroupCarrier::constant(const Term& t) const {
  if (t.kind == TermKind::One) return P_->identity();
  if (t.kind == TermKind::Gen) {
    auto i = P_->find_generator(t.name);
    if (!i) throw PreconditionError("unknown generator '" + t.name + "' in " + P_->name());
    return P_->gen(*i);
  }
  throw PreconditionError("integer literal in a group system");
}

bool Carrier::in_box(const Value& v, std::int64_t box) const {
  if (is_finite()) return true;
  for (std::int64_t x : v)
    if (x < -box || x > box) return false;
  return true;
}

std::int64_t IntCarrier::red(std::int64_t v) const {
  if (m_ == 0) return v;
  std::int64_t r = v % m_;
  return r < 0 ? r + m_ : r;
}

std::vector<Value> IntCarrier::elements(std::int64_t box, bool) const {
  std::vector<Value> out;
  if (m_ > 0)
    for (std::int64_t t = 0; t < m_; ++t) out.push_back({t});
  else
    for (std::int64_t t = -box; t <= box; ++t) out.push_back({t});
  return out;
}

std::uint64_t IntCarrier::element_count(std::int64_t box, bool) const {
  return m_ > 0 ? static_cast<std::uint64_t>(m_) : static_cast<std::uint64_t>(2 * box + 1);
}

Value IntCarrier::constant(const Term& t) const {
  if (t.kind == TermKind::Int) return {red(t.value)};
  throw PreconditionError("group constant in a ring system");
}

Value IntCarrier::mul(const Value& a, const Value& b) const {
  if (m_ > 0) return {red(static_cast<std::int64_t>((static_cast<__int128>(a[0]) * b[0]) % m_))};
  return {detail::checked_mul(a[0], b[0])};
}

Value IntCarrier::add(const Value& a, const Value& b) const {
  if (m_ > 0) return {red(a[0] % m_ + b[0] % m_)};
  return {detail::checked_add(a[0], b[0])};
}

Value IntCarrier::neg(const Value& a) const { return {red(-a[0])}; }

FiniteRingCarrier::FiniteRingCarrier(RingPresentation R, std::int64_t m) : R_(std::move(R)), m_(m) {
  if (m_ < 2) throw PreconditionError("finite ring carrier needs m >= 2");
  const Index r = R_.ngens();
  const IntMatrix& L = R_.additive->relations();
  IntMatrix rels(L.rows() + r, r);
  rels.topRows(L.rows()) = L;
  rels.bottomRows(r) = IntMatrix::Identity(r, r) * Integer(m_);
  additive_ = ab_from_relations(r, rels);
  std::vector<std::pair<std::int64_t, std::int64_t>> ranges(static_cast<std::size_t>(r), {0, m_ - 1});
  std::vector<Value> raw;
  lex_product(ranges, raw);
  std::set<Value> seen;
  for (const Value& v : raw) seen.insert(canon(vec(v)));
  elements_.assign(seen.begin(), seen.end());
}

Value FiniteRingCarrier::canon(const IntVector& v) const {
  IntVector c = additive_->reduce(v);
  Value out;
  for (Index i = 0; i < c.size(); ++i) out.push_back(c(i).convert_to<std::int64_t>());
  return out;
}

IntVector FiniteRingCarrier::vec(const Value& v) const {
  IntVector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Index>(i)) = v[i];
  return out;
}

std::string FiniteRingCarrier::describe() const {
  return "ring of scalars mod " + std::to_string(m_) + " (" + std::to_string(elements_.size()) + " elements)";
}

std::string FiniteRingCarrier::format(const Value& v) const {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + ")";
}

std::vector<Value> FiniteRingCarrier::elements(std::int64_t, bool) const { return elements_; }
std::uint64_t FiniteRingCarrier::element_count(std::int64_t, bool) const { return elements_.size(); }

Value FiniteRingCarrier::constant(const Term& t) const {
  if (t.kind != TermKind::Int) throw PreconditionError("group constant in a ring system");
  return canon(R_.unit * Integer(t.value));
}

Value FiniteRingCarrier::mul(const Value& a, const Value& b) const { return canon(R_.multiply(vec(a), vec(b))); }
Value FiniteRingCarrier::add(const Value& a, const Value& b) const { return canon(vec(a) + vec(b)); }
Value FiniteRingCarrier::neg(const Value& a) const { return canon(-vec(a)); }

// ---------------------------------------------------------------- solver

namespace {

struct ValueHash {
  std::size_t operator()(const Value& v) const {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (std::int64_t x : v) h = (h ^ static_cast<std::size_t>(x)) * 0x100000001b3ULL;
    return h;
  }
};

using Index_ = std::unordered_map<Value, std::vector<Value>, ValueHash>;

}  // namespace

struct SolverCache::Impl {
  std::map<std::string, std::shared_ptr<const std::vector<Value>>> candidates;
  std::map<std::string, std::shared_ptr<const Index_>> indices;
};

SolverCache::SolverCache() : impl(std::make_unique<Impl>()) {}
SolverCache::~SolverCache() = default;

namespace {

struct CTerm {
  TermKind kind;
  int var = -1;
  std::int64_t k = 0;
  Value constant;
  std::vector<CTerm> args;
};

struct Side {
  CTerm term;
  std::vector<int> vars;
  std::string text;  ///< printed with the variable of a unary side replaced
};

struct CEq {
  Side side[2];
  std::vector<int> vars;
};

class Solver {
 public:
  Solver(const EquationSystem& s, const Carrier& C, const SolveOptions& o, SolverCache& cache)
      : s_(s), C_(C), o_(o), cache_(*cache.impl) {
    names_ = s.all_vars();
    nfree_ = static_cast<int>(s.vars.size());
    nv_ = static_cast<int>(names_.size());
    for (int i = 0; i < nv_; ++i) index_[names_[static_cast<std::size_t>(i)]] = i;
    fbox_ = o.box;
    ebox_ = o.exist_box > 0 ? o.exist_box : o.box;
    eqs_of_var_.resize(static_cast<std::size_t>(nv_));
    only_in_brackets_.assign(static_cast<std::size_t>(nv_), true);
    for (const Equation& e : s.eqs) {
      CEq c;
      std::set<int> all;
      for (int k = 0; k < 2; ++k) {
        const TermPtr& t = k == 0 ? e.lhs : e.rhs;
        std::set<int> vs;
        c.side[k].term = compile(t, vs, false);
        c.side[k].vars.assign(vs.begin(), vs.end());
        all.insert(vs.begin(), vs.end());
      }
      c.vars.assign(all.begin(), all.end());
      // texts of constant and single-variable sides key the caches
      for (int k = 0; k < 2; ++k) {
        const TermPtr& t = k == 0 ? e.lhs : e.rhs;
        if (c.side[k].vars.empty()) {
          c.side[k].text = print_term(t);
        } else if (c.side[k].vars.size() == 1) {
          std::map<std::string, TermPtr> ren{{names_[static_cast<std::size_t>(c.side[k].vars[0])], Term::var("_")}};
          c.side[k].text = print_term(substitute(t, ren));
        }
      }
      for (int v : c.vars) eqs_of_var_[static_cast<std::size_t>(v)].push_back(static_cast<int>(eqs_.size()));
      eqs_.push_back(std::move(c));
    }
    pending_.assign(eqs_.size(), 0);
  }

  SolveReport run() {
    SolveReport rep;
    rep.system = s_.name;
    rep.carrier = C_.describe();
    rep.box_relative = !C_.is_finite();
    rep.box = rep.box_relative ? fbox_ : 0;
    rep.exist_box = rep.box_relative ? ebox_ : 0;
    rep.vars = s_.vars;
    vals_.assign(static_cast<std::size_t>(nv_), Value{});
    assigned_.assign(static_cast<std::size_t>(nv_), false);

    for (const CEq& e : eqs_)
      if (e.vars.empty() && !holds(e)) return rep;

    std::vector<std::shared_ptr<const std::vector<Value>>> cand;
    std::uint64_t space = 1;
    for (int v = 0; v < nfree_; ++v) {
      cand.push_back(candidates(v));
      space = sat_mul(space, cand.back()->size());
    }
    if (space > o_.cap)
      throw SearchTooLarge("search space " + std::to_string(space) + " exceeds the cap " + std::to_string(o_.cap));

    // equations checked when their last free variable is assigned
    check_at_.assign(static_cast<std::size_t>(std::max(nfree_, 1)), {});
    for (std::size_t i = 0; i < eqs_.size(); ++i) {
      const CEq& e = eqs_[i];
      if (e.vars.empty() || e.vars.back() >= nfree_) continue;
      check_at_[static_cast<std::size_t>(e.vars.back())].push_back(static_cast<int>(i));
    }
    for (std::size_t i = 0; i < eqs_.size(); ++i) {
      int n = 0;
      for (int v : eqs_[i].vars) n += v >= nfree_;
      pending_[i] = n;
    }
    remaining_ = 0;
    for (int v = nfree_; v < nv_; ++v) remaining_ += !eqs_of_var_[static_cast<std::size_t>(v)].empty();
    enumerate(0, cand, rep);
    return rep;
  }

 private:
  CTerm compile(const TermPtr& t, std::set<int>& vs, bool in_bracket) {
    CTerm c;
    c.kind = t->kind;
    c.k = t->value;
    switch (t->kind) {
      case TermKind::Var: {
        auto it = index_.find(t->name);
        if (it == index_.end()) throw PreconditionError("undeclared variable " + t->name);
        c.var = it->second;
        vs.insert(c.var);
        if (!in_bracket) only_in_brackets_[static_cast<std::size_t>(c.var)] = false;
        break;
      }
      case TermKind::Gen:
      case TermKind::One:
      case TermKind::Int:
        c.constant = C_.constant(*t);
        break;
      default:
        for (const auto& a : t->args) c.args.push_back(compile(a, vs, in_bracket || t->kind == TermKind::Comm));
    }
    return c;
  }

  Value eval(const CTerm& t) const {
    switch (t.kind) {
      case TermKind::Var:
        return vals_[static_cast<std::size_t>(t.var)];
      case TermKind::Gen:
      case TermKind::One:
      case TermKind::Int:
        return t.constant;
      case TermKind::Mul:
        return C_.mul(eval(t.args[0]), eval(t.args[1]));
      case TermKind::Pow:
        return C_.pow(eval(t.args[0]), t.k);
      case TermKind::Comm:
        return C_.comm(eval(t.args[0]), eval(t.args[1]));
      case TermKind::Add:
        return C_.add(eval(t.args[0]), eval(t.args[1]));
      case TermKind::Sub:
        return C_.add(eval(t.args[0]), C_.neg(eval(t.args[1])));
      case TermKind::Neg:
        return C_.neg(eval(t.args[0]));
    }
    throw std::logic_error("eval: unknown term");
  }

  bool holds(const CEq& e) const { return eval(e.side[0].term) == eval(e.side[1].term); }

  bool central(int v) const {
    return v >= nfree_ && o_.central_reduction && C_.central_reduction_valid() &&
           only_in_brackets_[static_cast<std::size_t>(v)];
  }

  std::string candidate_key(int v) const {
    std::vector<std::string> texts;
    for (int i : eqs_of_var_[static_cast<std::size_t>(v)]) {
      const CEq& e = eqs_[static_cast<std::size_t>(i)];
      if (e.vars.size() == 1) texts.push_back(e.side[0].text + "=" + e.side[1].text);
    }
    std::sort(texts.begin(), texts.end());
    std::string key = C_.describe() + "|" + std::to_string(v < nfree_ ? fbox_ : ebox_) + "|" + (central(v) ? "c" : "-");
    for (const auto& t : texts) key += "|" + t;
    return key;
  }

  static bool var_free(const CTerm& t) {
    if (t.kind == TermKind::Var) return false;
    for (const CTerm& a : t.args)
      if (!var_free(a)) return false;
    return true;
  }

  // Centrally reduced witness of a torsion-free class-2 group: w -> [w,g] is
  // linear in the weight-1 exponents, so unary bracket equations are solved
  // by integer linear algebra and the solution lattice is walked in the box.
  // Other unary equations filter the result.
  std::optional<std::vector<Value>> linear_candidates(int v, const std::vector<const CEq*>& unary, std::int64_t box) {
    auto* gc = dynamic_cast<const GroupCarrier*>(&C_);
    if (!gc || !central(v) || C_.is_finite()) return std::nullopt;
    const PcPresentation& P = *gc->presentation();
    if (!P.is_torsion_free() || P.nilpotency_class() > 2) return std::nullopt;
    std::vector<int> w1, w2;
    for (int i = 0; i < P.ngens(); ++i) (P.weight(i) == 1 ? w1 : w2).push_back(i);
    const Index k = static_cast<Index>(w1.size()), d = static_cast<Index>(w2.size());

    // a side as (form, constant): form(e) + constant in the weight-2 coordinates
    struct Affine {
      IntMatrix form;
      Exps constant;
    };
    auto affine = [&](const CTerm& t) -> std::optional<Affine> {
      Affine a{IntMatrix::Zero(d, k), P.identity()};
      if (var_free(t)) {
        a.constant = eval(t);
        return a;
      }
      if (t.kind != TermKind::Comm) return std::nullopt;
      const bool left = t.args[0].kind == TermKind::Var && t.args[0].var == v && var_free(t.args[1]);
      const bool right = t.args[1].kind == TermKind::Var && t.args[1].var == v && var_free(t.args[0]);
      if (!left && !right) return std::nullopt;
      Exps g = eval(left ? t.args[1] : t.args[0]);
      for (Index c = 0; c < k; ++c) {
        Exps e = P.gen(w1[static_cast<std::size_t>(c)]);
        Exps z = left ? P.comm(e, g) : P.comm(g, e);
        for (Index r = 0; r < d; ++r) a.form(r, c) = z[static_cast<std::size_t>(w2[static_cast<std::size_t>(r)])];
      }
      return a;
    };

    std::vector<IntVector> rows;
    std::vector<Integer> rhs;
    std::vector<const CEq*> rest;
    for (const CEq* e : unary) {
      auto l = affine(e->side[0].term), r = affine(e->side[1].term);
      if (!l || !r) {
        rest.push_back(e);
        continue;
      }
      for (int i : w1)
        if (l->constant[static_cast<std::size_t>(i)] != r->constant[static_cast<std::size_t>(i)])
          return std::vector<Value>{};
      for (Index q = 0; q < d; ++q) {
        std::size_t gi = static_cast<std::size_t>(w2[static_cast<std::size_t>(q)]);
        rows.push_back((l->form.row(q) - r->form.row(q)).transpose());
        rhs.push_back(Integer(r->constant[gi]) - Integer(l->constant[gi]));
      }
    }
    if (rows.empty()) return std::nullopt;
    IntMatrix M(static_cast<Index>(rows.size()), k);
    IntVector b(static_cast<Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      M.row(static_cast<Index>(i)) = rows[i].transpose();
      b(static_cast<Index>(i)) = rhs[i];
    }
    AffineLattice<Integer> sol = solve_linear<Integer>(M, b);
    std::vector<Value> out;
    if (sol.empty()) return out;

    // echelon basis of the kernel: pivot coordinate i depends on t_1..t_i only
    const Index dim = static_cast<Index>(sol.kernel_basis.size());
    IntMatrix K(dim, k);
    for (Index i = 0; i < dim; ++i) K.row(i) = sol.kernel_basis[static_cast<std::size_t>(i)].transpose();
    HnfResult<Integer> h = hnf<Integer>(K);
    const IntVector& x0 = *sol.particular;
    IntVector x = x0;
    Value saved = vals_[static_cast<std::size_t>(v)];
    std::function<void(Index)> walk = [&](Index i) {
      if (i == h.rank()) {
        for (Index c = 0; c < k; ++c)
          if (x(c) < -box || x(c) > box) return;
        Value w = P.identity();
        for (Index c = 0; c < k; ++c) w[static_cast<std::size_t>(w1[static_cast<std::size_t>(c)])] = x(c).convert_to<Exp>();
        vals_[static_cast<std::size_t>(v)] = w;
        for (const CEq* e : rest)
          if (!holds(*e)) return;
        out.push_back(std::move(w));
        return;
      }
      const Index p = h.pivots[static_cast<std::size_t>(i)];
      const Integer step = h.H(i, p);
      Integer lo = -box - x(p), hi = box - x(p);
      // t in [ceil(lo / step), floor(hi / step)], step > 0
      Integer tlo = lo >= 0 ? (lo + step - 1) / step : -((-lo) / step);
      Integer thi = hi >= 0 ? hi / step : -((-hi + step - 1) / step);
      if (tlo > thi) return;
      IntVector base = x;
      for (Integer t = tlo; t <= thi; ++t) {
        x = base + t * h.H.row(i).transpose();
        walk(i + 1);
      }
      x = base;
    };
    walk(0);
    vals_[static_cast<std::size_t>(v)] = saved;
    std::sort(out.begin(), out.end());
    return out;
  }

  std::shared_ptr<const std::vector<Value>> candidates(int v) {
    std::string key = candidate_key(v);
    auto it = cache_.candidates.find(key);
    if (it != cache_.candidates.end()) return it->second;
    const std::int64_t box = v < nfree_ ? fbox_ : ebox_;
    const bool cz = central(v);
    std::vector<const CEq*> unary;
    for (int i : eqs_of_var_[static_cast<std::size_t>(v)])
      if (eqs_[static_cast<std::size_t>(i)].vars.size() == 1) unary.push_back(&eqs_[static_cast<std::size_t>(i)]);
    if (auto lin = linear_candidates(v, unary, box)) {
      auto out = std::make_shared<std::vector<Value>>(std::move(*lin));
      cache_.candidates[key] = out;
      return out;
    }
    std::uint64_t n = C_.element_count(box, cz);
    if (n > o_.cap)
      throw SearchTooLarge("variable " + names_[static_cast<std::size_t>(v)] + " ranges over " + std::to_string(n) +
                           " elements, above the cap " + std::to_string(o_.cap));
    auto out = std::make_shared<std::vector<Value>>();
    Value saved = vals_[static_cast<std::size_t>(v)];
    for (Value& x : C_.elements(box, cz)) {
      vals_[static_cast<std::size_t>(v)] = x;
      bool ok = true;
      for (const CEq* e : unary)
        if (!holds(*e)) {
          ok = false;
          break;
        }
      if (ok) out->push_back(std::move(x));
    }
    vals_[static_cast<std::size_t>(v)] = saved;
    cache_.candidates[key] = out;
    return out;
  }

  std::shared_ptr<const Index_> join_index(int v, const Side& side) {
    std::string key = candidate_key(v) + "#" + side.text;
    auto it = cache_.indices.find(key);
    if (it != cache_.indices.end()) return it->second;
    auto cand = candidates(v);
    auto idx = std::make_shared<Index_>();
    Value saved = vals_[static_cast<std::size_t>(v)];
    for (const Value& x : *cand) {
      vals_[static_cast<std::size_t>(v)] = x;
      (*idx)[eval(side.term)].push_back(x);
    }
    vals_[static_cast<std::size_t>(v)] = saved;
    cache_.indices[key] = idx;
    return idx;
  }

  bool side_assigned(const Side& s) const {
    for (int v : s.vars)
      if (!assigned_[static_cast<std::size_t>(v)] && v >= nfree_) return false;
    return true;
  }

  void enumerate(int i, const std::vector<std::shared_ptr<const std::vector<Value>>>& cand, SolveReport& rep) {
    if (i == nfree_) {
      if (dfs()) emit(rep);
      return;
    }
    for (const Value& x : *cand[static_cast<std::size_t>(i)]) {
      vals_[static_cast<std::size_t>(i)] = x;
      bool ok = true;
      for (int e : check_at_[static_cast<std::size_t>(i)])
        if (!holds(eqs_[static_cast<std::size_t>(e)])) {
          ok = false;
          break;
        }
      if (ok) enumerate(i + 1, cand, rep);
    }
  }

  bool assign(int v, const Value& x) {
    vals_[static_cast<std::size_t>(v)] = x;
    assigned_[static_cast<std::size_t>(v)] = true;
    --remaining_;
    bool ok = true;
    for (int e : eqs_of_var_[static_cast<std::size_t>(v)]) {
      if (--pending_[static_cast<std::size_t>(e)] == 0 && ok && !holds(eqs_[static_cast<std::size_t>(e)])) ok = false;
    }
    return ok;
  }

  void unassign(int v) {
    assigned_[static_cast<std::size_t>(v)] = false;
    ++remaining_;
    for (int e : eqs_of_var_[static_cast<std::size_t>(v)]) ++pending_[static_cast<std::size_t>(e)];
  }

  bool try_values(int v, const std::vector<Value>& xs) {
    for (const Value& x : xs) {
      bool ok = assign(v, x);
      if (ok && dfs()) return true;
      unassign(v);
    }
    return false;
  }

  bool dfs() {
    if (remaining_ == 0) return true;
    // a variable equal to an evaluable term
    for (const CEq& e : eqs_)
      for (int k = 0; k < 2; ++k) {
        const Side& s = e.side[k];
        if (s.term.kind != TermKind::Var || assigned_[static_cast<std::size_t>(s.term.var)] || s.term.var < nfree_)
          continue;
        if (!side_assigned(e.side[1 - k])) continue;
        Value x = eval(e.side[1 - k].term);
        if (!C_.in_box(x, ebox_)) return false;
        return try_values(s.term.var, {x});
      }
    // a side in one unknown facing an evaluable side; only the unknowns
    // with the cheapest enumeration get an index
    std::uint64_t cheapest = std::numeric_limits<std::uint64_t>::max();
    for (const CEq& e : eqs_)
      for (int k = 0; k < 2; ++k) {
        const Side& s = e.side[k];
        if (s.vars.size() != 1 || s.vars[0] < nfree_ || assigned_[static_cast<std::size_t>(s.vars[0])]) continue;
        if (!side_assigned(e.side[1 - k])) continue;
        cheapest = std::min(cheapest, C_.element_count(ebox_, central(s.vars[0])));
      }
    int best_v = -1;
    const std::vector<Value>* best = nullptr;
    std::shared_ptr<const Index_> keep;
    static const std::vector<Value> empty;
    for (const CEq& e : eqs_)
      for (int k = 0; k < 2; ++k) {
        const Side& s = e.side[k];
        if (s.vars.size() != 1 || s.vars[0] < nfree_ || assigned_[static_cast<std::size_t>(s.vars[0])]) continue;
        if (!side_assigned(e.side[1 - k])) continue;
        if (C_.element_count(ebox_, central(s.vars[0])) > cheapest) continue;
        auto idx = join_index(s.vars[0], s);
        auto it = idx->find(eval(e.side[1 - k].term));
        const std::vector<Value>* bucket = it == idx->end() ? &empty : &it->second;
        if (!best || bucket->size() < best->size()) {
          best = bucket;
          best_v = s.vars[0];
          keep = idx;
        }
      }
    if (best) return try_values(best_v, *best);
    // smallest remaining candidate set
    int pick = -1;
    std::uint64_t size = std::numeric_limits<std::uint64_t>::max();
    for (int v = nfree_; v < nv_; ++v) {
      if (assigned_[static_cast<std::size_t>(v)] || eqs_of_var_[static_cast<std::size_t>(v)].empty()) continue;
      auto it = cache_.candidates.find(candidate_key(v));
      std::uint64_t n = it != cache_.candidates.end() ? it->second->size() : C_.element_count(ebox_, central(v));
      if (n < size) {
        size = n;
        pick = v;
      }
    }
    auto cand = candidates(pick);
    return try_values(pick, *cand);
  }

  void emit(SolveReport& rep) {
    std::map<std::string, Value> env, wit;
    std::vector<Value> sol;
    for (int v = 0; v < nv_; ++v) {
      const std::string& n = names_[static_cast<std::size_t>(v)];
      if (v < nfree_) {
        sol.push_back(vals_[static_cast<std::size_t>(v)]);
        env[n] = vals_[static_cast<std::size_t>(v)];
      } else if (assigned_[static_cast<std::size_t>(v)]) {
        wit[n] = vals_[static_cast<std::size_t>(v)];
        env[n] = vals_[static_cast<std::size_t>(v)];
      }
    }
    if (!satisfies(s_, C_, env)) throw std::logic_error("solver produced an assignment that fails re-evaluation");
    rep.solutions.push_back(std::move(sol));
    rep.witnesses.push_back(std::move(wit));
    // restore the state of the existential search
    for (int v = nv_ - 1; v >= nfree_; --v)
      if (assigned_[static_cast<std::size_t>(v)]) unassign(v);
  }

  const EquationSystem& s_;
  const Carrier& C_;
  SolveOptions o_;
  SolverCache::Impl& cache_;
  std::vector<std::string> names_;
  std::map<std::string, int> index_;
  int nfree_ = 0, nv_ = 0;
  std::int64_t fbox_ = 0, ebox_ = 0;
  std::vector<CEq> eqs_;
  std::vector<std::vector<int>> eqs_of_var_;
  std::vector<bool> only_in_brackets_;
  std::vector<std::vector<int>> check_at_;
  std::vector<int> pending_;
  mutable std::vector<Value> vals_;
  std::vector<bool> assigned_;
  int remaining_ = 0;
};

}  // namespace

bool satisfies(const EquationSystem& sigma, const Carrier& carrier, const std::map<std::string, Value>& env) {
  std::set<std::string> used;
  for (const auto& e : sigma.eqs) {
    collect_vars(e.lhs, used);
    collect_vars(e.rhs, used);
  }
  for (const auto& v : used)
    if (!env.count(v)) return false;
  for (const auto& e : sigma.eqs)
    if (carrier.eval(e.lhs, env) != carrier.eval(e.rhs, env)) return false;
  return true;
}

SolveReport solve(const EquationSystem& sigma, const Carrier& carrier, const SolveOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  if (sigma.sort.is_ring() == carrier.is_group())
    throw PreconditionError("system sort '" + sigma.sort.str() + "' does not match carrier " + carrier.describe());
  SolverCache local;
  SolverCache& cache = opts.cache ? *opts.cache : local;
  Solver s(sigma, carrier, opts, cache);
  SolveReport rep = s.run();
  // lexicographic order of the free-variable tuples
  std::vector<std::size_t> order(rep.solutions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rep.solutions[a] < rep.solutions[b]; });
  SolveReport sorted = rep;
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.solutions[i] = rep.solutions[order[i]];
    sorted.witnesses[i] = rep.witnesses[order[i]];
  }
  sorted.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return sorted;
}

SolveReport solve_finite(const EquationSystem& sigma, const PcPresentationPtr& P, const SolveOptions& opts) {
  if (!P->is_finite()) throw PreconditionError("solve_finite: " + P->name() + " is infinite");
  return solve(sigma, GroupCarrier(P), opts);
}

SolveReport solve_finite(const EquationSystem& sigma, std::int64_t m, const SolveOptions& opts) {
  if (m < 2) throw PreconditionError("solve_finite: modulus must be at least 2");
  return solve(sigma, IntCarrier(m), opts);
}

SolveReport solve_bounded(const EquationSystem& sigma, const PcPresentationPtr& P, std::int64_t B, SolveOptions opts) {
  if (B < 0) throw PreconditionError("solve_bounded: negative box");
  opts.box = B;
  return solve(sigma, GroupCarrier(P), opts);
}

std::string report_to_text(const SolveReport& r, const Carrier& carrier) {
  std::ostringstream os;
  os << "system " << r.system << "\n";
  os << "carrier " << r.carrier << "\n";
  if (r.box_relative) os << "box " << r.box << " (witness box " << r.exist_box << "; complete within the box only)\n";
  os << "solutions " << r.count() << "\n";
  for (const auto& sol : r.solutions) {
    os << " ";
    for (std::size_t i = 0; i < sol.size(); ++i) os << " " << r.vars[i] << "=" << carrier.format(sol[i]);
    os << "\n";
  }
  return os.str();
}

// ---------------------------------------------------------------- correspondence

std::int64_t interval_bound(const EquationSystem& sigma, std::int64_t B) {
  if (!sigma.sort.is_ring()) return B;
  std::int64_t best = B;
  std::function<std::int64_t(const TermPtr&)> go = [&](const TermPtr& t) -> std::int64_t {
    std::int64_t v = 0;
    switch (t->kind) {
      case TermKind::Var:
        v = B;
        break;
      case TermKind::Int:
        v = t->value < 0 ? -t->value : t->value;
        break;
      case TermKind::Add:
      case TermKind::Sub:
        v = detail::checked_add(go(t->args[0]), go(t->args[1]));
        break;
      case TermKind::Mul:
        v = detail::checked_mul(go(t->args[0]), go(t->args[1]));
        break;
      case TermKind::Neg:
        v = go(t->args[0]);
        break;
      default:
        break;
    }
    best = std::max(best, v);
    return v;
  };
  for (const auto& e : sigma.eqs) {
    go(e.lhs);
    go(e.rhs);
  }
  return best;
}

CorrespondenceReport check_correspondence(const EInterpretation& I, const EquationSystem& sigma, const CarrierSpec& spec,
                                          const SolveOptions& base) {
  auto t0 = std::chrono::steady_clock::now();
  CorrespondenceReport r;
  r.interpretation = I.name;
  r.carrier = spec.str();
  r.source = sigma;
  r.vars = sigma.vars;
  r.translated = translate_system(I, sigma);

  PcPresentationPtr host = I.host;
  DecoderPtr dec = I.decoder;
  std::unique_ptr<Carrier> src;
  SolveOptions hopt = base, sopt = base;
  const Sort::Kind kind = I.source.sort.kind;
  if (spec.kind == CarrierSpec::Mod) {
    const std::int64_t m = spec.value;
    host = finite_quotient(I.host, m);
    dec = I.decoder->reduce_mod(m);
    if (kind == Sort::RingZ) src = std::make_unique<IntCarrier>(m);
    else if (kind == Sort::RingScalars)
      src = std::make_unique<FiniteRingCarrier>(largest_ring_of_scalars(commutator_bilinear_map(I.host).f), m);
    else src = std::make_unique<GroupCarrier>(finite_quotient(I.source.group, m));
  } else {
    const std::int64_t B = spec.value;
    hopt.box = B;
    hopt.exist_box = std::max(B, interval_bound(sigma, B));
    sopt.box = B;
    if (kind == Sort::RingZ) src = std::make_unique<IntCarrier>(0);
    else if (kind == Sort::Group) src = std::make_unique<GroupCarrier>(I.source.group);
    else throw PreconditionError("box-bounded correspondence is only available for Z and group sources");
  }
  r.host_exist_box = hopt.exist_box;
  GroupCarrier hc(host);
  SolverCache cache;
  hopt.cache = &cache;

  SolveReport ss = solve(sigma, *src, sopt);
  r.source_solutions = ss.solutions;

  SolveReport hs = solve(r.translated, hc, hopt);
  r.host_solutions = hs.count();
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < hs.vars.size(); ++i) pos[hs.vars[i]] = i;
  std::set<std::vector<Value>> decoded;
  auto describe_code = [&](const std::vector<Exps>& code) {
    std::string s = "(";
    for (std::size_t i = 0; i < code.size(); ++i) s += (i ? ", " : "") + host->format(code[i]);
    return s + ")";
  };
  for (const auto& sol : hs.solutions) {
    std::vector<Value> tuple;
    bool ok = true;
    for (const auto& v : sigma.vars) {
      std::vector<Exps> code;
      for (const auto& h : translated_vars(I, v)) code.push_back(sol[pos.at(h)]);
      auto val = dec->decode(code);
      if (!val) {
        if (r.witnesses.size() < 5) r.witnesses.push_back("decode failed for " + v + " = " + describe_code(code));
        ok = false;
        break;
      }
      tuple.push_back(*val);
    }
    if (ok) decoded.insert(tuple);
  }
  r.decoded_solutions.assign(decoded.begin(), decoded.end());
  std::set<std::vector<Value>> source(ss.solutions.begin(), ss.solutions.end());
  auto fmt = [&](const std::vector<Value>& t) {
    std::string s = "(";
    for (std::size_t i = 0; i < t.size(); ++i) s += (i ? ", " : "") + src->format(t[i]);
    return s + ")";
  };
  for (const auto& t : source) r.source_text.push_back(fmt(t));
  for (const auto& t : decoded) r.decoded_text.push_back(fmt(t));
  r.sets_equal = source == decoded && r.witnesses.empty();
  for (const auto& t : source)
    if (!decoded.count(t) && r.witnesses.size() < 5) r.witnesses.push_back("source solution " + fmt(t) + " not decoded");
  for (const auto& t : decoded)
    if (!source.count(t) && r.witnesses.size() < 5) r.witnesses.push_back("decoded " + fmt(t) + " is not a source solution");

  // decode is defined on the domain set and onto the source carrier
  SolveOptions dopt = hopt;
  dopt.exist_box = hopt.box;
  SolveReport ds = solve(I.domain, hc, dopt);
  std::set<Value> image;
  r.onto = true;
  for (const auto& sol : ds.solutions) {
    auto val = dec->decode(sol);
    if (!val) {
      r.onto = false;
      if (r.witnesses.size() < 5) r.witnesses.push_back("decode failed on domain element " + describe_code(sol));
      continue;
    }
    image.insert(*val);
  }
  for (const Value& x : src->elements(spec.kind == CarrierSpec::Box ? spec.value : 0, false))
    if (!image.count(x)) {
      if (r.onto && r.witnesses.size() < 5) r.witnesses.push_back("no domain element decodes to " + src->format(x));
      r.onto = false;
    }
  r.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

std::string report_to_text(const CorrespondenceReport& r) {
  std::ostringstream os;
  os << "interpretation " << r.interpretation << "\n";
  os << "carrier " << r.carrier << "\n";
  os << "source solutions " << r.source_solutions.size() << "\n";
  for (const auto& s : r.source_text) os << "  " << s << "\n";
  os << "decoded host solutions " << r.decoded_solutions.size() << " (from " << r.host_solutions << " host tuples)\n";
  for (const auto& s : r.decoded_text) os << "  " << s << "\n";
  os << "decode onto source: " << (r.onto ? "yes" : "no") << "\n";
  for (const auto& w : r.witnesses) os << "witness: " << w << "\n";
  os << "verdict " << r.verdict() << "\n";
  return os.str();
}

}  // namespace einterp
