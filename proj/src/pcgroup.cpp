#include "einterp/pcgroup.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace einterp {

namespace detail {

Exp checked_add(Exp a, Exp b) {
  Exp r;
  if (__builtin_add_overflow(a, b, &r)) throw OverflowError("exponent overflow in collection");
  return r;
}

Exp checked_mul(Exp a, Exp b) {
  Exp r;
  if (__builtin_mul_overflow(a, b, &r)) throw OverflowError("exponent overflow in collection");
  return r;
}

}  // namespace detail

namespace {

int support_min(const Exps& e) {
  for (std::size_t i = 0; i < e.size(); ++i)
    if (e[i] != 0) return static_cast<int>(i);
  return static_cast<int>(e.size());
}

// Structural problems that make collection meaningless; empty when fine.
std::string structural_violation(const std::string& name, int cls, const std::vector<PcGenerator>& gens,
                                 const std::vector<std::optional<PowerRelation>>& powers,
                                 const std::map<std::pair<int, int>, Exps>& comms) {
  (void)name;
  const int n = static_cast<int>(gens.size());
  for (int i = 0; i < n; ++i) {
    const auto& g = gens[static_cast<std::size_t>(i)];
    if (g.weight < 1 || g.weight > cls)
      return "weight violation: generator " + g.name + " has weight " + std::to_string(g.weight) +
             " outside [1, " + std::to_string(cls) + "]";
    if (i > 0 && g.weight < gens[static_cast<std::size_t>(i - 1)].weight)
      return "weight violation: generator " + g.name + " is listed after a generator of larger weight";
  }
  auto weight_of = [&](const Exps& e) {
    int w = cls + 1;
    for (int i = 0; i < n; ++i)
      if (e[static_cast<std::size_t>(i)] != 0) w = std::min(w, gens[static_cast<std::size_t>(i)].weight);
    return w;
  };
  for (int i = 0; i < n; ++i) {
    const auto& p = powers[static_cast<std::size_t>(i)];
    if (!p) continue;
    if (p->order < 2)
      return "power relation for " + gens[static_cast<std::size_t>(i)].name + " has order < 2";
    if (weight_of(p->tail) <= gens[static_cast<std::size_t>(i)].weight)
      return "weight violation: power relation tail of " + gens[static_cast<std::size_t>(i)].name +
             " does not have strictly higher weight";
  }
  for (const auto& [key, word] : comms) {
    auto [j, i] = key;
    int need = gens[static_cast<std::size_t>(i)].weight + gens[static_cast<std::size_t>(j)].weight;
    int have = weight_of(word);
    if (have < need)
      return "weight violation: comm " + gens[static_cast<std::size_t>(j)].name + " " +
             gens[static_cast<std::size_t>(i)].name + " has a word of weight " + std::to_string(have) +
             " < required " + std::to_string(need) +
             (need > cls ? " (exceeds class " + std::to_string(cls) + ")" : std::string());
  }
  return {};
}

}  // namespace

PcPresentation::PcPresentation(std::string name, int nilpotency_class, std::vector<PcGenerator> gens,
                               std::vector<std::optional<PowerRelation>> powers,
                               std::map<std::pair<int, int>, Exps> commutators)
    : name_(std::move(name)),
      class_(nilpotency_class),
      gens_(std::move(gens)),
      powers_(std::move(powers)),
      comms_(std::move(commutators)) {
  const int n = ngens();
  if (class_ < 1) throw InconsistentPresentation("class must be positive");
  if (static_cast<int>(powers_.size()) != n) powers_.resize(static_cast<std::size_t>(n));
  for (auto& p : powers_)
    if (p && static_cast<int>(p->tail.size()) != n) throw InconsistentPresentation("power tail has wrong length");
  for (auto it = comms_.begin(); it != comms_.end();) {
    auto [j, i] = it->first;
    if (j <= i || i < 0 || j >= n) throw InconsistentPresentation("commutator relation keys must satisfy j > i");
    if (static_cast<int>(it->second.size()) != n) throw InconsistentPresentation("commutator word has wrong length");
    if (std::all_of(it->second.begin(), it->second.end(), [](Exp e) { return e == 0; }))
      it = comms_.erase(it);
    else
      ++it;
  }
  commutes_.assign(static_cast<std::size_t>(n), std::vector<bool>(static_cast<std::size_t>(n), true));
  for (const auto& [key, word] : comms_) commutes_[static_cast<std::size_t>(key.second)][static_cast<std::size_t>(key.first)] = false;

  if (!structural_violation(name_, class_, gens_, powers_, comms_).empty()) return;

  conj_.assign(static_cast<std::size_t>(n), {});
  conj_inv_.assign(static_cast<std::size_t>(n), {});
  for (int i = n - 1; i >= 0; --i) {
    auto& c = conj_[static_cast<std::size_t>(i)];
    auto& ci = conj_inv_[static_cast<std::size_t>(i)];
    c.assign(static_cast<std::size_t>(n), Exps{});
    ci.assign(static_cast<std::size_t>(n), Exps{});
    for (int j = i + 1; j < n; ++j) {
      Exps aj = gen(j);
      c[static_cast<std::size_t>(j)] = mul(aj, commutator_relation(j, i));
    }
    for (int j = i + 1; j < n; ++j) {
      Exps aj = gen(j);
      if (commutes_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
        ci[static_cast<std::size_t>(j)] = aj;
        continue;
      }
      // solve y^{a_i} = a_j by successive correction
      Exps y = aj;
      bool done = false;
      for (int iter = 0; iter < 2 * class_ + 4; ++iter) {
        Exps z = apply_images(c, i, y);
        if (z == aj) {
          done = true;
          break;
        }
        y = mul(mul(y, inv(z)), aj);
      }
      if (!done) throw InconsistentPresentation("conjugation by an inverse generator did not converge");
      ci[static_cast<std::size_t>(j)] = y;
    }
  }
}

std::optional<int> PcPresentation::find_generator(const std::string& name) const {
  for (int i = 0; i < ngens(); ++i)
    if (gens_[static_cast<std::size_t>(i)].name == name) return i;
  return std::nullopt;
}

Exps PcPresentation::commutator_relation(int j, int i) const {
  auto it = comms_.find({j, i});
  if (it == comms_.end()) return identity();
  return it->second;
}

bool PcPresentation::is_torsion_free() const {
  return std::none_of(powers_.begin(), powers_.end(), [](const auto& p) { return p.has_value(); });
}

bool PcPresentation::is_finite() const {
  return std::all_of(powers_.begin(), powers_.end(), [](const auto& p) { return p.has_value(); });
}

std::optional<std::uint64_t> PcPresentation::order() const {
  std::uint64_t n = 1;
  for (const auto& p : powers_) {
    if (!p) return std::nullopt;
    if (__builtin_mul_overflow(n, static_cast<std::uint64_t>(p->order), &n)) return std::nullopt;
  }
  return n;
}

Exps PcPresentation::gen(int i, Exp k) const {
  Exps e = identity();
  return mul_gen_power(e, i, k);
}

Exps PcPresentation::suffix(const Exps& x, int i) const {
  Exps s = identity();
  for (int j = i + 1; j < ngens(); ++j) s[static_cast<std::size_t>(j)] = x[static_cast<std::size_t>(j)];
  return s;
}

bool PcPresentation::conjugation_trivial_on(int i, const Exps& s) const {
  for (int j = i + 1; j < ngens(); ++j)
    if (s[static_cast<std::size_t>(j)] != 0 && !commutes_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
      return false;
  return true;
}

Exps PcPresentation::apply_images(const std::vector<Exps>& images, int i, const Exps& s) const {
  Exps r = identity();
  for (int j = i + 1; j < ngens(); ++j) {
    Exp e = s[static_cast<std::size_t>(j)];
    if (e == 0) continue;
    r = mul(r, pow(images[static_cast<std::size_t>(j)], e));
  }
  return r;
}

std::vector<Exps> PcPresentation::conjugation_power(int i, Exp k) const {
  if (conj_.empty()) throw InconsistentPresentation("collection on a presentation that fails weight checks");
  if (k == 1) return conj_[static_cast<std::size_t>(i)];
  if (k == -1) return conj_inv_[static_cast<std::size_t>(i)];
  std::vector<Exps> base = k > 0 ? conj_[static_cast<std::size_t>(i)] : conj_inv_[static_cast<std::size_t>(i)];
  std::uint64_t n = k > 0 ? static_cast<std::uint64_t>(k) : static_cast<std::uint64_t>(-(k + 1)) + 1;
  std::vector<Exps> acc(static_cast<std::size_t>(ngens()));
  for (int j = i + 1; j < ngens(); ++j) acc[static_cast<std::size_t>(j)] = gen(j);
  auto compose = [&](const std::vector<Exps>& outer, const std::vector<Exps>& inner) {
    std::vector<Exps> out(static_cast<std::size_t>(ngens()));
    for (int j = i + 1; j < ngens(); ++j)
      out[static_cast<std::size_t>(j)] = apply_images(outer, i, inner[static_cast<std::size_t>(j)]);
    return out;
  };
  while (n > 0) {
    if (n & 1U) acc = compose(base, acc);
    n >>= 1U;
    if (n > 0) base = compose(base, base);
  }
  return acc;
}

Exps PcPresentation::mul_gen_power(const Exps& x, int i, Exp k) const {
  if (k == 0) return x;
  if (conj_.empty()) throw InconsistentPresentation("collection on a presentation that fails weight checks");
  Exps s = suffix(x, i);
  Exps t = conjugation_trivial_on(i, s) ? s : apply_images(conjugation_power(i, k), i, s);
  Exp ne = detail::checked_add(x[static_cast<std::size_t>(i)], k);
  const auto& p = powers_[static_cast<std::size_t>(i)];
  if (p) {
    Exp q = floor_div<Exp>(ne, p->order);
    ne -= q * p->order;
    if (q != 0) t = mul(pow(p->tail, q), t);
  }
  Exps r = x;
  r[static_cast<std::size_t>(i)] = ne;
  for (int j = i + 1; j < ngens(); ++j) r[static_cast<std::size_t>(j)] = t[static_cast<std::size_t>(j)];
  return r;
}

Exps PcPresentation::mul(const Exps& x, const Exps& y) const {
  Exps r = x;
  for (int i = 0; i < ngens(); ++i)
    if (y[static_cast<std::size_t>(i)] != 0) r = mul_gen_power(r, i, y[static_cast<std::size_t>(i)]);
  return r;
}

Exps PcPresentation::inv(const Exps& x) const {
  Exps r = identity();
  for (int i = ngens() - 1; i >= 0; --i)
    if (x[static_cast<std::size_t>(i)] != 0) r = mul_gen_power(r, i, -x[static_cast<std::size_t>(i)]);
  return r;
}

Exps PcPresentation::pow(const Exps& x, Exp k) const {
  if (k == 0) return identity();
  Exps base = k > 0 ? x : inv(x);
  std::uint64_t n = k > 0 ? static_cast<std::uint64_t>(k) : static_cast<std::uint64_t>(-(k + 1)) + 1;
  // single-generator fast path
  int lo = support_min(base);
  bool single = lo < ngens();
  for (int j = lo + 1; single && j < ngens(); ++j)
    if (base[static_cast<std::size_t>(j)] != 0) single = false;
  if (single && n <= static_cast<std::uint64_t>(INT64_MAX))
    return gen(lo, detail::checked_mul(base[static_cast<std::size_t>(lo)], static_cast<Exp>(n)));
  Exps acc = identity();
  while (n > 0) {
    if (n & 1U) acc = mul(acc, base);
    n >>= 1U;
    if (n > 0) base = mul(base, base);
  }
  return acc;
}

Exps PcPresentation::comm(const Exps& x, const Exps& y) const { return mul(mul(inv(x), inv(y)), mul(x, y)); }

Exps PcPresentation::from_syllables(const std::vector<std::pair<int, Exp>>& word) const {
  Exps r = identity();
  for (const auto& [g, e] : word) r = mul_gen_power(r, g, e);
  return r;
}

Exps PcPresentation::normalize(const Exps& e) const {
  Exps r = identity();
  for (int i = 0; i < ngens(); ++i)
    if (e[static_cast<std::size_t>(i)] != 0) r = mul_gen_power(r, i, e[static_cast<std::size_t>(i)]);
  return r;
}

std::string PcPresentation::format(const Exps& e) const {
  std::string out;
  for (int i = 0; i < ngens(); ++i) {
    Exp x = e[static_cast<std::size_t>(i)];
    if (x == 0) continue;
    if (!out.empty()) out += "*";
    out += gens_[static_cast<std::size_t>(i)].name;
    if (x != 1) out += "^" + std::to_string(x);
  }
  return out.empty() ? "1" : out;
}

std::string PcPresentation::to_text() const {
  std::ostringstream os;
  os << "group " << name_ << "\n";
  os << "class " << class_ << "\n";
  for (const auto& g : gens_) os << "gen " << g.name << " " << g.weight << "\n";
  for (int i = 0; i < ngens(); ++i) {
    const auto& p = powers_[static_cast<std::size_t>(i)];
    if (p) os << "pow " << gens_[static_cast<std::size_t>(i)].name << " " << p->order << " = " << format(p->tail) << "\n";
  }
  for (const auto& [key, word] : comms_)
    os << "comm " << gens_[static_cast<std::size_t>(key.first)].name << " "
       << gens_[static_cast<std::size_t>(key.second)].name << " = " << format(word) << "\n";
  return os.str();
}

// ---------------------------------------------------------------- parsing

namespace {

struct Token {
  std::string text;
  int line = 0, col = 0;
};

// Split into statements (newline or ';'), dropping '#' comments.
std::vector<std::vector<Token>> tokenize_statements(const std::string& text) {
  std::vector<std::vector<Token>> stmts;
  std::vector<Token> cur;
  int line = 1, col = 1;
  std::size_t i = 0;
  auto flush = [&] {
    if (!cur.empty()) stmts.push_back(std::move(cur));
    cur.clear();
  };
  while (i < text.size()) {
    char ch = text[i];
    if (ch == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (ch == '\n' || ch == ';') {
      flush();
      if (ch == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
      ++col;
      continue;
    }
    Token t{"", line, col};
    if (ch == '=') {
      t.text = "=";
      ++i;
      ++col;
    } else {
      while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) && text[i] != ';' &&
             text[i] != '#' && text[i] != '=') {
        t.text += text[i];
        ++i;
        ++col;
      }
    }
    cur.push_back(t);
  }
  flush();
  return stmts;
}

Exp parse_exp(const Token& t, const std::string& s, int offset) {
  try {
    std::size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError("expected an integer, found '" + s + "'", t.line, t.col + offset);
  }
}

std::vector<std::pair<int, Exp>> parse_word_tokens(const std::vector<Token>& toks, std::size_t from,
                                                   const std::vector<PcGenerator>& gens) {
  std::string joined;
  if (from >= toks.size()) {
    const Token& last = toks.back();
    throw ParseError("missing word after '='", last.line, last.col + static_cast<int>(last.text.size()));
  }
  const Token& first = toks[from];
  for (std::size_t k = from; k < toks.size(); ++k) joined += toks[k].text;
  std::vector<std::pair<int, Exp>> out;
  if (joined == "1") return out;
  std::size_t pos = 0;
  while (pos <= joined.size()) {
    std::size_t star = joined.find('*', pos);
    std::string factor = joined.substr(pos, star == std::string::npos ? std::string::npos : star - pos);
    if (factor.empty()) throw ParseError("empty factor in word", first.line, first.col + static_cast<int>(pos));
    std::size_t caret = factor.find('^');
    std::string gname = factor.substr(0, caret);
    Exp e = 1;
    if (caret != std::string::npos) e = parse_exp(first, factor.substr(caret + 1), static_cast<int>(pos + caret + 1));
    int idx = -1;
    for (std::size_t g = 0; g < gens.size(); ++g)
      if (gens[g].name == gname) idx = static_cast<int>(g);
    if (idx < 0) throw ParseError("unknown generator '" + gname + "'", first.line, first.col + static_cast<int>(pos));
    out.emplace_back(idx, e);
    if (star == std::string::npos) break;
    pos = star + 1;
  }
  return out;
}

Exps normal_form_vector(const std::vector<std::pair<int, Exp>>& word, std::size_t n, const Token& at) {
  Exps e(n, 0);
  int last = -1;
  for (const auto& [g, x] : word) {
    if (g <= last) throw ParseError("relation word is not in normal form (generators must increase)", at.line, at.col);
    e[static_cast<std::size_t>(g)] = x;
    last = g;
  }
  return e;
}

}  // namespace

PcPresentationPtr parse_presentation(const std::string& text) {
  std::string name;
  int cls = 0;
  std::vector<PcGenerator> gens;
  struct PendingPow {
    int gen;
    Exp order;
    std::vector<std::pair<int, Exp>> word;
    Token at;
  };
  std::vector<PendingPow> pows;
  std::map<std::pair<int, int>, Exps> comms;
  std::vector<std::pair<std::pair<int, int>, std::pair<std::vector<std::pair<int, Exp>>, Token>>> pending_comms;

  auto find = [&](const Token& t) {
    for (std::size_t g = 0; g < gens.size(); ++g)
      if (gens[g].name == t.text) return static_cast<int>(g);
    throw ParseError("unknown generator '" + t.text + "'", t.line, t.col);
  };
  auto expect_eq = [](const std::vector<Token>& s, std::size_t at) {
    if (s.size() <= at || s[at].text != "=") {
      const Token& t = s.size() > at ? s[at] : s.back();
      throw ParseError("expected '='", t.line, t.col);
    }
  };

  for (const auto& s : tokenize_statements(text)) {
    const std::string& kw = s[0].text;
    if (kw == "group") {
      if (s.size() != 2) throw ParseError("usage: group <name>", s[0].line, s[0].col);
      name = s[1].text;
    } else if (kw == "class") {
      if (s.size() != 2) throw ParseError("usage: class <c>", s[0].line, s[0].col);
      cls = static_cast<int>(parse_exp(s[1], s[1].text, 0));
      if (cls < 1) throw ParseError("class must be positive", s[1].line, s[1].col);
    } else if (kw == "gen") {
      if (s.size() != 3) throw ParseError("usage: gen <name> <weight>", s[0].line, s[0].col);
      for (const auto& g : gens)
        if (g.name == s[1].text) throw ParseError("duplicate generator '" + s[1].text + "'", s[1].line, s[1].col);
      const std::string& nm = s[1].text;
      if (nm.empty() || !(std::isalpha(static_cast<unsigned char>(nm[0])) || nm[0] == '_'))
        throw ParseError("generator names must start with a letter", s[1].line, s[1].col);
      gens.push_back({nm, static_cast<int>(parse_exp(s[2], s[2].text, 0))});
    } else if (kw == "pow") {
      if (s.size() < 5) throw ParseError("usage: pow <gen> <m> = <word>", s[0].line, s[0].col);
      int g = find(s[1]);
      Exp m = parse_exp(s[2], s[2].text, 0);
      expect_eq(s, 3);
      pows.push_back({g, m, parse_word_tokens(s, 4, gens), s[4]});
    } else if (kw == "comm") {
      if (s.size() < 5) throw ParseError("usage: comm <gen_j> <gen_i> = <word>", s[0].line, s[0].col);
      int j = find(s[1]), i = find(s[2]);
      if (j <= i) throw ParseError("comm expects the later generator first ([a_j, a_i] with j > i)", s[1].line, s[1].col);
      expect_eq(s, 3);
      pending_comms.push_back({{j, i}, {parse_word_tokens(s, 4, gens), s[4]}});
    } else {
      throw ParseError("unknown statement '" + kw + "'", s[0].line, s[0].col);
    }
  }
  if (cls == 0) throw ParseError("missing 'class' statement", 1, 1);
  if (gens.empty()) throw ParseError("presentation has no generators", 1, 1);
  const std::size_t n = gens.size();
  std::vector<std::optional<PowerRelation>> powers(n);
  for (const auto& p : pows) {
    if (powers[static_cast<std::size_t>(p.gen)]) throw ParseError("duplicate power relation", p.at.line, p.at.col);
    powers[static_cast<std::size_t>(p.gen)] = PowerRelation{p.order, normal_form_vector(p.word, n, p.at)};
  }
  for (const auto& [key, wt] : pending_comms) {
    if (comms.count(key)) throw ParseError("duplicate commutator relation", wt.second.line, wt.second.col);
    comms[key] = normal_form_vector(wt.first, n, wt.second);
  }
  return std::make_shared<const PcPresentation>(name.empty() ? "G" : name, cls, std::move(gens), std::move(powers),
                                                std::move(comms));
}

PcPresentationPtr load_presentation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_presentation(ss.str());
}

// ---------------------------------------------------------------- consistency

ConsistencyReport check_consistency(const PcPresentation& P) {
  ConsistencyReport rep;
  std::string v = structural_violation(P.name(), P.nilpotency_class(), P.generators(),
                                       [&] {
                                         std::vector<std::optional<PowerRelation>> ps;
                                         for (int i = 0; i < P.ngens(); ++i) ps.push_back(P.power(i));
                                         return ps;
                                       }(),
                                       P.commutator_relations());
  if (!v.empty()) {
    rep.ok = false;
    rep.violation = v;
    return rep;
  }
  const int n = P.ngens();
  auto name = [&](int i) { return P.generator(i).name; };
  auto fail = [&](const std::string& what) {
    rep.ok = false;
    rep.violation = what;
    return rep;
  };
  try {
    for (int k = n - 1; k >= 0; --k)
      for (int j = k - 1; j >= 0; --j)
        for (int i = j - 1; i >= 0; --i) {
          Exps l = P.mul(P.mul(P.gen(k), P.gen(j)), P.gen(i));
          Exps r = P.mul(P.gen(k), P.mul(P.gen(j), P.gen(i)));
          if (l != r) return fail("associativity fails for (" + name(k) + " " + name(j) + ") " + name(i));
        }
    for (int j = 0; j < n; ++j) {
      const auto& pj = P.power(j);
      for (int i = 0; i < j; ++i) {
        if (pj) {
          // (a_j^{m_j}) a_i = a_j^{m_j - 1} (a_j a_i)
          Exps l = P.mul(pj->tail, P.gen(i));
          Exps r = P.mul(P.gen(j, pj->order - 1), P.mul(P.gen(j), P.gen(i)));
          if (l != r) return fail("power overlap fails for " + name(j) + "^" + std::to_string(pj->order) + " " + name(i));
        }
        const auto& pi = P.power(i);
        if (pi) {
          // a_j (a_i^{m_i}) = (a_j a_i) a_i^{m_i - 1}
          Exps l = P.mul(P.gen(j), pi->tail);
          Exps r = P.mul(P.mul(P.gen(j), P.gen(i)), P.gen(i, pi->order - 1));
          if (l != r) return fail("power overlap fails for " + name(j) + " " + name(i) + "^" + std::to_string(pi->order));
        } else {
          // a_j = (a_j a_i^{-1}) a_i
          Exps l = P.mul(P.mul(P.gen(j), P.gen(i, -1)), P.gen(i));
          if (l != P.gen(j)) return fail("inverse test fails for " + name(j) + " " + name(i) + "^-1");
        }
      }
      if (pj) {
        // a_j (a_j^{m_j}) = (a_j^{m_j}) a_j
        if (P.mul(P.gen(j), pj->tail) != P.mul(pj->tail, P.gen(j)))
          return fail("power overlap fails for " + name(j) + "^" + std::to_string(pj->order + 1));
      }
    }
  } catch (const InconsistentPresentation& e) {
    return fail(e.what());
  }
  return rep;
}

// ---------------------------------------------------------------- elements

GroupElement::GroupElement(PcPresentationPtr owner, Exps exps) : owner_(std::move(owner)), exps_(std::move(exps)) {
  if (static_cast<int>(exps_.size()) != owner_->ngens())
    throw DimensionError("GroupElement: exponent vector has the wrong length");
}

GroupElement GroupElement::identity(const PcPresentationPtr& owner) { return {owner, owner->identity()}; }

GroupElement GroupElement::generator(const PcPresentationPtr& owner, int i, Exp k) { return {owner, owner->gen(i, k)}; }

bool GroupElement::is_identity() const {
  return std::all_of(exps_.begin(), exps_.end(), [](Exp e) { return e == 0; });
}

void GroupElement::require_same_owner(const GroupElement& other) const {
  if (owner_ != other.owner_) throw OwnerMismatch("group elements belong to different presentations");
}

GroupElement GroupElement::operator*(const GroupElement& other) const {
  require_same_owner(other);
  return {owner_, owner_->mul(exps_, other.exps_)};
}

GroupElement GroupElement::inverse() const { return {owner_, owner_->inv(exps_)}; }

GroupElement GroupElement::pow(Exp k) const { return {owner_, owner_->pow(exps_, k)}; }

bool GroupElement::operator==(const GroupElement& other) const {
  require_same_owner(other);
  return exps_ == other.exps_;
}

GroupElement commutator(const GroupElement& x, const GroupElement& y) {
  if (x.owner() != y.owner()) throw OwnerMismatch("commutator of elements from different presentations");
  return {x.owner(), x.owner()->comm(x.exponents(), y.exponents())};
}

// ---------------------------------------------------------------- sections

IntVector LcsSection::log(const Exps& e) const {
  IntVector v(static_cast<Index>(generators.size()));
  for (std::size_t k = 0; k < generators.size(); ++k)
    v(static_cast<Index>(k)) = Integer(e[static_cast<std::size_t>(generators[k])]);
  return group->reduce(v);
}

Exps LcsSection::exp(const IntVector& coords, const PcPresentation& P) const {
  IntVector c = group->reduce(coords);
  std::vector<std::pair<int, Exp>> word;
  for (std::size_t k = 0; k < generators.size(); ++k)
    word.emplace_back(generators[k], static_cast<Exp>(c(static_cast<Index>(k))));
  return P.from_syllables(word);
}

LcsSection lcs_section(const PcPresentation& P, int i) {
  if (i < 1 || i > P.nilpotency_class())
    throw PreconditionError("lcs_section: index " + std::to_string(i) + " outside [1, class]");
  LcsSection s;
  for (int g = 0; g < P.ngens(); ++g)
    if (P.weight(g) == i) s.generators.push_back(g);
  const Index k = static_cast<Index>(s.generators.size());
  std::vector<IntVector> rows;
  for (Index a = 0; a < k; ++a) {
    const auto& p = P.power(s.generators[static_cast<std::size_t>(a)]);
    if (!p) continue;
    IntVector r = IntVector::Zero(k);
    r(a) = Integer(p->order);  // tail has higher weight, so it vanishes here
    rows.push_back(r);
  }
  IntMatrix R(static_cast<Index>(rows.size()), k);
  for (std::size_t r = 0; r < rows.size(); ++r) R.row(static_cast<Index>(r)) = rows[r].transpose();
  s.group = ab_from_relations(k, R);
  return s;
}

Truncation truncate_to_class(const PcPresentationPtr& P, int k) {
  if (k < 1 || k > P->nilpotency_class())
    throw PreconditionError("truncate_to_class: k must lie in [1, class]");
  if (k == P->nilpotency_class()) return {P, P->ngens()};
  int kept = 0;
  while (kept < P->ngens() && P->weight(kept) <= k) ++kept;
  std::vector<PcGenerator> gens(P->generators().begin(), P->generators().begin() + kept);
  auto cut = [&](const Exps& e) { return Exps(e.begin(), e.begin() + kept); };
  std::vector<std::optional<PowerRelation>> powers;
  for (int i = 0; i < kept; ++i) {
    const auto& p = P->power(i);
    if (p)
      powers.push_back(PowerRelation{p->order, cut(p->tail)});
    else
      powers.emplace_back();
  }
  std::map<std::pair<int, int>, Exps> comms;
  for (const auto& [key, word] : P->commutator_relations())
    if (key.first < kept) comms[key] = cut(word);
  auto Q = std::make_shared<const PcPresentation>(P->name() + "_c" + std::to_string(k), k, std::move(gens),
                                                  std::move(powers), std::move(comms));
  return {Q, kept};
}

namespace {

// Exponent vectors u over the weight-1 generators with sum_j u_j * images[j] = 0
// in the abelian group B (columns of `images` hold B-coordinates).
std::vector<IntVector> kernel_into(const AbGroup& B, const std::vector<std::vector<IntVector>>& images, Index nvars) {
  // images[t][j]: B-coordinates of the t-th condition for variable j
  const Index d = B.ngens();
  const Index nconds = static_cast<Index>(images.size());
  const Index nrel = B.relations().rows();
  IntMatrix M = IntMatrix::Zero(nconds * d, nvars + nconds * nrel);
  for (Index t = 0; t < nconds; ++t) {
    for (Index j = 0; j < nvars; ++j)
      for (Index r = 0; r < d; ++r) M(t * d + r, j) = images[static_cast<std::size_t>(t)][static_cast<std::size_t>(j)](r);
    for (Index q = 0; q < nrel; ++q)
      for (Index r = 0; r < d; ++r) M(t * d + r, nvars + t * nrel + q) = B.relations()(q, r);
  }
  std::vector<IntVector> ker = kernel_basis<Integer>(M);
  IntMatrix proj(static_cast<Index>(ker.size()), nvars);
  for (Index r = 0; r < proj.rows(); ++r) proj.row(r) = ker[static_cast<std::size_t>(r)].head(nvars).transpose();
  HnfResult<Integer> h = hnf<Integer>(proj);
  std::vector<IntVector> out;
  for (Index r = 0; r < h.rank(); ++r) out.push_back(h.H.row(r).transpose());
  return out;
}

std::vector<GroupElement> solve_commuting(const PcPresentationPtr& P, const std::vector<Exps>& targets) {
  if (P->nilpotency_class() > 2) throw PreconditionError("centralizer computation requires class <= 2");
  std::vector<int> w1;
  for (int g = 0; g < P->ngens(); ++g)
    if (P->weight(g) == 1) w1.push_back(g);
  std::vector<GroupElement> out;
  if (P->nilpotency_class() == 1) {
    // abelian: everything commutes
    for (int g = 0; g < P->ngens(); ++g) out.push_back(GroupElement::generator(P, g));
    return out;
  }
  LcsSection B = lcs_section(*P, 2);
  std::vector<std::vector<IntVector>> images;
  for (const Exps& t : targets) {
    std::vector<IntVector> row;
    for (int g : w1) row.push_back(B.log(P->comm(P->gen(g), t)));
    images.push_back(row);
  }
  for (const IntVector& u : kernel_into(*B.group, images, static_cast<Index>(w1.size()))) {
    std::vector<std::pair<int, Exp>> word;
    for (std::size_t k = 0; k < w1.size(); ++k) word.emplace_back(w1[k], static_cast<Exp>(u(static_cast<Index>(k))));
    GroupElement z(P, P->from_syllables(word));
    if (!z.is_identity()) out.push_back(z);
  }
  for (int g = 0; g < P->ngens(); ++g)
    if (P->weight(g) >= 2) out.push_back(GroupElement::generator(P, g));
  return out;
}

}  // namespace

std::vector<GroupElement> center_class2(const PcPresentationPtr& P) {
  std::vector<Exps> targets;
  for (int g = 0; g < P->ngens(); ++g) targets.push_back(P->gen(g));
  return solve_commuting(P, targets);
}

std::vector<GroupElement> centralizer_class2(const PcPresentationPtr& P, const GroupElement& g) {
  if (g.owner() != P) throw OwnerMismatch("centralizer_class2: element from another presentation");
  return solve_commuting(P, {g.exponents()});
}

PcPresentationPtr finite_quotient(const PcPresentationPtr& P, Exp m) {
  if (m < 2) throw PreconditionError("finite_quotient: modulus must be at least 2");
  if (!P->is_torsion_free())
    throw PreconditionError("finite_quotient: only defined for torsion-free presentations");
  const int n = P->ngens();
  std::vector<std::optional<PowerRelation>> powers;
  for (int i = 0; i < n; ++i) powers.push_back(PowerRelation{m, P->identity()});
  std::map<std::pair<int, int>, Exps> comms;
  for (const auto& [key, word] : P->commutator_relations()) {
    Exps w = word;
    for (Exp& e : w) e = mod_floor<Exp>(e, m);
    comms[key] = w;
  }
  auto Q = std::make_shared<const PcPresentation>(P->name() + "_mod" + std::to_string(m), P->nilpotency_class(),
                                                  P->generators(), std::move(powers), std::move(comms));
  ConsistencyReport rep = check_consistency(*Q);
  if (!rep) throw InconsistentPresentation("finite_quotient(" + std::to_string(m) + "): " + rep.violation);
  return Q;
}

GateVerdict nva_gate(const PcPresentationPtr& P) {
  GateVerdict v;
  if (P->nilpotency_class() < 2) {
    v.section_rank = 0;
  } else {
    Truncation t = truncate_to_class(P, 2);
    v.section_rank = lcs_section(*t.presentation, 2).group->free_rank();
  }
  v.proceed = v.section_rank >= 1;
  if (v.proceed) {
    v.message = "G'/gamma_3(G) has torsion-free rank " + std::to_string(v.section_rank) + "; proceeding";
  } else {
    v.message =
        "stop: G'/gamma_3(G) is finite, so G is virtually abelian; finitely generated virtually abelian "
        "groups have decidable first-order theory (with constants), hence a decidable Diophantine problem";
  }
  return v;
}

}  // namespace einterp
