#include "einterp/eqlang.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace einterp {

namespace {

TermPtr make(TermKind k, std::string name = {}, std::int64_t v = 0, std::vector<TermPtr> args = {}) {
  auto t = std::make_shared<Term>();
  t->kind = k;
  t->name = std::move(name);
  t->value = v;
  t->args = std::move(args);
  return t;
}

}  // namespace

TermPtr Term::var(std::string n) { return make(TermKind::Var, std::move(n)); }
TermPtr Term::gen(std::string n) { return make(TermKind::Gen, std::move(n)); }
TermPtr Term::integer(std::int64_t v) { return make(TermKind::Int, {}, v); }
TermPtr Term::one() { return make(TermKind::One); }
TermPtr Term::mul(TermPtr a, TermPtr b) { return make(TermKind::Mul, {}, 0, {std::move(a), std::move(b)}); }
TermPtr Term::pow(TermPtr a, std::int64_t k) { return make(TermKind::Pow, {}, k, {std::move(a)}); }
TermPtr Term::comm(TermPtr a, TermPtr b) { return make(TermKind::Comm, {}, 0, {std::move(a), std::move(b)}); }
TermPtr Term::add(TermPtr a, TermPtr b) { return make(TermKind::Add, {}, 0, {std::move(a), std::move(b)}); }
TermPtr Term::sub(TermPtr a, TermPtr b) { return make(TermKind::Sub, {}, 0, {std::move(a), std::move(b)}); }
TermPtr Term::neg(TermPtr a) { return make(TermKind::Neg, {}, 0, {std::move(a)}); }

bool same_term(const TermPtr& a, const TermPtr& b) {
  if (a == b) return true;
  if (a->kind != b->kind || a->name != b->name || a->value != b->value || a->args.size() != b->args.size())
    return false;
  for (std::size_t i = 0; i < a->args.size(); ++i)
    if (!same_term(a->args[i], b->args[i])) return false;
  return true;
}

void collect_vars(const TermPtr& t, std::set<std::string>& out) {
  if (t->kind == TermKind::Var) out.insert(t->name);
  for (const auto& a : t->args) collect_vars(a, out);
}

bool is_group_term(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Gen:
    case TermKind::One:
    case TermKind::Mul:
    case TermKind::Pow:
    case TermKind::Comm:
      return true;
    default:
      return false;
  }
}

TermPtr substitute(const TermPtr& t, const std::map<std::string, TermPtr>& sub) {
  if (t->kind == TermKind::Var) {
    auto it = sub.find(t->name);
    return it == sub.end() ? t : it->second;
  }
  if (t->args.empty()) return t;
  std::vector<TermPtr> args;
  bool changed = false;
  for (const auto& a : t->args) {
    args.push_back(substitute(a, sub));
    changed = changed || args.back() != a;
  }
  if (!changed) return t;
  return make(t->kind, t->name, t->value, std::move(args));
}

TermPtr word_term(const PcPresentation& P, const Exps& e) {
  TermPtr out;
  for (int i = 0; i < P.ngens(); ++i) {
    Exp x = e[static_cast<std::size_t>(i)];
    if (x == 0) continue;
    TermPtr f = Term::gen(P.generator(i).name);
    if (x != 1) f = Term::pow(f, x);
    out = out ? Term::mul(out, f) : f;
  }
  return out ? out : Term::one();
}

std::string Sort::str() const {
  switch (kind) {
    case Group:
      return "group " + group;
    case RingZ:
      return "ring Z";
    case RingMod:
      return "ring mod " + std::to_string(modulus);
    case RingScalars:
      return "ring scalars";
  }
  return {};
}

bool EquationSystem::is_var(const std::string& n) const {
  for (const auto& v : vars)
    if (v == n) return true;
  for (const auto& v : exists)
    if (v == n) return true;
  return false;
}

std::vector<std::string> EquationSystem::all_vars() const {
  std::vector<std::string> out = vars;
  out.insert(out.end(), exists.begin(), exists.end());
  return out;
}

bool same_system(const EquationSystem& a, const EquationSystem& b) {
  if (a.name != b.name || !(a.sort == b.sort) || a.vars != b.vars || a.exists != b.exists ||
      a.eqs.size() != b.eqs.size())
    return false;
  for (std::size_t i = 0; i < a.eqs.size(); ++i)
    if (!same_term(a.eqs[i].lhs, b.eqs[i].lhs) || !same_term(a.eqs[i].rhs, b.eqs[i].rhs)) return false;
  return true;
}

// ---------------------------------------------------------------- printing

namespace {

int ring_prec(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Add:
    case TermKind::Sub:
      return 1;
    case TermKind::Mul:
      return 2;
    case TermKind::Neg:
      return 3;
    case TermKind::Int:
      return t->value < 0 ? 3 : 4;
    default:
      return 4;
  }
}

std::string print_ring(const TermPtr& t, int min_prec);

std::string wrap_ring(const TermPtr& t, int min_prec) {
  std::string s = print_ring(t, 0);
  return ring_prec(t) < min_prec ? "(" + s + ")" : s;
}

std::string print_ring(const TermPtr& t, int) {
  switch (t->kind) {
    case TermKind::Var:
      return t->name;
    case TermKind::Int:
      return std::to_string(t->value);
    case TermKind::Add:
      return wrap_ring(t->args[0], 1) + " + " + wrap_ring(t->args[1], 2);
    case TermKind::Sub:
      return wrap_ring(t->args[0], 1) + " - " + wrap_ring(t->args[1], 2);
    case TermKind::Mul:
      return wrap_ring(t->args[0], 2) + "*" + wrap_ring(t->args[1], 3);
    case TermKind::Neg:
      if (t->args[0]->kind == TermKind::Int) return "-(" + std::to_string(t->args[0]->value) + ")";
      return "-" + wrap_ring(t->args[0], 4);
    default:
      throw std::logic_error("group operation inside a ring term");
  }
}

int group_prec(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Mul:
      return 1;
    case TermKind::Pow:
      return 2;
    default:
      return 3;
  }
}

std::string print_group(const TermPtr& t);

std::string wrap_group(const TermPtr& t, int min_prec) {
  std::string s = print_group(t);
  return group_prec(t) < min_prec ? "(" + s + ")" : s;
}

std::string print_group(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Var:
    case TermKind::Gen:
      return t->name;
    case TermKind::One:
      return "1";
    case TermKind::Mul:
      return wrap_group(t->args[0], 1) + "*" + wrap_group(t->args[1], 2);
    case TermKind::Pow:
      return wrap_group(t->args[0], 2) + "^" + std::to_string(t->value);
    case TermKind::Comm:
      return "[" + print_group(t->args[0]) + "," + print_group(t->args[1]) + "]";
    default:
      throw std::logic_error("ring operation inside a group term");
  }
}

bool ring_term(const TermPtr& t) {
  switch (t->kind) {
    case TermKind::Int:
    case TermKind::Add:
    case TermKind::Sub:
    case TermKind::Neg:
      return true;
    case TermKind::Mul:
      return ring_term(t->args[0]) || ring_term(t->args[1]);
    default:
      return false;
  }
}

}  // namespace

std::string print_term(const TermPtr& t) { return ring_term(t) ? print_ring(t, 0) : print_group(t); }

std::string print_system(const EquationSystem& s) {
  std::ostringstream os;
  os << "system " << s.name << "\n";
  os << "sort " << s.sort.str() << "\n";
  if (!s.vars.empty()) {
    os << "var";
    for (const auto& v : s.vars) os << " " << v;
    os << "\n";
  }
  if (!s.exists.empty()) {
    os << "exists";
    for (const auto& v : s.exists) os << " " << v;
    os << "\n";
  }
  const bool ring = s.sort.is_ring();
  for (const auto& e : s.eqs)
    os << "eq " << (ring ? print_ring(e.lhs, 0) : print_group(e.lhs)) << " = "
       << (ring ? print_ring(e.rhs, 0) : print_group(e.rhs)) << "\n";
  return os.str();
}

// ---------------------------------------------------------------- parsing

namespace {

struct Tok {
  enum Kind { Ident, Int, Sym, End } kind;
  std::string text;
  int col;
};

std::vector<Tok> lex(const std::string& s, int line, int base_col) {
  std::vector<Tok> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    int col = base_col + static_cast<int>(i);
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      out.push_back({Tok::Ident, s.substr(i, j - i), col});
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({Tok::Int, s.substr(i, j - i), col});
      i = j;
    } else if (std::string("*^[](),+-=").find(c) != std::string::npos) {
      out.push_back({Tok::Sym, std::string(1, c), col});
      ++i;
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
  }
  out.push_back({Tok::End, "", base_col + static_cast<int>(s.size())});
  return out;
}

class TermParser {
 public:
  TermParser(std::vector<Tok> toks, int line, const EquationSystem& ctx, const PcPresentation* host)
      : toks_(std::move(toks)), line_(line), ctx_(ctx), host_(host) {}

  TermPtr parse(bool ring) { return ring ? ring_expr() : group_term(); }

  const Tok& peek() const { return toks_[pos_]; }
  bool at_sym(const char* s) const { return peek().kind == Tok::Sym && peek().text == s; }
  void expect_sym(const char* s) {
    if (!at_sym(s)) fail(std::string("expected '") + s + "'");
    ++pos_;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    const Tok& t = peek();
    std::string found = t.kind == Tok::End ? "end of line" : "'" + t.text + "'";
    throw ParseError(msg + ", found " + found, line_, t.col);
  }
  void expect_end() {
    if (peek().kind != Tok::End) fail("unexpected trailing input");
  }

 private:
  std::int64_t integer_token() {
    bool negative = false;
    if (at_sym("-")) {
      negative = true;
      ++pos_;
    }
    if (peek().kind != Tok::Int) fail("expected an integer");
    std::int64_t v;
    try {
      v = std::stoll(peek().text);
    } catch (const std::exception&) {
      fail("integer out of range");
    }
    ++pos_;
    return negative ? -v : v;
  }

  // the operator at `op` left its right operand missing
  void require_operand(const Tok& op) {
    const Tok& t = peek();
    bool starts = t.kind == Tok::Ident || t.kind == Tok::Int || (t.kind == Tok::Sym && (t.text == "[" || t.text == "(" || t.text == "-"));
    if (!starts)
      throw ParseError("dangling '" + op.text + "': expected an operand", line_, op.col);
  }

  TermPtr group_term() {
    TermPtr t = group_factor();
    while (at_sym("*")) {
      Tok op = peek();
      ++pos_;
      require_operand(op);
      t = Term::mul(t, group_factor());
    }
    return t;
  }

  TermPtr group_factor() {
    TermPtr t = group_atom();
    while (at_sym("^")) {
      Tok op = peek();
      ++pos_;
      if (!(peek().kind == Tok::Int || at_sym("-")))
        throw ParseError("dangling '^': expected an integer exponent", line_, op.col);
      t = Term::pow(t, integer_token());
    }
    return t;
  }

  TermPtr group_atom() {
    const Tok& t = peek();
    if (t.kind == Tok::Int) {
      if (t.text != "1") fail("only the literal 1 is a group constant");
      ++pos_;
      return Term::one();
    }
    if (t.kind == Tok::Ident) {
      ++pos_;
      return identifier(t, false);
    }
    if (at_sym("(")) {
      ++pos_;
      TermPtr inner = group_term();
      expect_sym(")");
      return inner;
    }
    if (at_sym("[")) {
      ++pos_;
      TermPtr acc = group_term();
      int count = 1;
      while (at_sym(",")) {
        ++pos_;
        acc = Term::comm(acc, group_term());
        ++count;
      }
      if (count < 2) fail("a commutator needs at least two entries");
      expect_sym("]");
      return acc;
    }
    fail("expected a group term");
  }

  TermPtr ring_expr() {
    TermPtr t = ring_product();
    while (at_sym("+") || at_sym("-")) {
      Tok op = peek();
      ++pos_;
      require_operand(op);
      TermPtr r = ring_product();
      t = op.text == "+" ? Term::add(t, r) : Term::sub(t, r);
    }
    return t;
  }

  TermPtr ring_product() {
    TermPtr t = ring_unary();
    while (at_sym("*")) {
      Tok op = peek();
      ++pos_;
      require_operand(op);
      t = Term::mul(t, ring_unary());
    }
    return t;
  }

  TermPtr ring_unary() {
    if (at_sym("-")) {
      Tok op = peek();
      ++pos_;
      if (peek().kind == Tok::Int) {
        --pos_;
        return Term::integer(integer_token());
      }
      require_operand(op);
      return Term::neg(ring_unary());
    }
    const Tok& t = peek();
    if (t.kind == Tok::Int) return Term::integer(integer_token());
    if (t.kind == Tok::Ident) {
      ++pos_;
      return identifier(t, true);
    }
    if (at_sym("(")) {
      ++pos_;
      TermPtr inner = ring_expr();
      expect_sym(")");
      return inner;
    }
    fail("expected a ring term");
  }

  TermPtr identifier(const Tok& t, bool ring) {
    if (ctx_.is_var(t.text)) return Term::var(t.text);
    if (ring) throw ParseError("unknown variable '" + t.text + "'", line_, t.col);
    if (host_ && !host_->find_generator(t.text))
      throw ParseError("unknown constant '" + t.text + "' (not a generator of " + host_->name() + ")", line_, t.col);
    return Term::gen(t.text);
  }

  std::vector<Tok> toks_;
  std::size_t pos_ = 0;
  int line_;
  const EquationSystem& ctx_;
  const PcPresentation* host_;
};

bool valid_name(const std::string& s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  return true;
}

}  // namespace

EquationSystem parse_system(const std::string& text, const PcPresentation* host) {
  EquationSystem s;
  bool have_sort = false;
  struct EqLine {
    std::string body;
    int line, col;
  };
  std::vector<EqLine> eq_lines;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string l = raw.substr(0, raw.find('#'));
    std::istringstream ls(l);
    std::string kw;
    if (!(ls >> kw)) continue;
    int kw_col = static_cast<int>(l.find(kw)) + 1;
    if (kw == "system") {
      if (!(ls >> s.name)) throw ParseError("usage: system <name>", line, kw_col);
    } else if (kw == "sort") {
      std::string a, b, c;
      ls >> a >> b;
      if (a == "group" && !b.empty()) {
        s.sort = {Sort::Group, b, 0};
      } else if (a == "ring" && b == "Z") {
        s.sort = {Sort::RingZ, "", 0};
      } else if (a == "ring" && b == "scalars") {
        s.sort = {Sort::RingScalars, "", 0};
      } else if (a == "ring" && b == "mod" && (ls >> c)) {
        std::int64_t m = 0;
        try {
          m = std::stoll(c);
        } catch (const std::exception&) {
        }
        if (m < 2) throw ParseError("ring modulus must be an integer >= 2", line, kw_col);
        s.sort = {Sort::RingMod, "", m};
      } else {
        throw ParseError("unknown sort '" + a + (b.empty() ? "" : " " + b) + "'", line, kw_col);
      }
      have_sort = true;
    } else if (kw == "var" || kw == "exists") {
      std::string v;
      while (ls >> v) {
        int col = static_cast<int>(l.find(v, static_cast<std::size_t>(kw_col))) + 1;
        if (!valid_name(v)) throw ParseError("invalid variable name '" + v + "'", line, col);
        if (s.is_var(v)) throw ParseError("variable '" + v + "' declared twice", line, col);
        if (host && host->find_generator(v))
          throw ParseError("variable '" + v + "' shadows a generator", line, col);
        (kw == "var" ? s.vars : s.exists).push_back(v);
      }
    } else if (kw == "eq") {
      std::size_t start = l.find("eq") + 2;
      eq_lines.push_back({l.substr(start), line, static_cast<int>(start) + 1});
    } else {
      throw ParseError("unknown statement '" + kw + "'", line, kw_col);
    }
  }
  if (!have_sort) throw ParseError("missing 'sort' line", 1, 1);
  for (const auto& el : eq_lines) {
    auto toks = lex(el.body, el.line, el.col);
    TermParser p(toks, el.line, s, host);
    TermPtr lhs = p.parse(s.sort.is_ring());
    p.expect_sym("=");
    TermPtr rhs = p.parse(s.sort.is_ring());
    p.expect_end();
    s.eqs.push_back({lhs, rhs});
  }
  return s;
}

EquationSystem load_system(const std::string& path, const PcPresentation* host) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_system(ss.str(), host);
}

TermPtr parse_term(const std::string& text, const EquationSystem& context) {
  auto toks = lex(text, 1, 1);
  TermParser p(toks, 1, context, nullptr);
  TermPtr t = p.parse(context.sort.is_ring());
  p.expect_end();
  return t;
}

// ---------------------------------------------------------------- e-definitions

EquationSystem center_edef(const PcPresentation& P) {
  EquationSystem s;
  s.name = "center_" + P.name();
  s.sort = {Sort::Group, P.name(), 0};
  s.vars = {"x"};
  // weight-1 generators generate the group
  for (const auto& g : P.generators())
    if (g.weight == 1) s.eqs.push_back({Term::comm(Term::var("x"), Term::gen(g.name)), Term::one()});
  return s;
}

VerbalWord VerbalWord::commutator(int weight) {
  if (weight < 2) throw PreconditionError("commutator word needs weight >= 2");
  VerbalWord w;
  w.arity = weight;
  TermPtr t = Term::var("x1");
  for (int i = 2; i <= weight; ++i) t = Term::comm(t, Term::var("x" + std::to_string(i)));
  w.word = t;
  return w;
}

int default_commutator_width(const PcPresentation& P) {
  int g = 0;
  for (const auto& gen : P.generators()) g += gen.weight == 1;
  return std::max(1, g * (g - 1) / 2);
}

EquationSystem verbal_edef(const VerbalWord& w, int width, const PcPresentation& P) {
  if (width < 1) throw PreconditionError("verbal_edef: width must be at least 1");
  EquationSystem s;
  s.name = "verbal_" + P.name();
  s.sort = {Sort::Group, P.name(), 0};
  s.vars = {"x"};
  TermPtr prod;
  for (int i = 1; i <= width; ++i) {
    std::map<std::string, TermPtr> ys, zs;
    for (int k = 1; k <= w.arity; ++k) {
      std::string y = "y" + std::to_string(i) + "_" + std::to_string(k);
      std::string z = "z" + std::to_string(i) + "_" + std::to_string(k);
      s.exists.push_back(y);
      ys["x" + std::to_string(k)] = Term::var(y);
      zs["x" + std::to_string(k)] = Term::var(z);
    }
    for (int k = 1; k <= w.arity; ++k) s.exists.push_back("z" + std::to_string(i) + "_" + std::to_string(k));
    TermPtr f = Term::mul(substitute(w.word, ys), Term::inv(substitute(w.word, zs)));
    prod = prod ? Term::mul(prod, f) : f;
  }
  s.eqs.push_back({Term::var("x"), prod});
  return s;
}

EquationSystem maxnilp_edef(const PcPresentation& P, const std::vector<GroupElement>& gens, int c, bool prune) {
  if (c < 1) throw PreconditionError("maxnilp_edef: class must be positive");
  EquationSystem s;
  s.name = "maxnilp_" + P.name();
  s.sort = {Sort::Group, P.name(), 0};
  s.vars = {"x"};
  std::vector<TermPtr> letters{Term::var("x")};
  std::vector<std::optional<Exps>> values{std::nullopt};
  for (const auto& g : gens) {
    letters.push_back(word_term(P, g.exponents()));
    values.push_back(g.exponents());
  }
  const std::size_t m = letters.size();
  std::vector<std::size_t> idx(static_cast<std::size_t>(c + 1), 0);
  while (true) {
    TermPtr t = letters[idx[0]];
    bool constant = values[idx[0]].has_value();
    Exps val = constant ? *values[idx[0]] : Exps{};
    for (std::size_t k = 1; k < idx.size(); ++k) {
      t = Term::comm(t, letters[idx[k]]);
      constant = constant && values[idx[k]].has_value();
      if (constant) val = P.comm(val, *values[idx[k]]);
    }
    bool trivially_true = constant && val == P.identity();
    if (!(prune && trivially_true)) s.eqs.push_back({t, Term::one()});
    std::size_t k = idx.size();
    while (k > 0 && ++idx[k - 1] == m) idx[--k] = 0;
    if (k == 0) break;
  }
  return s;
}

}  // namespace einterp
