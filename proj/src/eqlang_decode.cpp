#include "einterp/eqlang.hpp"
#include "einterp/scalars.hpp"

#include <fstream>
#include <sstream>

namespace einterp {

namespace {

class IntPowerDecoder final : public Decoder {
 public:
  IntPowerDecoder(PcPresentationPtr host, Exps base, std::int64_t mod)
      : Decoder(IntPower), host_(std::move(host)), base_(std::move(base)), mod_(mod) {
    for (std::int64_t t = 0; t < mod_; ++t) powers_.push_back(host_->pow(base_, t));
  }

  std::optional<Value> decode(const std::vector<Exps>& code) const override {
    if (code.size() != 1) return std::nullopt;
    const Exps& x = code[0];
    if (mod_ > 0) {
      for (std::int64_t t = 0; t < mod_; ++t)
        if (powers_[static_cast<std::size_t>(t)] == x) return Value{t};
      return std::nullopt;
    }
    std::size_t i = 0;
    while (i < base_.size() && base_[i] == 0) ++i;
    if (i == base_.size() || x[i] % base_[i] != 0) return std::nullopt;
    std::int64_t t = x[i] / base_[i];
    if (host_->pow(base_, t) != x) return std::nullopt;
    return Value{t};
  }

  DecoderPtr reduce_mod(std::int64_t m) const override {
    PcPresentationPtr q = finite_quotient(host_, m);
    return std::make_shared<IntPowerDecoder>(q, q->normalize(base_), m);
  }

  std::string to_text() const override {
    std::string s = "decode int_power";
    for (Exp e : base_) s += " " + std::to_string(e);
    return s;
  }

 private:
  PcPresentationPtr host_;
  Exps base_;
  std::int64_t mod_;
  std::vector<Exps> powers_;
};

class TruncateDecoder final : public Decoder {
 public:
  TruncateDecoder(int keep_class, int kept, PcPresentationPtr source)
      : Decoder(Truncate), keep_class_(keep_class), kept_(kept), source_(std::move(source)) {}

  std::optional<Value> decode(const std::vector<Exps>& code) const override {
    if (code.size() != 1 || static_cast<int>(code[0].size()) < kept_) return std::nullopt;
    return Value(code[0].begin(), code[0].begin() + kept_);
  }

  DecoderPtr reduce_mod(std::int64_t m) const override {
    return std::make_shared<TruncateDecoder>(keep_class_, kept_, finite_quotient(source_, m));
  }

  std::string to_text() const override { return "decode truncate " + std::to_string(keep_class_); }
  PcPresentationPtr source_group() const override { return source_; }

 private:
  int keep_class_, kept_;
  PcPresentationPtr source_;
};

class ScalarDecoder final : public Decoder {
 public:
  ScalarDecoder(PcPresentationPtr host, std::int64_t mod) : Decoder(Scalar), host_(std::move(host)), mod_(mod) {
    cm_ = commutator_bilinear_map(host_);
    ring_ = largest_ring_of_scalars(cm_.f);
    const Index n = cm_.f.A->ngens();
    for (const IntMatrix& X : ring_.alpha) gens_.push_back(EndBasis::flatten(X));
    const IntMatrix& L = cm_.f.A->relations();
    for (Index j = 0; j < n; ++j)
      for (Index r = 0; r < L.rows(); ++r) {
        IntMatrix E = IntMatrix::Zero(n, n);
        E.col(j) = L.row(r).transpose();
        gens_.push_back(EndBasis::flatten(E));
      }
    const Index r = ring_.ngens();
    IntMatrix rels = ring_.additive->relations();
    if (mod_ > 0) {
      for (Index i = 0; i < n * n; ++i) {
        IntVector v = IntVector::Zero(n * n);
        v(i) = mod_;
        gens_.push_back(v);
      }
      IntMatrix big(rels.rows() + r, r);
      big.topRows(rels.rows()) = rels;
      big.bottomRows(r) = IntMatrix::Identity(r, r) * Integer(mod_);
      rels = big;
    }
    additive_ = ab_from_relations(r, rels);
  }

  std::optional<Value> decode(const std::vector<Exps>& code) const override {
    const Index n = cm_.f.A->ngens();
    if (static_cast<Index>(code.size()) != n) return std::nullopt;
    IntMatrix alpha(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index k = 0; k < n; ++k)
        alpha(k, i) = code[static_cast<std::size_t>(i)][static_cast<std::size_t>(cm_.lifts[static_cast<std::size_t>(k)])];
    auto c = lattice_member<Integer>(EndBasis::flatten(alpha), gens_);
    if (!c) return std::nullopt;
    IntVector v = additive_->reduce(c->head(ring_.ngens()));
    Value out;
    for (Index i = 0; i < v.size(); ++i) out.push_back(v(i).convert_to<std::int64_t>());
    return out;
  }

  DecoderPtr reduce_mod(std::int64_t m) const override { return std::make_shared<ScalarDecoder>(host_, m); }
  std::string to_text() const override { return "decode scalar"; }

 private:
  PcPresentationPtr host_;
  std::int64_t mod_;
  CommutatorMap cm_;
  RingPresentation ring_;
  std::vector<IntVector> gens_;
  AbGroupPtr additive_;
};

class CompositeDecoder final : public Decoder {
 public:
  CompositeDecoder(DecoderPtr outer, DecoderPtr inner, int od, int id)
      : Decoder(Composite), outer_(std::move(outer)), inner_(std::move(inner)), od_(od), id_(id) {}

  std::optional<Value> decode(const std::vector<Exps>& code) const override {
    if (static_cast<int>(code.size()) != od_ * id_) return std::nullopt;
    std::vector<Exps> middle;
    for (int j = 0; j < od_; ++j) {
      std::vector<Exps> slice(code.begin() + j * id_, code.begin() + (j + 1) * id_);
      auto v = inner_->decode(slice);
      if (!v) return std::nullopt;
      middle.push_back(*v);
    }
    return outer_->decode(middle);
  }

  DecoderPtr reduce_mod(std::int64_t m) const override {
    return std::make_shared<CompositeDecoder>(outer_->reduce_mod(m), inner_->reduce_mod(m), od_, id_);
  }

  std::string to_text() const override {
    return "decode composite " + std::to_string(od_) + " " + std::to_string(id_) + "\n" + inner_->to_text() + "\n" +
           outer_->to_text() + "\nend composite";
  }

  PcPresentationPtr source_group() const override { return outer_->source_group(); }

 private:
  DecoderPtr outer_, inner_;
  int od_, id_;
};

DecoderPtr parse_decoder(const std::vector<std::string>& lines, std::size_t& pos, const PcPresentationPtr& host) {
  if (pos >= lines.size()) throw std::runtime_error("decoder: unexpected end of input");
  std::istringstream ls(lines[pos++]);
  std::string kw, kind;
  ls >> kw >> kind;
  if (kw != "decode") throw std::runtime_error("decoder: expected 'decode', found '" + kw + "'");
  if (kind == "int_power") {
    Exps base;
    Exp e;
    while (ls >> e) base.push_back(e);
    if (static_cast<int>(base.size()) != host->ngens()) throw std::runtime_error("decoder: base has wrong length");
    return int_power_decoder(host, base);
  }
  if (kind == "truncate") {
    int k = 0;
    if (!(ls >> k)) throw std::runtime_error("decoder: truncate needs a class");
    return truncate_decoder(host, k);
  }
  if (kind == "scalar") return scalar_decoder(host);
  if (kind == "composite") {
    int od = 0, id = 0;
    if (!(ls >> od >> id)) throw std::runtime_error("decoder: composite needs two dimensions");
    DecoderPtr inner = parse_decoder(lines, pos, host);
    if (!inner->source_group()) throw std::runtime_error("decoder: inner decoder must produce group elements");
    DecoderPtr outer = parse_decoder(lines, pos, inner->source_group());
    if (pos >= lines.size() || lines[pos] != "end composite") throw std::runtime_error("decoder: missing 'end composite'");
    ++pos;
    return composite_decoder(outer, inner, od, id);
  }
  throw std::runtime_error("decoder: unknown kind '" + kind + "'");
}

}  // namespace

DecoderPtr int_power_decoder(PcPresentationPtr host, Exps base) {
  return std::make_shared<IntPowerDecoder>(std::move(host), std::move(base), 0);
}

DecoderPtr truncate_decoder(PcPresentationPtr host, int keep_class) {
  Truncation tr = truncate_to_class(host, keep_class);
  return std::make_shared<TruncateDecoder>(keep_class, tr.kept, tr.presentation);
}

DecoderPtr scalar_decoder(PcPresentationPtr host) { return std::make_shared<ScalarDecoder>(std::move(host), 0); }

DecoderPtr composite_decoder(DecoderPtr outer, DecoderPtr inner, int outer_dim, int inner_dim) {
  return std::make_shared<CompositeDecoder>(std::move(outer), std::move(inner), outer_dim, inner_dim);
}

DecoderPtr decoder_from_text(const std::string& text, const PcPresentationPtr& host) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string l;
  while (std::getline(in, l))
    if (!l.empty()) lines.push_back(l);
  std::size_t pos = 0;
  DecoderPtr d = parse_decoder(lines, pos, host);
  if (pos != lines.size()) throw std::runtime_error("decoder: trailing input");
  return d;
}

// ---------------------------------------------------------------- chain files

namespace {

int arity(const std::string& role) { return role == "domain" ? 1 : role == "equality" ? 2 : 3; }

EquationSystem template_context(const EInterpretation& I, int count) {
  EquationSystem s;
  s.sort = {Sort::Group, I.host->name(), 0};
  for (int k = 0; k < count; ++k) {
    auto v = I.code_vars(k);
    s.vars.insert(s.vars.end(), v.begin(), v.end());
  }
  return s;
}

void check_term(const TermPtr& t, const EquationSystem& s, const PcPresentation& host, std::string& problem) {
  if (!problem.empty()) return;
  switch (t->kind) {
    case TermKind::Var:
      if (!s.is_var(t->name)) problem = s.name + ": undeclared variable " + t->name;
      break;
    case TermKind::Gen:
      if (!host.find_generator(t->name)) problem = s.name + ": " + t->name + " is not a generator of " + host.name();
      break;
    case TermKind::Int:
    case TermKind::Add:
    case TermKind::Sub:
    case TermKind::Neg:
      problem = s.name + ": ring operation in a host system";
      break;
    default:
      break;
  }
  for (const auto& a : t->args) check_term(a, s, host, problem);
}

}  // namespace

std::string interpretation_to_text(const EInterpretation& I) {
  std::ostringstream os;
  os << "interpretation " << I.name << "\n";
  os << "source " << I.source.str() << "\n";
  os << "code_dim " << I.code_dim << "\n";
  os << "begin presentation host\n" << I.host->to_text();
  os << "end presentation\n";
  if (I.source.group) os << "begin presentation source\n" << I.source.group->to_text() << "end presentation\n";
  auto sys = [&](const std::string& role, const EquationSystem& s) {
    os << "begin system " << role << "\n" << print_system(s) << "end system\n";
  };
  sys("domain", I.domain);
  sys("equality", I.equality);
  for (const auto& [name, s] : I.ops) sys("op " + name, s);
  for (const auto& [name, comps] : I.templates)
    for (std::size_t i = 0; i < comps.size(); ++i) os << "template " << name << " " << i + 1 << " " << print_term(comps[i]) << "\n";
  for (const auto& [name, comps] : I.constants)
    for (std::size_t i = 0; i < comps.size(); ++i) os << "constant " << name << " " << i + 1 << " " << print_term(comps[i]) << "\n";
  os << I.decoder->to_text() << "\n";
  return os.str();
}

EInterpretation interpretation_from_text(const std::string& text) {
  EInterpretation I;
  std::vector<std::string> lines;
  {
    std::istringstream in(text);
    std::string l;
    while (std::getline(in, l)) lines.push_back(l);
  }
  auto fail = [](std::size_t line, const std::string& msg) -> ParseError {
    return ParseError(msg, static_cast<int>(line) + 1, 1);
  };
  std::string source_line;
  std::vector<std::pair<std::string, std::pair<std::string, std::size_t>>> systems;
  std::vector<std::pair<std::string, std::size_t>> templates, constants;
  std::string decoder_text;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const std::string& l = lines[i];
    if (l.empty() || l[0] == '#') continue;
    std::istringstream ls(l);
    std::string kw;
    ls >> kw;
    if (kw == "interpretation") {
      ls >> I.name;
    } else if (kw == "source") {
      source_line = l.substr(7);
    } else if (kw == "code_dim") {
      if (!(ls >> I.code_dim) || I.code_dim < 1) throw fail(i, "bad code_dim");
    } else if (kw == "begin") {
      std::string what, role;
      ls >> what;
      std::getline(ls, role);
      if (!role.empty() && role[0] == ' ') role.erase(0, 1);
      std::string end = what == "presentation" ? "end presentation" : "end system";
      std::string body;
      std::size_t start = i;
      for (++i; i < lines.size() && lines[i] != end; ++i) body += lines[i] + "\n";
      if (i == lines.size()) throw fail(start, "unterminated block");
      if (what == "presentation") {
        try {
          PcPresentationPtr P = parse_presentation(body);
          (role == "host" ? I.host : I.source.group) = P;
        } catch (const ParseError& e) {
          throw fail(start + static_cast<std::size_t>(e.line()), e.what());
        }
      } else if (what == "system") {
        systems.push_back({role, {body, start + 1}});
      } else {
        throw fail(start, "unknown block '" + what + "'");
      }
    } else if (kw == "template") {
      templates.push_back({l, i});
    } else if (kw == "constant") {
      constants.push_back({l, i});
    } else if (kw == "decode" || kw == "end") {
      decoder_text += l + "\n";
    } else {
      throw fail(i, "unknown statement '" + kw + "'");
    }
  }
  if (!I.host) throw ParseError("missing host presentation", 1, 1);
  if (source_line == "ring Z") I.source.sort = {Sort::RingZ, "", 0};
  else if (source_line == "ring scalars") I.source.sort = {Sort::RingScalars, "", 0};
  else if (source_line.rfind("group ", 0) == 0) {
    I.source.sort = {Sort::Group, source_line.substr(6), 0};
    if (!I.source.group) throw ParseError("group source needs a source presentation", 1, 1);
  } else throw ParseError("unknown source '" + source_line + "'", 1, 1);

  for (const auto& [role, body] : systems) {
    EquationSystem s;
    try {
      s = parse_system(body.first, I.host.get());
    } catch (const ParseError& e) {
      throw ParseError(e.what(), static_cast<int>(body.second) + e.line(), e.column());
    }
    if (role == "domain") I.domain = s;
    else if (role == "equality") I.equality = s;
    else if (role.rfind("op ", 0) == 0) I.ops[role.substr(3)] = s;
    else throw ParseError("unknown system role '" + role + "'", static_cast<int>(body.second), 1);
  }
  auto read_terms = [&](const std::vector<std::pair<std::string, std::size_t>>& src, bool tpl,
                        std::map<std::string, std::vector<TermPtr>>& out) {
    for (const auto& [l, i] : src) {
      std::istringstream ls(l);
      std::string kw, name;
      std::size_t comp = 0;
      ls >> kw >> name >> comp;
      std::string body;
      std::getline(ls, body);
      EquationSystem ctx = template_context(I, tpl ? 3 : 0);
      TermPtr t;
      try {
        t = parse_term(body, ctx);
      } catch (const ParseError& e) {
        throw ParseError(e.what(), static_cast<int>(i) + 1, e.column());
      }
      auto& v = out[name];
      if (comp != v.size() + 1) throw ParseError("components out of order", static_cast<int>(i) + 1, 1);
      v.push_back(t);
    }
  };
  read_terms(templates, true, I.templates);
  read_terms(constants, false, I.constants);
  I.decoder = decoder_from_text(decoder_text, I.host);
  return I;
}

EInterpretation load_interpretation(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return interpretation_from_text(ss.str());
}

std::string structural_problem(const EInterpretation& I) {
  std::string problem;
  auto check = [&](const EquationSystem& s, const std::string& role) {
    if (!problem.empty()) return;
    if (s.sort.kind != Sort::Group || s.sort.group != I.host->name()) {
      problem = role + ": not a system over the host " + I.host->name();
      return;
    }
    if (static_cast<int>(s.vars.size()) != arity(role) * I.code_dim) {
      problem = role + ": expected " + std::to_string(arity(role) * I.code_dim) + " free variables";
      return;
    }
    for (const auto& v : s.all_vars())
      if (I.host->find_generator(v)) {
        problem = role + ": variable " + v + " shadows a host generator";
        return;
      }
    for (const auto& e : s.eqs) {
      check_term(e.lhs, s, *I.host, problem);
      check_term(e.rhs, s, *I.host, problem);
    }
  };
  check(I.domain, "domain");
  check(I.equality, "equality");
  for (const auto& [name, s] : I.ops) check(s, name);
  return problem;
}

}  // namespace einterp
