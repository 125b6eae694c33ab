// einterp command-line tool: analysis, e-definitions, interpretations,
// translation and brute-force verification.

#include "einterp/eqlang.hpp"
#include "einterp/scalars.hpp"
#include "einterp/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

using namespace einterp;
using nlohmann::json;

namespace {

enum Exit { Ok = 0, Usage = 1, Parse = 2, Inconsistent = 3, Gate = 4, Mismatch = 5 };

struct GateStop : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string str(const Integer& x) { return x.str(); }

json vec_json(const IntVector& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(str(v(i)));
  return a;
}

std::string vec_text(const IntVector& v) {
  std::string s = "(";
  for (Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + str(v(i));
  return s + ")";
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

PcPresentationPtr load_group(const std::string& path) {
  auto P = load_presentation(path);
  ConsistencyReport c = check_consistency(*P);
  if (!c) throw InconsistentPresentation(path + ": " + c.violation);
  return P;
}

std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

GroupElement named(const PcPresentationPtr& P, const std::string& name) {
  auto i = P->find_generator(name);
  if (!i) throw PreconditionError("unknown generator " + name + " in " + P->name());
  return GroupElement::generator(P, *i);
}

// ------------------------------------------------------------------ analyze

int cmd_analyze(const std::string& file, bool as_json) {
  auto P = load_group(file);
  json j;
  std::ostringstream os;
  j["group"] = P->name();
  j["class"] = P->nilpotency_class();
  os << "group " << P->name() << "\nclass " << P->nilpotency_class() << "\ngenerators";
  json gens = json::array();
  for (const auto& g : P->generators()) {
    gens.push_back({{"name", g.name}, {"weight", g.weight}});
    os << " " << g.name << ":" << g.weight;
  }
  j["generators"] = gens;
  os << "\n";
  json sections = json::array();
  for (int i = 1; i <= P->nilpotency_class(); ++i) {
    auto S = lcs_section(*P, i).group;
    json t = json::array();
    for (const Integer& x : S->torsion()) t.push_back(str(x));
    sections.push_back({{"weight", i}, {"rank", S->free_rank()}, {"torsion", t}, {"describe", S->describe()}});
    os << "section " << i << ": " << S->describe() << "\n";
  }
  j["sections"] = sections;

  GateVerdict gate = nva_gate(P);
  j["gate"] = {{"proceed", gate.proceed}, {"section_rank", gate.section_rank}, {"message", gate.message}};
  os << "gate: " << gate.message << "\n";
  if (!gate.proceed) {
    if (as_json) std::cout << j.dump(2) << "\n";
    else std::cout << os.str();
    throw GateStop(gate.message);
  }

  PcPresentationPtr G2 = P->nilpotency_class() > 2 ? truncate_to_class(P, 2).presentation : P;
  if (G2 != P) os << "bilinear map taken on the class-2 quotient " << G2->name() << "\n";
  CommutatorMap cm = commutator_bilinear_map(G2);
  const BilinearMap& f = cm.f;
  json tensor = json::array();
  os << "bilinear map A = " << f.A->describe() << ", B = " << f.B->describe() << "\n";
  for (std::size_t a = 0; a < f.tensor.size(); ++a) {
    json row = json::array();
    for (std::size_t b = 0; b < f.tensor[a].size(); ++b) {
      row.push_back(vec_json(f.tensor[a][b]));
      if (b > a)
        os << "  f(" << G2->generator(cm.lifts[a]).name << "," << G2->generator(cm.lifts[b]).name
           << ") = " << vec_text(f.tensor[a][b]) << "\n";
    }
    tensor.push_back(row);
  }
  json lifts = json::array();
  for (int l : cm.lifts) lifts.push_back(G2->generator(l).name);
  j["bilinear"] = {{"A", f.A->describe()}, {"B", f.B->describe()}, {"lifts", lifts}, {"tensor", tensor}};

  FullnessReport fr = check_full_nondegenerate(f);
  j["full"] = fr.full;
  j["nondegenerate"] = fr.nondegenerate();
  os << "full: " << (fr.full ? "yes" : "no") << ", nondegenerate: " << (fr.nondegenerate() ? "yes" : "no") << "\n";

  j["rank_le_2_flag"] = gate.section_rank <= 2;
  if (fr.full && fr.nondegenerate()) {
    RingPresentation R = largest_ring_of_scalars(f);
    RingRecognition rec = ring_recognize(R);
    json mul = json::array();
    for (const auto& row : R.mul) {
      json r = json::array();
      for (const auto& v : row) r.push_back(vec_json(v));
      mul.push_back(r);
    }
    json ring = {{"additive", R.additive->describe()},
                 {"unit", vec_json(R.unit)},
                 {"mul", mul},
                 {"rank", rec.rank},
                 {"isZ", rec.is_z},
                 {"describe", rec.describe()}};
    if (rec.quadratic)
      ring["quadratic"] = {{"trace", str(rec.quadratic->trace)},
                           {"norm", str(rec.quadratic->norm)},
                           {"tau", vec_json(rec.quadratic->tau)}};
    j["ring"] = ring;
    os << "ring of scalars: additive " << R.additive->describe() << ", unit " << vec_text(R.unit) << "\n";
    os << "recognized: " << rec.describe() << "\n";
    os << "isZ: " << (rec.is_z ? "true" : "false") << "\n";
  } else {
    j["ring"] = nullptr;
    os << "ring of scalars: not computed (map not full and non-degenerate)\n";
  }
  os << "rank<=2 flag: " << (gate.section_rank <= 2 ? "true" : "false") << "\n";

  json small = json::array();
  os << "c-small generators:";
  for (int i = 0; i < G2->ngens(); ++i) {
    if (G2->weight(i) != 1) continue;
    if (is_c_small(G2, GroupElement::generator(G2, i))) {
      small.push_back(G2->generator(i).name);
      os << " " << G2->generator(i).name;
    }
  }
  os << "\n";
  j["c_small"] = small;
  j["ring_of_integers_step"] = "external";
  os << "ring of algebraic integers step: external, not computed\n";

  if (as_json) std::cout << j.dump(2) << "\n";
  else std::cout << os.str();
  return Ok;
}

// ---------------------------------------------------------------- emit-edef

struct EdefOptions {
  std::string kind, group, out, gens, word;
  int width = 0;
  int weight = 2;
  int nil_class = 2;
  bool prune = false;
};

int cmd_emit_edef(const EdefOptions& o) {
  auto P = load_group(o.group);
  EquationSystem s;
  if (o.kind == "center") {
    s = center_edef(*P);
  } else if (o.kind == "verbal") {
    int width = o.width > 0 ? o.width : default_commutator_width(*P);
    s = verbal_edef(VerbalWord::commutator(o.weight), width, *P);
  } else {
    std::vector<GroupElement> gens;
    auto names = split_names(o.gens);
    if (names.empty())
      for (int i = 0; i < P->ngens(); ++i)
        if (P->weight(i) == 1) names.push_back(P->generator(i).name);
    for (const auto& n : names) gens.push_back(named(P, n));
    s = maxnilp_edef(*P, gens, o.nil_class, o.prune);
  }
  write_output(print_system(s), o.out);
  return Ok;
}

// ---------------------------------------------------------------- interpret

struct InterpretOptions {
  std::string group, target, out, pair;
  int k = 0;
  bool verbal = false;
};

int cmd_interpret(const InterpretOptions& o) {
  auto P = load_group(o.group);
  EInterpretation I;
  if (o.target == "int") {
    auto names = split_names(o.pair);
    if (names.empty()) I = int_interpretation_class2(P);
    else if (names.size() == 2) I = int_interpretation_class2(P, named(P, names[0]), named(P, names[1]));
    else throw CLI::ValidationError("--pair", "expects two generator names a,b");
  } else if (o.target == "scalars") {
    I = scalar_interpretation(P);
  } else if (o.k > 0 || o.verbal) {
    I = lower_central_quotient_interpretation(P, o.k > 0 ? o.k : P->nilpotency_class() - 1, o.verbal);
  } else {
    I = center_quotient_interpretation(P);
  }
  write_output(interpretation_to_text(I), o.out);
  return Ok;
}

int cmd_compose(const std::string& outer, const std::string& inner, const std::string& out) {
  write_output(interpretation_to_text(compose(load_interpretation(outer), load_interpretation(inner))), out);
  return Ok;
}

EquationSystem load_source_system(const EInterpretation& I, const std::string& path) {
  return load_system(path, I.source.group ? I.source.group.get() : nullptr);
}

// ---------------------------------------------------------------- translate

int cmd_translate(const std::string& chain, const std::string& system, const std::string& out) {
  EInterpretation I = load_interpretation(chain);
  if (auto problem = structural_problem(I); !problem.empty()) throw PreconditionError("chain: " + problem);
  write_output(print_system(translate_system(I, load_source_system(I, system))), out);
  return Ok;
}

// ------------------------------------------------------------------- verify

json values_json(const std::vector<std::string>& texts) {
  json a = json::array();
  for (const auto& t : texts) a.push_back(t);
  return a;
}

int cmd_verify(const std::string& chain, const std::string& system, const CarrierSpec& spec, std::uint64_t cap,
               bool as_json) {
  EInterpretation I = load_interpretation(chain);
  if (auto problem = structural_problem(I); !problem.empty()) throw PreconditionError("chain: " + problem);
  EquationSystem sigma = load_source_system(I, system);
  SolveOptions opts;
  opts.cap = cap;
  CorrespondenceReport r = check_correspondence(I, sigma, spec, opts);
  if (as_json) {
    json j = {{"interpretation", r.interpretation},
              {"carrier", r.carrier},
              {"system", sigma.name},
              {"vars", r.vars},
              {"source_solutions", values_json(r.source_text)},
              {"decoded_solutions", values_json(r.decoded_text)},
              {"host_solutions", r.host_solutions},
              {"host_exist_box", r.host_exist_box},
              {"sets_equal", r.sets_equal},
              {"onto", r.onto},
              {"witnesses", r.witnesses},
              {"verdict", r.verdict()},
              {"elapsed_ms", r.elapsed_ms}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << report_to_text(r);
  }
  return r.equal() ? Ok : Mismatch;
}

// -------------------------------------------------------------------- solve

int cmd_solve(const std::string& system, const std::string& group, const CarrierSpec& spec, std::uint64_t cap,
              bool as_json) {
  PcPresentationPtr P = group.empty() ? nullptr : load_group(group);
  EquationSystem s = load_system(system, P.get());
  SolveOptions opts;
  opts.cap = cap;
  std::unique_ptr<Carrier> C;
  if (s.sort.kind == Sort::Group) {
    if (!P) throw CLI::ValidationError("--group", "a group system needs its presentation");
    if (spec.kind == CarrierSpec::Mod) {
      C = std::make_unique<GroupCarrier>(finite_quotient(P, spec.value));
    } else {
      C = std::make_unique<GroupCarrier>(P);
      opts.box = spec.value;
    }
  } else if (s.sort.kind == Sort::RingMod) {
    C = std::make_unique<IntCarrier>(s.sort.modulus);
  } else if (spec.kind == CarrierSpec::Mod) {
    C = std::make_unique<IntCarrier>(spec.value);
  } else {
    C = std::make_unique<IntCarrier>(0);
    opts.box = spec.value;
  }
  SolveReport r = solve(s, *C, opts);
  if (as_json) {
    json sols = json::array();
    for (const auto& t : r.solutions) {
      json row = json::array();
      for (const auto& v : t) row.push_back(C->format(v));
      sols.push_back(row);
    }
    json j = {{"system", r.system}, {"carrier", r.carrier}, {"box_relative", r.box_relative},
              {"box", r.box},       {"exist_box", r.exist_box}, {"vars", r.vars},
              {"count", r.count()}, {"solutions", sols},      {"elapsed_ms", r.elapsed_ms}};
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << report_to_text(r, *C);
  }
  return Ok;
}

void add_carrier(CLI::App* sub, std::int64_t& mod, std::int64_t& box) {
  auto* m = sub->add_option("--mod", mod, "finite carrier: reduce modulo m")->check(CLI::Range(2, 1000000));
  auto* b = sub->add_option("--box", box, "bounded carrier: coordinates in [-B, B]")->check(CLI::Range(0, 1000000));
  m->excludes(b);
  b->excludes(m);
}

CarrierSpec carrier(std::int64_t mod, std::int64_t box) {
  if (mod > 0) return {CarrierSpec::Mod, mod};
  if (box >= 0) return {CarrierSpec::Box, box};
  throw CLI::ValidationError("carrier", "one of --mod or --box is required");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interpretations by equations in finitely generated nilpotent groups"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "machine-readable reports");

  std::string group, chain, system, out, outer, inner;
  std::int64_t mod = 0, box = -1;
  std::uint64_t cap = 1000000000ULL;

  auto* analyze = app.add_subcommand("analyze", "run the scalar-ring pipeline on a presentation");
  analyze->add_option("group", group, "presentation file")->required();
  analyze->add_flag("--json", as_json);

  EdefOptions eo;
  auto* edef = app.add_subcommand("emit-edef", "write an e-definition as a system file");
  edef->add_option("kind", eo.kind)->required()->check(CLI::IsMember({"center", "verbal", "maxnilp"}));
  edef->add_option("group", eo.group, "presentation file")->required();
  edef->add_option("--width", eo.width, "verbal: number of commutator factors");
  edef->add_option("--weight", eo.weight, "verbal: commutator weight")->check(CLI::Range(2, 16));
  edef->add_option("--gens", eo.gens, "maxnilp: comma-separated generators");
  edef->add_option("--class", eo.nil_class, "maxnilp: nilpotency class")->check(CLI::Range(1, 8));
  edef->add_flag("--prune", eo.prune, "maxnilp: drop tuples holding without x");
  edef->add_option("-o,--output", eo.out);

  InterpretOptions io;
  auto* interp = app.add_subcommand("interpret", "build an interpretation chain file");
  interp->add_option("group", io.group, "presentation file")->required();
  interp->add_option("--target", io.target)->required()->check(CLI::IsMember({"int", "scalars", "quotient"}));
  interp->add_option("--pair", io.pair, "int: generators a,b with [a,b] coding 1");
  interp->add_option("--k", io.k, "quotient: keep class k (lower central quotient)");
  interp->add_flag("--verbal", io.verbal, "quotient: define gamma_{k+1} verbally");
  interp->add_option("-o,--output", io.out);

  auto* comp = app.add_subcommand("compose", "compose two chain files (outer over inner)");
  comp->add_option("outer", outer)->required();
  comp->add_option("inner", inner)->required();
  comp->add_option("-o,--output", out);

  auto* trans = app.add_subcommand("translate", "translate a source system through a chain");
  trans->add_option("chain", chain)->required();
  trans->add_option("system", system)->required();
  trans->add_option("-o,--output", out);

  auto* verify = app.add_subcommand("verify", "compare source and decoded host solution sets");
  verify->add_option("chain", chain)->required();
  verify->add_option("system", system)->required();
  add_carrier(verify, mod, box);
  verify->add_option("--cap", cap, "search-space cap");
  verify->add_flag("--json", as_json);

  auto* solve_cmd = app.add_subcommand("solve", "enumerate solutions of a system");
  solve_cmd->add_option("system", system)->required();
  solve_cmd->add_option("--group", group, "presentation for group systems");
  add_carrier(solve_cmd, mod, box);
  solve_cmd->add_option("--cap", cap, "search-space cap");
  solve_cmd->add_flag("--json", as_json);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? Ok : Usage;
  }

  try {
    if (*analyze) return cmd_analyze(group, as_json);
    if (*edef) return cmd_emit_edef(eo);
    if (*interp) return cmd_interpret(io);
    if (*comp) return cmd_compose(outer, inner, out);
    if (*trans) return cmd_translate(chain, system, out);
    if (*verify) return cmd_verify(chain, system, carrier(mod, box), cap, as_json);
    if (*solve_cmd) {
      CarrierSpec spec = box >= 0 ? CarrierSpec{CarrierSpec::Box, box} : CarrierSpec{CarrierSpec::Mod, mod};
      return cmd_solve(system, group, spec, cap, as_json);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Usage;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return Parse;
  } catch (const InconsistentPresentation& e) {
    std::cerr << "inconsistent presentation: " << e.what() << "\n";
    return Inconsistent;
  } catch (const GateStop&) {
    std::cerr << "analysis stopped at the gate\n";
    return Gate;
  } catch (const PreconditionError& e) {
    std::cerr << "precondition: " << e.what() << "\n";
    return Gate;
  } catch (const SearchTooLarge& e) {
    std::cerr << "search too large: " << e.what() << "\n";
    return Gate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return Usage;
  }
  return Usage;
}
