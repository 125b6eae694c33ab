#pragma once

// Equation systems over a group (a pc presentation) or a ring, with a
// line-oriented file format:
//
//   system <name>
//   sort group <groupname> | sort ring Z | sort ring mod <m> | sort ring scalars
//   var x y
//   exists p q
//   eq [x,a] = 1
//
// Identifiers resolve to declared variables first and to generators of the
// group otherwise.

#include "einterp/pcgroup.hpp"

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace einterp {

enum class TermKind { Var, Gen, Int, One, Mul, Pow, Comm, Add, Sub, Neg };

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  TermKind kind;
  std::string name;         ///< Var / Gen
  std::int64_t value = 0;   ///< Int literal, Pow exponent
  std::vector<TermPtr> args;

  static TermPtr var(std::string n);
  static TermPtr gen(std::string n);
  static TermPtr integer(std::int64_t v);
  static TermPtr one();
  static TermPtr mul(TermPtr a, TermPtr b);
  static TermPtr pow(TermPtr a, std::int64_t k);
  static TermPtr inv(TermPtr a) { return pow(std::move(a), -1); }
  static TermPtr comm(TermPtr a, TermPtr b);
  static TermPtr add(TermPtr a, TermPtr b);
  static TermPtr sub(TermPtr a, TermPtr b);
  static TermPtr neg(TermPtr a);
};

bool same_term(const TermPtr& a, const TermPtr& b);
void collect_vars(const TermPtr& t, std::set<std::string>& out);
bool is_group_term(const TermPtr& t);
/// Replace variables by terms; names absent from the map are kept.
TermPtr substitute(const TermPtr& t, const std::map<std::string, TermPtr>& sub);
/// Product of generator powers spelling a normal-form vector.
TermPtr word_term(const PcPresentation& P, const Exps& e);

struct Equation {
  TermPtr lhs, rhs;
};

struct Sort {
  enum Kind { Group, RingZ, RingMod, RingScalars } kind = Group;
  std::string group;     ///< group name for Group
  std::int64_t modulus = 0;
  bool is_ring() const { return kind != Group; }
  std::string str() const;
  bool operator==(const Sort& o) const {
    return kind == o.kind && group == o.group && modulus == o.modulus;
  }
};

struct EquationSystem {
  std::string name = "sigma";
  Sort sort;
  std::vector<std::string> vars;    ///< free variables, in order
  std::vector<std::string> exists;  ///< existential witnesses
  std::vector<Equation> eqs;

  bool is_var(const std::string& n) const;
  std::vector<std::string> all_vars() const;
};

bool same_system(const EquationSystem& a, const EquationSystem& b);

std::string print_term(const TermPtr& t);
std::string print_system(const EquationSystem& s);

/// Parse a system. When `host` is given, constants of a group sort must be
/// its generators.
EquationSystem parse_system(const std::string& text, const PcPresentation* host = nullptr);
EquationSystem load_system(const std::string& path, const PcPresentation* host = nullptr);
/// Parse a single term in the context of a system's declarations.
TermPtr parse_term(const std::string& text, const EquationSystem& context);

// ------------------------------------------------------------- e-definitions

/// {[x, a_i] = 1} for every generator a_i.
EquationSystem center_edef(const PcPresentation& P);

/// Word in the letters x1..xk, e.g. [x1,x2].
struct VerbalWord {
  int arity = 2;
  TermPtr word;  ///< over variables x1..x<arity>
  static VerbalWord commutator(int weight);  ///< left-normed [x1,...,x_weight]
};

/// x = prod_{i=1..n} w(y_i) w(z_i)^-1. Width defaults to g(g-1)/2 for the
/// commutator word, g = number of weight-1 generators.
EquationSystem verbal_edef(const VerbalWord& w, int width, const PcPresentation& P);
int default_commutator_width(const PcPresentation& P);

/// [z_1, ..., z_{c+1}] = 1 over all (m+1)^(c+1) tuples from {x, e_1..e_m}.
/// With `prune`, tuples made only of constants are dropped when they hold in P.
EquationSystem maxnilp_edef(const PcPresentation& P, const std::vector<GroupElement>& gens, int c,
                            bool prune = false);

// ------------------------------------------------------------- interpretations

/// Partial map from host code tuples back to source values.
struct Decoder;
using DecoderPtr = std::shared_ptr<const Decoder>;

/// Canonical value of a source element: an integer (rings over Z or Z/m),
/// ring coordinates, or a normal-form exponent vector.
using Value = std::vector<std::int64_t>;

struct SourceDescriptor {
  Sort sort;                         ///< ring Z, ring scalars, or group
  PcPresentationPtr group;           ///< for group sources
  std::string str() const;
};

struct EInterpretation {
  std::string name;
  SourceDescriptor source;
  PcPresentationPtr host;
  int code_dim = 1;
  EquationSystem domain;                       ///< free vars: one code
  EquationSystem equality;                     ///< two codes
  std::map<std::string, EquationSystem> ops;   ///< graph systems (add, mul)
  /// Host-term realisations of operations on codes, per component. Names:
  /// "add", "neg" for rings; "mul", "inv" for groups.
  std::map<std::string, std::vector<TermPtr>> templates;
  /// Code of 1 (rings: code of n is the componentwise n-th power) or of
  /// each source generator (groups).
  std::map<std::string, std::vector<TermPtr>> constants;
  DecoderPtr decoder;

  std::vector<std::string> op_names() const;
  /// Variables of code number k (0-based) for an interpretation system.
  std::vector<std::string> code_vars(int k) const;
  /// Host terms coding an integer / a source generator.
  std::vector<TermPtr> encode_int(std::int64_t n) const;
  std::vector<TermPtr> encode_gen(const std::string& g) const;
};

/// Variable names for code number k: x,y,z,u,... when dim = 1, else x_1,...
std::vector<std::string> standard_code_vars(int k, int dim);

/// Identity interpretation of a group in itself.
EInterpretation identity_interpretation(const PcPresentationPtr& P);

/// G/N in G, with N given by a system in one free variable x.
enum class QuotientKind { Trivial, Center, LowerCentral };
EInterpretation quotient_interpretation(const PcPresentationPtr& P, const EquationSystem& n_edef,
                                        QuotientKind kind, int keep_class = 0);
/// Convenience: G/Z(G) (requires Z(G) = gamma_2(G) for decoding) and G/gamma_{k+1}.
EInterpretation center_quotient_interpretation(const PcPresentationPtr& P);
EInterpretation lower_central_quotient_interpretation(const PcPresentationPtr& P, int k, bool verbal);

/// Z in a class-2 group via t -> [a,b]^t.
EInterpretation int_interpretation_class2(const PcPresentationPtr& P, const GroupElement& a, const GroupElement& b);
/// Picks a c-small pair among the weight-1 generators.
EInterpretation int_interpretation_class2(const PcPresentationPtr& P);

/// R(f) in G for the commutator map of a class-2 group.
EInterpretation scalar_interpretation(const PcPresentationPtr& P);

EInterpretation compose(const EInterpretation& outer, const EInterpretation& inner);

struct TranslateOptions {
  bool constrain_free = true;  ///< add domain systems for the free variables
};

/// Push a source system through an interpretation.
EquationSystem translate_system(const EInterpretation& I, const EquationSystem& sigma,
                                const TranslateOptions& opts = {});
/// Host variables coding source variable v (in order).
std::vector<std::string> translated_vars(const EInterpretation& I, const std::string& v);

// ------------------------------------------------------------- decoding

struct Decoder {
  enum Kind { IntPower, Truncate, Scalar, Composite } kind;
  virtual ~Decoder() = default;
  explicit Decoder(Kind k) : kind(k) {}
  /// Decode a code tuple given as exponent vectors of the host.
  virtual std::optional<Value> decode(const std::vector<Exps>& code) const = 0;
  /// The same decoder for codes in finite_quotient(host, m); source values
  /// are then taken modulo m.
  virtual DecoderPtr reduce_mod(std::int64_t m) const = 0;
  virtual std::string to_text() const = 0;
  /// Source presentation for group-valued decoders, null otherwise.
  virtual PcPresentationPtr source_group() const { return nullptr; }
};

DecoderPtr int_power_decoder(PcPresentationPtr host, Exps base);
/// Projection onto truncate_to_class(host, keep_class).
DecoderPtr truncate_decoder(PcPresentationPtr host, int keep_class);
DecoderPtr scalar_decoder(PcPresentationPtr host);
DecoderPtr composite_decoder(DecoderPtr outer, DecoderPtr inner, int outer_dim, int inner_dim);
/// Rebuild a decoder from to_text() output over the given host.
DecoderPtr decoder_from_text(const std::string& text, const PcPresentationPtr& host);

// ------------------------------------------------------------- chain files

std::string interpretation_to_text(const EInterpretation& I);
EInterpretation interpretation_from_text(const std::string& text);
EInterpretation load_interpretation(const std::string& path);

/// Structural checks: every system is over the host sort and mentions only
/// host generators and its declared variables.
std::string structural_problem(const EInterpretation& I);

}  // namespace einterp
