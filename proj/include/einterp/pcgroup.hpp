#pragma once

// Weighted nilpotent polycyclic presentations and their collection engine.
//
// Generators a_1..a_n are ordered by non-decreasing weight; a generator of
// weight w lies in gamma_w(G). Relations:
//   a_i^{m_i} = t_i          (optional power relation, t_i of higher weight)
//   [a_j, a_i] = w_{ji}      (j > i; omitted pairs commute)
// with [x, y] = x^-1 y^-1 x y. Elements are stored as normal-form exponent
// vectors a_1^{e_1} ... a_n^{e_n}, 0 <= e_i < m_i for torsion generators.

#include "einterp/abgroup.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace einterp {

using Exp = std::int64_t;
using Exps = std::vector<Exp>;

class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) +
                           ": " + msg),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_, column_;
};

class InconsistentPresentation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PcGenerator {
  std::string name;
  int weight = 1;
};

struct PowerRelation {
  Exp order = 0;
  Exps tail;  ///< normal-form exponent vector
};

/// Outcome of check_consistency.
struct ConsistencyReport {
  bool ok = true;
  std::string violation;  ///< first failing relation or test word
  explicit operator bool() const { return ok; }
};

class PcPresentation;
using PcPresentationPtr = std::shared_ptr<const PcPresentation>;

class PcPresentation {
 public:
  PcPresentation(std::string name, int nilpotency_class, std::vector<PcGenerator> gens,
                 std::vector<std::optional<PowerRelation>> powers,
                 std::map<std::pair<int, int>, Exps> commutators);

  const std::string& name() const { return name_; }
  int nilpotency_class() const { return class_; }
  int ngens() const { return static_cast<int>(gens_.size()); }
  const std::vector<PcGenerator>& generators() const { return gens_; }
  const PcGenerator& generator(int i) const { return gens_[static_cast<std::size_t>(i)]; }
  int weight(int i) const { return gens_[static_cast<std::size_t>(i)].weight; }
  std::optional<int> find_generator(const std::string& name) const;

  const std::optional<PowerRelation>& power(int i) const { return powers_[static_cast<std::size_t>(i)]; }
  const std::map<std::pair<int, int>, Exps>& commutator_relations() const { return comms_; }
  /// Stored value of [a_j, a_i] for j > i (identity when omitted).
  Exps commutator_relation(int j, int i) const;
  bool is_torsion_free() const;
  bool is_finite() const;
  /// Product of the generator orders, or nullopt if some generator is infinite.
  std::optional<std::uint64_t> order() const;

  // --- collection engine, on raw normal-form exponent vectors ---
  Exps identity() const { return Exps(static_cast<std::size_t>(ngens()), 0); }
  Exps gen(int i, Exp k = 1) const;
  Exps mul(const Exps& x, const Exps& y) const;
  Exps inv(const Exps& x) const;
  Exps pow(const Exps& x, Exp k) const;
  Exps comm(const Exps& x, const Exps& y) const;
  /// Normal form of an arbitrary product of generator powers.
  Exps from_syllables(const std::vector<std::pair<int, Exp>>& word) const;
  /// Normal form of a_1^{e_1} ... a_n^{e_n} for unnormalised exponents.
  Exps normalize(const Exps& e) const;

  /// `a^2*c^-1` style word for a normal-form vector ("1" for the identity).
  std::string format(const Exps& e) const;

  /// Serialise in the presentation file format.
  std::string to_text() const;

 private:
  Exps mul_gen_power(const Exps& x, int i, Exp k) const;
  // images of a_j (j > i) under conjugation by a_i^k
  std::vector<Exps> conjugation_power(int i, Exp k) const;
  Exps apply_images(const std::vector<Exps>& images, int i, const Exps& s) const;
  Exps suffix(const Exps& x, int i) const;
  bool conjugation_trivial_on(int i, const Exps& s) const;

  std::string name_;
  int class_;
  std::vector<PcGenerator> gens_;
  std::vector<std::optional<PowerRelation>> powers_;
  std::map<std::pair<int, int>, Exps> comms_;
  // conj_[i][j] = a_j^{a_i}, conj_inv_[i][j] = a_j^{a_i^-1}, for j > i
  std::vector<std::vector<Exps>> conj_, conj_inv_;
  std::vector<std::vector<bool>> commutes_;
};

/// Parse the line-oriented presentation format.
PcPresentationPtr parse_presentation(const std::string& text);
PcPresentationPtr load_presentation(const std::string& path);

/// Weight grading plus the standard overlap tests, all by collection.
ConsistencyReport check_consistency(const PcPresentation& P);

/// Element of a presentation with value semantics.
class GroupElement {
 public:
  GroupElement(PcPresentationPtr owner, Exps exps);
  static GroupElement identity(const PcPresentationPtr& owner);
  static GroupElement generator(const PcPresentationPtr& owner, int i, Exp k = 1);

  const PcPresentationPtr& owner() const { return owner_; }
  const Exps& exponents() const { return exps_; }
  bool is_identity() const;

  GroupElement operator*(const GroupElement& other) const;
  GroupElement inverse() const;
  GroupElement pow(Exp k) const;
  bool operator==(const GroupElement& other) const;
  bool operator!=(const GroupElement& other) const { return !(*this == other); }
  std::string str() const { return owner_->format(exps_); }

 private:
  void require_same_owner(const GroupElement& other) const;
  PcPresentationPtr owner_;
  Exps exps_;
};

GroupElement commutator(const GroupElement& x, const GroupElement& y);

/// gamma_i / gamma_{i+1} on the generators of weight exactly i.
struct LcsSection {
  AbGroupPtr group;
  std::vector<int> generators;  ///< presentation indices of the weight-i generators
  IntVector log(const Exps& e) const;
  Exps exp(const IntVector& coords, const PcPresentation& P) const;
};

LcsSection lcs_section(const PcPresentation& P, int i);

struct Truncation {
  PcPresentationPtr presentation;
  int kept = 0;  ///< projection keeps the first `kept` coordinates
  Exps project(const Exps& e) const { return Exps(e.begin(), e.begin() + kept); }
};

/// Quotient by gamma_{k+1}: drops generators of weight > k.
Truncation truncate_to_class(const PcPresentationPtr& P, int k);

/// Generators of Z(G) for a presentation of class <= 2.
std::vector<GroupElement> center_class2(const PcPresentationPtr& P);

/// Generators of C_G(g) for a presentation of class <= 2.
std::vector<GroupElement> centralizer_class2(const PcPresentationPtr& P, const GroupElement& g);

/// Impose a_i^m = 1 on every generator of a torsion-free presentation.
PcPresentationPtr finite_quotient(const PcPresentationPtr& P, Exp m);

struct GateVerdict {
  bool proceed = false;
  Index section_rank = 0;  ///< torsion-free rank of G'/gamma_3(G)
  std::string message;
};

GateVerdict nva_gate(const PcPresentationPtr& P);

namespace detail {
Exp checked_add(Exp a, Exp b);
Exp checked_mul(Exp a, Exp b);
}  // namespace detail

}  // namespace einterp
