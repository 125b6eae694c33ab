#pragma once

// Brute-force solvers for equation systems over finite carriers or boxes of
// exponent vectors, and solution-correspondence checks for interpretations.

#include "einterp/eqlang.hpp"
#include "einterp/scalars.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace einterp {

class SearchTooLarge : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Structure the solver searches: enumerates elements and evaluates terms.
class Carrier {
 public:
  virtual ~Carrier() = default;
  virtual bool is_group() const = 0;
  virtual bool is_finite() const = 0;
  virtual std::string describe() const = 0;
  virtual std::string format(const Value& v) const = 0;

  /// Elements in lexicographic order. Infinite coordinates range over
  /// [-box, box]; `central_zero` fixes coordinates of weight >= 2 at 0.
  virtual std::vector<Value> elements(std::int64_t box, bool central_zero) const = 0;
  /// Number of elements(box, central_zero), saturating at UINT64_MAX.
  virtual std::uint64_t element_count(std::int64_t box, bool central_zero) const = 0;
  /// Is `v` among elements(box, false)?
  virtual bool in_box(const Value& v, std::int64_t box) const;

  virtual Value constant(const Term& t) const = 0;  ///< Gen, One, Int
  virtual Value mul(const Value& a, const Value& b) const = 0;
  virtual Value pow(const Value& a, std::int64_t k) const;
  virtual Value comm(const Value& a, const Value& b) const;
  virtual Value add(const Value& a, const Value& b) const;
  virtual Value neg(const Value& a) const;
  /// Class <= 2 group: witnesses used only inside brackets may drop
  /// their weight >= 2 part.
  virtual bool central_reduction_valid() const { return false; }

  /// Direct recursive evaluation; unknown variables throw.
  Value eval(const TermPtr& t, const std::map<std::string, Value>& env) const;
};

class GroupCarrier final : public Carrier {
 public:
  explicit GroupCarrier(PcPresentationPtr P) : P_(std::move(P)) {}
  const PcPresentationPtr& presentation() const { return P_; }
  bool is_group() const override { return true; }
  bool is_finite() const override { return P_->is_finite(); }
  std::string describe() const override;
  std::string format(const Value& v) const override { return P_->format(v); }
  std::vector<Value> elements(std::int64_t box, bool central_zero) const override;
  std::uint64_t element_count(std::int64_t box, bool central_zero) const override;
  bool in_box(const Value& v, std::int64_t box) const override;
  Value constant(const Term& t) const override;
  Value mul(const Value& a, const Value& b) const override { return P_->mul(a, b); }
  Value pow(const Value& a, std::int64_t k) const override { return P_->pow(a, k); }
  Value comm(const Value& a, const Value& b) const override { return P_->comm(a, b); }
  bool central_reduction_valid() const override { return P_->nilpotency_class() <= 2; }

 private:
  PcPresentationPtr P_;
};

/// Z (box-bounded) or Z/m.
class IntCarrier final : public Carrier {
 public:
  explicit IntCarrier(std::int64_t modulus = 0) : m_(modulus) {}
  std::int64_t modulus() const { return m_; }
  bool is_group() const override { return false; }
  bool is_finite() const override { return m_ > 0; }
  std::string describe() const override { return m_ > 0 ? "Z/" + std::to_string(m_) : "Z"; }
  std::string format(const Value& v) const override { return std::to_string(v.at(0)); }
  std::vector<Value> elements(std::int64_t box, bool central_zero) const override;
  std::uint64_t element_count(std::int64_t box, bool central_zero) const override;
  Value constant(const Term& t) const override;
  Value mul(const Value& a, const Value& b) const override;
  Value add(const Value& a, const Value& b) const override;
  Value neg(const Value& a) const override;

 private:
  std::int64_t red(std::int64_t v) const;
  std::int64_t m_;
};

/// R / mR for a ring given by structure constants.
class FiniteRingCarrier final : public Carrier {
 public:
  FiniteRingCarrier(RingPresentation R, std::int64_t m);
  const AbGroupPtr& additive() const { return additive_; }
  bool is_group() const override { return false; }
  bool is_finite() const override { return true; }
  std::string describe() const override;
  std::string format(const Value& v) const override;
  std::vector<Value> elements(std::int64_t box, bool central_zero) const override;
  std::uint64_t element_count(std::int64_t box, bool central_zero) const override;
  Value constant(const Term& t) const override;
  Value mul(const Value& a, const Value& b) const override;
  Value add(const Value& a, const Value& b) const override;
  Value neg(const Value& a) const override;

 private:
  Value canon(const IntVector& v) const;
  IntVector vec(const Value& v) const;
  RingPresentation R_;
  std::int64_t m_;
  AbGroupPtr additive_;
  std::vector<Value> elements_;
};

/// Cache of filtered candidate lists and join indices, reusable across
/// solves over the same carrier.
struct SolverCache {
  struct Impl;
  SolverCache();
  ~SolverCache();
  std::unique_ptr<Impl> impl;
};

struct SolveOptions {
  std::uint64_t cap = 1000000000ULL;  ///< bound on the free-variable search space
  std::int64_t box = 0;               ///< free-variable box (infinite carriers)
  std::int64_t exist_box = 0;         ///< witness box; 0 means `box`
  bool central_reduction = true;
  SolverCache* cache = nullptr;
};

struct SolveReport {
  std::string system;
  std::string carrier;
  bool box_relative = false;
  std::int64_t box = 0;
  std::int64_t exist_box = 0;
  std::vector<std::string> vars;                 ///< free variables
  std::vector<std::vector<Value>> solutions;     ///< lexicographic order
  std::vector<std::map<std::string, Value>> witnesses;  ///< existential values per solution
  double elapsed_ms = 0;
  std::size_t count() const { return solutions.size(); }
};

SolveReport solve(const EquationSystem& sigma, const Carrier& carrier, const SolveOptions& opts = {});
/// Finite pc group (e.g. a finite quotient).
SolveReport solve_finite(const EquationSystem& sigma, const PcPresentationPtr& P, const SolveOptions& opts = {});
/// Ring Z/m.
SolveReport solve_finite(const EquationSystem& sigma, std::int64_t m, const SolveOptions& opts = {});
/// Torsion-free pc group, exponent coordinates in [-B, B].
SolveReport solve_bounded(const EquationSystem& sigma, const PcPresentationPtr& P, std::int64_t B,
                          SolveOptions opts = {});

/// Does the assignment (free and existential values) satisfy every equation?
bool satisfies(const EquationSystem& sigma, const Carrier& carrier, const std::map<std::string, Value>& env);

std::string report_to_text(const SolveReport& r, const Carrier& carrier);

struct CarrierSpec {
  enum Kind { Mod, Box } kind = Mod;
  std::int64_t value = 2;
  std::string str() const { return (kind == Mod ? "mod " : "box ") + std::to_string(value); }
};

struct CorrespondenceReport {
  std::string interpretation;
  std::string carrier;
  EquationSystem source;
  EquationSystem translated;
  std::vector<std::string> vars;
  std::vector<std::vector<Value>> source_solutions;
  std::vector<std::vector<Value>> decoded_solutions;
  std::vector<std::string> source_text, decoded_text;  ///< formatted tuples
  std::size_t host_solutions = 0;
  std::int64_t host_exist_box = 0;
  bool sets_equal = false;
  bool onto = false;
  std::vector<std::string> witnesses;  ///< mismatch evidence
  double elapsed_ms = 0;
  bool equal() const { return sets_equal && onto; }
  std::string verdict() const { return equal() ? "equal" : "mismatch"; }
};

/// Largest |value| of any subterm of a ring system when variables range
/// over [-B, B]; B for group systems.
std::int64_t interval_bound(const EquationSystem& sigma, std::int64_t B);

CorrespondenceReport check_correspondence(const EInterpretation& I, const EquationSystem& sigma,
                                          const CarrierSpec& spec, const SolveOptions& base = {});

std::string report_to_text(const CorrespondenceReport& r);

}  // namespace einterp
