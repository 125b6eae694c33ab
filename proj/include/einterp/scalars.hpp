#pragma once

// Bilinear maps between finitely generated abelian groups and their largest
// ring of scalars.

#include "einterp/abgroup.hpp"
#include "einterp/pcgroup.hpp"

#include <optional>
#include <string>
#include <vector>

namespace einterp {

/// HNF basis of the lattice of u with M u in the column span of R.
std::vector<IntVector> kernel_modulo(const IntMatrix& M, const IntMatrix& R);

/// f : A x A -> B given on generator pairs.
struct BilinearMap {
  AbGroupPtr A, B;
  /// tensor[i][j] = canonical B-coordinates of f(e_i, e_j)
  std::vector<std::vector<IntVector>> tensor;

  IntVector apply(const IntVector& x, const IntVector& y) const;
  /// Relations of A are sent to zero in both arguments.
  bool well_defined() const;
};

/// The commutator map of a class-2 presentation, with A = G/Z(G) on the
/// weight-1 generators and B = gamma_2(G).
struct CommutatorMap {
  BilinearMap f;
  std::vector<int> lifts;     ///< presentation generator behind each A generator
  LcsSection section;         ///< B as the weight-2 section
  std::vector<GroupElement> center;
};

CommutatorMap commutator_bilinear_map(const PcPresentationPtr& P);

struct FullnessReport {
  bool full = false;
  std::vector<IntVector> left_radical;   ///< generators, A-coordinates (nonzero only)
  std::vector<IntVector> right_radical;
  bool nondegenerate() const { return left_radical.empty() && right_radical.empty(); }
};

FullnessReport check_full_nondegenerate(const BilinearMap& f);

/// Commutative unital ring given additively as Z^n / relations, with
/// structure constants. When it arises as R(f), alpha/beta hold the actions.
struct RingPresentation {
  AbGroupPtr additive;
  IntVector unit;
  /// mul[p][q] = canonical coordinates of g_p * g_q
  std::vector<std::vector<IntVector>> mul;
  std::vector<IntMatrix> alpha;  ///< action of g_p on A (empty for abstract rings)
  std::vector<IntMatrix> beta;   ///< induced action on B

  Index ngens() const { return additive->ngens(); }
  IntVector multiply(const IntVector& x, const IntVector& y) const;
  IntVector add(const IntVector& x, const IntVector& y) const { return additive->reduce(x + y); }
  /// Action matrix on A of an element given in ring coordinates.
  IntMatrix alpha_of(const IntVector& x) const;
  IntMatrix beta_of(const IntVector& x) const;
};

/// Abstract ring from its table; checks unit, commutativity and associativity.
RingPresentation ring_from_table(AbGroupPtr additive, IntVector unit, std::vector<std::vector<IntVector>> mul);

RingPresentation largest_ring_of_scalars(const BilinearMap& f);

struct QuadraticData {
  Integer trace;  ///< p in t^2 = p t + q
  Integer norm;   ///< q
  IntVector tau;  ///< ring coordinates of t
};

struct RingRecognition {
  Index rank = 0;
  bool is_z = false;
  std::optional<QuadraticData> quadratic;
  std::string describe() const;
};

RingRecognition ring_recognize(const RingPresentation& R);

/// C_G(g) = <g> Z(G) with infinite cyclic image in G/Z(G).
bool is_c_small(const PcPresentationPtr& P, const GroupElement& g);

}  // namespace einterp
