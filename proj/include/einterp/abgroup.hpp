#pragma once

#include "einterp/intlinalg.hpp"

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace einterp {

/// Finitely generated abelian group Z^n / (row span of `relations`).
class AbGroup {
 public:
  AbGroup(Index ngens, IntMatrix relations);

  Index ngens() const { return ngens_; }
  const IntMatrix& relations() const { return relations_; }
  /// Nonzero rows of the HNF of the relations.
  const IntMatrix& relation_hnf() const { return hnf_rows_; }
  const std::vector<Index>& relation_pivots() const { return pivots_; }

  Index free_rank() const { return free_rank_; }
  /// Invariant factors > 1, in divisibility order.
  const std::vector<Integer>& torsion() const { return torsion_; }
  bool is_trivial() const { return free_rank_ == 0 && torsion_.empty(); }
  bool is_finite() const { return free_rank_ == 0; }

  /// Canonical representative: reduced against the HNF relation rows.
  IntVector reduce(IntVector v) const;
  bool is_zero(const IntVector& v) const { return reduce(v).isZero(); }
  bool in_relation_lattice(const IntVector& v) const { return is_zero(v); }

  /// "Z^2 + Z/2 + Z/4" style summary.
  std::string describe() const;

 private:
  Index ngens_;
  IntMatrix relations_;
  IntMatrix hnf_rows_;
  std::vector<Index> pivots_;
  Index free_rank_ = 0;
  std::vector<Integer> torsion_;
};

using AbGroupPtr = std::shared_ptr<const AbGroup>;

AbGroupPtr ab_from_relations(Index ngens, const IntMatrix& relations);
AbGroupPtr ab_free(Index ngens);

class OwnerMismatch : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Element of an AbGroup, always stored in canonical form.
class AbElement {
 public:
  AbElement(AbGroupPtr owner, IntVector coords);
  static AbElement zero(AbGroupPtr owner);
  static AbElement generator(AbGroupPtr owner, Index i);

  const AbGroupPtr& owner() const { return owner_; }
  const IntVector& coords() const { return coords_; }

  AbElement operator+(const AbElement& other) const;
  AbElement operator-(const AbElement& other) const;
  AbElement operator-() const;
  AbElement scaled(const Integer& k) const;
  bool operator==(const AbElement& other) const;
  bool is_zero() const { return coords_.isZero(); }

 private:
  void require_same_owner(const AbElement& other) const;
  AbGroupPtr owner_;
  IntVector coords_;
};

/// Additive generators of End(A) as integer matrices acting on coordinate
/// columns, together with the relations among them. Two matrices describe
/// the same endomorphism iff their difference maps every generator into the
/// relation lattice.
struct EndBasis {
  AbGroupPtr owner;
  std::vector<IntMatrix> basis;
  IntMatrix relations;  ///< rows are relations in basis coordinates
  AbGroupPtr additive;  ///< Z^basis / relations

  /// Flatten an n x n matrix column-major into a length n^2 vector.
  static IntVector flatten(const IntMatrix& X);
  static IntMatrix unflatten(const IntVector& v, Index n);

  /// Coordinates of X in the basis, or nullopt when X is not an endomorphism.
  std::optional<IntVector> coordinates(const IntMatrix& X) const;
  IntMatrix combine(const IntVector& coords) const;
};

/// True iff X maps the relation lattice of A into itself.
bool is_endomorphism(const AbGroup& A, const IntMatrix& X);
/// True iff X maps every element of A to zero.
bool is_zero_endomorphism(const AbGroup& A, const IntMatrix& X);

EndBasis endomorphism_basis(const AbGroupPtr& A);

struct AbQuotient {
  AbGroupPtr quotient;
  IntMatrix projection;  ///< coordinate map into the quotient (identity here)
};

/// A / <gens>: relations of A stacked with the coordinate rows of gens.
AbQuotient ab_quotient(const AbGroupPtr& A, const std::vector<AbElement>& gens);

}  // namespace einterp
