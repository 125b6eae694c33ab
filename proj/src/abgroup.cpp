#include "einterp/abgroup.hpp"

#include <sstream>

namespace einterp {

AbGroup::AbGroup(Index ngens, IntMatrix relations) : ngens_(ngens), relations_(std::move(relations)) {
  if (relations_.rows() == 0) relations_.resize(0, ngens_);
  if (relations_.cols() != ngens_)
    throw DimensionError("AbGroup: relation rows have " + std::to_string(relations_.cols()) +
                         " entries for " + std::to_string(ngens_) + " generators");
  HnfResult<Integer> h = hnf<Integer>(relations_);
  hnf_rows_ = h.H.topRows(h.rank());
  pivots_ = h.pivots;
  SnfResult<Integer> s = snf<Integer>(relations_);
  free_rank_ = ngens_ - s.rank();
  for (const Integer& d : s.invariants)
    if (d != 1) torsion_.push_back(d);
}

IntVector AbGroup::reduce(IntVector v) const {
  if (v.size() != ngens_) throw DimensionError("AbGroup::reduce: wrong coordinate count");
  for (Index i = 0; i < hnf_rows_.rows(); ++i) {
    Index p = pivots_[static_cast<std::size_t>(i)];
    Integer q = floor_div(v(p), hnf_rows_(i, p));
    if (q != 0) v -= q * hnf_rows_.row(i).transpose();
  }
  return v;
}

std::string AbGroup::describe() const {
  std::ostringstream os;
  bool first = true;
  if (free_rank_ > 0) {
    os << "Z";
    if (free_rank_ > 1) os << "^" << free_rank_;
    first = false;
  }
  for (const Integer& t : torsion_) {
    if (!first) os << " + ";
    os << "Z/" << t;
    first = false;
  }
  if (first) os << "0";
  return os.str();
}

AbGroupPtr ab_from_relations(Index ngens, const IntMatrix& relations) {
  return std::make_shared<const AbGroup>(ngens, relations);
}

AbGroupPtr ab_free(Index ngens) { return ab_from_relations(ngens, IntMatrix(0, ngens)); }

AbElement::AbElement(AbGroupPtr owner, IntVector coords)
    : owner_(std::move(owner)), coords_(owner_->reduce(std::move(coords))) {}

AbElement AbElement::zero(AbGroupPtr owner) {
  Index n = owner->ngens();
  return AbElement(std::move(owner), IntVector::Zero(n));
}

AbElement AbElement::generator(AbGroupPtr owner, Index i) {
  IntVector v = IntVector::Zero(owner->ngens());
  v(i) = 1;
  return AbElement(std::move(owner), std::move(v));
}

void AbElement::require_same_owner(const AbElement& other) const {
  if (owner_ == other.owner_) return;
  const IntMatrix& a = owner_->relation_hnf();
  const IntMatrix& b = other.owner_->relation_hnf();
  if (owner_->ngens() == other.owner_->ngens() && a.rows() == b.rows() && a == b)
    return;
  throw OwnerMismatch("abelian group elements belong to different groups");
}

AbElement AbElement::operator+(const AbElement& other) const {
  require_same_owner(other);
  return AbElement(owner_, coords_ + other.coords_);
}

AbElement AbElement::operator-(const AbElement& other) const {
  require_same_owner(other);
  return AbElement(owner_, coords_ - other.coords_);
}

AbElement AbElement::operator-() const { return AbElement(owner_, -coords_); }

AbElement AbElement::scaled(const Integer& k) const { return AbElement(owner_, k * coords_); }

bool AbElement::operator==(const AbElement& other) const {
  require_same_owner(other);
  return coords_ == other.coords_;
}

bool is_endomorphism(const AbGroup& A, const IntMatrix& X) {
  const IntMatrix& L = A.relations();
  for (Index r = 0; r < L.rows(); ++r)
    if (!A.in_relation_lattice(X * L.row(r).transpose())) return false;
  return true;
}

bool is_zero_endomorphism(const AbGroup& A, const IntMatrix& X) {
  for (Index j = 0; j < X.cols(); ++j)
    if (!A.in_relation_lattice(X.col(j))) return false;
  return true;
}

IntVector EndBasis::flatten(const IntMatrix& X) {
  IntVector v(X.size());
  Index k = 0;
  for (Index j = 0; j < X.cols(); ++j)
    for (Index i = 0; i < X.rows(); ++i) v(k++) = X(i, j);
  return v;
}

IntMatrix EndBasis::unflatten(const IntVector& v, Index n) {
  IntMatrix X(n, n);
  Index k = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) X(i, j) = v(k++);
  return X;
}

std::optional<IntVector> EndBasis::coordinates(const IntMatrix& X) const {
  if (!is_endomorphism(*owner, X)) return std::nullopt;
  std::vector<IntVector> cols;
  for (const IntMatrix& B : basis) cols.push_back(flatten(B));
  // also allow the relation generators so that X is only matched modulo them
  const Index n = owner->ngens();
  const IntMatrix& Lh = owner->relation_hnf();
  std::vector<IntVector> extra;
  for (Index j = 0; j < n; ++j)
    for (Index r = 0; r < Lh.rows(); ++r) {
      IntMatrix E = IntMatrix::Zero(n, n);
      E.col(j) = Lh.row(r).transpose();
      extra.push_back(flatten(E));
    }
  std::vector<IntVector> all = cols;
  all.insert(all.end(), extra.begin(), extra.end());
  auto c = lattice_member<Integer>(flatten(X), all);
  if (!c) return std::nullopt;
  return additive->reduce(c->head(static_cast<Index>(basis.size())));
}

IntMatrix EndBasis::combine(const IntVector& coords) const {
  const Index n = owner->ngens();
  IntMatrix X = IntMatrix::Zero(n, n);
  for (std::size_t i = 0; i < basis.size(); ++i) X += coords(static_cast<Index>(i)) * basis[i];
  return X;
}

EndBasis endomorphism_basis(const AbGroupPtr& A) {
  const Index n = A->ngens();
  const IntMatrix& L = A->relation_hnf();  // rows are relators
  const Index k = L.rows();
  // Unknowns: X (n*n, column-major) and Y (k*k). Condition X * L^T = L^T * Y,
  // i.e. each relator image is an integer combination of relators.
  const Index nx = n * n, ny = k * k;
  IntMatrix M = IntMatrix::Zero(n * k, nx + ny);
  for (Index c = 0; c < k; ++c)      // column c of L^T is relator c
    for (Index i = 0; i < n; ++i) {  // row i of the product
      Index eq = c * n + i;
      for (Index j = 0; j < n; ++j) M(eq, j * n + i) += L(c, j);          // X(i,j) * L(c,j)
      for (Index d = 0; d < k; ++d) M(eq, nx + c * k + d) -= L(d, i);     // L^T(i,d) * Y(d,c)
    }
  std::vector<IntVector> ker = kernel_basis<Integer>(M);
  IntMatrix proj(static_cast<Index>(ker.size()), nx);
  for (Index r = 0; r < proj.rows(); ++r) proj.row(r) = ker[static_cast<std::size_t>(r)].head(nx).transpose();
  if (k == 0) proj = IntMatrix::Identity(nx, nx);
  HnfResult<Integer> h = hnf<Integer>(proj);

  EndBasis out;
  out.owner = A;
  for (Index r = 0; r < h.rank(); ++r) out.basis.push_back(EndBasis::unflatten(h.H.row(r).transpose(), n));
  const Index b = static_cast<Index>(out.basis.size());

  // Relations: matrices with every column in the relation lattice.
  std::vector<IntVector> cols;
  for (const IntMatrix& B : out.basis) cols.push_back(EndBasis::flatten(B));
  std::vector<IntVector> rel_rows;
  for (Index j = 0; j < n; ++j)
    for (Index r = 0; r < k; ++r) {
      IntMatrix E = IntMatrix::Zero(n, n);
      E.col(j) = L.row(r).transpose();
      auto c = lattice_member<Integer>(EndBasis::flatten(E), cols);
      if (!c) throw std::logic_error("endomorphism_basis: relation matrix outside End lattice");
      rel_rows.push_back(*c);
    }
  out.relations = IntMatrix(static_cast<Index>(rel_rows.size()), b);
  for (std::size_t r = 0; r < rel_rows.size(); ++r) out.relations.row(static_cast<Index>(r)) = rel_rows[r].transpose();
  out.additive = ab_from_relations(b, out.relations);
  return out;
}

AbQuotient ab_quotient(const AbGroupPtr& A, const std::vector<AbElement>& gens) {
  const Index n = A->ngens();
  IntMatrix R(A->relations().rows() + static_cast<Index>(gens.size()), n);
  R.topRows(A->relations().rows()) = A->relations();
  for (std::size_t i = 0; i < gens.size(); ++i) {
    if (gens[i].owner()->ngens() != n) throw OwnerMismatch("ab_quotient: generator from another group");
    R.row(A->relations().rows() + static_cast<Index>(i)) = gens[i].coords().transpose();
  }
  return {ab_from_relations(n, R), IntMatrix::Identity(n, n)};
}

}  // namespace einterp
