#include "einterp/scalars.hpp"

#include <sstream>

namespace einterp {

std::vector<IntVector> kernel_modulo(const IntMatrix& M, const IntMatrix& R) {
  const Index n = M.cols();
  IntMatrix big(M.rows(), n + R.cols());
  big.leftCols(n) = M;
  big.rightCols(R.cols()) = R;
  std::vector<IntVector> ker = kernel_basis<Integer>(big);
  IntMatrix proj(static_cast<Index>(ker.size()), n);
  for (Index r = 0; r < proj.rows(); ++r) proj.row(r) = ker[static_cast<std::size_t>(r)].head(n).transpose();
  HnfResult<Integer> h = hnf<Integer>(proj);
  std::vector<IntVector> out;
  for (Index r = 0; r < h.rank(); ++r) out.push_back(h.H.row(r).transpose());
  return out;
}

namespace {

// Relation columns of B repeated for `blocks` stacked copies.
IntMatrix block_relations(const AbGroup& B, Index blocks) {
  const Index d = B.ngens();
  const IntMatrix& L = B.relations();
  IntMatrix R = IntMatrix::Zero(d * blocks, L.rows() * blocks);
  for (Index b = 0; b < blocks; ++b)
    for (Index q = 0; q < L.rows(); ++q)
      for (Index r = 0; r < d; ++r) R(b * d + r, b * L.rows() + q) = L(q, r);
  return R;
}

std::vector<IntVector> radical(const BilinearMap& f, bool left) {
  const Index n = f.A->ngens(), d = f.B->ngens();
  IntMatrix M = IntMatrix::Zero(n * d, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      const IntVector& t = left ? f.tensor[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]
                                : f.tensor[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
      for (Index r = 0; r < d; ++r) M(j * d + r, i) = t(r);
    }
  std::vector<IntVector> out;
  for (const IntVector& u : kernel_modulo(M, block_relations(*f.B, n))) {
    IntVector c = f.A->reduce(u);
    if (!c.isZero()) out.push_back(c);
  }
  return out;
}

IntVector concat(const IntVector& a, const IntVector& b) {
  IntVector v(a.size() + b.size());
  v << a, b;
  return v;
}

}  // namespace

IntVector BilinearMap::apply(const IntVector& x, const IntVector& y) const {
  IntVector acc = IntVector::Zero(B->ngens());
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) == 0) continue;
    for (Index j = 0; j < y.size(); ++j)
      if (y(j) != 0) acc += x(i) * y(j) * tensor[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return B->reduce(acc);
}

bool BilinearMap::well_defined() const {
  const IntMatrix& L = A->relations();
  const Index n = A->ngens();
  for (Index r = 0; r < L.rows(); ++r)
    for (Index j = 0; j < n; ++j) {
      IntVector e = IntVector::Zero(n);
      e(j) = 1;
      if (!apply(L.row(r).transpose(), e).isZero() || !apply(e, L.row(r).transpose()).isZero()) return false;
    }
  return true;
}

CommutatorMap commutator_bilinear_map(const PcPresentationPtr& P) {
  if (P->nilpotency_class() != 2)
    throw PreconditionError("commutator_bilinear_map requires a presentation of class 2");
  CommutatorMap out;
  LcsSection s1 = lcs_section(*P, 1);
  out.lifts = s1.generators;
  out.center = center_class2(P);
  std::vector<AbElement> images;
  for (const GroupElement& z : out.center) images.emplace_back(s1.group, s1.log(z.exponents()));
  out.f.A = ab_quotient(s1.group, images).quotient;
  out.section = lcs_section(*P, 2);
  out.f.B = out.section.group;
  const std::size_t n = out.lifts.size();
  out.f.tensor.assign(n, std::vector<IntVector>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      out.f.tensor[i][j] = out.section.log(P->comm(P->gen(out.lifts[i]), P->gen(out.lifts[j])));
  if (!out.f.well_defined()) throw std::logic_error("commutator map does not descend to G/Z(G)");
  return out;
}

FullnessReport check_full_nondegenerate(const BilinearMap& f) {
  FullnessReport rep;
  std::vector<AbElement> image;
  for (const auto& row : f.tensor)
    for (const IntVector& t : row) image.emplace_back(f.B, t);
  rep.full = ab_quotient(f.B, image).quotient->is_trivial();
  rep.left_radical = radical(f, true);
  rep.right_radical = radical(f, false);
  return rep;
}

IntVector RingPresentation::multiply(const IntVector& x, const IntVector& y) const {
  IntVector acc = IntVector::Zero(ngens());
  for (Index p = 0; p < x.size(); ++p) {
    if (x(p) == 0) continue;
    for (Index q = 0; q < y.size(); ++q)
      if (y(q) != 0) acc += x(p) * y(q) * mul[static_cast<std::size_t>(p)][static_cast<std::size_t>(q)];
  }
  return additive->reduce(acc);
}

IntMatrix RingPresentation::alpha_of(const IntVector& x) const {
  if (alpha.empty()) throw PreconditionError("ring has no action");
  IntMatrix M = IntMatrix::Zero(alpha[0].rows(), alpha[0].cols());
  for (Index p = 0; p < x.size(); ++p) M += x(p) * alpha[static_cast<std::size_t>(p)];
  return M;
}

IntMatrix RingPresentation::beta_of(const IntVector& x) const {
  if (beta.empty()) throw PreconditionError("ring has no action");
  IntMatrix M = IntMatrix::Zero(beta[0].rows(), beta[0].cols());
  for (Index p = 0; p < x.size(); ++p) M += x(p) * beta[static_cast<std::size_t>(p)];
  return M;
}

RingPresentation ring_from_table(AbGroupPtr additive, IntVector unit, std::vector<std::vector<IntVector>> mul) {
  RingPresentation R;
  R.additive = std::move(additive);
  R.unit = R.additive->reduce(std::move(unit));
  R.mul = std::move(mul);
  const Index n = R.ngens();
  for (auto& row : R.mul)
    for (auto& v : row) v = R.additive->reduce(v);
  auto e = [n](Index p) {
    IntVector v = IntVector::Zero(n);
    v(p) = 1;
    return v;
  };
  for (Index p = 0; p < n; ++p) {
    IntVector gp = R.additive->reduce(e(p));
    if (R.multiply(R.unit, e(p)) != gp) throw std::logic_error("ring: unit does not act as identity");
    for (Index q = 0; q < n; ++q) {
      if (R.multiply(e(p), e(q)) != R.multiply(e(q), e(p))) throw std::logic_error("ring: not commutative");
      for (Index r = 0; r < n; ++r)
        if (R.multiply(R.multiply(e(p), e(q)), e(r)) != R.multiply(e(p), R.multiply(e(q), e(r))))
          throw std::logic_error("ring: not associative");
    }
  }
  return R;
}

RingPresentation largest_ring_of_scalars(const BilinearMap& f) {
  FullnessReport fr = check_full_nondegenerate(f);
  if (!fr.full || !fr.nondegenerate())
    throw PreconditionError("largest_ring_of_scalars requires a full non-degenerate bilinear map");
  const Index n = f.A->ngens(), d = f.B->ngens();
  EndBasis EA = endomorphism_basis(f.A), EB = endomorphism_basis(f.B);
  const Index p = static_cast<Index>(EA.basis.size()), q = static_cast<Index>(EB.basis.size());
  const auto& T = f.tensor;
  auto t = [&](Index i, Index j) -> const IntVector& { return T[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; };

  // f(a e_i, e_j) = f(e_i, a e_j) and f(a e_i, e_j) = b f(e_i, e_j)
  IntMatrix M = IntMatrix::Zero(n * n * 2 * d, p + q);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      Index row1 = ((i * n + j) * 2) * d, row2 = row1 + d;
      for (Index s = 0; s < p; ++s) {
        const IntMatrix& X = EA.basis[static_cast<std::size_t>(s)];
        IntVector left = IntVector::Zero(d), right = IntVector::Zero(d);
        for (Index k = 0; k < n; ++k) {
          if (X(k, i) != 0) left += X(k, i) * t(k, j);
          if (X(k, j) != 0) right += X(k, j) * t(i, k);
        }
        M.block(row1, s, d, 1) = left - right;
        M.block(row2, s, d, 1) = left;
      }
      for (Index u = 0; u < q; ++u) M.block(row2, p + u, d, 1) = -(EB.basis[static_cast<std::size_t>(u)] * t(i, j));
    }
  std::vector<IntVector> S = kernel_modulo(M, block_relations(*f.B, n * n * 2));
  const Index r = static_cast<Index>(S.size());

  std::vector<IntVector> zero_pairs;
  for (Index k = 0; k < EA.relations.rows(); ++k)
    zero_pairs.push_back(concat(EA.relations.row(k).transpose(), IntVector::Zero(q)));
  for (Index k = 0; k < EB.relations.rows(); ++k)
    zero_pairs.push_back(concat(IntVector::Zero(p), EB.relations.row(k).transpose()));
  std::vector<IntVector> rel_rows;
  for (const IntVector& z : zero_pairs) {
    auto c = lattice_member<Integer>(z, S);
    if (!c) throw std::logic_error("zero endomorphism pair outside the scalar lattice");
    rel_rows.push_back(*c);
  }
  IntMatrix rels(static_cast<Index>(rel_rows.size()), r);
  for (std::size_t k = 0; k < rel_rows.size(); ++k) rels.row(static_cast<Index>(k)) = rel_rows[k].transpose();
  AbGroupPtr additive = ab_from_relations(r, rels);

  std::vector<IntVector> span = S;
  span.insert(span.end(), zero_pairs.begin(), zero_pairs.end());
  auto to_ring = [&](const IntMatrix& X, const IntMatrix& Y) {
    auto ca = EA.coordinates(X);
    auto cb = EB.coordinates(Y);
    if (!ca || !cb) throw std::logic_error("scalar composite is not an endomorphism");
    auto c = lattice_member<Integer>(concat(*ca, *cb), span);
    if (!c) throw std::logic_error("scalar composite left the ring of scalars");
    return additive->reduce(c->head(r));
  };

  std::vector<IntMatrix> alpha, beta;
  for (const IntVector& s : S) {
    alpha.push_back(EA.combine(s.head(p)));
    beta.push_back(EB.combine(s.tail(q)));
  }
  IntVector unit = to_ring(IntMatrix::Identity(n, n), IntMatrix::Identity(d, d));
  std::vector<std::vector<IntVector>> mul(static_cast<std::size_t>(r), std::vector<IntVector>(static_cast<std::size_t>(r)));
  for (Index a = 0; a < r; ++a)
    for (Index b = 0; b < r; ++b)
      mul[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
          to_ring(alpha[static_cast<std::size_t>(a)] * alpha[static_cast<std::size_t>(b)],
                  beta[static_cast<std::size_t>(a)] * beta[static_cast<std::size_t>(b)]);
  RingPresentation R = ring_from_table(additive, unit, std::move(mul));
  R.alpha = std::move(alpha);
  R.beta = std::move(beta);
  return R;
}

RingRecognition ring_recognize(const RingPresentation& R) {
  RingRecognition out;
  const AbGroup& G = *R.additive;
  out.rank = G.free_rank();
  if (!G.torsion().empty()) return out;
  if (out.rank == 1) {
    AbGroupPtr q = ab_quotient(R.additive, {AbElement(R.additive, R.unit)}).quotient;
    out.is_z = q->is_trivial();
    return out;
  }
  if (out.rank != 2) return out;
  const Index n = G.ngens();
  IntMatrix V = IntMatrix::Identity(n, n);
  if (G.relations().rows() > 0) V = snf<Integer>(G.relations()).V;
  IntMatrix Vt = V.transpose();
  auto phi = [&](const IntVector& x) { return IntVector((Vt * x).tail(2)); };
  IntVector u = phi(R.unit);
  Integer s, t;
  Integer g = ext_gcd<Integer>(u(0), u(1), s, t);
  if (g != 1) return out;
  IntVector w(2);
  w << -t, s;
  IntVector y = IntVector::Zero(n);
  y.tail(2) = w;
  auto sol = solve_linear<Integer>(Vt, y);
  if (sol.empty()) throw std::logic_error("ring_recognize: unimodular solve failed");
  IntVector tau = G.reduce(*sol.particular);
  IntVector sq = phi(R.multiply(tau, tau));
  Integer qn = w(1) * sq(0) - w(0) * sq(1);
  Integer pt = -u(1) * sq(0) + u(0) * sq(1);
  Integer k = floor_div<Integer>(pt, Integer(2));
  tau = G.reduce(tau - k * R.unit);
  QuadraticData qd;
  qd.trace = pt - 2 * k;
  qd.norm = pt * k + qn - k * k;
  qd.tau = tau;
  if (R.multiply(tau, tau) != G.reduce(qd.trace * tau + qd.norm * R.unit))
    throw std::logic_error("ring_recognize: quadratic relation check failed");
  out.quadratic = qd;
  return out;
}

std::string RingRecognition::describe() const {
  std::ostringstream os;
  if (is_z) return "Z";
  os << "rank " << rank;
  if (quadratic) {
    const Integer& p = quadratic->trace;
    const Integer& q = quadratic->norm;
    std::string rhs;
    if (p != 0) rhs = (p == 1 ? "" : p == -1 ? "-" : to_string(p) + "*") + std::string("t");
    if (q != 0 || rhs.empty()) {
      if (rhs.empty()) rhs = to_string(q);
      else rhs += (q < 0 ? " - " : " + ") + to_string(Integer(abs(q)));
    }
    os << ", t^2 = " << rhs;
  }
  return os.str();
}

bool is_c_small(const PcPresentationPtr& P, const GroupElement& g) {
  if (P->nilpotency_class() < 2) return false;
  CommutatorMap cm = commutator_bilinear_map(P);
  const AbGroupPtr& A = cm.f.A;
  auto image = [&](const GroupElement& x) {
    IntVector v(static_cast<Index>(cm.lifts.size()));
    for (std::size_t k = 0; k < cm.lifts.size(); ++k)
      v(static_cast<Index>(k)) = Integer(x.exponents()[static_cast<std::size_t>(cm.lifts[k])]);
    return A->reduce(v);
  };
  IntVector gbar = image(g);
  AbGroupPtr quo = ab_quotient(A, {AbElement(A, gbar)}).quotient;
  if (quo->free_rank() != A->free_rank() - 1) return false;
  std::vector<IntVector> span{gbar};
  for (Index r = 0; r < A->relations().rows(); ++r) span.push_back(A->relations().row(r).transpose());
  for (const GroupElement& c : centralizer_class2(P, g))
    if (!lattice_member<Integer>(image(c), span)) return false;
  return true;
}

}  // namespace einterp
