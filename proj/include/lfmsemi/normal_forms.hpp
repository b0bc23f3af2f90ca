#pragma once

#include <string>
#include <variant>
#include <vector>

#include "lfmsemi/lfm.hpp"

namespace lfmsemi {

enum class FormKind { EllipticUnitarySplit, EllipticU0, ParabolicSiegel, HyperbolicSiegel };

inline std::string_view to_string(FormKind k) {
  switch (k) {
    case FormKind::EllipticUnitarySplit: return "elliptic-unitary-split";
    case FormKind::EllipticU0: return "elliptic-u0";
    case FormKind::ParabolicSiegel: return "parabolic-siegel";
    case FormKind::HyperbolicSiegel: return "hyperbolic-siegel";
  }
  return "?";
}

struct ConditionMargin {
  std::string condition;
  double margin = 0.0;
  bool pass = true;
};

struct ConjugationStep {
  std::string name;
  ProjectiveMap map;
};

/// z -> (Lambda z', A1 z'').
struct EllipticSplitParams {
  CVector lambda;
  CMatrix a1;
};

/// z -> A z / (delta <z, (A^H - I) e1> + 1).
struct EllipticU0Params {
  CMatrix a_hat;
  double delta = 0.0;
};

/// (z, u, v, w) -> (z + 2i<u, a> + 2i<w, c> + b, u + a, D v, A w).
struct ParabolicParams {
  BlockSizes blocks;
  CVector a;
  CVector c;
  cplx b = 0.0;
  CVector d;
  CMatrix a_block;
};

/// (z, u, v, w) -> (lambda z + 2i<w, coupling> + b, sqrt(lambda) u,
///                  sqrt(lambda) D v, sqrt(lambda) A w + c).
struct HyperbolicParams {
  BlockSizes blocks;
  double lambda = 1.0;
  cplx b = 0.0;
  CVector coupling;
  CVector c;
  CVector d;
  CMatrix a_block;
};

using FormParams = std::variant<EllipticSplitParams, EllipticU0Params, ParabolicParams, HyperbolicParams>;

struct NormalForm {
  FormKind kind = FormKind::EllipticUnitarySplit;
  Domain domain = Domain::Ball;
  FormParams params;
  ProjectiveMap normal_map;
  std::vector<ConjugationStep> chain;
  ProjectiveMap conjugator;  // input (ball) coordinates -> normal coordinates
  std::vector<ConditionMargin> conditions;
  double chain_residual = 0.0;
  std::optional<double> ball_delta;
};

// ------------------------------------------------------------ normal maps

inline ProjectiveMap elliptic_split_map(const EllipticSplitParams& p) {
  CMatrix a = block_diag(CMatrix(p.lambda.asDiagonal()), p.a1);
  return ball_linear(a);
}

inline ProjectiveMap elliptic_u0_map(const EllipticU0Params& p) {
  const Index n = p.a_hat.rows();
  CMatrix h = CMatrix::Zero(n + 1, n + 1);
  h.topLeftCorner(n, n) = p.a_hat;
  const CVector e1 = CVector::Unit(n, 0);
  const CVector c = p.delta * (p.a_hat.adjoint() - CMatrix::Identity(n, n)) * e1;
  h.block(n, 0, 1, n) = c.adjoint();
  h(n, n) = 1.0;
  return ProjectiveMap(h, Domain::Ball, Domain::Ball);
}

inline void check_blocks(const BlockSizes& bs, Index a, Index c, Index d, Index ab) {
  if (a != bs.p || d != bs.q || c != bs.r || ab != bs.r) {
    throw Error(ErrorKind::Dimension, "normal form parameters do not match the block sizes");
  }
}

inline SiegelMap parabolic_siegel(const ParabolicParams& p) {
  const BlockSizes& bs = p.blocks;
  check_blocks(bs, p.a.size(), p.c.size(), p.d.size(), p.a_block.rows());
  const Index k = bs.total();
  CMatrix m = CMatrix::Zero(k, k);
  m.topLeftCorner(bs.p, bs.p).setIdentity();
  m.block(bs.p, bs.p, bs.q, bs.q) = p.d.asDiagonal();
  m.bottomRightCorner(bs.r, bs.r) = p.a_block;
  CVector coupling = CVector::Zero(k), trans = CVector::Zero(k);
  coupling.head(bs.p) = p.a;
  coupling.tail(bs.r) = p.c;
  trans.head(bs.p) = p.a;
  return SiegelMap(1.0, m, coupling, p.b, trans, {}, bs);
}

inline SiegelMap hyperbolic_siegel(const HyperbolicParams& p) {
  const BlockSizes& bs = p.blocks;
  check_blocks(bs, bs.p, p.c.size(), p.d.size(), p.a_block.rows());
  if (p.coupling.size() != bs.r) throw Error(ErrorKind::Dimension, "coupling must have the w-block size");
  const Index k = bs.total();
  const double sl = std::sqrt(p.lambda);
  CMatrix m = CMatrix::Zero(k, k);
  m.topLeftCorner(bs.p, bs.p) = sl * CMatrix::Identity(bs.p, bs.p);
  m.block(bs.p, bs.p, bs.q, bs.q) = sl * CMatrix(p.d.asDiagonal());
  m.bottomRightCorner(bs.r, bs.r) = sl * p.a_block;
  CVector coupling = CVector::Zero(k), trans = CVector::Zero(k);
  coupling.tail(bs.r) = p.coupling;
  trans.tail(bs.r) = p.c;
  return SiegelMap(p.lambda, m, coupling, p.b, trans, {}, bs);
}

// ------------------------------------------------------------ conditions

/// Self-map conditions of an affine Siegel map (lambda, M, a, b, c):
/// Q = lambda I - M^H M >= 0, Im b - |c|^2 >= <Q^+ x, x> and Q Q^+ x = x
/// with x = M^H c - a.
inline std::vector<ConditionMargin> siegel_conditions(const SiegelMap& g) {
  std::vector<ConditionMargin> out;
  const double lam = g.lambda().real();
  const double scale = std::max(1.0, std::abs(g.lambda()));
  out.push_back({"lambda.real", -std::abs(g.lambda().imag()), std::abs(g.lambda().imag()) <= 1e-8 * scale});
  const Index k = g.M().rows();
  const CMatrix q = lam * CMatrix::Identity(k, k) - g.M().adjoint() * g.M();
  const double p1 = k > 0 ? hermitian_min_eigenvalue(q) : lam;
  out.push_back({"Q.psd", p1, p1 >= -1e-10 * scale});
  const CVector x = g.M().adjoint() * g.c() - g.a();
  const CMatrix qp = pinv(q.size() ? q : CMatrix::Zero(0, 0), 1e-10, 1e-12 * scale);
  const double quad = k > 0 ? inner(qp * x, x).real() : 0.0;
  const double p2 = g.b().imag() - g.c().squaredNorm() - quad;
  const double s2 = std::max({1.0, std::abs(g.b()), g.c().squaredNorm(), std::abs(quad)});
  out.push_back({"imb.bound", p2, p2 >= -1e-10 * s2});
  const double p3 = k > 0 ? -(q * qp * x - x).norm() : 0.0;
  out.push_back({"x.in.range", p3, p3 >= -1e-8 * std::max(1.0, x.norm())});
  return out;
}

inline std::vector<ConditionMargin> unimodular_block_conditions(const CVector& d, const Tolerances& tol) {
  std::vector<ConditionMargin> out;
  double modulus = 0.0, one = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < d.size(); ++j) {
    modulus = std::max(modulus, std::abs(std::abs(d(j)) - 1.0));
    one = std::min(one, std::abs(d(j) - 1.0));
  }
  if (d.size() == 0) one = 1.0;
  out.push_back({"D.unimodular", -modulus, modulus <= tol.unimodular});
  out.push_back({"D.not.one", one, one > tol.unimodular});
  return out;
}

inline std::vector<ConditionMargin> parabolic_conditions(const ParabolicParams& p, const Tolerances& tol = {}) {
  auto out = unimodular_block_conditions(p.d, tol);
  for (auto& c : siegel_conditions(parabolic_siegel(p))) out.push_back(c);
  return out;
}

inline std::vector<ConditionMargin> hyperbolic_conditions(const HyperbolicParams& p, const Tolerances& tol = {}) {
  auto out = unimodular_block_conditions(p.d, tol);
  out.push_back({"lambda.gt.one", p.lambda - 1.0, p.lambda > 1.0});
  for (auto& c : siegel_conditions(hyperbolic_siegel(p))) out.push_back(c);
  const Index r = p.blocks.r;
  const CMatrix& a = p.a_block;
  const CMatrix pm = CMatrix::Identity(r, r) - a * a.adjoint();
  const double pmin = r > 0 ? hermitian_min_eigenvalue(pm) : 0.0;
  out.push_back({"P.psd", pmin, pmin >= -1e-10});
  if (r > 0 && p.coupling.norm() == 0.0) {
    const CMatrix qm = CMatrix::Identity(r, r) - a.adjoint() * a;
    const CMatrix qp = pinv(qm, 1e-10, 1e-12), pp = pinv(pm, 1e-10, 1e-12);
    const CVector ac = a.adjoint() * p.c;
    const double viaP = inner(pp * p.c, p.c).real();
    const double viaQ = inner(qp * ac, ac).real() + p.c.squaredNorm();
    const double s = std::max({1.0, std::abs(viaP), std::abs(viaQ)});
    out.push_back({"imb.bound.P", p.b.imag() - viaP, p.b.imag() - viaP >= -1e-10 * s});
    out.push_back({"svd.identity", -std::abs(viaP - viaQ), std::abs(viaP - viaQ) <= 1e-8 * s});
  }
  return out;
}

inline bool all_pass(const std::vector<ConditionMargin>& cs) {
  return std::all_of(cs.begin(), cs.end(), [](const ConditionMargin& c) { return c.pass; });
}

// ------------------------------------------------------------ helpers

inline ProjectiveMap compose_chain(const std::vector<ConjugationStep>& chain, Index n) {
  ProjectiveMap out = ProjectiveMap::identity(n, Domain::Ball);
  for (const auto& s : chain) out = compose(s.map, out);
  return out;
}

/// max over ball samples of |s(f(z)) - g(s(z))| / max(1, |g(s(z))|).
inline double conjugation_residual(const ProjectiveMap& f, const ProjectiveMap& g, const ProjectiveMap& s,
                                   std::size_t count = 64) {
  SamplerCfg cfg;
  cfg.seed = 99;
  cfg.count = count;
  double worst = 0.0;
  for (const CVector& z : sample_points(cfg, f.dim())) {
    const CVector lhs = s.apply(f.apply(z));
    const CVector rhs = g.apply(s.apply(z));
    worst = std::max(worst, (lhs - rhs).norm() / std::max(1.0, rhs.norm()));
  }
  return worst;
}

/// Block data of a contraction K = V T V^H with T = I_p + diag(d) + A after
/// reordering the Schur factor (eigenvalue 1, other unimodular, the rest).
struct ContractionBlocks {
  CMatrix v;
  BlockSizes blocks;
  CVector d;
  CMatrix a_block;
  double decoupling_residual = 0.0;
};

inline ContractionBlocks split_contraction(const CMatrix& k, const Tolerances& tol) {
  ContractionBlocks out;
  const Index n = k.rows();
  if (n == 0) {
    out.v = CMatrix(0, 0);
    out.d = CVector(0);
    out.a_block = CMatrix(0, 0);
    return out;
  }
  SchurForm s = schur(k);
  auto key = [&](cplx mu) {
    if (std::abs(mu - 1.0) <= tol.eigen_one) return 0;
    if (std::abs(std::abs(mu) - 1.0) <= tol.unimodular) return 1;
    return 2;
  };
  reorder_schur(s, key);
  const CMatrix& t = s.upper_triangular;
  for (Index i = 0; i < n; ++i) {
    const int kk = key(t(i, i));
    if (kk == 0) ++out.blocks.p;
    else if (kk == 1) ++out.blocks.q;
    else ++out.blocks.r;
  }
  const Index pq = out.blocks.p + out.blocks.q;
  double res = 0.0;
  for (Index i = 0; i < pq; ++i)
    for (Index j = i + 1; j < n; ++j) res = std::max(res, std::abs(t(i, j)));
  out.decoupling_residual = res;
  if (res > tol.decoupling * std::max(1.0, t.norm())) {
    throw Error(ErrorKind::Form, "unimodular part does not split off (residual " + std::to_string(res) + ")");
  }
  out.v = s.unitary.adjoint();
  out.d = t.diagonal().segment(out.blocks.p, out.blocks.q);
  out.a_block = t.bottomRightCorner(out.blocks.r, out.blocks.r);
  return out;
}

inline NormalForm finish_form(NormalForm nf, const BallMap& f) {
  nf.conjugator = compose_chain(nf.chain, f.dim());
  nf.chain_residual = conjugation_residual(f.projective(), nf.normal_map, nf.conjugator);
  return nf;
}

/// A normal form given directly by its parameters (identity conjugator).
inline NormalForm make_normal_form(const FormParams& params, const Tolerances& tol = {}) {
  NormalForm nf;
  nf.params = params;
  if (auto* p = std::get_if<EllipticSplitParams>(&params)) {
    nf.kind = FormKind::EllipticUnitarySplit;
    nf.domain = Domain::Ball;
    nf.normal_map = elliptic_split_map(*p);
  } else if (auto* p = std::get_if<EllipticU0Params>(&params)) {
    nf.kind = FormKind::EllipticU0;
    nf.domain = Domain::Ball;
    nf.normal_map = elliptic_u0_map(*p);
  } else if (auto* p = std::get_if<ParabolicParams>(&params)) {
    nf.kind = FormKind::ParabolicSiegel;
    nf.domain = Domain::Siegel;
    nf.normal_map = parabolic_siegel(*p).projective();
    nf.conditions = parabolic_conditions(*p, tol);
  } else if (auto* p = std::get_if<HyperbolicParams>(&params)) {
    nf.kind = FormKind::HyperbolicSiegel;
    nf.domain = Domain::Siegel;
    nf.normal_map = hyperbolic_siegel(*p).projective();
    nf.conditions = hyperbolic_conditions(*p, tol);
    nf.ball_delta = 1.0 / p->lambda;
  }
  nf.conjugator = ProjectiveMap::identity(nf.normal_map.dim(), nf.domain);
  return nf;
}

// ------------------------------------------------------------ elliptic

namespace detail {

inline BallMap move_to_origin(const BallMap& f, const CVector& z0, std::vector<ConjugationStep>& chain) {
  if (z0.norm() <= 1e-14) return f;
  const BallMap phi = ball_automorphism(z0);
  chain.push_back({"move_to_origin", phi.projective()});
  BallMap g = conjugate(f, phi);
  if (g.B().norm() > 1e-8) throw Error(ErrorKind::Numeric, "fixed point did not move to the origin");
  return g;
}

}  // namespace detail

inline NormalForm elliptic_split(const BallMap& f, const Tolerances& tol = {}) {
  const Index n = f.dim();
  NormalForm nf;
  nf.kind = FormKind::EllipticUnitarySplit;
  nf.domain = Domain::Ball;
  if (f.is_identity(1e-12)) {
    EllipticSplitParams p{CVector::Ones(n), CMatrix(0, 0)};
    nf.params = p;
    nf.normal_map = elliptic_split_map(p);
    return finish_form(nf, f);
  }
  const Classification cls = classify(f, tol);
  if (cls.kind != MapKind::Elliptic) throw Error(ErrorKind::Domain, "elliptic_split needs an elliptic map");
  const CVector z0 = cls.interior_fixed_points.front();
  const Index u = unitary_index(f, z0, tol);
  if (u == 0) throw Error(ErrorKind::WrongForm, "unitary index is 0; use the u0 normal form");

  BallMap g = detail::move_to_origin(f, z0, nf.chain);
  SchurForm s = schur(g.A());
  reorder_schur(s, [&](cplx mu) { return std::abs(std::abs(mu) - 1.0) <= tol.unimodular ? 0 : 1; });
  Index count = 0;
  for (Index i = 0; i < n; ++i)
    if (std::abs(std::abs(s.upper_triangular(i, i)) - 1.0) <= tol.unimodular) ++count;
  if (count != u) throw Error(ErrorKind::Numeric, "unimodular eigenvalue count disagrees with the unitary index");
  const ProjectiveMap rot = ball_linear(s.unitary);
  nf.chain.push_back({"schur_unitary", rot});
  const BallMap g2 = BallMap::from_homogeneous(conjugate(g.projective(), rot).homogeneous());
  if (g2.C().norm() > 1e-8 || g2.B().norm() > 1e-8) {
    throw Error(ErrorKind::Numeric, "map fixing the origin with unimodular eigenvalues is not linear");
  }
  const CMatrix& t = g2.A();
  double res = 0.0;
  for (Index i = 0; i < u; ++i)
    for (Index j = i + 1; j < n; ++j) res = std::max(res, std::abs(t(i, j)));
  if (res > tol.decoupling) {
    throw Error(ErrorKind::Form, "unimodular block does not decouple (residual " + std::to_string(res) + ")");
  }
  EllipticSplitParams p{t.diagonal().head(u), t.bottomRightCorner(n - u, n - u)};
  nf.params = p;
  nf.normal_map = elliptic_split_map(p);

  double lam = 0.0;
  for (Index i = 0; i < u; ++i) lam = std::max(lam, std::abs(std::abs(p.lambda(i)) - 1.0));
  nf.conditions.push_back({"Lambda.unimodular", -lam, lam <= tol.unimodular});
  if (p.a1.rows() > 0) {
    const double rho = spectral_radius(p.a1), nrm = spectral_norm(p.a1);
    nf.conditions.push_back({"A1.spectral.radius", 1.0 - 1e-9 - rho, rho < 1.0 - 1e-9});
    nf.conditions.push_back({"A1.contraction", 1.0 + 1e-10 - nrm, nrm <= 1.0 + 1e-10});
  }
  return finish_form(nf, f);
}

inline NormalForm elliptic_u0(const BallMap& f, const Tolerances& tol = {}) {
  const Index n = f.dim();
  if (f.is_identity(1e-12)) throw Error(ErrorKind::WrongForm, "the identity has unitary index N");
  const Classification cls = classify(f, tol);
  if (cls.kind != MapKind::Elliptic) throw Error(ErrorKind::Domain, "elliptic_u0 needs an elliptic map");
  const CVector z0 = cls.interior_fixed_points.front();
  if (unitary_index(f, z0, tol) != 0) throw Error(ErrorKind::WrongForm, "unitary index is positive; use the split form");

  NormalForm nf;
  nf.kind = FormKind::EllipticU0;
  nf.domain = Domain::Ball;
  BallMap g = detail::move_to_origin(f, z0, nf.chain);
  const CMatrix& a = g.A();
  const CVector ev = eigenvalues(a);
  for (Index i = 0; i < ev.size(); ++i)
    if (std::abs(ev(i) - 1.0) <= 1e-9) throw Error(ErrorKind::InconsistentInput, "A has eigenvalue 1");
  const CMatrix m = a.adjoint() - CMatrix::Identity(n, n);
  const CVector v = m.partialPivLu().solve(g.C());
  const double delta = v.norm();
  const CMatrix u = unitary_with_first_column(v);
  nf.chain.push_back({"rotate", ball_linear(u.adjoint())});
  EllipticU0Params p{u.adjoint() * a * u, delta};
  nf.params = p;
  nf.normal_map = elliptic_u0_map(p);
  const double rho = spectral_radius(p.a_hat), nrm = spectral_norm(p.a_hat);
  nf.conditions.push_back({"A.spectral.radius", 1.0 - 1e-9 - rho, rho < 1.0 - 1e-9});
  nf.conditions.push_back({"A.contraction", 1.0 + 1e-10 - nrm, nrm <= 1.0 + 1e-10});
  nf.conditions.push_back({"delta.range", 1.0 + 1e-9 - delta, delta <= 1.0 + 1e-9});
  return finish_form(nf, f);
}

// ------------------------------------------------------------ Siegel forms

struct SiegelReduction {
  SiegelMap map;
  std::vector<ConditionMargin> conditions;
};

inline SiegelReduction siegel_reduce(const BallMap& f, const Tolerances& tol = {}) {
  SiegelMap g = cayley_to_siegel(f, tol);
  auto conds = siegel_conditions(g);
  return {std::move(g), std::move(conds)};
}

namespace detail {

struct SiegelStart {
  Classification cls;
  SiegelMap g;
  std::vector<ConjugationStep> chain;
};

inline SiegelStart to_siegel_frame(const BallMap& f, MapKind want, const Tolerances& tol) {
  const Classification cls = classify(f, tol);
  if (cls.kind != want) {
    throw Error(ErrorKind::Domain, std::string("expected a ") + std::string(to_string(want)) + " map, got " +
                                       std::string(to_string(cls.kind)));
  }
  const CMatrix u = unitary_with_first_column(*cls.dw_point);
  std::vector<ConjugationStep> chain;
  chain.push_back({"rotate", ball_linear(u.adjoint())});
  chain.push_back({"cayley", cayley_map(f.dim())});
  return {cls, siegel_in_frame(f, u), std::move(chain)};
}

}  // namespace detail

inline NormalForm parabolic_normal_form(const BallMap& f, const Tolerances& tol = {}) {
  auto st = detail::to_siegel_frame(f, MapKind::Parabolic, tol);
  const SiegelMap& g = st.g;
  if (std::abs(g.lambda() - 1.0) > 1e-6) throw Error(ErrorKind::Numeric, "parabolic map with lambda != 1");
  NormalForm nf;
  nf.kind = FormKind::ParabolicSiegel;
  nf.domain = Domain::Siegel;
  nf.chain = st.chain;

  const ContractionBlocks cb = split_contraction(g.M() / std::sqrt(g.lambda()), tol);
  const BlockSizes bs = cb.blocks;
  const ProjectiveMap s1 = siegel_unitary(cb.v.adjoint());
  nf.chain.push_back({"block_unitary", s1});
  const SiegelMap g1 = conjugate(g, s1);

  const CVector& c = g1.c();
  CVector gamma = CVector::Zero(bs.total());
  for (Index j = 0; j < bs.q; ++j) gamma(bs.p + j) = -c(bs.p + j) / (1.0 - cb.d(j));
  if (bs.r > 0) {
    const CMatrix im = CMatrix::Identity(bs.r, bs.r) - cb.a_block;
    gamma.tail(bs.r) = -im.partialPivLu().solve(c.tail(bs.r));
  }
  const ProjectiveMap t1 = heisenberg(gamma).retagged(Domain::Siegel, Domain::Siegel);
  nf.chain.push_back({"translate", t1});
  const SiegelMap g2 = conjugate(g1, t1);

  ParabolicParams p;
  p.blocks = bs;
  p.a = g2.c().head(bs.p);
  p.c = g2.a().tail(bs.r);
  p.b = g2.b();
  p.d = cb.d;
  p.a_block = cb.a_block;
  nf.params = p;
  nf.normal_map = parabolic_siegel(p).projective();

  const double sc = std::max(1.0, p.a.norm());
  const double cu = (g2.a().head(bs.p) - p.a).norm(), cv = g2.a().segment(bs.p, bs.q).norm();
  const double tv = g2.c().tail(bs.q + bs.r).norm();
  nf.conditions.push_back({"coupling.u.matches.translation", -cu, cu <= 1e-7 * sc});
  nf.conditions.push_back({"coupling.v.vanishes", -cv, cv <= 1e-7 * sc});
  nf.conditions.push_back({"translation.vw.vanishes", -tv, tv <= 1e-7 * std::max(1.0, c.norm())});
  for (auto& cm : parabolic_conditions(p, tol)) nf.conditions.push_back(cm);
  nf.ball_delta = st.cls.delta;
  return finish_form(nf, f);
}

inline NormalForm hyperbolic_normal_form(const BallMap& f, const Tolerances& tol = {}) {
  auto st = detail::to_siegel_frame(f, MapKind::Hyperbolic, tol);
  const SiegelMap& g = st.g;
  const double lam = g.lambda().real();
  if (!(lam > 1.0) || std::abs(g.lambda().imag()) > 1e-7 * lam) {
    throw Error(ErrorKind::Numeric, "hyperbolic map with lambda not real and > 1");
  }
  const double sl = std::sqrt(lam);
  NormalForm nf;
  nf.kind = FormKind::HyperbolicSiegel;
  nf.domain = Domain::Siegel;
  nf.chain = st.chain;

  const ContractionBlocks cb = split_contraction(g.M() / sl, tol);
  const BlockSizes bs = cb.blocks;
  const ProjectiveMap s1 = siegel_unitary(cb.v.adjoint());
  nf.chain.push_back({"block_unitary", s1});
  const SiegelMap g1 = conjugate(g, s1);

  CVector gamma = CVector::Zero(bs.total());
  for (Index j = 0; j < bs.p; ++j) gamma(j) = -g1.c()(j) / (1.0 - sl);
  for (Index j = 0; j < bs.q; ++j) gamma(bs.p + j) = -g1.c()(bs.p + j) / (1.0 - sl * cb.d(j));
  const ProjectiveMap t1 = heisenberg(gamma).retagged(Domain::Siegel, Domain::Siegel);
  nf.chain.push_back({"translate_uv", t1});
  const SiegelMap g2 = conjugate(g1, t1);

  CVector gamma3 = CVector::Zero(bs.total());
  if (bs.r > 0) {
    const CMatrix sys = lam * CMatrix::Identity(bs.r, bs.r) - sl * cb.a_block.adjoint();
    gamma3.tail(bs.r) = sys.partialPivLu().solve(g2.a().tail(bs.r));
  }
  const ProjectiveMap t2 = heisenberg(gamma3).retagged(Domain::Siegel, Domain::Siegel);
  nf.chain.push_back({"remove_coupling", t2});
  const SiegelMap g3 = conjugate(g2, t2);

  HyperbolicParams p;
  p.blocks = bs;
  p.lambda = lam;
  p.b = g3.b();
  p.coupling = CVector::Zero(bs.r);
  p.c = g3.c().tail(bs.r);
  p.d = cb.d;
  p.a_block = cb.a_block;
  nf.params = p;
  nf.normal_map = hyperbolic_siegel(p).projective();

  const double ca = g3.a().norm(), tuv = g3.c().head(bs.p + bs.q).norm();
  const double sc = std::max(1.0, g1.c().norm() + g1.a().norm());
  nf.conditions.push_back({"coupling.vanishes", -ca, ca <= 1e-7 * sc});
  nf.conditions.push_back({"translation.uv.vanishes", -tuv, tuv <= 1e-7 * sc});
  for (auto& cm : hyperbolic_conditions(p, tol)) nf.conditions.push_back(cm);
  nf.ball_delta = st.cls.delta;
  return finish_form(nf, f);
}

}  // namespace lfmsemi
