#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lfmsemi/semigroup.hpp"

namespace lfmsemi {

// ============================================================ scalar lemmas

namespace detail {

// |exp(x + iy) - 1|^2 without cancellation for small x, y.
inline double abs2_expm1(double x, double y) {
  const double s = std::sin(y / 2.0);
  const double e = std::expm1(x);
  return e * e + 4.0 * std::exp(x) * s * s;
}

}  // namespace detail

/// h(u, v, t) = (1 + e^{-2tu} - 2 e^{-tu} cos(vt)) / ((1 - e^{-2tu}) t).
inline double scalar_h_parabolic(double u, double v, double t) {
  if (!(u > 0.0) || !(t > 0.0)) throw Error(ErrorKind::Domain, "scalar_h_parabolic needs u > 0 and t > 0");
  return detail::abs2_expm1(-t * u, t * v) / (-std::expm1(-2.0 * t * u) * t);
}

/// h(lam, u, v, t) = |e^{t(u+iv)} - 1|^2 / ((1 - e^{-lam t}) (1 - e^{lam t} e^{2ut})).
inline double scalar_h_hyperbolic(double lam, double u, double v, double t) {
  if (!(lam > 0.0) || !(u < 0.0) || !(lam + 2.0 * u < 0.0) || !(t > 0.0)) {
    throw Error(ErrorKind::Domain, "scalar_h_hyperbolic needs lam > 0, u < 0, lam + 2u < 0, t > 0");
  }
  return detail::abs2_expm1(t * u, t * v) / (-std::expm1(-lam * t) * -std::expm1((lam + 2.0 * u) * t));
}

/// Diagonal of a positive semi-definite diagonal weight.
struct ThetaDiag {
  std::vector<double> entries;
};

namespace detail {

inline void check_contraction_eig(cplx l) {
  if (!(std::abs(l) < 1.0)) throw Error(ErrorKind::Domain, "eigenvalue " + format_cplx(l) + " is not inside the unit disc");
  if (std::abs(l) == 0.0) throw Error(ErrorKind::Domain, "zero eigenvalue has no logarithm");
}

// arg in [0, 2 pi)
inline double arg_0_2pi(cplx l) {
  double v = std::arg(l);
  if (v < 0.0) v += 2.0 * kPi;
  if (v >= 2.0 * kPi) v = 0.0;
  return v;
}

}  // namespace detail

/// Theta_jj = (u^2 + v^2) / (2u |1 - lambda_j|^2) for lambda_j = exp(-u + iv).
inline double theta_parabolic_entry(double u, double v) {
  const double d = detail::abs2_expm1(-u, v);
  return (u * u + v * v) / (2.0 * u * d);
}

/// Theta_jj = (lam - 1)/(2u ln lam) ((ln lam / 2 + u)^2 + v^2) / |lam - sqrt(lam) lambda_j|^2.
inline double theta_hyperbolic_entry(double lam, double u, double v) {
  const double ll = std::log(lam);
  const cplx lj = std::exp(cplx(-u, v));
  const double d = std::norm(lam - std::sqrt(lam) * lj);
  const double w = ll / 2.0 + u;
  return (lam - 1.0) / (2.0 * u * ll) * (w * w + v * v) / d;
}

/// Eigenvalue arguments are taken in [0, 2 pi).
inline ThetaDiag theta_parabolic(const std::vector<cplx>& eigs) {
  ThetaDiag out;
  for (cplx l : eigs) {
    detail::check_contraction_eig(l);
    out.entries.push_back(theta_parabolic_entry(-std::log(std::abs(l)), detail::arg_0_2pi(l)));
  }
  return out;
}

inline ThetaDiag theta_hyperbolic(double lam, const std::vector<cplx>& eigs) {
  if (!(lam > 1.0)) throw Error(ErrorKind::Domain, "theta_hyperbolic needs lambda > 1");
  ThetaDiag out;
  for (cplx l : eigs) {
    detail::check_contraction_eig(l);
    out.entries.push_back(theta_hyperbolic_entry(lam, -std::log(std::abs(l)), detail::arg_0_2pi(l)));
  }
  return out;
}

// ============================================================ certificates

enum class Verdict { Embeddable, ConditionFails, Inconclusive };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Embeddable: return "embeddable";
    case Verdict::ConditionFails: return "condition-fails";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct EmbeddingCertificate {
  Verdict verdict = Verdict::Inconclusive;
  std::string criterion_id;
  std::optional<GeneratorData> generator_data;
  ProjectiveMap conjugator;  // input coordinates -> generator coordinates
  std::vector<ConditionMargin> margins;
  std::optional<CVector> witness;
  std::string notes;
};

inline SemigroupFamily build_semigroup(const EmbeddingCertificate& cert) {
  if (cert.verdict != Verdict::Embeddable || !cert.generator_data) {
    throw Error(ErrorKind::Internal, "build_semigroup needs an Embeddable certificate with generator data");
  }
  return SemigroupFamily(*cert.generator_data, cert.conjugator);
}

// ------------------------------------------------------------ branch search

/// Integer shift vectors with entries in [-bound, bound], by increasing
/// l1-norm (lexicographic within a norm), at most `budget` of them.
struct BranchCandidates {
  std::vector<std::vector<int>> shifts;
  bool exhaustive = true;
};

inline BranchCandidates branch_candidates(std::size_t clusters, int bound, long budget) {
  BranchCandidates out;
  std::vector<int> cur(clusters, 0);
  std::function<bool(std::size_t, int)> rec = [&](std::size_t i, int left) -> bool {
    if (i == clusters) {
      if (left != 0) return true;
      if (long(out.shifts.size()) >= budget) {
        out.exhaustive = false;
        return false;
      }
      out.shifts.push_back(cur);
      return true;
    }
    for (int k = -std::min(bound, left); k <= std::min(bound, left); ++k) {
      cur[i] = k;
      if (!rec(i + 1, left - std::abs(k))) return false;
    }
    cur[i] = 0;
    return true;
  };
  const int maxl1 = bound * int(clusters);
  for (int l1 = 0; l1 <= maxl1; ++l1)
    if (!rec(0, l1)) break;
  return out;
}

inline std::string shift_label(const std::vector<int>& k) {
  std::string s = "k=(";
  for (std::size_t i = 0; i < k.size(); ++i) s += (i ? "," : "") + std::to_string(k[i]);
  return s + ")";
}

// ------------------------------------------------------------ elliptic

inline EmbeddingCertificate embed_elliptic_split(const NormalForm& nf, int branch_search = 3,
                                                 const Tolerances& tol = {}) {
  const auto* p = std::get_if<EllipticSplitParams>(&nf.params);
  if (!p) throw Error(ErrorKind::Domain, "embed_elliptic_split needs an elliptic split normal form");
  EmbeddingCertificate cert;
  cert.criterion_id = "elliptic.split";
  cert.conjugator = nf.conjugator;
  RVector theta(p->lambda.size());
  for (Index j = 0; j < theta.size(); ++j) theta(j) = std::arg(p->lambda(j));
  if (p->a1.rows() == 0) {
    cert.verdict = Verdict::Embeddable;
    cert.generator_data = EllipticSplitGen{theta, CMatrix(0, 0)};
    cert.notes = "unitary map";
    return cert;
  }
  const MatrixLogBranches logs(p->a1, tol.eigen_cluster, tol.negative_axis);
  const BranchCandidates cand = branch_candidates(logs.cluster_count(), branch_search, tol.branch_budget);
  for (const auto& k : cand.shifts) {
    const CMatrix m = logs.with_shifts(k);
    const Dissipativity d = is_dissipative(m, tol.dissipative);
    const double re_max = eigenvalues(m).real().maxCoeff();
    const bool ok = d.dissipative && re_max < 0.0;
    if (cert.margins.size() < 64 || ok) cert.margins.push_back({"dissipative " + shift_label(k), -d.max_hermitian_eigenvalue, ok});
    if (ok) {
      const double res = (mat_exp(m) - p->a1).norm() / std::max(1.0, p->a1.norm());
      cert.margins.push_back({"exp.residual", -res, res <= 1e-9});
      if (res > 1e-9) throw Error(ErrorKind::Numeric, "logarithm does not reproduce A1");
      cert.verdict = Verdict::Embeddable;
      cert.generator_data = EllipticSplitGen{theta, m};
      cert.notes = "dissipative logarithm at " + shift_label(k);
      return cert;
    }
  }
  cert.verdict = cand.exhaustive ? Verdict::ConditionFails : Verdict::Inconclusive;
  cert.notes = "no dissipative logarithm among " + std::to_string(cand.shifts.size()) + " candidates with |k| <= " +
               std::to_string(branch_search) + " per eigenvalue cluster" +
               (cand.exhaustive ? "" : " (candidate budget exhausted)");
  return cert;
}

namespace detail {

// min over unit zeta of zeta^H H zeta - delta |m^H zeta| is >= this value.
inline double u0_certificate(const CMatrix& mm, double delta) {
  const Index n = mm.rows();
  const CMatrix h = -(mm + mm.adjoint()) / 2.0;
  const CVector m = mm.adjoint() * CVector::Unit(n, 0);
  const double mn = m.norm();
  if (delta == 0.0 || mn == 0.0) return hermitian_min_eigenvalue(h);
  auto value = [&](double x) {
    const double s = std::exp(x);
    const CMatrix k = h - (delta / (2.0 * s)) * m * m.adjoint() - (delta * s / 2.0) * CMatrix::Identity(n, n);
    return hermitian_min_eigenvalue(k);
  };
  // concave in s, hence unimodal in log s
  double lo = std::log(mn) - 30.0, hi = std::log(mn) + 30.0;
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = value(x1), f2 = value(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = value(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = value(x1);
    }
  }
  return std::max({f1, f2, value(std::log(mn))});
}

inline double u0_objective(const CMatrix& mm, double delta, const CVector& z) {
  return -inner(mm * z, z).real() - delta * std::abs((mm * z)(0));
}

struct U0Witness {
  double value = 0.0;
  CVector z;
};

// Sampling of the sphere followed by projected gradient descent.
inline U0Witness u0_witness(const CMatrix& mm, double delta, const SamplerCfg& cfg) {
  const Index n = mm.rows();
  const CMatrix h = -(mm + mm.adjoint()) / 2.0;
  const CVector m = mm.adjoint() * CVector::Unit(n, 0);
  std::vector<std::pair<double, CVector>> pts;
  for (CVector z : sample_sphere(cfg.seed, std::max<std::size_t>(cfg.count, 16), n)) {
    pts.emplace_back(u0_objective(mm, delta, z), z);
  }
  for (Index i = 0; i < n; ++i) {
    const CVector e = CVector::Unit(n, i);
    pts.emplace_back(u0_objective(mm, delta, e), e);
  }
  std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  U0Witness best{pts.front().first, pts.front().second};
  const std::size_t starts = std::min<std::size_t>(8, pts.size());
  for (std::size_t s = 0; s < starts; ++s) {
    CVector z = pts[s].second;
    double f = pts[s].first;
    double step = 0.5;
    for (int it = 0; it < 300 && step > 1e-14; ++it) {
      const cplx mz = inner(z, m);  // m^H z
      CVector g = 2.0 * h * z;
      if (std::abs(mz) > 0.0) g -= delta * m * (mz / std::abs(mz));
      CVector trial = z - step * g;
      trial /= trial.norm();
      const double ft = u0_objective(mm, delta, trial);
      if (ft < f) {
        z = trial;
        f = ft;
        step *= 1.5;
      } else {
        step *= 0.5;
      }
    }
    if (f < best.value) best = {f, z};
  }
  return best;
}

}  // namespace detail

/// Re[-<Mz, z> + delta <Mz, e1> |z|^2] for a point z of the closed ball:
/// the generator condition in the form used by the certificate.
inline double u0_condition(const CMatrix& m, double delta, const CVector& z) {
  const CVector mz = m * z;
  return (-inner(mz, z) + delta * mz(0) * z.squaredNorm()).real();
}

inline EmbeddingCertificate embed_elliptic_u0(const NormalForm& nf, const SamplerCfg& sampler = {},
                                              const Tolerances& tol = {}) {
  const auto* p = std::get_if<EllipticU0Params>(&nf.params);
  if (!p) throw Error(ErrorKind::Domain, "embed_elliptic_u0 needs an elliptic u0 normal form");
  EmbeddingCertificate cert;
  cert.criterion_id = "elliptic.u0";
  cert.conjugator = nf.conjugator;
  const MatrixLogBranches logs(p->a_hat, tol.eigen_cluster, tol.negative_axis);
  const long budget = std::min<long>(tol.branch_budget, 2000);
  const BranchCandidates cand = branch_candidates(logs.cluster_count(), tol.branch_search, budget);
  bool all_refuted = cand.exhaustive;
  std::optional<detail::U0Witness> first_witness;
  for (const auto& k : cand.shifts) {
    const CMatrix m = logs.with_shifts(k);
    const double c = detail::u0_certificate(m, p->delta);
    const bool ok = c >= -tol.certificate;
    cert.margins.push_back({"certificate " + shift_label(k), c, ok});
    if (ok) {
      cert.verdict = Verdict::Embeddable;
      cert.generator_data = EllipticU0Gen{m, p->delta};
      cert.notes = "quadratic certificate holds at " + shift_label(k);
      return cert;
    }
    const detail::U0Witness w = detail::u0_witness(m, p->delta, sampler);
    cert.margins.push_back({"sampled.minimum " + shift_label(k), w.value, w.value >= -tol.witness});
    if (w.value < -tol.witness) {
      if (!first_witness) {
        // rotate the phase so that delta <Mz, e1> is real and negative
        const cplx x = (m * w.z)(0);
        const cplx phase = std::abs(x) > 0.0 ? -std::conj(x) / std::abs(x) : cplx(1.0);
        first_witness = detail::U0Witness{w.value, (1.0 - 1e-9) * phase * w.z};
      }
    } else {
      all_refuted = false;
    }
  }
  if (all_refuted && first_witness) {
    cert.verdict = Verdict::ConditionFails;
    cert.witness = first_witness->z;
    cert.notes = "generator condition violated for every logarithm with |k| <= " + std::to_string(tol.branch_search);
  } else {
    cert.verdict = Verdict::Inconclusive;
    cert.notes = "certificate failed but no witness was found for every logarithm candidate";
  }
  return cert;
}

// ------------------------------------------------------------ Siegel forms

namespace detail {

struct DiagonalBlock {
  bool ok = true;
  CVector eig;
  CMatrix unitary;  // w = unitary w' with A = unitary diag(eig) unitary^H
};

inline DiagonalBlock diagonalize_block(const CMatrix& a) {
  DiagonalBlock out;
  const Index r = a.rows();
  out.unitary = CMatrix::Identity(r, r);
  if (r == 0) {
    out.eig = CVector(0);
    return out;
  }
  const double sc = std::max(1.0, a.norm());
  if (is_diagonal(a, 1e-12 * sc)) {
    out.eig = a.diagonal();
    return out;
  }
  if (!is_normal(a, 1e-10)) {
    out.ok = false;
    return out;
  }
  const SchurForm s = schur(a);
  out.eig = s.upper_triangular.diagonal();
  out.unitary = s.unitary.adjoint();
  return out;
}

// (z, u, v, w) -> (z, u, v, U^H w)
inline ProjectiveMap w_block_rotation(const BlockSizes& bs, const CMatrix& u) {
  CMatrix v = CMatrix::Identity(bs.total(), bs.total());
  v.bottomRightCorner(bs.r, bs.r) = u.adjoint();
  return siegel_unitary(v);
}

inline RVector principal_args(const CVector& d) {
  RVector out(d.size());
  for (Index j = 0; j < d.size(); ++j) out(j) = std::arg(d(j));
  return out;
}

inline CMatrix diag_log(const CVector& eig) {
  CVector l(eig.size());
  for (Index j = 0; j < eig.size(); ++j) l(j) = std::log(eig(j));
  return l.asDiagonal();
}

}  // namespace detail

inline EmbeddingCertificate embed_parabolic(const NormalForm& nf, const Tolerances& tol = {}) {
  const auto* pp = std::get_if<ParabolicParams>(&nf.params);
  if (!pp) throw Error(ErrorKind::Domain, "embed_parabolic needs a parabolic normal form");
  ParabolicParams p = *pp;
  EmbeddingCertificate cert;
  cert.criterion_id = p.blocks.r > 0 ? "parabolic.theta" : "parabolic.translation";
  cert.conjugator = nf.conjugator;
  const detail::DiagonalBlock db = detail::diagonalize_block(p.a_block);
  if (!db.ok) {
    cert.verdict = Verdict::Inconclusive;
    cert.notes = "contraction block is not normal; the diagonal criterion does not apply";
    return cert;
  }
  if (p.blocks.r > 0 && !db.unitary.isIdentity(0.0)) {
    const ProjectiveMap rot = detail::w_block_rotation(p.blocks, db.unitary);
    cert.conjugator = compose(rot, cert.conjugator);
    p.c = db.unitary.adjoint() * p.c;
  }
  double quad = 0.0;
  for (Index j = 0; j < p.blocks.r; ++j) {
    detail::check_contraction_eig(db.eig(j));
    const double th = theta_parabolic_entry(-std::log(std::abs(db.eig(j))), std::arg(db.eig(j)));
    quad += th * std::norm(p.c(j));
    cert.margins.push_back({"theta[" + std::to_string(j) + "]", th, true});
  }
  const double margin = p.b.imag() - p.a.squaredNorm() - quad;
  const double scale = std::max({1.0, std::abs(p.b.imag()), p.a.squaredNorm(), quad});
  const bool ok = margin >= -tol.theta_margin * scale;
  cert.margins.push_back({"imb.minus.a2.minus.cThetac", margin, ok});
  if (!ok) {
    cert.verdict = Verdict::Inconclusive;
    cert.notes = "sufficient condition Im b - |a|^2 >= c^H Theta c fails";
    return cert;
  }
  cert.verdict = Verdict::Embeddable;
  cert.generator_data = ParabolicGen{p.blocks,
                                     p.a,
                                     p.b.real(),
                                     kI * (p.b.imag() - p.a.squaredNorm()),
                                     detail::principal_args(p.d),
                                     detail::diag_log(db.eig),
                                     p.c};
  return cert;
}

inline EmbeddingCertificate embed_hyperbolic(const NormalForm& nf, const Tolerances& tol = {}) {
  const auto* hp = std::get_if<HyperbolicParams>(&nf.params);
  if (!hp) throw Error(ErrorKind::Domain, "embed_hyperbolic needs a hyperbolic normal form");
  HyperbolicParams p = *hp;
  EmbeddingCertificate cert;
  cert.criterion_id = "hyperbolic.theta";
  cert.conjugator = nf.conjugator;
  const detail::DiagonalBlock db = detail::diagonalize_block(p.a_block);
  if (!db.ok) {
    cert.verdict = Verdict::Inconclusive;
    cert.notes = "contraction block is not normal; the diagonal criterion does not apply";
    return cert;
  }
  const Index r = p.blocks.r;
  const double sl = std::sqrt(p.lambda);
  SiegelMap g = hyperbolic_siegel(p);
  if (r > 0 && !db.unitary.isIdentity(0.0)) {
    const ProjectiveMap rot = detail::w_block_rotation(p.blocks, db.unitary);
    cert.conjugator = compose(rot, cert.conjugator);
    g = conjugate(g, rot);
  }
  // move the w-slot translation into the coupling of the first coordinate
  const CVector cw = g.c().tail(r);
  if (cw.norm() > 0.0) {
    CVector gamma = CVector::Zero(p.blocks.total());
    for (Index j = 0; j < r; ++j) {
      const cplx den = 1.0 - sl * db.eig(j);
      if (std::abs(den) <= tol.resonance) {
        if (std::abs(cw(j)) > 1e-12) {
          cert.verdict = Verdict::Inconclusive;
          cert.notes = "resonant eigenvalue sqrt(lambda) lambda_j = 1 with a nonzero translation";
          return cert;
        }
        continue;
      }
      gamma(p.blocks.p + p.blocks.q + j) = -cw(j) / den;
    }
    const ProjectiveMap tr = heisenberg(gamma).retagged(Domain::Siegel, Domain::Siegel);
    cert.conjugator = compose(tr, cert.conjugator);
    g = conjugate(g, tr);
  }
  const CVector a = g.a().tail(r);
  const cplx b = g.b();
  double quad = 0.0;
  for (Index j = 0; j < r; ++j) {
    detail::check_contraction_eig(db.eig(j));
    const double th = theta_hyperbolic_entry(p.lambda, -std::log(std::abs(db.eig(j))), std::arg(db.eig(j)));
    quad += th * std::norm(a(j));
    cert.margins.push_back({"theta[" + std::to_string(j) + "]", th, true});
  }
  const double margin = b.imag() - quad;
  const bool ok = margin >= -tol.theta_margin * std::max({1.0, std::abs(b.imag()), quad});
  cert.margins.push_back({"imb.minus.aThetaa", margin, ok});
  if (!ok) {
    cert.verdict = Verdict::Inconclusive;
    cert.notes = "sufficient condition Im b >= <Theta a, a> fails";
    return cert;
  }
  cert.verdict = Verdict::Embeddable;
  cert.generator_data =
      HyperbolicGen{p.blocks, p.lambda, b, a, detail::principal_args(p.d), detail::diag_log(db.eig)};
  return cert;
}

// ------------------------------------------------------------ dimension two

inline EmbeddingCertificate embed_dim2(const BallMap& f, const Tolerances& tol = {}) {
  if (f.dim() != 2) throw Error(ErrorKind::Domain, "embed_dim2 needs a map of the two-dimensional ball");
  const Classification cls = classify(f, tol);
  if (cls.kind == MapKind::Elliptic) throw Error(ErrorKind::Domain, "the two-dimensional catalogue has no elliptic forms");
  if (cls.kind == MapKind::Parabolic) {
    const NormalForm nf = parabolic_normal_form(f, tol);
    const auto& p = std::get<ParabolicParams>(nf.params);
    if (p.blocks.r == 0) {
      EmbeddingCertificate cert = embed_parabolic(nf, tol);
      cert.criterion_id = p.blocks.p == 1 ? "dim2.parabolic.psi3" : "dim2.parabolic.psi2";
      return cert;
    }
    // psi1(u1, u2) = (u1 + 2i b u2 + c, lam u2): b = conj(c_nf), c = b_nf
    const cplx lam = p.a_block(0, 0);
    const double mu = -std::log(std::abs(lam)), v = std::arg(lam);
    const double bb = std::norm(p.c(0));
    const double threshold = bb * (mu * mu + v * v) / (mu * std::norm(1.0 - lam));
    EmbeddingCertificate cert = embed_parabolic(nf, tol);
    const double margin = p.b.imag() - threshold;
    const bool ok = margin >= -tol.theta_margin * std::max({1.0, std::abs(p.b.imag()), threshold});
    cert.criterion_id = "dim2.parabolic.psi1";
    cert.margins.push_back({"imc.minus.threshold", margin, ok});
    if (!ok) {
      cert.verdict = Verdict::Inconclusive;
      cert.generator_data.reset();
      cert.notes = "Im c below |b|^2 (mu^2 + v^2) / (mu |1 - lam|^2)";
    }
    return cert;
  }
  const NormalForm nf = hyperbolic_normal_form(f, tol);
  const auto& p = std::get<HyperbolicParams>(nf.params);
  if (p.blocks.r == 0) {
    EmbeddingCertificate cert = embed_hyperbolic(nf, tol);
    cert.criterion_id = "dim2.hyperbolic.unimodular";
    return cert;
  }
  const cplx alpha = p.a_block(0, 0);
  const double sl = std::sqrt(p.lambda);
  if (std::abs(sl * alpha - 1.0) <= tol.fixed_point) {
    // psi2(u1, u2) = (lam u1 + a, u2 + b)
    EmbeddingCertificate cert;
    cert.criterion_id = "dim2.hyperbolic.psi2";
    cert.conjugator = nf.conjugator;
    const double ll = std::log(p.lambda);
    const double threshold = (p.lambda - 1.0) / (ll * ll) * std::norm(p.c(0));
    const double margin = p.b.imag() - threshold;
    const bool ok = margin >= -tol.theta_margin * std::max({1.0, std::abs(p.b.imag()), threshold});
    cert.margins.push_back({"ima.minus.threshold", margin, ok});
    if (ok) {
      cert.verdict = Verdict::Embeddable;
      cert.generator_data = TranslationHyperbolicGen{p.lambda, p.b, p.c};
    } else {
      cert.verdict = Verdict::Inconclusive;
      cert.notes = "Im a below (lam - 1) / ln^2(lam) |b|^2";
    }
    return cert;
  }
  EmbeddingCertificate cert = embed_hyperbolic(nf, tol);
  cert.criterion_id = "dim2.hyperbolic.psi1";
  return cert;
}

// ------------------------------------------------------------ automorphisms

inline EmbeddingCertificate embed_automorphism(const BallMap& f, bool verified = false, const Tolerances& tol = {}) {
  if (!verified && !is_automorphism(f)) throw Error(ErrorKind::Domain, "map is not an automorphism of the ball");
  EmbeddingCertificate cert;
  cert.verdict = Verdict::Embeddable;
  if (f.is_identity(1e-12)) {
    cert.criterion_id = "automorphism.identity";
    cert.conjugator = ProjectiveMap::identity(f.dim(), Domain::Ball);
    cert.generator_data = EllipticSplitGen{RVector::Zero(f.dim()), CMatrix(0, 0)};
    return cert;
  }
  const Classification cls = classify(f, tol);
  if (cls.kind == MapKind::Elliptic) {
    const NormalForm nf = elliptic_split(f, tol);
    const auto& p = std::get<EllipticSplitParams>(nf.params);
    if (p.a1.rows() != 0) throw Error(ErrorKind::Numeric, "automorphism with a contracting block");
    cert.criterion_id = "automorphism.unitary";
    cert.conjugator = nf.conjugator;
    cert.generator_data = EllipticSplitGen{detail::principal_args(p.lambda), CMatrix(0, 0)};
    return cert;
  }
  if (cls.kind == MapKind::Parabolic) {
    const NormalForm nf = parabolic_normal_form(f, tol);
    const auto& p = std::get<ParabolicParams>(nf.params);
    if (p.blocks.r != 0) throw Error(ErrorKind::Numeric, "automorphism with a contracting block");
    cert.criterion_id = "automorphism.parabolic";
    cert.conjugator = nf.conjugator;
    cert.generator_data = ParabolicGen{p.blocks, p.a, p.b.real(), 0.0, detail::principal_args(p.d),
                                       CMatrix(0, 0), CVector(0)};
    return cert;
  }
  const NormalForm nf = hyperbolic_normal_form(f, tol);
  const auto& p = std::get<HyperbolicParams>(nf.params);
  if (p.blocks.r != 0) throw Error(ErrorKind::Numeric, "automorphism with a contracting block");
  cert.criterion_id = "automorphism.hyperbolic";
  cert.conjugator = nf.conjugator;
  cert.generator_data =
      HyperbolicGen{p.blocks, p.lambda, p.b.real(), CVector(0), detail::principal_args(p.d), CMatrix(0, 0)};
  return cert;
}

// ------------------------------------------------------------ dispatch

/// Classify, normalize and decide the matching criterion for a ball map.
inline EmbeddingCertificate embed_map(const BallMap& f, const SamplerCfg& sampler = {}, const Tolerances& tol = {}) {
  if (f.is_identity(1e-12) || is_automorphism(f, tol.fixed_point)) return embed_automorphism(f, true, tol);
  const Classification cls = classify(f, tol);
  if (f.dim() == 2 && cls.kind != MapKind::Elliptic) return embed_dim2(f, tol);
  switch (cls.kind) {
    case MapKind::Elliptic:
      if (unitary_index(f, tol) == 0) return embed_elliptic_u0(elliptic_u0(f, tol), sampler, tol);
      return embed_elliptic_split(elliptic_split(f, tol), tol.branch_search, tol);
    case MapKind::Parabolic: return embed_parabolic(parabolic_normal_form(f, tol), tol);
    case MapKind::Hyperbolic: return embed_hyperbolic(hyperbolic_normal_form(f, tol), tol);
  }
  throw Error(ErrorKind::Internal, "unknown map kind");
}

}  // namespace lfmsemi
