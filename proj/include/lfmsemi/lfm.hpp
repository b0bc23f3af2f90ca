#pragma once

#include <array>
#include <optional>
#include <vector>

#include "lfmsemi/sampling.hpp"

namespace lfmsemi {

// ============================================================ projective maps

/// z -> (H_top (z, 1)) / (H_last (z, 1)) for an (N+1)x(N+1) homogeneous matrix.
/// Composition is matrix multiplication; the domain tags only guard against
/// chaining maps that live on different models.
class ProjectiveMap {
 public:
  ProjectiveMap() = default;

  explicit ProjectiveMap(CMatrix h, Domain source = Domain::Projective, Domain target = Domain::Projective)
      : h_(std::move(h)), source_(source), target_(target) {
    require_square(h_, "homogeneous matrix");
    if (h_.rows() < 2) throw Error(ErrorKind::Dimension, "homogeneous matrix must be at least 2x2");
    require_finite(h_, "homogeneous matrix");
  }

  static ProjectiveMap identity(Index n, Domain d = Domain::Projective) {
    return ProjectiveMap(CMatrix::Identity(n + 1, n + 1), d, d);
  }

  Index dim() const { return h_.rows() - 1; }
  const CMatrix& homogeneous() const { return h_; }
  Domain source() const { return source_; }
  Domain target() const { return target_; }

  ProjectiveMap retagged(Domain source, Domain target) const { return ProjectiveMap(h_, source, target); }

  CVector apply(const CVector& z, double pole_tol = 1e-14) const {
    const Index n = dim();
    if (z.size() != n) throw Error(ErrorKind::Dimension, "point has wrong dimension");
    const cplx den = (h_.block(n, 0, 1, n) * z)(0, 0) + h_(n, n);
    const double scale = h_.row(n).norm() * std::sqrt(1.0 + z.squaredNorm());
    if (!(std::abs(den) > pole_tol * scale)) throw Error(ErrorKind::Pole, "denominator vanishes at the evaluation point");
    return (h_.topLeftCorner(n, n) * z + h_.col(n).head(n)) / den;
  }

  CVector operator()(const CVector& z) const { return apply(z); }

 private:
  CMatrix h_;
  Domain source_ = Domain::Projective;
  Domain target_ = Domain::Projective;
};

inline bool domains_compatible(Domain a, Domain b) {
  return a == Domain::Projective || b == Domain::Projective || a == b;
}

inline CMatrix normalized_scale(const CMatrix& h) {
  const double m = h.cwiseAbs().maxCoeff();
  return m > 0.0 ? CMatrix(h / m) : h;
}

/// f o g.
inline ProjectiveMap compose(const ProjectiveMap& f, const ProjectiveMap& g) {
  if (f.dim() != g.dim()) throw Error(ErrorKind::Dimension, "composing maps of different dimensions");
  if (!domains_compatible(g.target(), f.source())) {
    throw Error(ErrorKind::Domain, std::string("cannot compose a map into ") + std::string(to_string(g.target())) +
                                       " with a map on " + std::string(to_string(f.source())));
  }
  return ProjectiveMap(normalized_scale(f.homogeneous() * g.homogeneous()), g.source(), f.target());
}

inline ProjectiveMap inverse(const ProjectiveMap& f) {
  Eigen::JacobiSVD<CMatrix> s(f.homogeneous());
  const auto& sv = s.singularValues();
  if (sv(sv.size() - 1) <= 1e-13 * sv(0)) throw Error(ErrorKind::NotInvertible, "homogeneous matrix is singular");
  return ProjectiveMap(normalized_scale(f.homogeneous().inverse()), f.target(), f.source());
}

/// s o f o s^{-1}.
inline ProjectiveMap conjugate(const ProjectiveMap& f, const ProjectiveMap& s) {
  return compose(compose(s, f), inverse(s));
}

// ============================================================ ball maps

/// phi(z) = (Az + B) / (<z, C> + D), stored with D = 1.
class BallMap {
 public:
  /// Validating factory: finite entries, D != 0, |C| < |D| and the self-map
  /// property on a 1000-point sample of the ball.
  static BallMap make(const CMatrix& a, const CVector& b, const CVector& c, cplx d) {
    const Index n = a.rows();
    if (n < 1) throw Error(ErrorKind::Dimension, "dimension must be at least 1");
    require_square(a, "A");
    if (b.size() != n || c.size() != n) throw Error(ErrorKind::Dimension, "B and C must have length N");
    require_finite(a, "A");
    require_finite(b, "B");
    require_finite(c, "C");
    if (!std::isfinite(d.real()) || !std::isfinite(d.imag())) throw Error(ErrorKind::Domain, "D is not finite");
    if (std::abs(d) == 0.0) throw Error(ErrorKind::Domain, "denominator invariant violated: D = 0");
    if (!(c.norm() < std::abs(d))) {
      throw Error(ErrorKind::Domain, "denominator invariant violated: |C| >= |D|");
    }
    BallMap f(a / d, b / d, c / std::conj(d));
    f.check_self_map();
    return f;
  }

  /// Normalises D = 1 without the self-map validation (for algebraic results
  /// such as inverses and conjugates).
  static BallMap from_homogeneous(const CMatrix& h) {
    require_square(h, "homogeneous matrix");
    const Index n = h.rows() - 1;
    if (n < 1) throw Error(ErrorKind::Dimension, "dimension must be at least 1");
    const cplx d = h(n, n);
    if (std::abs(d) <= 1e-14 * h.norm()) throw Error(ErrorKind::Form, "homogeneous matrix has D = 0");
    const CMatrix hn = h / d;
    return BallMap(hn.topLeftCorner(n, n), hn.col(n).head(n), hn.block(n, 0, 1, n).adjoint());
  }

  static BallMap linear(const CMatrix& a) {
    return BallMap(a, CVector::Zero(a.rows()), CVector::Zero(a.rows()));
  }

  static BallMap identity(Index n) { return linear(CMatrix::Identity(n, n)); }

  Index dim() const { return a_.rows(); }
  const CMatrix& A() const { return a_; }
  const CVector& B() const { return b_; }
  const CVector& C() const { return c_; }
  cplx D() const { return 1.0; }

  CMatrix homogeneous() const {
    const Index n = dim();
    CMatrix h(n + 1, n + 1);
    h.topLeftCorner(n, n) = a_;
    h.col(n).head(n) = b_;
    h.block(n, 0, 1, n) = c_.adjoint();
    h(n, n) = 1.0;
    return h;
  }

  ProjectiveMap projective() const { return ProjectiveMap(homogeneous(), Domain::Ball, Domain::Ball); }

  bool is_identity(double tol = 1e-12) const {
    return (a_ - CMatrix::Identity(dim(), dim())).norm() <= tol && b_.norm() <= tol && c_.norm() <= tol;
  }

  CVector apply(const CVector& z) const { return projective().apply(z); }

 private:
  BallMap(CMatrix a, CVector b, CVector c) : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {}

  void check_self_map() const {
    SamplerCfg cfg;
    cfg.seed = 7;
    cfg.count = 1000;
    cfg.radius_schedule = {0.1, 0.3, 0.5, 0.7, 0.8, 0.9, 0.95, 0.99, 0.999};
    for (const CVector& z : sample_points(cfg, dim())) {
      const CVector w = apply(z);
      if (ball_margin(w) < -1e-9) {
        throw Error(ErrorKind::Domain, "self-map invariant violated: |phi(z)| = " + std::to_string(w.norm()));
      }
    }
  }

  CMatrix a_;
  CVector b_;
  CVector c_;
};

inline CVector eval(const BallMap& f, const CVector& z) {
  if (z.size() != f.dim()) throw Error(ErrorKind::Dimension, "point has wrong dimension");
  if (z.norm() > 1.0 + 1e-12) throw Error(ErrorKind::Domain, "point lies outside the closed ball");
  return f.apply(z);
}

inline BallMap compose(const BallMap& f, const BallMap& g) {
  if (f.dim() != g.dim()) throw Error(ErrorKind::Dimension, "composing maps of different dimensions");
  return BallMap::from_homogeneous(f.homogeneous() * g.homogeneous());
}

inline BallMap inverse(const BallMap& f) {
  return BallMap::from_homogeneous(inverse(f.projective()).homogeneous());
}

inline BallMap conjugate(const BallMap& f, const BallMap& s) {
  return BallMap::from_homogeneous(conjugate(f.projective(), s.projective()).homogeneous());
}

/// The involutive automorphism exchanging 0 and a.
inline BallMap ball_automorphism(const CVector& a) {
  const Index n = a.size();
  const double na = a.norm();
  if (!(na < 1.0)) throw Error(ErrorKind::Domain, "automorphism centre must lie in the open ball");
  if (na == 0.0) return BallMap::linear(-CMatrix::Identity(n, n));
  const CMatrix p = a * a.adjoint() / (na * na);
  const CMatrix q = CMatrix::Identity(n, n) - p;
  const double s = std::sqrt(1.0 - na * na);
  CMatrix h(n + 1, n + 1);
  h.topLeftCorner(n, n) = -(p + s * q);
  h.col(n).head(n) = a;
  h.block(n, 0, 1, n) = -a.adjoint();
  h(n, n) = 1.0;
  return BallMap::from_homogeneous(h);
}

/// Jacobian of phi at z: (A - phi(z) C^H) / (<z, C> + D).
inline CMatrix jacobian(const BallMap& f, const CVector& z) {
  const cplx den = inner(z, f.C()) + f.D();
  const CVector w = f.apply(z);
  return (f.A() - w * f.C().adjoint()) / den;
}

// ============================================================ Siegel maps

struct BlockSizes {
  Index p = 0;  // eigenvalue 1 (translation block)
  Index q = 0;  // unimodular, not 1
  Index r = 0;  // strict contraction

  Index total() const { return p + q + r; }
  bool operator==(const BlockSizes&) const = default;
};

/// (z, W) -> (lambda z + 2i<W, a> + b, M W + c) on the Siegel half-space.
/// `frame` is the ball rotation U used when the map came from the ball
/// through the Cayley transform (U e1 = Denjoy-Wolff point).
class SiegelMap {
 public:
  SiegelMap(cplx lambda, CMatrix m, CVector a, cplx b, CVector c, CMatrix frame = {},
            std::optional<BlockSizes> split = std::nullopt)
      : lambda_(lambda), m_(std::move(m)), a_(std::move(a)), b_(b), c_(std::move(c)), split_(split) {
    const Index k = m_.rows();
    require_square(m_, "M");
    if (a_.size() != k || c_.size() != k) throw Error(ErrorKind::Dimension, "a and c must have length N-1");
    frame_ = frame.size() == 0 ? CMatrix(CMatrix::Identity(k + 1, k + 1)) : std::move(frame);
    if (frame_.rows() != k + 1) throw Error(ErrorKind::Dimension, "frame must be N x N");
  }

  static SiegelMap identity(Index n) {
    return SiegelMap(1.0, CMatrix::Identity(n - 1, n - 1), CVector::Zero(n - 1), 0.0, CVector::Zero(n - 1));
  }

  static SiegelMap from_homogeneous(const CMatrix& h, CMatrix frame = {}, double form_tol = 1e-8) {
    require_square(h, "homogeneous matrix");
    const Index n = h.rows() - 1;
    if (n < 1) throw Error(ErrorKind::Dimension, "dimension must be at least 1");
    const cplx d = h(n, n);
    if (std::abs(d) <= 1e-14 * h.norm()) throw Error(ErrorKind::Form, "not an affine map of the Siegel domain");
    const CMatrix hn = h / d;
    const double scale = std::max(1.0, hn.cwiseAbs().maxCoeff());
    double off = hn.block(n, 0, 1, n).cwiseAbs().maxCoeff();
    if (n > 1) off = std::max(off, hn.block(1, 0, n - 1, 1).cwiseAbs().maxCoeff());
    if (off > form_tol * scale) {
      throw Error(ErrorKind::Form, "map is not of Siegel affine form (residual " + std::to_string(off / scale) + ")");
    }
    const Index k = n - 1;
    CVector a = (hn.block(0, 1, 1, k) / (2.0 * kI)).adjoint();
    return SiegelMap(hn(0, 0), hn.block(1, 1, k, k), a, hn(0, n), hn.block(1, n, k, 1), std::move(frame));
  }

  Index dim() const { return m_.rows() + 1; }
  cplx lambda() const { return lambda_; }
  const CMatrix& M() const { return m_; }
  const CVector& a() const { return a_; }
  cplx b() const { return b_; }
  const CVector& c() const { return c_; }
  const CMatrix& frame() const { return frame_; }
  const std::optional<BlockSizes>& split() const { return split_; }

  CMatrix homogeneous() const {
    const Index k = m_.rows();
    CMatrix h = CMatrix::Zero(k + 2, k + 2);
    h(0, 0) = lambda_;
    h.block(0, 1, 1, k) = 2.0 * kI * a_.adjoint();
    h(0, k + 1) = b_;
    h.block(1, 1, k, k) = m_;
    h.block(1, k + 1, k, 1) = c_;
    h(k + 1, k + 1) = 1.0;
    return h;
  }

  ProjectiveMap projective() const { return ProjectiveMap(homogeneous(), Domain::Siegel, Domain::Siegel); }

  CVector apply(const CVector& w) const { return projective().apply(w); }

 private:
  cplx lambda_;
  CMatrix m_;
  CVector a_;
  cplx b_;
  CVector c_;
  CMatrix frame_;
  std::optional<BlockSizes> split_;
};

inline CVector eval(const SiegelMap& g, const CVector& w) {
  if (w.size() != g.dim()) throw Error(ErrorKind::Dimension, "point has wrong dimension");
  if (siegel_margin(w) < -1e-12 * std::max(1.0, w.squaredNorm())) {
    throw Error(ErrorKind::Domain, "point lies outside the closed Siegel domain");
  }
  return g.apply(w);
}

inline SiegelMap compose(const SiegelMap& f, const SiegelMap& g) {
  return SiegelMap::from_homogeneous(f.homogeneous() * g.homogeneous());
}

inline SiegelMap inverse(const SiegelMap& f) {
  return SiegelMap::from_homogeneous(inverse(f.projective()).homogeneous());
}

inline SiegelMap conjugate(const SiegelMap& f, const ProjectiveMap& s) {
  return SiegelMap::from_homogeneous(conjugate(f.projective(), s).homogeneous());
}

/// Heisenberg translation (z, W) -> (z + 2i<W, gamma> + beta, W + gamma).
/// With beta = i|gamma|^2 it is an automorphism of the Siegel domain.
inline ProjectiveMap heisenberg(const CVector& gamma, std::optional<cplx> beta = std::nullopt) {
  const cplx bt = beta.value_or(kI * gamma.squaredNorm());
  return SiegelMap(1.0, CMatrix::Identity(gamma.size(), gamma.size()), gamma, bt, gamma).projective();
}

/// (z, W) -> (z, V W) for a unitary V.
inline ProjectiveMap siegel_unitary(const CMatrix& v) {
  return ProjectiveMap(block_diag(block_diag(CMatrix::Identity(1, 1), v), CMatrix::Identity(1, 1)),
                       Domain::Siegel, Domain::Siegel);
}

// ============================================================ Cayley transform

inline CMatrix cayley_matrix(Index n) {
  CMatrix s = CMatrix::Zero(n + 1, n + 1);
  s(0, 0) = kI;
  s(0, n) = kI;
  for (Index k = 1; k < n; ++k) s(k, k) = kI;
  s(n, 0) = -1.0;
  s(n, n) = 1.0;
  return s;
}

inline CMatrix cayley_inverse_matrix(Index n) {
  CMatrix r = CMatrix::Zero(n + 1, n + 1);
  r(0, 0) = 1.0;
  r(0, n) = -kI;
  for (Index k = 1; k < n; ++k) r(k, k) = 2.0;
  r(n, 0) = 1.0;
  r(n, n) = kI;
  return r;
}

inline ProjectiveMap cayley_map(Index n) { return ProjectiveMap(cayley_matrix(n), Domain::Ball, Domain::Siegel); }

inline ProjectiveMap ball_linear(const CMatrix& u) {
  return ProjectiveMap(block_diag(u, CMatrix::Identity(1, 1)), Domain::Ball, Domain::Ball);
}

/// The Siegel picture of U^H f U.
inline SiegelMap siegel_in_frame(const BallMap& f, const CMatrix& frame) {
  const Index n = f.dim();
  const CMatrix fr = block_diag(frame, CMatrix::Identity(1, 1));
  const CMatrix g = cayley_matrix(n) * fr.adjoint() * f.homogeneous() * fr * cayley_inverse_matrix(n);
  return SiegelMap::from_homogeneous(g, frame);
}

inline BallMap cayley_to_ball(const SiegelMap& g) {
  const Index n = g.dim();
  const CMatrix fr = block_diag(g.frame(), CMatrix::Identity(1, 1));
  return BallMap::from_homogeneous(fr * cayley_inverse_matrix(n) * g.homogeneous() * cayley_matrix(n) *
                                   fr.adjoint());
}

// ============================================================ fixed points

struct FixedPoints {
  std::vector<CVector> interior;          // minimal-norm point of each fixed slice
  std::vector<Index> interior_slice_dim;  // affine dimension of that slice
  std::vector<CVector> boundary;
};

inline FixedPoints fixed_points(const BallMap& f, const Tolerances& tol = {}) {
  const Index n = f.dim();
  const CMatrix h = f.homogeneous();
  const CVector ev = eigenvalues(h);
  const double hnorm = std::max(1.0, spectral_norm(h));
  FixedPoints out;

  std::function<void(const std::vector<Index>&, double)> process = [&](const std::vector<Index>& members,
                                                                     double ctol) {
    cplx mu = 0.0;
    for (Index i : members) mu += ev(i);
    mu /= double(members.size());
    Eigen::JacobiSVD<CMatrix> s(h - mu * CMatrix::Identity(n + 1, n + 1), Eigen::ComputeFullV);
    const RVector& sv = s.singularValues();
    Index k = 0;
    while (k < n + 1 && sv(n - k) <= 1e-8 * hnorm) ++k;
    if (k == 0) {
      if (members.size() > 1 && ctol > 1e-10) {
        CVector sub(static_cast<Index>(members.size()));
        for (std::size_t i = 0; i < members.size(); ++i) sub(Index(i)) = ev(members[i]);
        const std::vector<int> lab = detail::cluster_labels(sub, ctol / 100.0);
        const int groups = *std::max_element(lab.begin(), lab.end()) + 1;
        for (int g = 0; g < groups; ++g) {
          std::vector<Index> part;
          for (std::size_t i = 0; i < members.size(); ++i)
            if (lab[i] == g) part.push_back(members[i]);
          process(part, ctol / 100.0);
        }
        return;
      }
      k = 1;
    }
    const CMatrix v = s.matrixV().rightCols(k);
    const CMatrix p = v.topRows(n);
    const CMatrix tau = v.bottomRows(1);
    const double tn = tau.norm();
    if (tn <= 1e-10) return;
    CVector pt = p * tau.adjoint() / (tn * tn);
    const double r = pt.norm();
    if (r < 1.0 - tol.fixed_point) {
      out.interior.push_back(pt);
      out.interior_slice_dim.push_back(k - 1);
    } else if (std::abs(r - 1.0) <= tol.fixed_point) {
      out.boundary.push_back(pt / r);
    }
  };

  const std::vector<int> labels = detail::cluster_labels(ev, tol.eigen_cluster);
  const int groups = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  for (int g = 0; g < groups; ++g) {
    std::vector<Index> members;
    for (Index i = 0; i < ev.size(); ++i)
      if (labels[static_cast<std::size_t>(i)] == g) members.push_back(i);
    process(members, tol.eigen_cluster);
  }

  auto check = [&](const CVector& p) {
    const double res = (f.apply(p) - p).norm();
    if (res > tol.fixed_point * std::max(1.0, p.norm())) {
      throw Error(ErrorKind::Numeric, "fixed point residual " + std::to_string(res) + " exceeds tolerance");
    }
  };
  for (const auto& p : out.interior) check(p);
  for (const auto& p : out.boundary) check(p);
  return out;
}

/// Boundary dilation coefficient at a boundary fixed point w: the radial limit
/// of (1 - |phi(rw)|^2) / (1 - r^2), extrapolated (Neville) from r = 1 - eps_k.
inline double boundary_dilation(const BallMap& f, const CVector& w) {
  constexpr int kSteps = 6;
  std::array<double, kSteps> eps{}, q{};
  for (int k = 0; k < kSteps; ++k) {
    eps[k] = 1e-2 / double(1 << k);
    const CVector fz = f.apply((1.0 - eps[k]) * w);
    q[k] = (1.0 - fz.squaredNorm()) / (eps[k] * (2.0 - eps[k]));
  }
  for (int m = 1; m < kSteps; ++m)
    for (int i = 0; i + m < kSteps; ++i) q[i] = (eps[i] * q[i + 1] - eps[i + m] * q[i]) / (eps[i] - eps[i + m]);
  return q[0];
}

// ============================================================ classification

enum class MapKind { Elliptic, Hyperbolic, Parabolic };

inline std::string_view to_string(MapKind k) {
  switch (k) {
    case MapKind::Elliptic: return "elliptic";
    case MapKind::Hyperbolic: return "hyperbolic";
    case MapKind::Parabolic: return "parabolic";
  }
  return "?";
}

struct Classification {
  MapKind kind = MapKind::Elliptic;
  std::vector<CVector> interior_fixed_points;
  std::vector<Index> interior_slice_dim;
  std::optional<CVector> dw_point;
  std::optional<double> delta;
  double parabolic_margin = 0.0;  // |delta - 1|
  std::vector<CVector> boundary_fixed_points;
  std::vector<double> boundary_dilations;
};

inline Classification classify(const BallMap& f, const Tolerances& tol = {}) {
  if (f.is_identity(1e-12)) throw Error(ErrorKind::DegenerateInput, "the identity map has no classification");
  const FixedPoints fp = fixed_points(f, tol);
  Classification c;
  c.interior_fixed_points = fp.interior;
  c.interior_slice_dim = fp.interior_slice_dim;
  c.boundary_fixed_points = fp.boundary;
  for (const auto& w : fp.boundary) c.boundary_dilations.push_back(boundary_dilation(f, w));
  if (!fp.interior.empty()) {
    c.kind = MapKind::Elliptic;
    return c;
  }
  if (fp.boundary.empty()) throw Error(ErrorKind::Numeric, "no fixed point found in the closed ball");
  const auto best = std::min_element(c.boundary_dilations.begin(), c.boundary_dilations.end());
  const auto idx = static_cast<std::size_t>(best - c.boundary_dilations.begin());
  const double delta = *best;
  if (delta > 1.0 + tol.parabolic_cut) {
    throw Error(ErrorKind::Numeric, "no boundary fixed point has dilation coefficient <= 1");
  }
  c.dw_point = fp.boundary[idx];
  c.delta = delta;
  c.parabolic_margin = std::abs(delta - 1.0);
  c.kind = c.parabolic_margin <= tol.parabolic_cut ? MapKind::Parabolic : MapKind::Hyperbolic;
  return c;
}

inline Index unitary_index(const BallMap& f, const CVector& z0, const Tolerances& tol = {}) {
  const CVector ev = eigenvalues(jacobian(f, z0));
  Index u = 0;
  for (Index i = 0; i < ev.size(); ++i)
    if (std::abs(std::abs(ev(i)) - 1.0) <= tol.unimodular) ++u;
  return u;
}

inline Index unitary_index(const BallMap& f, const Tolerances& tol = {}) {
  if (f.is_identity(1e-12)) return f.dim();
  const Classification c = classify(f, tol);
  if (c.kind != MapKind::Elliptic) throw Error(ErrorKind::Domain, "unitary index is defined for elliptic maps only");
  return unitary_index(f, c.interior_fixed_points.front(), tol);
}

/// Automorphism test: the unit sphere is mapped to itself on a fixed sample.
inline bool is_automorphism(const BallMap& f, double tol = 1e-9) {
  for (const CVector& z : sample_sphere(11, 64, f.dim())) {
    CVector w;
    try {
      w = f.apply(z);
    } catch (const Error&) {
      return false;
    }
    if (std::abs(w.norm() - 1.0) > tol) return false;
  }
  return true;
}

// ============================================================ Cayley, map level

inline SiegelMap cayley_to_siegel(const BallMap& f, const Tolerances& tol = {}) {
  if (f.is_identity(1e-12)) return SiegelMap::identity(f.dim());
  const Classification c = classify(f, tol);
  if (c.kind == MapKind::Elliptic) {
    throw Error(ErrorKind::Form, "elliptic maps have no Denjoy-Wolff point on the sphere");
  }
  return siegel_in_frame(f, unitary_with_first_column(*c.dw_point));
}

}  // namespace lfmsemi
