#pragma once

#include <variant>

#include "lfmsemi/normal_forms.hpp"

namespace lfmsemi {

/// phi_t(z', z'') = (exp(it Theta) z', exp(tM) z'') on the ball.
struct EllipticSplitGen {
  RVector theta;
  CMatrix m;
};

/// phi_t(z) = exp(tM) z / (delta <z, (exp(tM)^H - I) e1> + 1) on the ball.
struct EllipticU0Gen {
  CMatrix m;
  double delta = 0.0;
};

/// psi_t = tau_t o rho_t on the Siegel domain with coordinates (z, u, v, w):
///   tau_t = (z + 2i<u, ta> + it^2|a|^2 + t beta_re, u + ta, exp(it Theta_D) v, w)
///   rho_t = (z + 2i<w, c_t> + t alpha, u, v, exp(tM) w),
///   c_t = (I - exp(M)^H)^{-1} (I - exp(tM)^H) c.
struct ParabolicGen {
  BlockSizes blocks;
  CVector a;
  double beta_re = 0.0;
  cplx alpha = 0.0;
  RVector theta_d;
  CMatrix m;
  CVector c;
};

/// psi_t = (lambda^t z + 2i<w, a_t> + b_t, lambda^{t/2} u, lambda^{t/2} exp(it Theta_D) v,
///          lambda^{t/2} exp(tM) w) with
///   a_t = (lambda - sqrt(lambda) A^H)^{-1} (lambda^t - lambda^{t/2} A_t^H) a,
///   b_t = (1 - lambda^t) / (1 - lambda) b.
struct HyperbolicGen {
  BlockSizes blocks;
  double lambda = 1.0;
  cplx b = 0.0;
  CVector a;
  RVector theta_d;
  CMatrix m;
};

/// psi_t(z, W) = (lambda^t z + (lambda^t - 1)/(lambda - 1) a, W + t b).
struct TranslationHyperbolicGen {
  double lambda = 1.0;
  cplx a = 0.0;
  CVector b;
};

using GeneratorData =
    std::variant<EllipticSplitGen, EllipticU0Gen, ParabolicGen, HyperbolicGen, TranslationHyperbolicGen>;

enum class FamilyKind { EllipticSplit, EllipticU0, Parabolic, Hyperbolic, TranslationHyperbolic };

inline std::string_view to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::EllipticSplit: return "elliptic-split";
    case FamilyKind::EllipticU0: return "elliptic-u0";
    case FamilyKind::Parabolic: return "parabolic";
    case FamilyKind::Hyperbolic: return "hyperbolic";
    case FamilyKind::TranslationHyperbolic: return "hyperbolic-translation";
  }
  return "?";
}

/// A one-parameter semigroup of linear fractional maps given in closed form.
/// Every member is a homogeneous matrix H_t = exp(tL); the closed forms are
/// primary and the generator matrix L is used for the vector field.
class SemigroupFamily {
 public:
  SemigroupFamily(GeneratorData data, ProjectiveMap conjugator) : data_(std::move(data)), conj_(std::move(conjugator)) {
    validate();
  }

  FamilyKind kind() const { return static_cast<FamilyKind>(data_.index()); }
  const GeneratorData& data() const { return data_; }
  const ProjectiveMap& conjugator() const { return conj_; }

  Domain domain() const {
    return (kind() == FamilyKind::EllipticSplit || kind() == FamilyKind::EllipticU0) ? Domain::Ball : Domain::Siegel;
  }

  Index dim() const {
    return std::visit(
        [](const auto& d) -> Index {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, EllipticSplitGen>) return d.theta.size() + d.m.rows();
          else if constexpr (std::is_same_v<T, EllipticU0Gen>) return d.m.rows();
          else if constexpr (std::is_same_v<T, TranslationHyperbolicGen>) return 1 + d.b.size();
          else return 1 + d.blocks.total();
        },
        data_);
  }

  CMatrix homogeneous_at(double t) const {
    if (!(t >= 0.0) || !std::isfinite(t)) throw Error(ErrorKind::Domain, "semigroup parameter must be finite and >= 0");
    const Index n = dim();
    CMatrix h = CMatrix::Identity(n + 1, n + 1);
    if (auto* d = std::get_if<EllipticSplitGen>(&data_)) {
      const Index u = d->theta.size();
      for (Index j = 0; j < u; ++j) h(j, j) = std::exp(kI * (t * d->theta(j)));
      h.block(u, u, d->m.rows(), d->m.rows()) = mat_exp(t * d->m);
    } else if (auto* d = std::get_if<EllipticU0Gen>(&data_)) {
      const CMatrix e = mat_exp(t * d->m);
      h.topLeftCorner(n, n) = e;
      h.block(n, 0, 1, n) = d->delta * (e - CMatrix::Identity(n, n)).row(0);
    } else if (auto* d = std::get_if<ParabolicGen>(&data_)) {
      const auto [p, q, r] = d->blocks;
      CMatrix tau = CMatrix::Identity(n + 1, n + 1), rho = CMatrix::Identity(n + 1, n + 1);
      tau.block(0, 1, 1, p) = 2.0 * kI * t * d->a.adjoint();
      tau(0, n) = kI * t * t * d->a.squaredNorm() + t * d->beta_re;
      tau.block(1, n, p, 1) = t * d->a;
      for (Index j = 0; j < q; ++j) tau(1 + p + j, 1 + p + j) = std::exp(kI * (t * d->theta_d(j)));
      if (r > 0) {
        rho.block(0, 1 + p + q, 1, r) = 2.0 * kI * c_path(*d, t).adjoint();
        rho.block(1 + p + q, 1 + p + q, r, r) = mat_exp(t * d->m);
      }
      rho(0, n) = t * d->alpha;
      h = tau * rho;
    } else if (auto* d = std::get_if<HyperbolicGen>(&data_)) {
      const auto [p, q, r] = d->blocks;
      const double lt = std::pow(d->lambda, t), lh = std::pow(d->lambda, t / 2.0);
      h(0, 0) = lt;
      h(0, n) = d->b * ((1.0 - lt) / (1.0 - d->lambda));
      for (Index j = 0; j < p; ++j) h(1 + j, 1 + j) = lh;
      for (Index j = 0; j < q; ++j) h(1 + p + j, 1 + p + j) = lh * std::exp(kI * (t * d->theta_d(j)));
      if (r > 0) {
        h.block(1 + p + q, 1 + p + q, r, r) = lh * mat_exp(t * d->m);
        h.block(0, 1 + p + q, 1, r) = 2.0 * kI * a_path(*d, t).adjoint();
      }
    } else if (auto* d = std::get_if<TranslationHyperbolicGen>(&data_)) {
      const double lt = std::pow(d->lambda, t);
      h(0, 0) = lt;
      h(0, n) = (lt - 1.0) / (d->lambda - 1.0) * d->a;
      h.block(1, n, n - 1, 1) = t * d->b;
    }
    return h;
  }

  ProjectiveMap at(double t) const { return ProjectiveMap(homogeneous_at(t), domain(), domain()); }

  /// The member in the coordinates of the original input map.
  ProjectiveMap at_input(double t) const { return compose(inverse(conj_), compose(at(t), conj_)); }

  /// L with H_t = exp(tL).
  CMatrix generator_matrix() const {
    const Index n = dim();
    CMatrix l = CMatrix::Zero(n + 1, n + 1);
    if (auto* d = std::get_if<EllipticSplitGen>(&data_)) {
      const Index u = d->theta.size();
      for (Index j = 0; j < u; ++j) l(j, j) = kI * d->theta(j);
      l.block(u, u, d->m.rows(), d->m.rows()) = d->m;
    } else if (auto* d = std::get_if<EllipticU0Gen>(&data_)) {
      l.topLeftCorner(n, n) = d->m;
      l.block(n, 0, 1, n) = d->delta * d->m.row(0);
    } else if (auto* d = std::get_if<ParabolicGen>(&data_)) {
      const auto [p, q, r] = d->blocks;
      l.block(0, 1, 1, p) = 2.0 * kI * d->a.adjoint();
      l(0, n) = d->beta_re + d->alpha;
      l.block(1, n, p, 1) = d->a;
      for (Index j = 0; j < q; ++j) l(1 + p + j, 1 + p + j) = kI * d->theta_d(j);
      if (r > 0) {
        const CMatrix mh = d->m.adjoint();
        const CMatrix k = CMatrix::Identity(r, r) - mat_exp(mh);
        const CVector cdot = -k.partialPivLu().solve(mh * d->c);
        l.block(0, 1 + p + q, 1, r) = 2.0 * kI * cdot.adjoint();
        l.block(1 + p + q, 1 + p + q, r, r) = d->m;
      }
    } else if (auto* d = std::get_if<HyperbolicGen>(&data_)) {
      const auto [p, q, r] = d->blocks;
      const double ll = std::log(d->lambda);
      l(0, 0) = ll;
      l(0, n) = ll / (d->lambda - 1.0) * d->b;
      for (Index j = 0; j < p; ++j) l(1 + j, 1 + j) = ll / 2.0;
      for (Index j = 0; j < q; ++j) l(1 + p + j, 1 + p + j) = ll / 2.0 + kI * d->theta_d(j);
      if (r > 0) {
        const CMatrix id = CMatrix::Identity(r, r);
        l.block(1 + p + q, 1 + p + q, r, r) = ll / 2.0 * id + d->m;
        const CMatrix sys = d->lambda * id - std::sqrt(d->lambda) * mat_exp(d->m).adjoint();
        const CVector adot = sys.partialPivLu().solve((ll / 2.0 * id - d->m.adjoint()) * d->a);
        l.block(0, 1 + p + q, 1, r) = 2.0 * kI * adot.adjoint();
      }
    } else if (auto* d = std::get_if<TranslationHyperbolicGen>(&data_)) {
      const double ll = std::log(d->lambda);
      l(0, 0) = ll;
      l(0, n) = ll / (d->lambda - 1.0) * d->a;
      l.block(1, n, n - 1, 1) = d->b;
    }
    return l;
  }

  /// Infinitesimal generator G with d/dt phi_t = G o phi_t, in family coordinates.
  CVector generator(const CVector& p) const {
    const Index n = dim();
    if (p.size() != n) throw Error(ErrorKind::Dimension, "point has wrong dimension");
    CVector x(n + 1);
    x.head(n) = p;
    x(n) = 1.0;
    const CVector y = generator_matrix() * x;
    return y.head(n) - p * y(n);
  }

  /// c_t for the parabolic family.
  static CVector c_path(const ParabolicGen& d, double t) {
    const Index r = d.blocks.r;
    const CMatrix mh = d.m.adjoint();
    const CMatrix id = CMatrix::Identity(r, r);
    return (id - mat_exp(mh)).partialPivLu().solve((id - mat_exp(t * mh)) * d.c);
  }

  /// a_t for the hyperbolic family.
  static CVector a_path(const HyperbolicGen& d, double t) {
    const Index r = d.blocks.r;
    const CMatrix id = CMatrix::Identity(r, r);
    const double sl = std::sqrt(d.lambda);
    const CMatrix sys = d.lambda * id - sl * mat_exp(d.m).adjoint();
    const CMatrix rhs = std::pow(d.lambda, t) * id - std::pow(d.lambda, t / 2.0) * mat_exp(t * d.m).adjoint();
    return sys.partialPivLu().solve(rhs * d.a);
  }

 private:
  void validate() const {
    auto bad = [](const char* what) { throw Error(ErrorKind::Internal, std::string("inconsistent generator data: ") + what); };
    if (auto* d = std::get_if<EllipticSplitGen>(&data_)) {
      if (d->m.rows() != d->m.cols()) bad("M not square");
    } else if (auto* d = std::get_if<EllipticU0Gen>(&data_)) {
      if (d->m.rows() != d->m.cols() || d->m.rows() < 1) bad("M not square");
      if (!(d->delta >= 0.0)) bad("negative delta");
    } else if (auto* d = std::get_if<ParabolicGen>(&data_)) {
      const auto& b = d->blocks;
      if (d->a.size() != b.p || d->theta_d.size() != b.q || d->m.rows() != b.r || d->m.cols() != b.r ||
          d->c.size() != b.r)
        bad("parabolic block sizes");
    } else if (auto* d = std::get_if<HyperbolicGen>(&data_)) {
      const auto& b = d->blocks;
      if (d->a.size() != b.r || d->theta_d.size() != b.q || d->m.rows() != b.r || d->m.cols() != b.r)
        bad("hyperbolic block sizes");
      if (!(d->lambda > 1.0)) bad("lambda must exceed 1");
    } else if (auto* d = std::get_if<TranslationHyperbolicGen>(&data_)) {
      if (!(d->lambda > 1.0)) bad("lambda must exceed 1");
    }
    if (conj_.dim() != dim()) bad("conjugator dimension");
  }

  GeneratorData data_;
  ProjectiveMap conj_;
};

}  // namespace lfmsemi
