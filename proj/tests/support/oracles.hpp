#pragma once
// Reference computations kept independent of the library code paths.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr cplx I{0.0, 1.0};

/// exp(M) by scaling and squaring around a plain 60-term Taylor sum.
inline CMatrix series_exp(const CMatrix& m) {
  const Eigen::Index n = m.rows();
  double nrm = m.cwiseAbs().rowwise().sum().maxCoeff();
  int s = 0;
  while (nrm > 0.5) {
    nrm /= 2.0;
    ++s;
  }
  const CMatrix a = m / std::pow(2.0, s);
  CMatrix term = CMatrix::Identity(n, n), sum = CMatrix::Identity(n, n);
  for (int k = 1; k <= 60; ++k) {
    term = term * a / double(k);
    sum += term;
  }
  for (int i = 0; i < s; ++i) sum = sum * sum;
  return sum;
}

/// Largest value of f over a log-spaced grid on [lo, hi], refined by golden
/// section around the best grid point.
inline double sup_over_t(const std::function<double(double)>& f, double lo = 1e-7, double hi = 60.0, int n = 4000) {
  double best = -INFINITY, bt = lo;
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i <= n; ++i) {
    const double t = std::exp(a + (b - a) * i / n);
    const double v = f(t);
    if (v > best) {
      best = v;
      bt = t;
    }
  }
  double l = std::max(lo, bt / std::exp((b - a) / n)), r = std::min(hi, bt * std::exp((b - a) / n));
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 100; ++it) {
    const double x1 = r - g * (r - l), x2 = l + g * (r - l);
    if (f(x1) > f(x2)) r = x2; else l = x1;
  }
  return std::max(best, f((l + r) / 2.0));
}

/// g(t) = |1 - exp(t(-u + iv))|^2 / (t |1 - lam|^2 (1 - exp(-2tu))), lam = exp(-u + iv).
inline double g_parabolic(double u, double v, double t) {
  const cplx lam = std::exp(cplx(-u, v));
  const double num = std::norm(1.0 - std::exp(t * cplx(-u, v)));
  return num / (t * std::norm(1.0 - lam) * (1.0 - std::exp(-2.0 * t * u)));
}

/// Hyperbolic weight whose supremum over t is the diagonal Theta entry:
/// (lam - 1) lam^{2t} |1 - exp(-t(ln lam / 2 + u - iv))|^2
///   / (lam^t (lam^t - 1) (1 - exp(-2tu)) |lam - sqrt(lam) lam_j|^2).
inline double g_hyperbolic(double lam, double u, double v, double t) {
  const cplx lj = std::exp(cplx(-u, v));
  const double w = std::log(lam) / 2.0 + u;
  const double lt = std::pow(lam, t);
  const double num = (lam - 1.0) * lt * lt * std::norm(1.0 - std::exp(-t * cplx(w, -v)));
  return num / (lt * (lt - 1.0) * (1.0 - std::exp(-2.0 * t * u)) * std::norm(lam - std::sqrt(lam) * lj));
}

/// Direct evaluation of (Az + B)/(<z, C> + D) without any domain checks.
inline CVector lfm_eval(const CMatrix& a, const CVector& b, const CVector& c, cplx d, const CVector& z) {
  return (a * z + b) / (c.dot(z) + d);
}

/// Angular derivative Re <d phi_w (w), w> at a boundary fixed point w, by a
/// central difference along w.
inline double angular_derivative(const CMatrix& a, const CVector& b, const CVector& c, cplx d, const CVector& w,
                                 double h = 1e-6) {
  const CVector dp = (lfm_eval(a, b, c, d, w * (1.0 + h)) - lfm_eval(a, b, c, d, w * (1.0 - h))) / (2.0 * h);
  return w.dot(dp).real();
}

/// Disc Mobius map (a z + b)/(c z + d): fixed points from the quadratic
/// c z^2 + (d - a) z - b = 0 and the derivative at each.
struct MobiusFixed {
  std::vector<cplx> points;
  std::vector<cplx> derivative;
};

inline MobiusFixed mobius_fixed(cplx a, cplx b, cplx c, cplx d) {
  MobiusFixed out;
  auto add = [&](cplx z) {
    out.points.push_back(z);
    const cplx den = c * z + d;
    out.derivative.push_back((a * d - b * c) / (den * den));
  };
  if (std::abs(c) < 1e-15) {
    if (std::abs(d - a) > 1e-15) add(b / (d - a));
    return out;
  }
  const cplx disc = std::sqrt((d - a) * (d - a) + 4.0 * c * b);
  add((-(d - a) + disc) / (2.0 * c));
  if (std::abs(disc) > 1e-12) add((-(d - a) - disc) / (2.0 * c));
  return out;
}

/// sup over 10^4 random unit vectors of |Ax|.
template <class Rng>
inline double sampled_norm(const CMatrix& a, Rng& rng, int count = 10000) {
  std::normal_distribution<double> g;
  double best = 0.0;
  for (int k = 0; k < count; ++k) {
    CVector x(a.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = cplx(g(rng), g(rng));
    x.normalize();
    best = std::max(best, (a * x).norm());
  }
  return best;
}

/// The four Penrose identities; returns the largest residual.
inline double penrose_residual(const CMatrix& a, const CMatrix& p) {
  const CMatrix ap = a * p, pa = p * a;
  double r = (ap * a - a).norm();
  r = std::max(r, (pa * p - p).norm());
  r = std::max(r, (ap.adjoint() - ap).norm());
  r = std::max(r, (pa.adjoint() - pa).norm());
  return r;
}

}  // namespace oracle
