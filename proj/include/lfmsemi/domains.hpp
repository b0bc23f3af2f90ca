#pragma once

#include <string_view>

#include "lfmsemi/cmatrix.hpp"

namespace lfmsemi {

/// Ball: |z| < 1. Siegel: Im w_1 > |w'|^2. Projective: no domain attached.
enum class Domain { Ball, Siegel, Projective };

inline std::string_view to_string(Domain d) {
  switch (d) {
    case Domain::Ball: return "ball";
    case Domain::Siegel: return "siegel";
    case Domain::Projective: return "projective";
  }
  return "?";
}

inline double ball_margin(const CVector& z) { return 1.0 - z.norm(); }

inline double siegel_margin(const CVector& w) {
  return w(0).imag() - w.tail(w.size() - 1).squaredNorm();
}

/// Positive inside the domain, negative outside.
inline double domain_margin(Domain d, const CVector& p) {
  switch (d) {
    case Domain::Ball: return ball_margin(p);
    case Domain::Siegel: return siegel_margin(p);
    case Domain::Projective: return 1.0;
  }
  return 1.0;
}

/// Cayley transform B_N -> H^N: (i(1+z1)/(1-z1), i z'/(1-z1)).
inline CVector cayley(const CVector& z) {
  const cplx den = 1.0 - z(0);
  if (std::abs(den) < 1e-300) throw Error(ErrorKind::Pole, "Cayley transform evaluated at e1");
  CVector w(z.size());
  w(0) = kI * (1.0 + z(0)) / den;
  w.tail(z.size() - 1) = kI * z.tail(z.size() - 1) / den;
  return w;
}

/// Inverse Cayley transform H^N -> B_N: ((w1 - i)/(w1 + i), 2 w'/(w1 + i)).
inline CVector cayley_inverse(const CVector& w) {
  const cplx den = w(0) + kI;
  if (std::abs(den) < 1e-300) throw Error(ErrorKind::Pole, "inverse Cayley transform evaluated at -i e1");
  CVector z(w.size());
  z(0) = (w(0) - kI) / den;
  z.tail(w.size() - 1) = 2.0 * w.tail(w.size() - 1) / den;
  return z;
}

}  // namespace lfmsemi
