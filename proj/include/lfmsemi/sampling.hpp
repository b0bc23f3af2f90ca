#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "lfmsemi/domains.hpp"

namespace lfmsemi {

/// Deterministic point sampler. Ball points are spread over spherical shells
/// (radius_schedule, cycled); Siegel points are Cayley images of ball points.
struct SamplerCfg {
  std::uint64_t seed = 20240611;
  std::size_t count = 200;
  Domain domain = Domain::Ball;
  std::vector<double> radius_schedule = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95};
  unsigned threads = 1;
};

inline CVector random_unit_vector(std::mt19937_64& rng, Index dim) {
  std::normal_distribution<double> g(0.0, 1.0);
  CVector v(dim);
  do {
    for (Index i = 0; i < dim; ++i) v(i) = cplx(g(rng), g(rng));
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

inline std::vector<CVector> sample_sphere(std::uint64_t seed, std::size_t count, Index dim) {
  std::mt19937_64 rng(seed);
  std::vector<CVector> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_unit_vector(rng, dim));
  return out;
}

inline std::vector<CVector> sample_points(const SamplerCfg& cfg, Index dim) {
  if (dim < 1) throw Error(ErrorKind::Dimension, "sampling needs dimension >= 1");
  if (cfg.radius_schedule.empty()) throw Error(ErrorKind::Domain, "empty radius schedule");
  std::mt19937_64 rng(cfg.seed);
  std::vector<CVector> out;
  out.reserve(cfg.count);
  for (std::size_t i = 0; i < cfg.count; ++i) {
    const double r = cfg.radius_schedule[i % cfg.radius_schedule.size()];
    if (!(r >= 0.0 && r < 1.0)) throw Error(ErrorKind::Domain, "sampling radii must lie in [0, 1)");
    CVector z = r * random_unit_vector(rng, dim);
    if (cfg.domain == Domain::Siegel) z = cayley(z);
    out.push_back(std::move(z));
  }
  return out;
}

}  // namespace lfmsemi
