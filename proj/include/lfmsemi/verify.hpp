#pragma once

#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "lfmsemi/embedding.hpp"

namespace lfmsemi {

/// pass <=> worst_margin >= -tolerance. Error-type checks report minus the error.
struct CheckReport {
  std::string check_id;
  bool pass = true;
  double worst_margin = 0.0;
  double tolerance = 0.0;
  std::optional<CVector> worst_point;
  std::size_t samples_used = 0;
};

inline const std::vector<double>& default_t_grid() {
  static const std::vector<double> g = {0.1, 0.25, 0.5, 1.0, 2.0, 5.0};
  return g;
}

/// Grid for the per-t self-map conditions; small t first since that is where
/// sufficient conditions are tight.
inline const std::vector<double>& condition_t_grid() {
  static const std::vector<double> g = {1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0};
  return g;
}

namespace detail {

/// margins[i] = fn(i), computed on up to `threads` workers. The reduction is
/// sequential with ties broken by the lowest index, so the result does not
/// depend on the thread count.
inline std::vector<double> parallel_margins(std::size_t count, unsigned threads,
                                            const std::function<double(std::size_t)>& fn) {
  std::vector<double> out(count, 0.0);
  threads = std::max(1u, std::min<unsigned>(threads, unsigned(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::exception_ptr> errs(threads);
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += threads) out[i] = fn(i);
      } catch (...) {
        errs[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
  return out;
}

inline CheckReport reduce(std::string id, const std::vector<double>& margins, const std::vector<CVector>& points,
                          double tol) {
  CheckReport r;
  r.check_id = std::move(id);
  r.tolerance = tol;
  r.samples_used = margins.size();
  r.worst_margin = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t i = 0; i < margins.size(); ++i) {
    // NaN counts as the worst possible margin
    const double m = std::isnan(margins[i]) ? -std::numeric_limits<double>::infinity() : margins[i];
    if (m < r.worst_margin) {
      r.worst_margin = m;
      arg = i;
    }
  }
  if (!margins.empty() && !points.empty()) r.worst_point = points[arg % points.size()];
  r.pass = r.worst_margin >= -tol;
  return r;
}

inline double rel_err(const CVector& x, const CVector& y) { return (x - y).norm() / std::max(1.0, y.norm()); }

inline SamplerCfg with_domain(SamplerCfg cfg, Domain d) {
  cfg.domain = d == Domain::Projective ? Domain::Ball : d;
  return cfg;
}

}  // namespace detail

// ------------------------------------------------------------ maps

/// Worst 1 - |phi(z)| (ball) or Im w1 - |w'|^2 (Siegel) over samples of cfg.domain.
inline CheckReport check_self_map(const ProjectiveMap& map, const SamplerCfg& cfg, double tol = 1e-9) {
  if (!domains_compatible(map.source(), cfg.domain)) {
    throw Error(ErrorKind::Domain, "sampler domain does not match the map");
  }
  const auto pts = sample_points(cfg, map.dim());
  const Domain out = cfg.domain;
  const auto m = detail::parallel_margins(pts.size(), cfg.threads, [&](std::size_t i) {
    try {
      return domain_margin(out, map.apply(pts[i]));
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  });
  return detail::reduce("self_map", m, pts, tol);
}

inline CheckReport check_self_map(const BallMap& f, SamplerCfg cfg, double tol = 1e-9) {
  return check_self_map(f.projective(), detail::with_domain(std::move(cfg), Domain::Ball), tol);
}

/// max |s(f(z)) - g(s(z))| / max(1, |g(s(z))|) over samples in the domain of f.
inline CheckReport check_conjugacy(const ProjectiveMap& f, const ProjectiveMap& g, const ProjectiveMap& s,
                                   const SamplerCfg& cfg, double tol = 1e-8) {
  if (f.dim() != g.dim() || f.dim() != s.dim()) throw Error(ErrorKind::Dimension, "maps have different dimensions");
  if (!domains_compatible(s.source(), f.target()) || !domains_compatible(s.target(), g.source()) ||
      !domains_compatible(f.source(), cfg.domain)) {
    throw Error(ErrorKind::Domain, "conjugator does not connect the domains of f and g");
  }
  const auto pts = sample_points(cfg, f.dim());
  const auto m = detail::parallel_margins(pts.size(), cfg.threads, [&](std::size_t i) {
    try {
      return -detail::rel_err(s.apply(f.apply(pts[i])), g.apply(s.apply(pts[i])));
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  });
  return detail::reduce("conjugacy", m, pts, tol);
}

// ------------------------------------------------------------ families

/// max |at(0)(z) - z| relative, family coordinates.
inline CheckReport check_identity(const SemigroupFamily& sg, SamplerCfg cfg, double tol = 1e-10) {
  cfg = detail::with_domain(std::move(cfg), sg.domain());
  const auto pts = sample_points(cfg, sg.dim());
  const ProjectiveMap f0 = sg.at(0.0);
  const auto m = detail::parallel_margins(pts.size(), cfg.threads,
                                          [&](std::size_t i) { return -detail::rel_err(f0.apply(pts[i]), pts[i]); });
  return detail::reduce("identity_at_zero", m, pts, tol);
}

/// Worst domain margin of at(t)(z) over t in the grid, family coordinates.
inline CheckReport check_family_self_map(const SemigroupFamily& sg, const std::vector<double>& t_grid, SamplerCfg cfg,
                                         double tol = 1e-9) {
  cfg = detail::with_domain(std::move(cfg), sg.domain());
  const auto pts = sample_points(cfg, sg.dim());
  std::vector<ProjectiveMap> maps;
  for (double t : t_grid) maps.push_back(sg.at(t));
  const std::size_t n = pts.size();
  const auto m = detail::parallel_margins(n * maps.size(), cfg.threads, [&](std::size_t k) {
    try {
      return domain_margin(cfg.domain, maps[k / n].apply(pts[k % n]));
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  });
  return detail::reduce("family_self_map", m, pts, tol);
}

/// max over (s, t, z) of |at(s+t)(z) - at(s)(at(t)(z))| relative to max(1, |at(s+t)(z)|).
/// Any type with dim(), domain() and at(t) -> ProjectiveMap is accepted.
template <class Family = SemigroupFamily>
inline CheckReport check_semigroup_law(const Family& sg, const std::vector<double>& t_grid, SamplerCfg cfg,
                                       double tol = 1e-8) {
  cfg = detail::with_domain(std::move(cfg), sg.domain());
  const auto pts = sample_points(cfg, sg.dim());
  struct Pair {
    ProjectiveMap sum, s, t;
  };
  std::vector<Pair> pairs;
  for (double s : t_grid)
    for (double t : t_grid) pairs.push_back({sg.at(s + t), sg.at(s), sg.at(t)});
  const std::size_t n = pts.size();
  const auto m = detail::parallel_margins(n * pairs.size(), cfg.threads, [&](std::size_t k) {
    const Pair& p = pairs[k / n];
    const CVector& z = pts[k % n];
    return -detail::rel_err(p.s.apply(p.t.apply(z)), p.sum.apply(z));
  });
  return detail::reduce("semigroup_law", m, pts, tol);
}

/// max |conj^{-1} at(1) conj (z) - target(z)| over samples in the target's domain.
inline CheckReport check_time_one(const SemigroupFamily& sg, const ProjectiveMap& target, SamplerCfg cfg,
                                  double tol = 1e-8) {
  if (target.dim() != sg.dim()) throw Error(ErrorKind::Dimension, "target has a different dimension");
  cfg = detail::with_domain(std::move(cfg), target.source());
  const auto pts = sample_points(cfg, sg.dim());
  const ProjectiveMap f1 = sg.at_input(1.0);
  const auto m = detail::parallel_margins(pts.size(), cfg.threads, [&](std::size_t i) {
    try {
      return -detail::rel_err(f1.apply(pts[i]), target.apply(pts[i]));
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  });
  return detail::reduce("time_one", m, pts, tol);
}

/// Central difference (phi_{t+h} - phi_{t-h}) / 2h against G(phi_t) at t in {0.5, 1, 2},
/// relative to max(1, |G|).
inline CheckReport check_generator(const SemigroupFamily& sg, SamplerCfg cfg, double h = 1e-4, double tol = 1e-5) {
  cfg = detail::with_domain(std::move(cfg), sg.domain());
  const auto pts = sample_points(cfg, sg.dim());
  const std::vector<double> ts = {0.5, 1.0, 2.0};
  struct Triple {
    ProjectiveMap lo, mid, hi;
  };
  std::vector<Triple> maps;
  for (double t : ts) maps.push_back({sg.at(t - h), sg.at(t), sg.at(t + h)});
  const std::size_t n = pts.size();
  const auto m = detail::parallel_margins(n * maps.size(), cfg.threads, [&](std::size_t k) {
    const Triple& tr = maps[k / n];
    const CVector& z = pts[k % n];
    const CVector fd = (tr.hi.apply(z) - tr.lo.apply(z)) / (2.0 * h);
    return -detail::rel_err(fd, sg.generator(tr.mid.apply(z)));
  });
  return detail::reduce("generator", m, pts, tol);
}

/// Residual ratio r(h) / r(h/2) of the generator check; about 4 for a
/// second-order difference while truncation dominates rounding.
struct GeneratorRefinement {
  double residual_h = 0.0;
  double residual_half = 0.0;
  double ratio = 0.0;
  bool truncation_dominated = false;
};

inline GeneratorRefinement generator_refinement(const SemigroupFamily& sg, const SamplerCfg& cfg, double h = 1e-4) {
  GeneratorRefinement g;
  g.residual_h = -check_generator(sg, cfg, h).worst_margin;
  g.residual_half = -check_generator(sg, cfg, h / 2.0).worst_margin;
  g.ratio = g.residual_half > 0.0 ? g.residual_h / g.residual_half : std::numeric_limits<double>::infinity();
  // rounding in the difference quotient is about eps |phi| / h, near 1e-11 at h = 1e-4
  g.truncation_dominated = g.residual_h > 1e-10;
  return g;
}

/// Self-map conditions Q_t >= 0, Im b_t - |c_t|^2 >= <Q_t^+ x_t, x_t>, Q_t Q_t^+ x_t = x_t
/// of every Siegel family member on the grid. Each condition has its own scaled
/// tolerance, so `pass` is the conjunction and worst_margin the smallest raw
/// margin of the two inequalities; worst_point holds (t).
inline CheckReport check_siegel_conditions(const SemigroupFamily& sg, const std::vector<double>& t_grid) {
  if (sg.domain() != Domain::Siegel) throw Error(ErrorKind::Domain, "per-t conditions need a Siegel family");
  CheckReport r;
  r.check_id = "siegel_conditions";
  r.tolerance = 1e-10;
  r.worst_margin = std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    const SiegelMap g = SiegelMap::from_homogeneous(sg.homogeneous_at(t));
    for (const auto& c : siegel_conditions(g)) {
      ++r.samples_used;
      if (!c.pass) r.pass = false;
      const bool inequality = c.condition == "Q.psd" || c.condition == "imb.bound";
      if ((inequality || !c.pass) && c.margin < r.worst_margin) {
        r.worst_margin = c.margin;
        r.worst_point = CVector::Constant(1, cplx(t, 0.0));
      }
    }
  }
  return r;
}

/// The checks every embeddable family must pass.
struct FamilyChecks {
  std::vector<CheckReport> reports;
  std::optional<GeneratorRefinement> refinement;
  bool pass() const {
    return std::all_of(reports.begin(), reports.end(), [](const CheckReport& r) { return r.pass; });
  }
};

inline FamilyChecks verify_family(const SemigroupFamily& sg, const ProjectiveMap& target, const SamplerCfg& cfg,
                                  const Tolerances& tol = {}) {
  FamilyChecks out;
  out.reports.push_back(check_identity(sg, cfg));
  out.reports.push_back(check_semigroup_law(sg, default_t_grid(), cfg, tol.law));
  out.reports.push_back(check_family_self_map(sg, default_t_grid(), cfg, tol.self_map));
  out.reports.push_back(check_time_one(sg, target, cfg, tol.time_one));
  out.reports.push_back(check_generator(sg, cfg, tol.fd_step, tol.generator));
  return out;
}

}  // namespace lfmsemi
