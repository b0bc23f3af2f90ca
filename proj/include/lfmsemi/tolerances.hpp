#pragma once

namespace lfmsemi {

/// Numerical cut-offs shared by every module. The defaults are the documented
/// profile; `strict()` tightens the verification tolerances only.
struct Tolerances {
  // matrix kernel
  double rank = 1e-10;            // pinv: relative to the largest singular value
  double unimodular = 1e-9;       // | |lambda| - 1 | below this counts as unimodular
  double negative_axis = 1e-12;   // |Im lambda| below this (Re < 0) is on the log branch cut
  double dissipative = 1e-10;     // max eigenvalue of the hermitian part
  double eigen_cluster = 1e-4;    // relative spread of a numerically repeated eigenvalue
  double eigen_one = 1e-7;        // |mu - 1| below this puts mu in the identity block

  // maps and classification
  double pole = 1e-14;
  double fixed_point = 1e-9;
  double parabolic_cut = 1e-6;    // |delta - 1| below this is parabolic
  double decoupling = 1e-6;       // unimodular rows of a Schur factor must vanish to this

  // embedding criteria
  double theta_margin = 1e-12;
  double certificate = 1e-10;
  double witness = 1e-10;
  double resonance = 1e-10;        // |sqrt(lambda) alpha - 1| below this is a translation block
  int branch_search = 3;
  long branch_budget = 20000;

  // verification
  double law = 1e-8;
  double self_map = 1e-9;
  double time_one = 1e-8;
  double generator = 1e-5;
  double fd_step = 1e-4;
  double conjugacy = 1e-8;

  static Tolerances defaults() { return {}; }

  static Tolerances strict() {
    Tolerances t;
    t.law = 1e-10;
    t.self_map = 1e-11;
    t.time_one = 1e-10;
    t.generator = 1e-6;
    t.fd_step = 5e-5;
    t.conjugacy = 1e-10;
    return t;
  }
};

}  // namespace lfmsemi
