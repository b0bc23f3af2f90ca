#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "lfmsemi/error.hpp"
#include "lfmsemi/tolerances.hpp"

namespace lfmsemi {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = std::numbers::pi;

/// <x, y> = sum_i x_i conj(y_i): linear in the first slot.
inline cplx inner(const CVector& x, const CVector& y) { return y.dot(x); }

inline bool all_finite(const CMatrix& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
  return true;
}

inline void require_finite(const CMatrix& m, const char* what) {
  if (!all_finite(m)) throw Error(ErrorKind::Domain, std::string(what) + " has non-finite entries");
}

inline void require_square(const CMatrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << " must be square, got " << m.rows() << "x" << m.cols();
    throw Error(ErrorKind::Dimension, os.str());
  }
}

inline std::string format_cplx(cplx z) {
  std::ostringstream os;
  os.precision(12);
  os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return os.str();
}

// ---------------------------------------------------------------- norms, spectra

inline double spectral_norm(const CMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) throw Error(ErrorKind::Dimension, "spectral_norm of an empty matrix");
  require_finite(a, "spectral_norm input");
  Eigen::JacobiSVD<CMatrix> svd(a);
  return svd.singularValues()(0);
}

inline CVector eigenvalues(const CMatrix& a) {
  require_square(a, "eigenvalues input");
  if (a.rows() == 0) return CVector(0);
  Eigen::ComplexSchur<CMatrix> cs(a, false);
  if (cs.info() != Eigen::Success) throw Error(ErrorKind::Numeric, "Schur iteration did not converge");
  return cs.matrixT().diagonal();
}

inline double spectral_radius(const CMatrix& a) {
  require_square(a, "spectral_radius input");
  if (a.rows() == 0) return 0.0;
  return eigenvalues(a).cwiseAbs().maxCoeff();
}

/// Smallest eigenvalue of the hermitian part (M + M^H)/2.
inline double hermitian_min_eigenvalue(const CMatrix& m) {
  require_square(m, "hermitian_min_eigenvalue input");
  if (m.rows() == 0) return 0.0;
  CMatrix h = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

// ---------------------------------------------------------------- Schur

/// A = unitary^H * upper_triangular * unitary.
struct SchurForm {
  CMatrix unitary;
  CMatrix upper_triangular;

  CMatrix reconstruct() const { return unitary.adjoint() * upper_triangular * unitary; }
};

namespace detail {

// Exchanges the diagonal entries k, k+1 of the upper triangular t by a plane
// rotation; z accumulates the similarity (A = z t z^H).
inline void swap_adjacent(CMatrix& t, CMatrix& z, Index k) {
  const cplx a = t(k, k);
  const cplx b = t(k + 1, k + 1);
  const cplx x = t(k, k + 1);
  const double r = std::hypot(std::abs(x), std::abs(b - a));
  if (r == 0.0) return;
  const cplx c = x / r;
  const cplx s = (b - a) / r;
  Eigen::Matrix2cd g;
  g << c, -std::conj(s), s, std::conj(c);
  t.middleCols(k, 2) = (t.middleCols(k, 2) * g).eval();
  t.middleRows(k, 2) = (g.adjoint() * t.middleRows(k, 2)).eval();
  z.middleCols(k, 2) = (z.middleCols(k, 2) * g).eval();
  t(k + 1, k) = 0.0;
  t(k, k) = b;
  t(k + 1, k + 1) = a;
}

// Stable bubble sort of the Schur diagonal by an integer key.
inline void sort_schur(CMatrix& t, CMatrix& z, const std::function<int(Index, cplx)>& key) {
  const Index n = t.rows();
  std::vector<int> keys(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) keys[static_cast<std::size_t>(i)] = key(i, t(i, i));
  for (Index pass = 0; pass < n; ++pass) {
    bool moved = false;
    for (Index k = 0; k + 1 < n; ++k) {
      auto& lo = keys[static_cast<std::size_t>(k)];
      auto& hi = keys[static_cast<std::size_t>(k + 1)];
      if (lo > hi) {
        swap_adjacent(t, z, k);
        std::swap(lo, hi);
        moved = true;
      }
    }
    if (!moved) break;
  }
  for (Index j = 0; j < n; ++j)
    for (Index i = j + 1; i < n; ++i) t(i, j) = 0.0;
}

// Groups eigenvalues whose relative distance is below tol (transitively).
inline std::vector<int> cluster_labels(const CVector& ev, double tol) {
  const auto n = static_cast<std::size_t>(ev.size());
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int i) { return parent[i] == i ? i : parent[i] = find(parent[i]); };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double scale = std::max({1.0, std::abs(ev(i)), std::abs(ev(j))});
      if (std::abs(ev(i) - ev(j)) <= tol * scale) parent[find(int(j))] = find(int(i));
    }
  std::vector<int> label(n, -1), root_label(n, -1);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    int r = find(int(i));
    if (root_label[r] < 0) root_label[r] = next++;
    label[i] = root_label[r];
  }
  return label;
}

}  // namespace detail

inline SchurForm schur(const CMatrix& a) {
  require_square(a, "schur input");
  require_finite(a, "schur input");
  if (a.rows() == 0) return {CMatrix(0, 0), CMatrix(0, 0)};
  Eigen::ComplexSchur<CMatrix> cs(a);
  if (cs.info() != Eigen::Success) {
    throw Error(ErrorKind::Numeric, "Schur iteration did not converge");
  }
  CMatrix t = cs.matrixT();
  for (Index j = 0; j < t.cols(); ++j)
    for (Index i = j + 1; i < t.rows(); ++i) t(i, j) = 0.0;
  return {cs.matrixU().adjoint(), t};
}

/// Reorders a Schur form so that diagonal entries appear in ascending key
/// order (stable among equal keys).
inline void reorder_schur(SchurForm& s, const std::function<int(cplx)>& key) {
  CMatrix z = s.unitary.adjoint();
  detail::sort_schur(s.upper_triangular, z, [&](Index, cplx v) { return key(v); });
  s.unitary = z.adjoint();
}

/// Largest off-diagonal entry in the rows (to the right of the diagonal) of
/// unimodular diagonal entries. For a contraction these rows vanish.
inline double unimodular_decoupling_margin(const SchurForm& s, double unimodular_tol = 1e-9) {
  const CMatrix& t = s.upper_triangular;
  double worst = 0.0;
  for (Index k = 0; k < t.rows(); ++k) {
    if (std::abs(std::abs(t(k, k)) - 1.0) > unimodular_tol) continue;
    for (Index j = k + 1; j < t.cols(); ++j) worst = std::max(worst, std::abs(t(k, j)));
  }
  return worst;
}

// ---------------------------------------------------------------- SVD, pinv

/// A = left_unitary * diag(singular_values) * right_unitary (full unitaries,
/// only the leading min(m, n) rows/columns meet the diagonal).
struct SvdForm {
  CMatrix left_unitary;
  RVector singular_values;
  CMatrix right_unitary;

  CMatrix reconstruct() const {
    const Index k = singular_values.size();
    return left_unitary.leftCols(k) * singular_values.cast<cplx>().asDiagonal() * right_unitary.topRows(k);
  }
};

inline SvdForm svd(const CMatrix& a) {
  require_finite(a, "svd input");
  if (a.rows() == 0 || a.cols() == 0) {
    return {CMatrix::Identity(a.rows(), a.rows()), RVector(0), CMatrix::Identity(a.cols(), a.cols())};
  }
  Eigen::JacobiSVD<CMatrix> s(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return {s.matrixU(), s.singularValues(), s.matrixV().adjoint()};
}

/// Moore-Penrose pseudoinverse. Singular values below
/// max(rank_tol * sigma_max, abs_tol) are treated as zero.
inline CMatrix pinv(const CMatrix& a, double rank_tol = 1e-10, double abs_tol = 0.0) {
  if (!(rank_tol > 0.0)) throw Error(ErrorKind::Domain, "pinv rank tolerance must be positive");
  const SvdForm s = svd(a);
  CMatrix out = CMatrix::Zero(a.cols(), a.rows());
  if (s.singular_values.size() == 0) return out;
  const double cut = std::max(rank_tol * s.singular_values(0), abs_tol);
  for (Index k = 0; k < s.singular_values.size(); ++k) {
    const double sigma = s.singular_values(k);
    if (sigma <= cut || sigma == 0.0) break;
    out += s.right_unitary.row(k).adjoint() * (1.0 / sigma) * s.left_unitary.col(k).adjoint();
  }
  return out;
}

// ---------------------------------------------------------------- exp, log

inline CMatrix mat_exp(const CMatrix& m) {
  require_square(m, "mat_exp input");
  require_finite(m, "mat_exp input");
  if (m.rows() == 0) return CMatrix(0, 0);
  CMatrix out = m.exp();
  if (!all_finite(out)) throw Error(ErrorKind::Numeric, "matrix exponential overflowed");
  return out;
}

/// Argument in (-pi, pi]; values within tol of the negative real axis get +pi.
inline double branch_arg(cplx z, double tol = 1e-12) {
  if (z.real() < 0.0 && std::abs(z.imag()) <= tol) return kPi;
  return std::arg(z);
}

/// Logarithms of an invertible matrix that are primary matrix functions.
/// Eigenvalues are grouped into clusters; each cluster c may carry its own
/// branch shift k_c, giving log_k(A) = base + 2 pi i sum_c k_c P_c where P_c
/// is the spectral projector of the cluster.
class MatrixLogBranches {
 public:
  explicit MatrixLogBranches(const CMatrix& a, double cluster_tol = 1e-4, double negative_axis_tol = 1e-12) {
    require_square(a, "matrix logarithm input");
    require_finite(a, "matrix logarithm input");
    const Index n = a.rows();
    base_ = CMatrix::Zero(n, n);
    if (n == 0) return;

    Eigen::ComplexSchur<CMatrix> cs(a);
    if (cs.info() != Eigen::Success) throw Error(ErrorKind::Numeric, "Schur iteration did not converge");
    CMatrix t = cs.matrixT();
    CMatrix z = cs.matrixU();
    const CVector ev = t.diagonal();

    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (Index i = 0; i < n; ++i) {
      if (std::abs(ev(i)) <= 1e-14 * scale) {
        throw Error(ErrorKind::Domain, "singular matrix has no logarithm (eigenvalue " + format_cplx(ev(i)) + ")");
      }
    }

    const std::vector<int> labels = detail::cluster_labels(ev, cluster_tol);
    auto label_of = [&](cplx v) {
      for (Index i = 0; i < n; ++i)
        if (ev(i) == v) return labels[static_cast<std::size_t>(i)];
      return 0;
    };
    detail::sort_schur(t, z, [&](Index, cplx v) { return label_of(v); });

    // block boundaries
    std::vector<Index> start;
    for (Index i = 0; i < n; ++i)
      if (i == 0 || label_of(t(i, i)) != label_of(t(i - 1, i - 1))) start.push_back(i);
    start.push_back(n);
    const std::size_t m = start.size() - 1;

    // block diagonalisation by successive triangular Sylvester solves
    CMatrix x = CMatrix::Identity(n, n);
    for (std::size_t c = 0; c + 1 < m; ++c) {
      const Index s0 = start[c], e0 = start[c + 1], n1 = e0 - s0, n2 = n - e0;
      const CMatrix t11 = t.block(s0, s0, n1, n1);
      const CMatrix t22 = t.block(e0, e0, n2, n2);
      const CMatrix rhs = -t.block(s0, e0, n1, n2);
      CMatrix y(n1, n2);
      for (Index j = 0; j < n2; ++j) {
        CVector col = rhs.col(j);
        for (Index k = 0; k < j; ++k) col += y.col(k) * t22(k, j);
        CMatrix shifted = t11 - t22(j, j) * CMatrix::Identity(n1, n1);
        y.col(j) = shifted.triangularView<Eigen::Upper>().solve(col);
      }
      t.block(s0, e0, n1, n2).setZero();
      x.block(0, e0, n, n2) += x.block(0, s0, n, n1) * y;
    }
    const CMatrix xinv = x.triangularView<Eigen::UnitUpper>().solve(CMatrix::Identity(n, n));

    CMatrix logt = CMatrix::Zero(n, n);
    for (std::size_t c = 0; c < m; ++c) {
      const Index s0 = start[c], n1 = start[c + 1] - s0;
      const CMatrix block = t.block(s0, s0, n1, n1);
      const cplx rep = block.diagonal().mean();
      const bool on_axis = rep.real() < 0.0 && std::abs(rep.imag()) <= negative_axis_tol;
      const cplx log_rep(std::log(std::abs(rep)), branch_arg(rep, negative_axis_tol));
      CMatrix lb;
      if (n1 == 1) {
        lb = CMatrix::Constant(1, 1, log_rep + std::log(block(0, 0) / rep));
      } else {
        const CMatrix rel = block / rep;
        lb = rel.log();
        lb.diagonal().array() += log_rep;
      }
      logt.block(s0, s0, n1, n1) = lb;
      reps_.push_back(rep);
      sizes_.push_back(n1);
      on_axis_.push_back(on_axis);
      projectors_.push_back(z * x.middleCols(s0, n1) * xinv.middleRows(s0, n1) * z.adjoint());
    }
    base_ = z * x * logt * xinv * z.adjoint();
    if (!all_finite(base_)) throw Error(ErrorKind::Numeric, "matrix logarithm produced non-finite entries");
  }

  std::size_t cluster_count() const { return reps_.size(); }
  const std::vector<cplx>& cluster_eigenvalues() const { return reps_; }
  const std::vector<Index>& cluster_sizes() const { return sizes_; }
  bool cluster_on_negative_axis(std::size_t c) const { return on_axis_[c]; }
  const CMatrix& projector(std::size_t c) const { return projectors_[c]; }

  /// Spectrum imaginary parts in (-pi, pi] (up to the cluster spread).
  const CMatrix& base() const { return base_; }

  CMatrix with_shifts(std::span<const int> shifts) const {
    if (shifts.size() != reps_.size()) throw Error(ErrorKind::Dimension, "one branch shift per eigenvalue cluster");
    CMatrix out = base_;
    for (std::size_t c = 0; c < shifts.size(); ++c)
      if (shifts[c] != 0) out += (2.0 * kPi * shifts[c]) * kI * projectors_[c];
    return out;
  }

 private:
  CMatrix base_;
  std::vector<cplx> reps_;
  std::vector<Index> sizes_;
  std::vector<bool> on_axis_;
  std::vector<CMatrix> projectors_;
};

/// Principal logarithm: spectrum imaginary parts in (-pi, pi). Eigenvalues on
/// (or within tolerance of) the negative real axis are rejected.
inline CMatrix mat_log_principal(const CMatrix& a, double negative_axis_tol = 1e-12) {
  MatrixLogBranches logs(a, 1e-4, negative_axis_tol);
  for (std::size_t c = 0; c < logs.cluster_count(); ++c) {
    if (logs.cluster_on_negative_axis(c)) {
      throw Error(ErrorKind::Branch,
                  "eigenvalue " + format_cplx(logs.cluster_eigenvalues()[c]) + " lies on the negative real axis");
    }
  }
  return logs.base();
}

// ---------------------------------------------------------------- dissipativity

struct Dissipativity {
  bool dissipative = false;
  double max_hermitian_eigenvalue = 0.0;
  CVector witness;  // unit vector with Re<Mv, v> > tol when not dissipative
};

/// Re<Mv, v> <= 0 for all v, decided on the hermitian part.
inline Dissipativity is_dissipative(const CMatrix& m, double tol = 1e-10) {
  require_square(m, "is_dissipative input");
  Dissipativity out;
  if (m.rows() == 0) {
    out.dissipative = true;
    return out;
  }
  CMatrix h = (m + m.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  const Index n = m.rows();
  out.max_hermitian_eigenvalue = es.eigenvalues()(n - 1);
  out.dissipative = out.max_hermitian_eigenvalue <= tol;
  if (!out.dissipative) out.witness = es.eigenvectors().col(n - 1);
  return out;
}

// ---------------------------------------------------------------- helpers

/// A unitary whose first column is v/|v| (identity for v = 0).
inline CMatrix unitary_with_first_column(const CVector& v) {
  const Index n = v.size();
  CMatrix out = CMatrix::Identity(n, n);
  const double nv = v.norm();
  if (n == 0 || nv == 0.0) return out;
  const CVector w = v / nv;
  const cplx phase = std::abs(w(0)) > 0.0 ? w(0) / std::abs(w(0)) : cplx(1.0);
  CVector u = -w;
  u(0) += phase;
  const double nu = u.squaredNorm();
  if (nu > 1e-30) out -= (2.0 / nu) * u * u.adjoint();
  out.col(0) *= phase;
  return out;
}

inline CMatrix block_diag(const CMatrix& a, const CMatrix& b) {
  CMatrix out = CMatrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

inline bool is_diagonal(const CMatrix& a, double tol) {
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < a.rows(); ++i)
      if (i != j && std::abs(a(i, j)) > tol) return false;
  return true;
}

inline bool is_normal(const CMatrix& a, double tol) {
  if (a.rows() == 0) return true;
  return (a * a.adjoint() - a.adjoint() * a).norm() <= tol * std::max(1.0, a.squaredNorm());
}

}  // namespace lfmsemi
