#pragma once

// Dense linear-algebra primitives shared by every module. Matrices are small
// (n <= ~64) so everything goes through Eigen's dense decompositions.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "skewfib/error.hpp"

namespace skewfib {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Complex = std::complex<double>;

/// Singularity thresholds. A matrix counts as singular when
/// sigma_min <= rel * sigma_max + abs.
struct Tolerance {
  double rel = 1e-8;
  double abs = 1e-12;

  bool singular(double smin, double smax) const { return smin <= rel * smax + abs; }
  double threshold(double smax) const { return rel * smax + abs; }
};

inline Vec singular_values(const Mat& m) {
  if (m.size() == 0) return Vec();
  return Eigen::JacobiSVD<Mat>(m).singularValues();
}

/// Smallest singular value. Wide matrices have a nontrivial kernel, so 0.
inline double sigma_min(const Mat& m) {
  if (m.cols() > m.rows()) return 0.0;
  Vec s = singular_values(m);
  return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

inline double sigma_max(const Mat& m) {
  Vec s = singular_values(m);
  return s.size() == 0 ? 0.0 : s(0);
}

/// Orthonormal basis of the column span with the same ordered orientation:
/// the change of basis from `frame` to the result is upper triangular with a
/// positive diagonal (Gram-Schmidt, computed through Householder QR).
inline Mat orthonormalize(const Mat& frame, const Tolerance& tol = {}) {
  const Vec s = singular_values(frame);
  require(frame.cols() >= 1 && frame.cols() <= frame.rows(), ErrorCode::rank_deficient,
          "frame has more columns than rows");
  require(!tol.singular(s(s.size() - 1), s(0)), ErrorCode::rank_deficient,
          "frame columns are linearly dependent");

  Eigen::HouseholderQR<Mat> qr(frame);
  Mat q = qr.householderQ() * Mat::Identity(frame.rows(), frame.cols());
  const Mat r = qr.matrixQR().topRows(frame.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < frame.cols(); ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

/// Orthonormal basis of the orthogonal complement of an orthonormal frame.
/// Deterministic for a given frame.
inline Mat orthogonal_complement(const Mat& frame) {
  const Eigen::Index n = frame.rows();
  const Eigen::Index k = frame.cols();
  if (k == 0) return Mat::Identity(n, n);
  Eigen::HouseholderQR<Mat> qr(frame);
  Mat full = qr.householderQ() * Mat::Identity(n, n);
  return full.rightCols(n - k);
}

namespace detail {
inline bool complex_less(const Complex& a, const Complex& b) {
  if (a.real() != b.real()) return a.real() < b.real();
  return a.imag() < b.imag();
}
}  // namespace detail

/// All eigenvalues with multiplicity, sorted by (real, imag).
inline std::vector<Complex> eigenvalues(const Mat& m) {
  require(m.rows() == m.cols() && m.rows() > 0, ErrorCode::invalid_input,
          "eigenvalues need a nonempty square matrix");
  Eigen::EigenSolver<Mat> solver(m, /*computeEigenvectors=*/false);
  require(solver.info() == Eigen::Success, ErrorCode::convergence_failure,
          "eigenvalue iteration did not converge");
  std::vector<Complex> out(solver.eigenvalues().begin(), solver.eigenvalues().end());
  std::sort(out.begin(), out.end(), detail::complex_less);
  return out;
}

/// Smallest |Im| over the spectrum; 0 means a real eigenvalue.
inline double min_abs_imag(const std::vector<Complex>& spectrum) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& z : spectrum) best = std::min(best, std::abs(z.imag()));
  return best;
}

inline double default_step(const Vec& y) { return 1e-5 * (1.0 + y.norm()); }

/// Central-difference Jacobian of f at y. h <= 0 selects 1e-5 (1 + |y|).
template <class F>
Mat jacobian(F&& f, const Vec& y, double h = 0.0) {
  if (h <= 0.0) h = default_step(y);
  const Vec f0 = f(y);
  Mat jac(f0.size(), y.size());
  Vec probe = y;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    probe(i) = y(i) + h;
    const Vec up = f(probe);
    probe(i) = y(i) - h;
    const Vec down = f(probe);
    probe(i) = y(i);
    jac.col(i) = (up - down) / (2.0 * h);
  }
  return jac;
}

/// Jacobian with one Richardson step on top of central differences.
template <class F>
Mat jacobian_richardson(F&& f, const Vec& y, double h = 0.0) {
  if (h <= 0.0) h = 1e-3 * (1.0 + y.norm());
  const Mat coarse = jacobian(f, y, h);
  const Mat fine = jacobian(f, y, 0.5 * h);
  return (4.0 * fine - coarse) / 3.0;
}

inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Standard complex structure on R^{2m}: m copies of [[0,-1],[1,0]].
inline Mat complex_structure(int m) {
  Mat j = Mat::Zero(2 * m, 2 * m);
  for (int b = 0; b < m; ++b) {
    j(2 * b, 2 * b + 1) = -1.0;
    j(2 * b + 1, 2 * b) = 1.0;
  }
  return j;
}

}  // namespace skewfib
