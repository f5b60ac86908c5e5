#pragma once

// Contact tests for line fibrations of R^{2m+1} (k = 1). Points of R^{2m+1}
// are written (y_1..y_{2m}, y_{2m+1}) here, chart plane first, matching the
// 1-form alpha = (B_1 dy_1 + ... + B_{2m} dy_{2m} + dy_{2m+1}) / (|B|^2 + 1).

#include <cmath>
#include <limits>
#include <vector>

#include "skewfib/chart.hpp"
#include "skewfib/error.hpp"
#include "skewfib/fibration.hpp"
#include "skewfib/numeric.hpp"

namespace skewfib {

namespace detail {
inline void require_line_chart(const Chart& c) {
  require(c.k() == 1, ErrorCode::invalid_input, "contact tests need a line fibration (k = 1)");
  require(c.q() % 2 == 0, ErrorCode::invalid_input, "contact tests need n = 2m + 1");
}
}  // namespace detail

/// Coefficients of alpha at y in E.
inline Vec alpha_coefficients(const Chart& c, const Vec& y) {
  detail::require_line_chart(c);
  const Vec b = c.B(y).col(0);
  Vec out(c.q() + 1);
  out << b, 1.0;
  return out / (b.squaredNorm() + 1.0);
}

/// alpha at an arbitrary point p = (z, t): the fiber direction (B(y), 1) of
/// the fiber through p is constant along the fiber, so alpha is too.
inline Vec alpha_at(const Chart& c, const Vec& p, const Tolerance& tol = {}) {
  detail::require_line_chart(c);
  require(p.size() == c.n(), ErrorCode::dimension_mismatch, "point has the wrong dimension");
  const Vec y = fiber_solve(c, chart_point(p.tail(1), p.head(c.q())), tol);
  return alpha_coefficients(c, y);
}

struct ContactReport {
  Vec point;
  double det_margin = 0.0;
  bool is_contact = false;
  Mat dalpha;
  /// For linear charts at 0: max entrywise relative gap between the
  /// restriction of d(alpha) to R^{2m} and M^T - M. NaN otherwise.
  double crosscheck = std::numeric_limits<double>::quiet_NaN();
};

/// d(alpha) by Richardson central differences, restricted to ker alpha.
/// det_margin = |det W| / ||W||_2^{2m} for W the restriction; it lies in
/// [0, 1] and is 1 for a multiple of a complex structure.
inline ContactReport contact_check(const Chart& c, const Vec& y, double threshold = 1e-8,
                                   const Tolerance& tol = {}) {
  detail::require_line_chart(c);
  require(y.size() == c.q(), ErrorCode::dimension_mismatch, "point of E has the wrong dimension");
  const int dim = c.n();
  Vec p = Vec::Zero(dim);
  p.head(c.q()) = y;

  ContactReport out;
  out.point = y;
  const Mat jac = jacobian_richardson([&](const Vec& x) -> Vec { return alpha_at(c, x, tol); }, p);
  out.dalpha = jac.transpose() - jac;  // (d alpha)_{ij} = d_i alpha_j - d_j alpha_i

  const Vec a = alpha_coefficients(c, y);
  const Mat kernel = orthogonal_complement(a.normalized());
  const Mat w = kernel.transpose() * out.dalpha * kernel;
  const double norm = sigma_max(w);
  const double m2 = static_cast<double>(w.rows());
  out.det_margin = norm > 0 ? std::abs(w.determinant()) / std::pow(norm, m2) : 0.0;
  out.is_contact = out.det_margin > threshold;

  if (c.is_linear_or_affine() && y.norm() == 0.0 && c.offset().norm() == 0.0) {
    const Mat& m = c.linear_part()[0];
    const Mat expected = m.transpose() - m;
    const Mat got = out.dalpha.topLeftCorner(c.q(), c.q());
    const double scale = std::max(1.0, expected.cwiseAbs().maxCoeff());
    out.crosscheck = (got - expected).cwiseAbs().maxCoeff() / scale;
  }
  return out;
}

}  // namespace skewfib
