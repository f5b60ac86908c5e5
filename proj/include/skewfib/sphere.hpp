#pragma once

// Central projection between the upper hemisphere of S^n and R^n, completion
// of chart fibrations to great sphere fibrations, and great circle fibrations
// of S^{2m+1} from maps that are invariant on planes.
//
// The assembly functions use the layout (z, z~, h) of R^{2m+2}: z in the
// chart plane R^{2m}, z~ the fiber coordinate, h the projective coordinate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "skewfib/bilinear.hpp"
#include "skewfib/chart.hpp"
#include "skewfib/dims.hpp"
#include "skewfib/error.hpp"
#include "skewfib/grassmann.hpp"
#include "skewfib/numeric.hpp"
#include "skewfib/report.hpp"
#include "skewfib/sampling.hpp"

namespace skewfib {

class SpherePoint {
 public:
  explicit SpherePoint(Vec coords) : coords_(std::move(coords)) {
    require(coords_.size() >= 2, ErrorCode::invalid_input, "sphere point needs n >= 1");
    require(std::abs(coords_.norm() - 1.0) <= 1e-12, ErrorCode::invalid_input, "sphere point is not a unit vector");
  }

  static SpherePoint normalized(const Vec& v) {
    require(v.norm() > 0, ErrorCode::invalid_input, "cannot normalize the zero vector");
    return SpherePoint(v.normalized());
  }

  const Vec& coords() const { return coords_; }
  int ambient() const { return static_cast<int>(coords_.size()) - 1; }

 private:
  Vec coords_;
};

inline constexpr double kEquatorThreshold = 1e-14;

/// (x_1..x_n) / x_{n+1} for a point of the open upper hemisphere.
inline Vec central_project(const SpherePoint& p) {
  const Vec& c = p.coords();
  const double h = c(c.size() - 1);
  require(std::abs(h) > kEquatorThreshold, ErrorCode::equator_point, "point lies on the equator");
  require(h > 0, ErrorCode::invalid_input, "point lies in the lower hemisphere");
  return c.head(c.size() - 1) / h;
}

inline SpherePoint inverse_project(const Vec& x) {
  Vec lifted(x.size() + 1);
  lifted << x, 1.0;
  return SpherePoint(lifted / lifted.norm());
}

/// S^n meets the linearization of P in a great k-sphere.
inline GreatSphere great_sphere_of(const AffinePlane& p) { return {alpha_embed(p).frame()}; }

/// For n = 2k+1: the chart completes to a great k-sphere fibration of S^n iff
/// y -> B(y) t is onto for every t != 0. Linear parts with an orthogonal
/// design (or k = 1) are decided exactly; anything else is sampled.
inline VerificationReport completion_check(const Chart& c, const SampleStream& stream = SampleStream(0x5eed),
                                           std::uint64_t count = 1000, const Tolerance& tol = {}) {
  require(c.n() == 2 * c.k() + 1, ErrorCode::dimension_mismatch,
          "completion check needs n = 2k + 1 (n = " + std::to_string(c.n()) + ", k = " + std::to_string(c.k()) + ")");
  VerificationReport report;
  report.check = "completion";
  report.sampling = {stream.seed(), count, 1.0, stream.mode()};

  if (!c.is_linear_or_affine()) {
    // Surjectivity of a nonlinear map is only probed through its differential.
    report.margin = std::numeric_limits<double>::infinity();
    for (std::uint64_t i = 0; i < count; ++i) {
      const Vec y = stream.ball_at(i, c.q(), 10.0);
      const Vec t = stream.unit_at(i, c.k());
      const std::vector<Mat> d = c.derivative(y);
      Mat m = Mat::Zero(c.q(), c.q());
      for (int j = 0; j < c.k(); ++j) m += t(j) * d[j];
      const Vec s = singular_values(m);
      report.margin = std::min(report.margin, s(s.size() - 1));
      if (report.witnesses.empty() && tol.singular(s(s.size() - 1), s(0)))
        report.fail_with({"differential of y -> B(y)t is singular", {y, t}, s(s.size() - 1)});
    }
    if (!report.failed()) {
      report.verdict = Verdict::evidence_only;
      report.notes.push_back("smooth chart: sampled evidence, not a certificate");
    }
    return report;
  }

  const std::vector<Mat>& lin = c.linear_part();
  if (c.k() == 1) {
    const Vec s = singular_values(lin[0]);
    report.exact = true;
    report.margin = s(s.size() - 1);
    if (tol.singular(report.margin, s(0)))
      report.fail_with({"C_1 is singular", {Vec::Ones(1)}, report.margin});
    else
      report.verdict = Verdict::pass;
    return report;
  }
  const double design = orthogonal_design_scale(lin);
  if (design > 0) {
    report.exact = true;
    report.margin = design;
    report.details["orthogonal_design_scale"] = design;
    report.verdict = Verdict::pass;
    return report;
  }
  VerificationReport sampled = sampled_nonsingular(BilinearMap(lin), stream, count, tol);
  sampled.check = "completion";
  return sampled;
}

struct PlaneInvariantReport {
  bool is_invariant = false;
  double a = 0.0;
  double b = 0.0;
  double identity_residual = 0.0;  ///< ||(M - aI)^2 + b^2 I|| / ||M||^2
  double spectrum_spread = 0.0;    ///< max distance of an eigenvalue from a +- bi
  double max_residual = 0.0;       ///< max over sampled unit u of the plane residual
  Vec worst_u;
};

/// Norm of the component of M^2 u orthogonal to span{u, M u}.
inline double plane_residual(const Mat& m, const Vec& u) {
  Mat basis(u.size(), 2);
  basis << u, m * u;
  const Vec m2u = m * (m * u);
  Eigen::JacobiSVD<Mat> svd(basis, Eigen::ComputeThinU);
  const Vec& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > 1e-14 * std::max(1.0, s(0))) ++rank;
  const Mat q = svd.matrixU().leftCols(rank);
  return (m2u - q * (q.transpose() * m2u)).norm();
}

/// M (with no real eigenvalue) maps every plane span{u, Mu} into itself iff
/// M = aI + bJ for a complex structure J, i.e. all eigenvalues are a +- bi
/// and (M - aI)^2 = -b^2 I.
inline PlaneInvariantReport invariant_on_planes(const Mat& m, std::uint64_t samples = 1000,
                                                const SampleStream& stream = SampleStream(0x1a7e),
                                                const Tolerance& tol = {}) {
  require(m.rows() == m.cols() && m.rows() % 2 == 0 && m.rows() > 0, ErrorCode::invalid_input,
          "invariant_on_planes needs an even-dimensional square matrix");
  const std::vector<Complex> spec = eigenvalues(m);
  const double norm = std::max(1.0, sigma_max(m));
  require(min_abs_imag(spec) > tol.threshold(norm), ErrorCode::real_eigenvalue,
          "matrix has a real eigenvalue");

  const Eigen::Index d = m.rows();
  PlaneInvariantReport out;
  out.a = m.trace() / static_cast<double>(d);
  double b = std::abs(spec.front().imag());
  const double pairing = (m - out.a * Mat::Identity(d, d)).cwiseProduct(complex_structure(static_cast<int>(d / 2))).sum();
  if (pairing < 0) b = -b;
  out.b = b;

  for (const Complex& z : spec)
    out.spectrum_spread =
        std::max(out.spectrum_spread, std::hypot(z.real() - out.a, std::abs(z.imag()) - std::abs(b)));
  const Mat shifted = m - out.a * Mat::Identity(d, d);
  out.identity_residual = (shifted * shifted + b * b * Mat::Identity(d, d)).norm() / (norm * norm);

  out.worst_u = stream.unit_at(0, static_cast<int>(d));
  for (std::uint64_t i = 0; i < samples; ++i) {
    const Vec u = stream.unit_at(i, static_cast<int>(d));
    const double r = plane_residual(m, u);
    if (r > out.max_residual) {
      out.max_residual = r;
      out.worst_u = u;
    }
  }
  // Eigenvalues of defective matrices are only accurate to ~sqrt(eps).
  out.is_invariant = out.identity_residual <= tol.rel && out.spectrum_spread <= 1e-6 * norm;
  return out;
}

/// Direction of the fiber through (z, z~) in matrix-inverse form: (M (I + z~ M)^{-1} z, 1, 0).
inline Vec sphere_fiber_direction_inverse(const Mat& m, const Vec& z, double zt) {
  const Eigen::Index d = m.rows();
  const Mat sys = Mat::Identity(d, d) + zt * m;
  Vec out(d + 2);
  out << m * sys.partialPivLu().solve(z), 1.0, 0.0;
  return out;
}

/// The same direction scaled by |1 + z~ (a + bi)|^2, valid for M = aI + bJ:
/// ((z~ (a^2 + b^2) I + M) z, (1 + z~ a)^2 + z~^2 b^2, 0).
inline Vec sphere_fiber_direction(const Mat& m, double a, double b, const Vec& z, double zt) {
  const Eigen::Index d = m.rows();
  Vec out(d + 2);
  out << (zt * (a * a + b * b) * Mat::Identity(d, d) + m) * z, (1.0 + zt * a) * (1.0 + zt * a) + zt * zt * b * b, 0.0;
  return out;
}

/// Great circle fibration of S^{2m+1} from an invariant-on-planes M.
class GreatCircleAssembly {
 public:
  explicit GreatCircleAssembly(Mat m, const Tolerance& tol = {}) : m_(std::move(m)), tol_(tol) {
    report_ = invariant_on_planes(m_, 200, SampleStream(0x1a7e), tol_);
    require(report_.is_invariant, ErrorCode::invalid_input, "matrix is not invariant on planes");
  }

  int m() const { return static_cast<int>(m_.rows() / 2); }
  const PlaneInvariantReport& invariant() const { return report_; }

  /// The circle through x = (w, x_{2m+1}, x_{2m+2}). Off S the circle is the
  /// linearization of the fiber through p = (x_{2m+2} I + x_{2m+1} M)^{-1} w,
  /// which also covers equatorial points with x_{2m+1} != 0. On S it is
  /// span{(u, 0, 0), (Mu, 0, 0)}.
  GreatSphere circle_at(const SpherePoint& point) const {
    const Vec& x = point.coords();
    const Eigen::Index d = m_.rows();
    require(x.size() == d + 2, ErrorCode::dimension_mismatch, "point must lie on S^{2m+1}");
    const Vec w = x.head(d);
    const double zt = x(d), h = x(d + 1);
    Mat frame = Mat::Zero(d + 2, 2);
    if (std::hypot(zt, h) <= kEquatorThreshold) {
      frame.block(0, 0, d, 1) = w;
      frame.block(0, 1, d, 1) = m_ * w;
    } else {
      const Vec p = (h * Mat::Identity(d, d) + zt * m_).partialPivLu().solve(w);
      frame.block(0, 0, d, 1) = m_ * p;
      frame(d, 0) = 1.0;
      frame.block(0, 1, d, 1) = p;
      frame(d + 1, 1) = 1.0;
    }
    return {orthonormalize(frame, tol_)};
  }

  /// Points of the circle through `point`, theta in [0, 2 pi).
  std::vector<Vec> sample_circle(const SpherePoint& point, int steps) const {
    const GreatSphere c = circle_at(point);
    std::vector<Vec> out;
    for (int s = 0; s < steps; ++s) {
      const double th = 2.0 * M_PI * s / steps;
      out.push_back(std::cos(th) * c.frame.col(0) + std::sin(th) * c.frame.col(1));
    }
    return out;
  }

 private:
  Mat m_;
  Tolerance tol_;
  PlaneInvariantReport report_;
};

inline GreatCircleAssembly assemble_great_circles(const Mat& m, const Tolerance& tol = {}) {
  return GreatCircleAssembly(m, tol);
}

struct AssemblyProbe {
  std::vector<double> distances;
  std::vector<double> angles;
};

/// Approach u in S along a great circle leaving S in the direction
/// (0, cos phi, sin phi); angles between the assigned circles and the circle of u.
inline AssemblyProbe assembly_convergence(const GreatCircleAssembly& asm_, const Vec& u, double phi,
                                          const std::vector<double>& distances) {
  const Eigen::Index d = u.size();
  Vec base = Vec::Zero(d + 2);
  base.head(d) = u.normalized();
  Vec normal = Vec::Zero(d + 2);
  normal(d) = std::cos(phi);
  normal(d + 1) = std::sin(phi);
  const Mat target = asm_.circle_at(SpherePoint(base)).frame;
  AssemblyProbe probe;
  for (double s : distances) {
    const SpherePoint p = SpherePoint::normalized(std::cos(s) * base + std::sin(s) * normal);
    probe.distances.push_back(s);
    probe.angles.push_back(max_principal_angle(asm_.circle_at(p).frame, target));
  }
  return probe;
}

/// The circle on the equatorial S^{2m-1} through u: span{u, Mu}.
inline GreatSphere equator_restriction(const Mat& m, const Vec& u) {
  require(u.size() == m.rows(), ErrorCode::dimension_mismatch, "u has the wrong dimension");
  Mat frame(u.size(), 2);
  frame << u.normalized(), m * u.normalized();
  return {orthonormalize(frame)};
}

}  // namespace skewfib
