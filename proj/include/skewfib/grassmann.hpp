#pragma once

// Oriented linear and affine planes stored as orthonormal frames, the graph
// chart around a plane, the linearizing embedding of affine k-planes of R^n
// into (k+1)-planes of R^{n+1}, and quantitative bad-cone tests.

#include <algorithm>
#include <cmath>
#include <vector>

#include "skewfib/error.hpp"
#include "skewfib/numeric.hpp"

namespace skewfib {

/// Oriented linear k-plane of R^n. The ordered columns fix the orientation.
class OrientedPlane {
 public:
  OrientedPlane() = default;

  /// Orthonormalizes `frame` keeping its orientation.
  static OrientedPlane from_frame(const Mat& frame, const Tolerance& tol = {}) {
    return OrientedPlane(orthonormalize(frame, tol));
  }

  /// Adopts an already orthonormal frame.
  static OrientedPlane from_orthonormal(Mat frame) {
    require((frame.transpose() * frame - Mat::Identity(frame.cols(), frame.cols())).norm() <= 1e-10,
            ErrorCode::invalid_input, "frame is not orthonormal");
    return OrientedPlane(std::move(frame));
  }

  const Mat& frame() const { return frame_; }
  int dim() const { return static_cast<int>(frame_.cols()); }
  int ambient() const { return static_cast<int>(frame_.rows()); }

  Mat projector() const { return frame_ * frame_.transpose(); }

  /// Distance from a vector to the plane.
  double residual(const Vec& x) const { return (x - frame_ * (frame_.transpose() * x)).norm(); }

 private:
  explicit OrientedPlane(Mat frame) : frame_(std::move(frame)) {}
  Mat frame_;
};

/// Oriented affine k-plane as (direction, nearest point to the origin).
class AffinePlane {
 public:
  AffinePlane() = default;

  /// The plane through `point` with the given direction.
  static AffinePlane through(OrientedPlane direction, const Vec& point) {
    require(point.size() == direction.ambient(), ErrorCode::invalid_input,
            "point and direction live in different dimensions");
    const Mat& u = direction.frame();
    Vec base = point - u * (u.transpose() * point);
    return AffinePlane(std::move(direction), std::move(base));
  }

  const OrientedPlane& direction() const { return direction_; }
  const Vec& base() const { return base_; }
  int dim() const { return direction_.dim(); }
  int ambient() const { return direction_.ambient(); }

  /// Distance from x to the plane.
  double distance(const Vec& x) const { return direction_.residual(x - base_); }

  Vec point(const Vec& t) const { return base_ + direction_.frame() * t; }

 private:
  AffinePlane(OrientedPlane direction, Vec base)
      : direction_(std::move(direction)), base_(std::move(base)) {}
  OrientedPlane direction_;
  Vec base_;
};

/// Great k-sphere of S^n, stored as the orthonormal (k+1)-frame of its span.
struct GreatSphere {
  Mat frame;

  int dim() const { return static_cast<int>(frame.cols()) - 1; }
  Vec point(const Vec& coefficients) const { return frame * coefficients.normalized(); }
};

/// The plane spanned by the columns u_j + u_perp * bmat_j, oriented by u.
inline OrientedPlane graph_plane(const OrientedPlane& u, const Mat& bmat) {
  require(bmat.rows() == u.ambient() - u.dim() && bmat.cols() == u.dim(), ErrorCode::invalid_input,
          "graph map must be (n-k) x k");
  const Mat perp = orthogonal_complement(u.frame());
  return OrientedPlane::from_frame(u.frame() + perp * bmat);
}

/// The graph map of w over u: the inverse of graph_plane.
inline Mat chart_inverse(const OrientedPlane& u, const OrientedPlane& w, const Tolerance& tol = {}) {
  require(u.ambient() == w.ambient() && u.dim() == w.dim(), ErrorCode::invalid_input,
          "planes must have equal dimension and ambient space");
  const Mat along = u.frame().transpose() * w.frame();
  const Vec s = singular_values(along);
  require(!tol.singular(s(s.size() - 1), 1.0), ErrorCode::not_in_chart,
          "plane meets the orthogonal complement of the chart center");
  const Mat perp = orthogonal_complement(u.frame());
  return (perp.transpose() * w.frame()) * along.inverse();
}

/// Sign of the change of basis between two frames of the same plane:
/// +1 same orientation, -1 opposite.
inline int orientation_sign(const Mat& frame_a, const Mat& frame_b) {
  const double d = (frame_a.transpose() * frame_b).determinant();
  return d >= 0 ? 1 : -1;
}

/// Embedding of an affine k-plane of R^n as a (k+1)-plane of R^{n+1}: the
/// linear span of P x {1}. Oriented as (direction frame, (base, 1) normalized).
inline OrientedPlane alpha_embed(const AffinePlane& p) {
  const int n = p.ambient();
  const int k = p.dim();
  Mat frame = Mat::Zero(n + 1, k + 1);
  frame.topLeftCorner(n, k) = p.direction().frame();
  frame.block(0, k, n, 1) = p.base();
  frame(n, k) = 1.0;
  frame.col(k) /= frame.col(k).norm();
  return OrientedPlane::from_orthonormal(std::move(frame));
}

struct IntersectionInfo {
  int dim = 0;     ///< dimension of the intersection of the two planes
  double gap = 0;  ///< sigma_min of the stacked frames; 0 iff they meet
};

inline IntersectionInfo intersection_dim(const OrientedPlane& u, const OrientedPlane& w,
                                         const Tolerance& tol = {}) {
  require(u.ambient() == w.ambient(), ErrorCode::invalid_input, "planes in different spaces");
  Mat stacked(u.ambient(), u.dim() + w.dim());
  stacked << u.frame(), w.frame();
  const Vec s = singular_values(stacked);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (!tol.singular(s(i), s(0))) ++rank;
  return {u.dim() + w.dim() - rank, sigma_min(stacked)};
}

struct SkewInfo {
  bool skew = false;
  double gap = 0;
};

/// Affine planes are skew (disjoint and sharing no direction) iff their
/// linearizations meet only at the origin.
inline SkewInfo skew_pair(const AffinePlane& p, const AffinePlane& q, const Tolerance& tol = {}) {
  const IntersectionInfo info = intersection_dim(alpha_embed(p), alpha_embed(q), tol);
  return {info.dim == 0, info.gap};
}

/// Principal angles between planes of equal dimension, ascending.
inline std::vector<double> principal_angles(const Mat& frame_a, const Mat& frame_b) {
  require(frame_a.rows() == frame_b.rows() && frame_a.cols() == frame_b.cols(),
          ErrorCode::invalid_input, "principal angles need planes of equal dimension");
  const Vec cosines = singular_values(frame_a.transpose() * frame_b);
  // Sines from the residual of b off a are accurate for small angles.
  const Mat off = frame_b - frame_a * (frame_a.transpose() * frame_b);
  const Vec sines = singular_values(off);
  const Eigen::Index k = cosines.size();
  std::vector<double> out(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double c = std::clamp(cosines(i), 0.0, 1.0);
    const double s = std::clamp(sines(k - 1 - i), 0.0, 1.0);
    out[i] = std::atan2(s, c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline double max_principal_angle(const Mat& frame_a, const Mat& frame_b) {
  return principal_angles(frame_a, frame_b).back();
}

}  // namespace skewfib
