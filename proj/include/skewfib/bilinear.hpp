#pragma once

// Bilinear maps R^q x R^{k+1} -> R^q stored as k+1 square matrices, with
// A(y, t) = sum_j t_j M_j y. Generators come from the normed division
// algebras and from the Clifford construction of Hurwitz-Radon families.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Geometry>

#include "skewfib/dims.hpp"
#include "skewfib/error.hpp"
#include "skewfib/numeric.hpp"
#include "skewfib/report.hpp"
#include "skewfib/sampling.hpp"

namespace skewfib {

class BilinearMap {
 public:
  BilinearMap() = default;

  explicit BilinearMap(std::vector<Mat> mats) : mats_(std::move(mats)) {
    require(!mats_.empty(), ErrorCode::invalid_input, "bilinear map needs at least one matrix");
    const Eigen::Index q = mats_.front().rows();
    require(q >= 1, ErrorCode::invalid_input, "bilinear map needs q >= 1");
    for (const Mat& m : mats_)
      require(m.rows() == q && m.cols() == q, ErrorCode::invalid_input,
              "bilinear map matrices must all be q x q");
  }

  int q() const { return mats_.empty() ? 0 : static_cast<int>(mats_.front().rows()); }
  int kp1() const { return static_cast<int>(mats_.size()); }
  const std::vector<Mat>& mats() const { return mats_; }
  const Mat& mat(int j) const { return mats_.at(j); }

  /// sum_j t_j M_j
  Mat at(const Vec& t) const {
    require(t.size() == kp1(), ErrorCode::dimension_mismatch, "t has the wrong length");
    Mat out = Mat::Zero(q(), q());
    for (int j = 0; j < kp1(); ++j) out += t(j) * mats_[j];
    return out;
  }

  Vec apply(const Vec& y, const Vec& t) const { return at(t) * y; }

 private:
  std::vector<Mat> mats_;
};

namespace algebra {

// Quaternions are stored (x, y, z, w) with the real part last, as in Eigen.
inline Vec quaternion_mul(const Vec& a, const Vec& b) {
  const Eigen::Quaterniond qa(a(3), a(0), a(1), a(2));
  const Eigen::Quaterniond qb(b(3), b(0), b(1), b(2));
  return (qa * qb).coeffs();
}

inline Vec quaternion_conj(const Vec& a) {
  Vec c = -a;
  c(3) = a(3);
  return c;
}

// Octonions as pairs of quaternions (a, b) = a + b e4, stored (e1..e7, e0).
// (a,b)(c,d) = (ac - conj(d) b, d a + b conj(c))
inline Vec octonion_mul(const Vec& x, const Vec& y) {
  auto split = [](const Vec& o) {
    Vec a(4), b(4);
    a << o(0), o(1), o(2), o(7);
    b << o(4), o(5), o(6), o(3);
    return std::pair{a, b};
  };
  const auto [a, b] = split(x);
  const auto [c, d] = split(y);
  const Vec lo = quaternion_mul(a, c) - quaternion_mul(quaternion_conj(d), b);
  const Vec hi = quaternion_mul(d, a) + quaternion_mul(b, quaternion_conj(c));
  Vec out(8);
  out << lo(0), lo(1), lo(2), hi(3), hi(0), hi(1), hi(2), lo(3);
  return out;
}

inline Vec complex_mul(const Vec& a, const Vec& b) {
  Vec out(2);
  out << a(0) * b(0) - a(1) * b(1), a(0) * b(1) + a(1) * b(0);
  return out;
}

inline int dimension(std::string_view name) {
  if (name == "complex") return 2;
  if (name == "quaternion") return 4;
  if (name == "octonion") return 8;
  throw Error(ErrorCode::invalid_input, "unknown algebra '" + std::string(name) + "'");
}

/// Coordinate vector of the r-th standard unit (0 is the real unit).
inline Vec unit(std::string_view name, int r) {
  const int d = dimension(name);
  require(r >= 0 && r < d, ErrorCode::invalid_input, "unit index out of range");
  Vec e = Vec::Zero(d);
  if (d == 2)
    e(r) = 1.0;
  else
    e(r == 0 ? d - 1 : r - 1) = 1.0;
  return e;
}

inline Vec multiply(std::string_view name, const Vec& a, const Vec& b) {
  switch (dimension(name)) {
    case 2: return complex_mul(a, b);
    case 4: return quaternion_mul(a, b);
    default: return octonion_mul(a, b);
  }
}

inline Mat left_mul_matrix(std::string_view name, const Vec& a) {
  const int d = dimension(name);
  Mat m(d, d);
  for (int c = 0; c < d; ++c) m.col(c) = multiply(name, a, Vec::Unit(d, c));
  return m;
}

}  // namespace algebra

/// Left multiplications by the first kp1 units (1, i, j, k, ...).
inline BilinearMap from_algebra(std::string_view name, int kp1) {
  const int d = algebra::dimension(name);
  require(kp1 >= 1 && kp1 <= d, ErrorCode::invalid_input,
          "kp1 must lie in 1.." + std::to_string(d) + " for the " + std::string(name) + " algebra");
  std::vector<Mat> mats;
  for (int r = 0; r < kp1; ++r) mats.push_back(algebra::left_mul_matrix(name, algebra::unit(name, r)));
  return BilinearMap(std::move(mats));
}

namespace detail {

/// Anticommuting orthogonal complex structures on R^size (size a power of 2),
/// rho(size) - 1 of them.
inline std::vector<Mat> clifford_generators(std::int64_t size) {
  std::vector<Mat> out;
  auto units_of = [&](std::string_view name) {
    for (int r = 1; r < algebra::dimension(name); ++r)
      out.push_back(algebra::left_mul_matrix(name, algebra::unit(name, r)));
  };
  switch (size) {
    case 1: return out;
    case 2: units_of("complex"); return out;
    case 4: units_of("quaternion"); return out;
    case 8: units_of("octonion"); return out;
    default: break;
  }
  require(size % 16 == 0, ErrorCode::invalid_input, "clifford size must be a power of two");

  Mat eps(2, 2), sigma(2, 2);
  eps << 0, -1, 1, 0;
  sigma << 0, 1, 1, 0;
  std::vector<Mat> g16;
  g16.push_back(kron(eps, Mat::Identity(8, 8)));
  for (int r = 1; r < 8; ++r)
    g16.push_back(kron(sigma, algebra::left_mul_matrix("octonion", algebra::unit("octonion", r))));
  // Product of an even number of anticommuting generators: a symmetric involution
  // anticommuting with each of them.
  Mat omega = Mat::Identity(16, 16);
  for (const Mat& g : g16) omega = omega * g;

  const std::int64_t rest = size / 16;
  const std::vector<Mat> inner = clifford_generators(rest);
  const Mat id_rest = Mat::Identity(rest, rest);
  for (const Mat& g : g16) out.push_back(kron(g, id_rest));
  for (const Mat& a : inner) out.push_back(kron(omega, a));
  return out;
}

}  // namespace detail

/// Hurwitz-Radon family: M_1 = I and r - 1 anticommuting orthogonal complex
/// structures, repeated block-diagonally over the odd part of q.
inline BilinearMap hr_family(std::int64_t q, int r) {
  require(q >= 1 && q <= 4096, ErrorCode::invalid_input, "hr_family supports 1 <= q <= 4096");
  require(r >= 1, ErrorCode::invalid_input, "hr_family needs r >= 1");
  const int limit = dims::rho(q);
  require(r <= limit, ErrorCode::invalid_input,
          "r = " + std::to_string(r) + " exceeds rho(" + std::to_string(q) + ") = " + std::to_string(limit));
  const std::int64_t two_part = q & -q;
  const std::int64_t odd = q / two_part;
  const std::vector<Mat> gens = detail::clifford_generators(two_part);
  const Mat id_odd = Mat::Identity(odd, odd);
  std::vector<Mat> mats;
  mats.push_back(Mat::Identity(q, q));
  for (int j = 0; j + 1 < r; ++j) mats.push_back(kron(id_odd, gens[j]));
  return BilinearMap(std::move(mats));
}

namespace detail {

struct SigmaPoint {
  double smin = 0;
  double smax = 0;
  Vec left, right;  // singular vectors for smin
};

inline SigmaPoint sigma_point(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Index last = svd.singularValues().size() - 1;
  return {svd.singularValues()(last), svd.singularValues()(0), svd.matrixU().col(last),
          svd.matrixV().col(last)};
}

/// Local descent of t -> sigma_min(sum t_j M_j) on the unit sphere.
/// Returns the improved (t, sigma_min); never worse than the start.
inline std::pair<Vec, double> refine_sigma_min(const BilinearMap& a, Vec t, int iterations = 60) {
  SigmaPoint cur = sigma_point(a.at(t));
  for (int it = 0; it < iterations && cur.smin > 0; ++it) {
    Vec g(a.kp1());
    for (int j = 0; j < a.kp1(); ++j) g(j) = cur.left.dot(a.mat(j) * cur.right);
    g -= g.dot(t) * t;
    const double gn2 = g.squaredNorm();
    if (gn2 <= 1e-30) break;
    double step = cur.smin / gn2;  // Polyak step toward zero
    bool improved = false;
    for (int halving = 0; halving < 40; ++halving, step *= 0.5) {
      const Vec trial = (t - step * g).normalized();
      const SigmaPoint sp = sigma_point(a.at(trial));
      if (sp.smin < cur.smin) {
        t = trial;
        cur = sp;
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return {t, cur.smin};
}

}  // namespace detail

/// Exact pencil analysis for kp1 = 2: the map is nonsingular iff M_2 is
/// invertible and M_2^{-1} M_1 has no real eigenvalue. Fills `report`.
inline void pencil_test(const BilinearMap& a, VerificationReport& report, const Tolerance& tol) {
  report.exact = true;
  const Mat& m1 = a.mat(0);
  const Mat& m2 = a.mat(1);
  const Vec s2 = singular_values(m2);
  if (tol.singular(s2(s2.size() - 1), s2(0))) {
    Vec t(2);
    t << 0.0, 1.0;
    report.fail_with({"singular M2 (t = (0, 1))", {t}, s2(s2.size() - 1)});
    return;
  }
  const Mat p = m2.partialPivLu().solve(m1);
  const std::vector<Complex> spec = eigenvalues(p);
  const double scale = std::max(1.0, sigma_max(p));
  double min_imag = std::numeric_limits<double>::infinity();
  for (const Complex& mu : spec) {
    min_imag = std::min(min_imag, std::abs(mu.imag()));
    if (std::abs(mu.imag()) <= tol.threshold(scale)) {
      // (M1 - mu M2) v = 0, so t_1 M_1 + t_2 M_2 is singular along (1, -mu).
      const double lambda = -mu.real();
      Vec t(2);
      t << 1.0, lambda;
      t.normalize();
      report.details["pencil_root"] = lambda;
      report.fail_with({"real pencil root", {t}, lambda});
      return;
    }
  }
  report.details["pencil_min_abs_imag"] = min_imag;
  report.verdict = Verdict::pass;
}

/// Samples unit t, takes sigma_min(sum t_j M_j) and refines the worst
/// samples by local descent. Never better than evidence.
inline VerificationReport sampled_nonsingular(const BilinearMap& a, const SampleStream& stream,
                                              std::uint64_t count, const Tolerance& tol = {}) {
  require(count >= 1, ErrorCode::invalid_input, "sampling needs N >= 1");
  VerificationReport report;
  report.check = "nonsingular";
  report.sampling = {stream.seed(), count, 1.0, stream.mode()};
  const int kp1 = a.kp1();

  struct Sample {
    double smin;
    std::uint64_t index;
  };
  std::vector<Sample> samples(count);
  double largest = 0.0;
  for (std::uint64_t i = 0; i < count; ++i) {
    const Vec t = stream.unit_at(i, kp1);
    const Vec s = singular_values(a.at(t));
    samples[i] = {s(s.size() - 1), i};
    largest = std::max(largest, s(0));
    if (report.witnesses.empty() && tol.singular(s(s.size() - 1), s(0)))
      report.fail_with({"singular sample", {t}, s(s.size() - 1)});
  }
  std::sort(samples.begin(), samples.end(), [](const Sample& x, const Sample& y) {
    return x.smin < y.smin || (x.smin == y.smin && x.index < y.index);
  });
  double margin = samples.front().smin;
  Vec argmin = stream.unit_at(samples.front().index, kp1);
  const std::size_t starts = std::min<std::size_t>(8, samples.size());
  for (std::size_t s = 0; s < starts; ++s) {
    auto [t, v] = detail::refine_sigma_min(a, stream.unit_at(samples[s].index, kp1));
    if (v < margin) {
      margin = v;
      argmin = t;
    }
  }
  report.margin = margin;
  report.details["sampled_margin"] = samples.front().smin;
  if (!report.failed() && tol.singular(margin, largest))
    report.fail_with({"singular after refinement", {argmin}, margin});
  if (!report.failed()) {
    report.verdict = Verdict::evidence_only;
    report.notes.push_back("sampled evidence, not a certificate");
  }
  return report;
}

/// Margin is the (refined) sampled minimum of sigma_min over unit t. The
/// verdict is exact for kp1 <= 2, evidence otherwise.
inline VerificationReport verify_nonsingular(const BilinearMap& a, const SampleStream& stream,
                                             std::uint64_t count, const Tolerance& tol = {}) {
  require(count >= 1, ErrorCode::invalid_input, "verify_nonsingular needs N >= 1");
  if (a.kp1() == 1) {
    VerificationReport report;
    report.check = "nonsingular";
    report.sampling = {stream.seed(), count, 1.0, stream.mode()};
    const Vec s = singular_values(a.mat(0));
    report.exact = true;
    report.margin = s(s.size() - 1);
    if (tol.singular(report.margin, s(0)))
      report.fail_with({"singular M1", {Vec::Ones(1)}, report.margin});
    else
      report.verdict = Verdict::pass;
    return report;
  }
  VerificationReport report = sampled_nonsingular(a, stream, count, tol);
  if (a.kp1() == 2) {
    // The exact answer replaces the sampled one.
    report.witnesses.clear();
    report.notes.clear();
    report.verdict = Verdict::evidence_only;
    pencil_test(a, report, tol);
  }
  return report;
}

/// If sum t_i t_j C_i^T C_j = c |t|^2 I identically, returns sqrt(c): then
/// sigma_min(sum t_j C_j) = sqrt(c) |t| exactly. Otherwise returns -1.
inline double orthogonal_design_scale(const std::vector<Mat>& c, double tol = 1e-10) {
  if (c.empty()) return -1.0;
  const Eigen::Index q = c.front().rows();
  const Mat first = c.front().transpose() * c.front();
  const double scale = first.trace() / static_cast<double>(q);
  if (scale <= 0) return -1.0;
  const Mat id = Mat::Identity(q, q);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if ((c[i].transpose() * c[i] - scale * id).norm() > tol * scale * q) return -1.0;
    for (std::size_t j = i + 1; j < c.size(); ++j) {
      const Mat sym = c[i].transpose() * c[j] + c[j].transpose() * c[i];
      if (sym.norm() > tol * scale * q) return -1.0;
    }
  }
  return std::sqrt(scale);
}

}  // namespace skewfib
