#pragma once

// Fiber solving, skewness and nondegeneracy verification, probes at
// infinity and germ extension for charts.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "skewfib/bilinear.hpp"
#include "skewfib/chart.hpp"
#include "skewfib/error.hpp"
#include "skewfib/grassmann.hpp"
#include "skewfib/numeric.hpp"
#include "skewfib/report.hpp"
#include "skewfib/sampling.hpp"

namespace skewfib {

inline Vec chart_point(const Vec& t, const Vec& z) {
  Vec x(t.size() + z.size());
  x << t, z;
  return x;
}

namespace detail {

inline double solve_residual(const Chart& c, const Vec& y, const Vec& t1, const Vec& t2) {
  return (y + c.B(y) * t1 - t2).norm();
}

/// Damped Newton for y + B(y) t1 = t2. Returns the iteration count used, or
/// -1 if it stalled before reaching `target`.
inline int newton_fiber(const Chart& c, Vec& y, const Vec& t1, const Vec& t2, double target,
                        int budget) {
  const Mat id = Mat::Identity(c.q(), c.q());
  Vec f = y + c.B(y) * t1 - t2;
  double res = f.norm();
  for (int it = 0; it < budget; ++it) {
    if (res <= target) return it;
    Mat jac = id;
    const std::vector<Mat> d = c.derivative(y);
    for (int j = 0; j < c.k(); ++j) jac += t1(j) * d[j];
    const Vec step = jac.fullPivLu().solve(f);
    double lambda = 1.0;
    bool accepted = false;
    for (int h = 0; h < 30; ++h, lambda *= 0.5) {
      const Vec trial = y - lambda * step;
      const Vec ft = trial + c.B(trial) * t1 - t2;
      if (ft.norm() < res) {
        y = trial;
        f = ft;
        res = ft.norm();
        accepted = true;
        break;
      }
    }
    if (!accepted) return res <= target ? it : -1;
  }
  return res <= target ? budget : -1;
}

}  // namespace detail

/// The point y of E whose fiber contains x = (t1, t2): y + B(y) t1 = t2.
inline Vec fiber_solve(const Chart& c, const Vec& x, const Tolerance& tol = {}) {
  require(x.size() == c.n(), ErrorCode::dimension_mismatch, "point has the wrong dimension");
  const Vec t1 = x.head(c.k());
  const Vec t2 = x.tail(c.q());
  const double scale = 1.0 + x.norm();

  if (c.is_linear_or_affine()) {
    Mat m = Mat::Identity(c.q(), c.q());
    for (int j = 0; j < c.k(); ++j) m += t1(j) * c.linear_part()[j];
    const Vec s = singular_values(m);
    require(!tol.singular(s(s.size() - 1), s(0)), ErrorCode::singular_system,
            "fiber system is singular; the chart is degenerate here");
    const Vec rhs = t2 - c.offset() * t1;
    const auto lu = m.partialPivLu();
    Vec y = lu.solve(rhs);
    y += lu.solve(rhs - m * y);  // one step of iterative refinement
    return y;
  }

  const double target = 1e-13 * scale;
  const double accept = 1e-10 * scale;
  Vec y = t2;
  if (detail::newton_fiber(c, y, t1, t2, target, 100) >= 0) return y;
  if (detail::solve_residual(c, y, t1, t2) <= accept) return y;

  // Homotopy in t1 from the trivially solved t1 = 0.
  y = t2;
  const int stages = 10;
  for (int s = 1; s <= stages; ++s) {
    const Vec ts = t1 * (static_cast<double>(s) / stages);
    detail::newton_fiber(c, y, ts, t2, s == stages ? target : accept, 100);
  }
  require(detail::solve_residual(c, y, t1, t2) <= accept, ErrorCode::no_convergence,
          "Newton iteration for the fiber did not converge");
  return y;
}

/// Residual of the fiber equation at x for a proposed y.
inline double fiber_residual(const Chart& c, const Vec& x, const Vec& y) {
  return detail::solve_residual(c, y, x.head(c.k()), x.tail(c.q()));
}

/// The fiber through y in E: direction span{(e_j, B(y) e_j)}, base the
/// point nearest the origin.
inline AffinePlane fiber_plane(const Chart& c, const Vec& y) {
  Mat frame(c.n(), c.k());
  frame.topRows(c.k()) = Mat::Identity(c.k(), c.k());
  frame.bottomRows(c.q()) = c.B(y);
  return AffinePlane::through(OrientedPlane::from_frame(frame), chart_point(Vec::Zero(c.k()), y));
}

/// Distance from the origin to the fiber through x.
inline double fiber_distance(const Chart& c, const Vec& x, const Tolerance& tol = {}) {
  return fiber_plane(c, fiber_solve(c, x, tol)).base().norm();
}

struct KernelTest {
  bool skew = false;
  double margin = 0.0;  ///< sigma_min(A(x) - A(y)) / |x - y|
  Vec kernel;           ///< (t, lambda) spanning the smallest singular direction
};

/// Fibers through x != y in E are skew iff A(x) - A(y) has trivial kernel.
inline KernelTest kernel_test(const Chart& c, const Vec& x, const Vec& y, const Tolerance& tol = {}) {
  const Mat diff = c.A(x) - c.A(y);
  const double sep = (x - y).norm();
  require(sep > 0, ErrorCode::invalid_input, "kernel test needs distinct points");
  KernelTest out;
  if (diff.rows() < diff.cols()) {
    Eigen::JacobiSVD<Mat> svd(diff, Eigen::ComputeFullV);
    out.kernel = svd.matrixV().col(diff.cols() - 1);
    return out;
  }
  Eigen::JacobiSVD<Mat> svd(diff, Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  out.margin = s(s.size() - 1) / sep;
  out.kernel = svd.matrixV().col(diff.cols() - 1);
  out.skew = !tol.singular(s(s.size() - 1), s(0));
  return out;
}

struct PropernessProbe {
  std::vector<double> radii{1e2, 1e3, 1e4};
  std::vector<double> distances;
  bool ok = false;
};

/// d along one ray of E must grow: increasing, and the last value at least
/// ten times the first.
inline PropernessProbe properness_probe(const Chart& c, const Vec& direction, const Tolerance& tol = {}) {
  PropernessProbe probe;
  const Vec u = direction.normalized();
  for (double r : probe.radii)
    probe.distances.push_back(fiber_plane(c, r * u).base().norm());
  bool increasing = true;
  for (std::size_t i = 1; i < probe.distances.size(); ++i)
    increasing = increasing && probe.distances[i] > probe.distances[i - 1];
  probe.ok = increasing && probe.distances.back() >= 10.0 * probe.distances.front();
  (void)tol;
  return probe;
}

namespace detail {

inline void attach_properness(const Chart& c, const SampleStream& stream, VerificationReport& report) {
  const PropernessProbe probe = properness_probe(c, stream.unit_at(0xa11ce, c.q()));
  for (std::size_t i = 0; i < probe.radii.size(); ++i)
    report.details["properness_d_" + std::to_string(static_cast<int>(probe.radii[i]))] = probe.distances[i];
  if (!probe.ok) {
    Vec d(probe.distances.size());
    for (std::size_t i = 0; i < probe.distances.size(); ++i) d(i) = probe.distances[i];
    report.fail_with({"distance to the origin does not diverge along a ray", {d}, probe.distances.back()});
  }
}

/// Sample i of a radius-r ball of E: even indices uniform, odd log-uniform in radius.
inline Vec domain_sample(const SampleStream& stream, std::uint64_t i, int q, double radius) {
  return i % 2 == 0 ? stream.ball_at(i, q, radius) : stream.log_ball_at(i, q, radius);
}

}  // namespace detail

/// Sampled kernel test over pairs in the radius ball of E. A quarter of the
/// pairs are close (separation between 1e-3 and 1e-1 of the radius).
inline VerificationReport verify_skew(const Chart& c, double radius, std::uint64_t count,
                                      const SampleStream& stream, const Tolerance& tol = {}) {
  require(count >= 2, ErrorCode::invalid_input, "verify_skew needs N >= 2");
  require(radius > 0, ErrorCode::invalid_input, "radius must be positive");
  VerificationReport report;
  report.check = "skew";
  report.sampling = {stream.seed(), count, radius, stream.mode()};
  report.margin = std::numeric_limits<double>::infinity();
  const int q = c.q();
  for (std::uint64_t i = 0; i < count; ++i) {
    Vec x, y;
    switch (i % 4) {
      case 0:
      case 1:
        x = stream.ball_at(2 * i, q, radius);
        y = stream.ball_at(2 * i + 1, q, radius);
        break;
      case 2:
        x = stream.log_ball_at(2 * i, q, radius);
        y = stream.log_ball_at(2 * i + 1, q, radius);
        break;
      default: {
        x = stream.log_ball_at(2 * i, q, radius);
        const double sep = radius * std::pow(10.0, -3.0 + 2.0 * stream.uniform_at(2 * i + 1));
        y = x + sep * stream.unit_at(2 * i + 1, q);
      }
    }
    if ((x - y).norm() == 0.0) continue;
    const KernelTest kt = kernel_test(c, x, y, tol);
    if (kt.margin < report.margin) {
      report.margin = kt.margin;
    }
    if (!kt.skew && report.witnesses.empty()) report.fail_with({"fibers meet or share a direction", {x, y, kt.kernel}, kt.margin});
  }
  if (!report.failed()) {
    report.verdict = Verdict::evidence_only;
    report.notes.push_back("sampled evidence, not a certificate");
  }
  detail::attach_properness(c, stream, report);
  return report;
}

namespace detail {

/// k = 1 test at one point: dB_y must have no real eigenvalue.
inline double eigen_margin(const Mat& d, const Tolerance& tol, bool& real_found) {
  const std::vector<Complex> spec = eigenvalues(d);
  const double margin = min_abs_imag(spec);
  real_found = margin <= tol.threshold(std::max(1.0, sigma_max(d)));
  return margin;
}

}  // namespace detail

/// dA_y must be a nonsingular bilinear map. Exact for linear or affine charts
/// with k = 1 (no real eigenvalue of C_1); otherwise sampled.
inline VerificationReport verify_nondegenerate(const Chart& c, double radius, std::uint64_t count,
                                               const SampleStream& stream, const Tolerance& tol = {}) {
  require(count >= 1, ErrorCode::invalid_input, "verify_nondegenerate needs N >= 1");
  VerificationReport report;
  report.check = "nondegenerate";
  report.sampling = {stream.seed(), count, radius, stream.mode()};
  const Vec origin = Vec::Zero(c.q());

  if (c.is_linear_or_affine()) {
    // dB is constant.
    if (c.k() == 1) {
      bool real_found = false;
      report.exact = true;
      report.margin = detail::eigen_margin(c.linear_part()[0], tol, real_found);
      if (real_found)
        report.fail_with({"dB has a real eigenvalue", {origin}, report.margin});
      else
        report.verdict = Verdict::pass;
    } else {
      const VerificationReport inner = verify_nonsingular(c.differential(origin), stream, count, tol);
      report.margin = inner.margin;
      report.verdict = inner.verdict;
      report.exact = inner.exact;
      report.notes = inner.notes;
      for (const Witness& w : inner.witnesses) report.witnesses.push_back({w.label, {origin, w.inputs.front()}, w.value});
    }
  } else {
    report.margin = std::numeric_limits<double>::infinity();
    const std::uint64_t per_point = 64;
    for (std::uint64_t i = 0; i < count; ++i) {
      const Vec y = detail::domain_sample(stream, i, c.q(), radius);
      double m = 0;
      bool bad = false;
      Vec tw;
      if (c.k() == 1) {
        m = detail::eigen_margin(c.derivative(y)[0], tol, bad);
        tw = Vec::Ones(1);
      } else {
        const VerificationReport inner =
            verify_nonsingular(c.differential(y), SampleStream(stream.seed() + i, stream.mode()), per_point, tol);
        m = inner.margin;
        bad = inner.failed();
        if (bad) tw = inner.witnesses.front().inputs.front();
      }
      report.margin = std::min(report.margin, m);
      if (bad && report.witnesses.empty()) report.fail_with({"dA is singular", {y, tw}, m});
    }
    if (!report.failed()) {
      report.verdict = Verdict::evidence_only;
      report.notes.push_back("sampled evidence, not a certificate");
    }
  }
  detail::attach_properness(c, stream, report);
  return report;
}

/// Sampled bilinear test for a linear chart, ignoring any exact shortcut.
/// Used to cross-check the eigenvalue criterion.
inline VerificationReport nondegenerate_sampled(const Chart& c, std::uint64_t count, const SampleStream& stream,
                                                const Tolerance& tol = {}) {
  require(c.is_linear_or_affine(), ErrorCode::invalid_input, "sampled cross-check needs a linear chart");
  return sampled_nonsingular(c.differential(Vec::Zero(c.q())), stream, count, tol);
}

/// The y in E whose fiber direction contains ell = (ell_t, ell_z): B(y) ell_t = ell_z.
inline Vec fiber_of_direction(const Chart& c, const Vec& ell, const Tolerance& tol = {}) {
  require(ell.size() == c.n(), ErrorCode::dimension_mismatch, "direction has the wrong dimension");
  const Vec lt = ell.head(c.k());
  const Vec lz = ell.tail(c.q());
  require(lt.norm() > 1e-12 * ell.norm(), ErrorCode::invalid_input,
          "direction lies in the transverse plane; no fiber contains it");
  if (c.is_linear_or_affine()) {
    Mat m = Mat::Zero(c.q(), c.q());
    for (int j = 0; j < c.k(); ++j) m += lt(j) * c.linear_part()[j];
    const Vec s = singular_values(m);
    require(!tol.singular(s(s.size() - 1), s(0)), ErrorCode::singular_system,
            "no unique fiber has this direction");
    return m.fullPivLu().solve(lz - c.offset() * lt);
  }
  Vec y = Vec::Zero(c.q());
  for (int it = 0; it < 100; ++it) {
    const Vec f = c.B(y) * lt - lz;
    if (f.norm() <= 1e-13 * (1.0 + ell.norm())) return y;
    Mat jac = Mat::Zero(c.q(), c.q());
    const std::vector<Mat> d = c.derivative(y);
    for (int j = 0; j < c.k(); ++j) jac += lt(j) * d[j];
    y -= jac.fullPivLu().solve(f);
  }
  require((c.B(y) * lt - lz).norm() <= 1e-10 * (1.0 + ell.norm()), ErrorCode::no_convergence,
          "fiber with the given direction not found");
  return y;
}

/// Ray probe inside the cone {<y, ell> >= N, angle(y, ell) <= delta}.
struct ConeProbe {
  Vec ell;
  double N = 1.0;
  double delta = 0.5;
  std::vector<double> t_values;
  Vec offset;  ///< probe points are offset + t * ell; empty means 0

  Vec point(double t) const { return (offset.size() ? offset : Vec::Zero(ell.size())) + t * ell; }

  void validate() const {
    require(std::abs(ell.norm() - 1.0) <= 1e-12, ErrorCode::invalid_input, "ell must be a unit vector");
    require(N >= 1.0, ErrorCode::invalid_input, "cone depth N must be >= 1");
    require(delta > 0 && delta < M_PI / 2, ErrorCode::invalid_input, "delta must lie in (0, pi/2)");
    for (std::size_t i = 0; i < t_values.size(); ++i) {
      if (i > 0) require(t_values[i] > t_values[i - 1], ErrorCode::invalid_input, "t values must increase");
      const Vec y = point(t_values[i]);
      require(y.dot(ell) >= N, ErrorCode::invalid_input, "probe point is not deep enough in the cone");
      const double ang = std::acos(std::clamp(y.normalized().dot(ell), -1.0, 1.0));
      require(ang <= delta, ErrorCode::invalid_input, "probe point is outside the cone angle");
    }
  }
};

/// Angles between the fiber directions along the probe ray and the direction
/// of the fiber containing ell.
inline std::vector<double> continuity_probe(const Chart& c, const ConeProbe& probe, const Tolerance& tol = {}) {
  probe.validate();
  const Mat target = fiber_plane(c, fiber_of_direction(c, probe.ell, tol)).direction().frame();
  std::vector<double> angles;
  for (double t : probe.t_values) {
    const Vec y = fiber_solve(c, probe.point(t), tol);
    angles.push_back(max_principal_angle(fiber_plane(c, y).direction().frame(), target));
  }
  return angles;
}

/// k = 1: limit of the fiber direction at v + s (0, u) as s -> infinity,
/// from s = 1e8 and 2e8 with one Richardson step. u is a unit vector of E,
/// v a point of R^n; the result is in (t, z) layout.
inline Vec limiting_direction(const Chart& c, const Vec& u, const Vec& v, const Tolerance& tol = {}) {
  require(c.k() == 1, ErrorCode::invalid_input, "limiting_direction needs k = 1");
  require(u.size() == c.q() && v.size() == c.n(), ErrorCode::dimension_mismatch, "u or v has the wrong dimension");
  const Vec uu = u.normalized();
  const Vec embedded = chart_point(Vec::Zero(1), uu);
  auto scaled_direction = [&](double s) {
    const Vec y = fiber_solve(c, v + s * embedded, tol);
    Vec d(c.n());
    d(0) = 1.0;
    d.tail(c.q()) = c.B(y).col(0);
    return Vec(d / s);
  };
  const double s = 1e8;
  const Vec extrapolated = 2.0 * scaled_direction(2.0 * s) - scaled_direction(s);
  return extrapolated.normalized();
}

/// Smooth bump: 1 on [0, 1/2], 0 on [1, inf), built from exp(-1/s).
struct Bump {
  static double f(double s) { return s > 0 ? std::exp(-1.0 / s) : 0.0; }
  static double df(double s) { return s > 0 ? std::exp(-1.0 / s) / (s * s) : 0.0; }

  static double value(double s) {
    if (s <= 0.5) return 1.0;
    if (s >= 1.0) return 0.0;
    const double tau = 2.0 * s - 1.0;
    return 1.0 - f(tau) / (f(tau) + f(1.0 - tau));
  }

  static double derivative(double s) {
    if (s <= 0.5 || s >= 1.0) return 0.0;
    const double tau = 2.0 * s - 1.0;
    const double a = f(tau), b = f(1.0 - tau);
    const double h = (df(tau) * b + a * df(1.0 - tau)) / ((a + b) * (a + b));
    return -2.0 * h;
  }
};

/// B_ext = chi(|y|/r) B_local + (1 - chi(|y|/r)) (B_local(0) + dB_0 y). Inside
/// |y| <= r/2 it evaluates B_local itself, so the two agree bitwise there.
inline Chart blend_germ(const Chart& local, double blend_r) {
  require(blend_r > 0, ErrorCode::invalid_input, "blend radius must be positive");
  auto loc = std::make_shared<const Chart>(local);
  const Vec origin = Vec::Zero(local.q());
  const Mat b_at_0 = local.B(origin);
  const std::vector<Mat> d_at_0 = local.derivative(origin);
  const int k = local.k();

  auto tail = [b_at_0, d_at_0, k](const Vec& y) {
    Mat out = b_at_0;
    for (int j = 0; j < k; ++j) out.col(j) += d_at_0[j] * y;
    return out;
  };
  auto eval = [loc, blend_r, tail](const Vec& y) -> Mat {
    const double s = y.norm() / blend_r;
    if (s <= 0.5) return loc->B(y);
    if (s >= 1.0) return tail(y);
    const double chi = Bump::value(s);
    return chi * loc->B(y) + (1.0 - chi) * tail(y);
  };
  auto deriv = [loc, blend_r, tail, d_at_0, k](const Vec& y) -> std::vector<Mat> {
    const double r = y.norm();
    const double s = r / blend_r;
    if (s <= 0.5) return loc->derivative(y);
    if (s >= 1.0) return d_at_0;
    const double chi = Bump::value(s);
    const Vec grad = Bump::derivative(s) * y / (r * blend_r);
    const std::vector<Mat> dl = loc->derivative(y);
    const Mat gap = loc->B(y) - tail(y);
    std::vector<Mat> out;
    for (int j = 0; j < k; ++j) out.push_back(chi * dl[j] + (1.0 - chi) * d_at_0[j] + gap.col(j) * grad.transpose());
    return out;
  };
  Chart c = Chart::smooth(k, local.q(), eval, deriv);
  c.named("extended", {{"blend_r", blend_r}}, loc);
  return c;
}

struct GermExtension {
  Chart chart;
  double blend_r = 0;
  int halvings = 0;
  VerificationReport report;
};

/// Extends a local chart, nondegenerate at 0, to all of R^q. Halves the blend
/// radius (at most 20 times) until the blended chart verifies nondegenerate on
/// the ball of radius 10 r; the linear tail is checked exactly.
inline GermExtension extend_germ(const Chart& local, double blend_r, std::uint64_t samples = 2000,
                                 std::uint64_t seed = 0x6765726d, const Tolerance& tol = {}) {
  require(blend_r > 0, ErrorCode::invalid_input, "blend radius must be positive");
  const Vec origin = Vec::Zero(local.q());
  SampleStream stream(seed);

  // The linear tail B(0) + dB_0 y is the germ's own linearization.
  const BilinearMap d0 = local.differential(origin);
  if (local.k() == 1) {
    bool real_found = false;
    detail::eigen_margin(d0.mat(0), tol, real_found);
    require(!real_found, ErrorCode::real_eigenvalue, "dB_0 has a real eigenvalue; the germ is degenerate at 0");
  } else {
    require(verify_nonsingular(d0, stream, samples, tol).ok(), ErrorCode::invalid_input,
            "dA_0 is singular; the germ is degenerate at 0");
  }

  if (local.is_linear_or_affine()) {
    VerificationReport rep = verify_nondegenerate(local, 10 * blend_r, samples, stream, tol);
    return {local, blend_r, 0, rep};
  }

  double r = blend_r;
  for (int h = 0; h <= 20; ++h, r *= 0.5) {
    Chart ext = blend_germ(local, r);
    VerificationReport rep = verify_nondegenerate(ext, 10 * r, samples, stream, tol);
    if (rep.ok()) return {ext, r, h, rep};
  }
  throw Error(ErrorCode::blend_failure, "no blend radius in the halving schedule verified");
}

struct FiberSample {
  int fiber_id = 0;
  std::vector<int> index;  ///< parameter grid index per t-coordinate
  Vec x;
};

/// Points (t, B(y) t + y) on a steps^k grid of t in [t_min, t_max]^k, per y.
inline std::vector<FiberSample> sample_fibers(const Chart& c, const std::vector<Vec>& grid, double t_min,
                                              double t_max, int steps) {
  require(steps >= 1, ErrorCode::invalid_input, "steps must be >= 1");
  require(t_max >= t_min, ErrorCode::invalid_input, "empty parameter range");
  std::int64_t total = 1;
  for (int j = 0; j < c.k(); ++j) {
    total *= steps;
    require(total <= 1000000, ErrorCode::invalid_input, "too many samples per fiber");
  }
  std::vector<FiberSample> out;
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const Vec& y = grid[f];
    const Mat b = c.B(y);
    for (std::int64_t flat = 0; flat < total; ++flat) {
      std::vector<int> idx(c.k());
      Vec t(c.k());
      std::int64_t rest = flat;
      for (int j = 0; j < c.k(); ++j) {
        idx[j] = static_cast<int>(rest % steps);
        rest /= steps;
        t(j) = steps == 1 ? t_min : t_min + (t_max - t_min) * idx[j] / (steps - 1);
      }
      out.push_back({static_cast<int>(f), idx, chart_point(t, b * t + y)});
    }
  }
  return out;
}

}  // namespace skewfib
