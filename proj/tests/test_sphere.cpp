#include "catch_amalgamated.hpp"
#include "oracles.hpp"
#include "skewfib/fibration.hpp"
#include "skewfib/sphere.hpp"

using namespace skewfib;

namespace {

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  int i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Mat block_diag_rotations(const std::vector<double>& scales) {
  const int d = 2 * static_cast<int>(scales.size());
  Mat m = Mat::Zero(d, d);
  for (std::size_t b = 0; b < scales.size(); ++b) {
    m(2 * b, 2 * b + 1) = -scales[b];
    m(2 * b + 1, 2 * b) = scales[b];
  }
  return m;
}

/// Smallest distance between points of two great circles, sampled densely.
double sampled_circle_gap(const Mat& a, const Mat& b, int steps = 720) {
  double best = 1e300;
  for (int i = 0; i < steps; ++i) {
    const double th = 2 * M_PI * i / steps;
    const Vec p = std::cos(th) * a.col(0) + std::sin(th) * a.col(1);
    // Distance from p to the span of b, then to the circle.
    const Vec proj = b * (b.transpose() * p);
    const double pn = proj.norm();
    const Vec nearest = pn > 0 ? Vec(proj / pn) : Vec(b.col(0));
    best = std::min(best, (p - nearest).norm());
  }
  return best;
}

}  // namespace

TEST_CASE("central projection examples") {
  const SpherePoint north(vec({0, 0, 0, 1}));
  CHECK(central_project(north).norm() == 0.0);
  CHECK((inverse_project(Vec::Zero(3)).coords() - vec({0, 0, 0, 1})).norm() == 0.0);

  try {
    central_project(SpherePoint(vec({1, 0, 0})));
    FAIL("expected EquatorPoint");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::equator_point);
  }
  CHECK_THROWS_AS(central_project(SpherePoint(vec({0, 0, -1}))), Error);
  CHECK_THROWS_AS(SpherePoint(vec({1, 1})), Error);
}

TEST_CASE("central projection round trip") {
  oracle::Rng rng(70);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + trial % 8;
    const Vec x = std::pow(10.0, rng.uniform(-3, 3)) * rng.normal_vec(n);
    CHECK((central_project(inverse_project(x)) - x).norm() <= 1e-12 * (1 + x.norm()));
    Vec s = rng.normal_vec(n + 1);
    s(n) = std::abs(s(n)) + 1e-3;
    const SpherePoint p = SpherePoint::normalized(s);
    CHECK((inverse_project(central_project(p)).coords() - p.coords()).norm() <= 1e-12);
  }
}

TEST_CASE("great_sphere_of examples") {
  Mat e1(3, 1);
  e1 << 1, 0, 0;
  const GreatSphere g = great_sphere_of(AffinePlane::through(OrientedPlane::from_frame(e1), Vec::Zero(3)));
  Mat expected(4, 2);
  expected << 1, 0, 0, 0, 0, 0, 0, 1;
  CHECK((g.frame - expected).norm() == 0.0);
}

TEST_CASE("upper-hemisphere points of a fiber's great sphere project onto the fiber") {
  oracle::Rng rng(71);
  const std::vector<Chart> cs{charts::hopf3(), charts::hopf7(), charts::hopf_line(2, 0.5, -1.5)};
  for (const Chart& c : cs) {
    for (int trial = 0; trial < 50; ++trial) {
      const AffinePlane f = fiber_plane(c, 4 * rng.normal_vec(c.q()));
      const GreatSphere g = great_sphere_of(f);
      const Vec coeff = rng.normal_vec(g.dim() + 1);
      Vec p = g.point(coeff);
      if (p(p.size() - 1) < 0) p = -p;
      if (p(p.size() - 1) < 1e-3) continue;
      CHECK(f.distance(central_project(SpherePoint(p))) <= 1e-10 * (1 + f.base().norm()));
    }
  }
}

TEST_CASE("great spheres of skew fibers are disjoint off the equator") {
  const Chart c = charts::hopf3();
  oracle::Rng rng(72);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec y1 = 3 * rng.normal_vec(2), y2 = 3 * rng.normal_vec(2);
    const Mat a = great_sphere_of(fiber_plane(c, y1)).frame;
    const Mat b = great_sphere_of(fiber_plane(c, y2)).frame;
    // The two circles share only the equatorial direction if the fibers are parallel;
    // skew fibers of hopf3 are never parallel, so the circles are disjoint.
    CHECK(sampled_circle_gap(a, b) > 1e-3);
  }
}

TEST_CASE("completion_check examples") {
  const VerificationReport h7 = completion_check(charts::hopf7());
  CHECK(h7.verdict == Verdict::pass);
  CHECK(std::abs(h7.margin - 1.0) <= 1e-9);

  Vec x0(4);
  x0 << 1, -2, 0.5, 3;
  const VerificationReport shifted = completion_check(charts::hopf_shifted(7, x0));
  CHECK(shifted.verdict == Verdict::pass);
  CHECK(std::abs(shifted.margin - 1.0) <= 1e-9);

  const VerificationReport h3 = completion_check(charts::hopf3());
  CHECK(h3.verdict == Verdict::pass);
  CHECK(h3.exact);

  CHECK(completion_check(charts::hopf15()).verdict == Verdict::pass);
  CHECK(completion_check(charts::parallel(1, 2)).failed());

  try {
    completion_check(from_bilinear(hr_family(4, 3)));
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::dimension_mismatch);
  }
  CHECK_FALSE(dims::admissible_sphere({2, 6}));
}

TEST_CASE("completion margin matches the direct singular values of sum t_j C_j") {
  const Chart c = charts::hopf7();
  oracle::Rng rng(73);
  for (int trial = 0; trial < 100; ++trial) {
    const Vec t = rng.unit(3);
    Mat m = Mat::Zero(4, 4);
    for (int j = 0; j < 3; ++j) m += t(j) * c.linear_part()[j];
    CHECK(std::abs(oracle::singular_values_gram(m).front() - 1.0) <= 1e-12);
  }
  // A non-design linear part falls back to sampling.
  std::vector<Mat> lin{rng.normal_mat(4, 4), rng.normal_mat(4, 4), rng.normal_mat(4, 4)};
  const VerificationReport r = completion_check(Chart::linear(lin), SampleStream(74), 2000);
  CHECK_FALSE(r.exact);
}

TEST_CASE("every fiber direction of the planar Hopf chart points upward and all upward directions occur") {
  const Chart c = charts::hopf3();
  const SampleStream stream(75);
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const Vec d = fiber_plane(c, stream.log_ball_at(i, 2, 1e4)).direction().frame().col(0);
    CHECK(d(0) > 0);
  }
  // Coverage at resolution 0.1: every unit direction with t-component >= 0.1 is a fiber direction.
  const double eps = 0.1;
  for (int i = 0; i <= 20; ++i) {
    const double lat = std::asin(eps) + (M_PI / 2 - std::asin(eps)) * i / 20.0;
    for (int j = 0; j < 36; ++j) {
      const double lon = 2 * M_PI * j / 36;
      const Vec d = vec({std::sin(lat), std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon)});
      const Vec y = fiber_of_direction(c, d);
      const Vec got = fiber_plane(c, y).direction().frame().col(0);
      CHECK((got - d).norm() <= 1e-12);
    }
  }
}

TEST_CASE("invariant_on_planes examples") {
  const Mat j = complex_structure(2);
  const PlaneInvariantReport rj = invariant_on_planes(j);
  CHECK(rj.is_invariant);
  CHECK(std::abs(rj.a) <= 1e-15);
  CHECK(std::abs(rj.b - 1.0) <= 1e-14);
  CHECK(rj.max_residual <= 1e-12);

  const Mat two = block_diag_rotations({1.0, 2.0});
  const PlaneInvariantReport r2 = invariant_on_planes(two);
  CHECK_FALSE(r2.is_invariant);
  CHECK(plane_residual(two, vec({0, 1, 0, 1}) / std::sqrt(2.0)) > 0.1);
  CHECK(r2.max_residual > 0.1);

  oracle::Rng rng(76);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 1 + trial % 4;
    const double a = rng.uniform(-3, 3);
    double b = rng.uniform(0.2, 3);
    if (trial % 2) b = -b;
    const PlaneInvariantReport r = invariant_on_planes(a * Mat::Identity(2 * m, 2 * m) + b * complex_structure(m));
    CHECK(r.is_invariant);
    CHECK(std::abs(r.a - a) <= 1e-12);
    CHECK(std::abs(r.b - b) <= 1e-12);
    CHECK(r.max_residual <= 1e-10);
  }

  try {
    invariant_on_planes(Mat::Identity(2, 2));
    FAIL("expected RealEigenvalue");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::real_eigenvalue);
  }
}

TEST_CASE("conjugated complex structures are invariant; equal spectra with a Jordan block are not") {
  oracle::Rng rng(77);
  const Mat p = rng.normal_mat(4, 4) + 3 * Mat::Identity(4, 4);
  const Mat conj = p * (0.5 * Mat::Identity(4, 4) + 2.0 * complex_structure(2)) * p.inverse();
  const PlaneInvariantReport ok = invariant_on_planes(conj);
  CHECK(ok.is_invariant);
  CHECK(ok.max_residual <= 1e-9 * conj.squaredNorm());

  Mat jordan = complex_structure(2);
  jordan.block(0, 2, 2, 2) = Mat::Identity(2, 2);
  const PlaneInvariantReport bad = invariant_on_planes(jordan);
  CHECK_FALSE(bad.is_invariant);
  CHECK(bad.max_residual > 1e-3);
}

TEST_CASE("sphere fiber direction: block formula versus the matrix inverse") {
  const Mat j = complex_structure(2);
  const Vec z = vec({1, 2, -1, 0.5});
  Vec expected(6);
  expected << j * z, 1, 0;
  CHECK((sphere_fiber_direction(j, 0, 1, z, 0) - expected).norm() == 0.0);
  const double zt = 0.7;
  expected << zt * z + j * z, 1 + zt * zt, 0;
  CHECK((sphere_fiber_direction(j, 0, 1, z, zt) - expected).norm() <= 1e-15);

  oracle::Rng rng(78);
  for (int trial = 0; trial < 1000; ++trial) {
    const int m = 1 + trial % 3;
    const double a = rng.uniform(-2, 2), b = rng.uniform(0.3, 2) * (trial % 2 ? 1 : -1);
    const Mat mm = a * Mat::Identity(2 * m, 2 * m) + b * complex_structure(m);
    const Vec zz = rng.normal_vec(2 * m);
    const double t = rng.uniform(-5, 5);
    const Vec block = sphere_fiber_direction(mm, a, b, zz, t);
    const Vec inv = sphere_fiber_direction_inverse(mm, zz, t);
    const double scale = (1 + t * a) * (1 + t * a) + t * t * b * b;
    CHECK((block - scale * inv).norm() <= 1e-9 * block.norm());
  }
}

TEST_CASE("assembled circles: examples") {
  const Mat j = complex_structure(2);
  const GreatCircleAssembly asm_ = assemble_great_circles(j);
  CHECK(asm_.m() == 2);

  const GreatSphere polar = asm_.circle_at(SpherePoint(Vec::Unit(6, 5)));
  // Great circle of the fiber through the origin: the (z~, h) plane.
  Mat expected = Mat::Zero(6, 2);
  expected(4, 0) = 1;
  expected(5, 1) = 1;
  CHECK(max_principal_angle(polar.frame, expected) <= 1e-15);

  const Vec u = vec({0.6, 0, 0, 0.8});
  Vec onS = Vec::Zero(6);
  onS.head(4) = u;
  Mat span_u(6, 2);
  span_u.setZero();
  span_u.block(0, 0, 4, 1) = u;
  span_u.block(0, 1, 4, 1) = j * u;
  CHECK(max_principal_angle(asm_.circle_at(SpherePoint(onS)).frame, orthonormalize(span_u)) <= 1e-15);

  CHECK_THROWS_AS(assemble_great_circles(Mat::Identity(2, 2)), Error);
  CHECK_THROWS_AS(assemble_great_circles(block_diag_rotations({1, 2})), Error);
}

TEST_CASE("assembled circles agree with the chart fibration on the upper hemisphere") {
  const Mat m = 0.5 * Mat::Identity(4, 4) + 1.5 * complex_structure(2);
  const GreatCircleAssembly asm_(m);
  // The chart in (t, z) layout over the z plane: B(y) = M y.
  const Chart c = Chart::linear({m});
  oracle::Rng rng(79);
  for (int trial = 0; trial < 200; ++trial) {
    Vec x = rng.normal_vec(6);
    x(5) = std::abs(x(5)) + 0.05;
    const SpherePoint p = SpherePoint::normalized(x);
    const Vec proj = central_project(p);  // (z, z~)
    const Vec y = fiber_solve(c, chart_point(proj.tail(1), proj.head(4)));
    // Reorder the fiber to (z, z~) before embedding.
    const AffinePlane f = fiber_plane(c, y);
    Mat perm = Mat::Zero(5, 5);
    for (int i = 0; i < 4; ++i) perm(i, i + 1) = 1;
    perm(4, 0) = 1;
    const AffinePlane fz = AffinePlane::through(OrientedPlane::from_frame(perm * f.direction().frame()), perm * f.base());
    CHECK(max_principal_angle(asm_.circle_at(p).frame, great_sphere_of(fz).frame) <= 1e-10);
  }
}

TEST_CASE("assembled circles form a fibration") {
  oracle::Rng rng(80);
  for (const Mat& m : {Mat(complex_structure(2)), Mat(-0.3 * Mat::Identity(6, 6) + 0.8 * complex_structure(3))}) {
    const GreatCircleAssembly asm_(m);
    const int d = static_cast<int>(m.rows()) + 2;
    int coincide = 0;
    for (int trial = 0; trial < 1000; ++trial) {
      Vec x = rng.normal_vec(d), y = rng.normal_vec(d);
      if (trial % 10 == 0) x(d - 1) = 0;                  // equatorial, covered by the chart
      if (trial % 10 == 1) x(d - 1) = x(d - 2) = 0;       // on S
      if (trial % 10 == 2) y(d - 2) = y(d - 1) = 0;
      const SpherePoint p = SpherePoint::normalized(x), q = SpherePoint::normalized(y);
      const Mat a = asm_.circle_at(p).frame;
      CHECK(std::abs((a * (a.transpose() * p.coords())).norm() - 1.0) <= 1e-10);  // p on its circle
      // Any point of the circle returns the same circle.
      const Vec other = std::cos(1.0) * a.col(0) + std::sin(1.0) * a.col(1);
      CHECK(max_principal_angle(asm_.circle_at(SpherePoint::normalized(other)).frame, a) <= 1e-8);

      const Mat b = asm_.circle_at(q).frame;
      Mat stacked(d, 4);
      stacked << a, b;
      const double gap = sigma_min(stacked);
      if (max_principal_angle(a, b) <= 1e-8) {
        ++coincide;
      } else {
        CHECK(gap > 1e-8);
      }
    }
    CHECK(coincide < 10);
  }
}

TEST_CASE("assigned circles converge when approaching S") {
  oracle::Rng rng(81);
  for (const Mat& m : {Mat(complex_structure(2)), Mat(2.0 * Mat::Identity(4, 4) - 0.5 * complex_structure(2))}) {
    const GreatCircleAssembly asm_(m);
    for (int trial = 0; trial < 20; ++trial) {
      const Vec u = rng.unit(4);
      const double phi = rng.uniform(0, 2 * M_PI);
      const AssemblyProbe probe = assembly_convergence(asm_, u, phi, {1e-1, 1e-2, 1e-3, 1e-4});
      // Linear convergence once the distance is small; the constant depends on M.
      CHECK(probe.angles[1] < probe.angles[0]);
      for (std::size_t i = 2; i < probe.angles.size(); ++i) CHECK(probe.angles[i] <= 0.11 * probe.angles[i - 1]);
      if (m.isApprox(complex_structure(2))) CHECK(probe.angles.back() <= 1e-3);
    }
  }
}

TEST_CASE("equator restriction examples") {
  const Mat j = complex_structure(2);
  oracle::Rng rng(82);
  for (int trial = 0; trial < 1000; ++trial) {
    const Vec u = rng.unit(4);
    Mat span_u(4, 2);
    span_u << u, j * u;
    const GreatSphere gj = equator_restriction(j, u);
    CHECK(max_principal_angle(gj.frame, span_u) <= 1e-12);
    const GreatSphere g2 = equator_restriction(Mat::Identity(4, 4) + 2 * j, u);
    CHECK(max_principal_angle(g2.frame, gj.frame) <= 1e-12);
    const GreatSphere neg = equator_restriction(0.3 * Mat::Identity(4, 4) - 1.2 * j, u);
    CHECK(max_principal_angle(neg.frame, gj.frame) <= 1e-12);
    CHECK(orientation_sign(g2.frame, gj.frame) == 1);
    CHECK(orientation_sign(neg.frame, gj.frame) == -1);
  }
}
