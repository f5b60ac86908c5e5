#include <cstring>

#include "catch_amalgamated.hpp"
#include "oracles.hpp"
#include "skewfib/bilinear.hpp"
#include "skewfib/chart.hpp"
#include "skewfib/numeric.hpp"
#include "skewfib/sampling.hpp"

using namespace skewfib;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("orthonormalize examples") {
  Mat id = Mat::Identity(3, 2);
  CHECK((orthonormalize(id) - id).norm() < 1e-15);

  Mat f(3, 2);
  f << 1, 1, 0, 1, 0, 0;
  Mat expected(3, 2);
  expected << 1, 0, 0, 1, 0, 0;
  CHECK((orthonormalize(f) - expected).norm() < 1e-15);

  Mat g(2, 2);
  g << 3, 3, 3, -3;
  Mat h(2, 2);
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  CHECK((orthonormalize(g) - h).norm() < 1e-15);
}

TEST_CASE("orthonormalize keeps span and orientation, and is idempotent") {
  oracle::Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 7;
    const int k = 1 + trial % n;
    const Mat f = rng.normal_mat(n, k);
    const Mat q = orthonormalize(f);
    CHECK((q.transpose() * q - Mat::Identity(k, k)).norm() < 1e-13);
    // span: f is reproduced from q
    CHECK((q * (q.transpose() * f) - f).norm() < 1e-12 * f.norm());
    // orientation: change of basis has positive determinant and matches Gram-Schmidt
    CHECK((q.transpose() * f).determinant() > 0);
    CHECK((q - oracle::gram_schmidt(f)).norm() < 1e-9);
    CHECK((orthonormalize(q) - q).norm() < 1e-14);
  }
}

TEST_CASE("orthonormalize rejects dependent columns") {
  Mat f(3, 2);
  f << 1, 2, 1, 2, 1, 2;
  CHECK_THROWS_AS(orthonormalize(f), Error);
  try {
    orthonormalize(f);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::rank_deficient);
  }
  CHECK_THROWS_AS(orthonormalize(Mat::Zero(3, 1)), Error);
  CHECK_THROWS_AS(orthonormalize(Mat::Identity(2, 3)), Error);
}

TEST_CASE("sigma_min examples") {
  CHECK(sigma_min(Mat::Identity(2, 2)) == 1.0);
  CHECK(sigma_min(Mat::Zero(3, 3)) == 0.0);
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = 0.5;
  CHECK_THAT(sigma_min(d), WithinAbs(0.5, 1e-15));
  CHECK(sigma_min(Mat::Ones(2, 3)) == 0.0);
}

TEST_CASE("singular values agree with the Gram-matrix oracle") {
  oracle::Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Mat m = rng.normal_mat(4 + trial % 3, 3);
    const std::vector<double> ref = oracle::singular_values_gram(m);
    CHECK_THAT(sigma_min(m), WithinRel(ref.front(), 1e-8));
    CHECK_THAT(sigma_max(m), WithinRel(ref.back(), 1e-10));
  }
}

TEST_CASE("sigma_min of M pairs with sigma_max of the inverse") {
  // sigma_min(M) sigma_min(M^-1) is not 1 in general; sigma_min(M) sigma_max(M^-1) is.
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 3;
  d(1, 1) = 0.5;
  CHECK_THAT(sigma_min(d) * sigma_min(d.inverse()), WithinAbs(1.0 / 6.0, 1e-15));

  oracle::Rng rng(3);
  int tested = 0;
  while (tested < 200) {
    const Mat m = rng.normal_mat(5, 5);
    const Vec s = singular_values(m);
    if (s(0) / s(4) >= 1e3) continue;
    ++tested;
    const double prod = sigma_min(m) * sigma_max(m.inverse());
    CHECK(prod >= 1 - 1e-10);
    CHECK(prod <= 1 + 1e-10);
  }
}

TEST_CASE("eigenvalue examples") {
  Mat r(2, 2);
  r << 0, -1, 1, 0;
  auto ev = eigenvalues(r);
  REQUIRE(ev.size() == 2);
  CHECK(std::abs(ev[0] - Complex(0, -1)) < 1e-15);
  CHECK(std::abs(ev[1] - Complex(0, 1)) < 1e-15);

  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 2;
  d(1, 1) = 3;
  ev = eigenvalues(d);
  CHECK(std::abs(ev[0] - Complex(2, 0)) < 1e-15);
  CHECK(std::abs(ev[1] - Complex(3, 0)) < 1e-15);

  Mat h(2, 2);
  h << 0, 0.5, -0.5, 0;
  ev = eigenvalues(h);
  CHECK(std::abs(ev[0] - Complex(0, -0.5)) < 1e-15);
  CHECK(std::abs(ev[1] - Complex(0, 0.5)) < 1e-15);
  CHECK(min_abs_imag(ev) == 0.5);

  CHECK_THROWS_AS(eigenvalues(Mat::Ones(2, 3)), Error);
}

TEST_CASE("spectrum is invariant under orthogonal similarity") {
  oracle::Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + trial % 6;
    const Mat m = rng.normal_mat(n, n);
    const Mat q = oracle::random_orthogonal(n, 100 + trial);
    const auto a = eigenvalues(m);
    const auto b = eigenvalues(q.transpose() * m * q);
    // Match as multisets: greedy nearest pairing.
    std::vector<bool> used(b.size(), false);
    for (const Complex& z : a) {
      double best = 1e300;
      std::size_t arg = 0;
      for (std::size_t i = 0; i < b.size(); ++i)
        if (!used[i] && std::abs(z - b[i]) < best) {
          best = std::abs(z - b[i]);
          arg = i;
        }
      used[arg] = true;
      CHECK(best <= 1e-8 * m.norm());
    }
  }
}

TEST_CASE("jacobian examples") {
  oracle::Rng rng(5);
  const Mat m = rng.normal_mat(3, 4);
  const Vec y = rng.normal_vec(4);
  const Mat j = jacobian([&](const Vec& v) -> Vec { return m * v; }, y);
  CHECK((j - m).norm() <= 1e-10 * m.norm());

  Vec p(2);
  p << 1, 1;
  const Mat jq = jacobian([](const Vec& v) -> Vec {
    Vec out(2);
    out << v(0) * v(0), v(1);
    return out;
  }, p);
  Mat expected(2, 2);
  expected << 2, 0, 0, 1;
  CHECK((jq - expected).cwiseAbs().maxCoeff() <= 1e-9);

  // Richardson step removes the h^2 term.
  const auto cubic = [](const Vec& v) -> Vec { return Vec::Constant(1, v(0) * v(0) * v(0)); };
  const Vec x = Vec::Constant(1, 2.0);
  CHECK(std::abs(jacobian_richardson(cubic, x)(0, 0) - 12.0) < 1e-9);
}

TEST_CASE("finite-difference derivative of the quaternionic chart matches the analytic one") {
  const Chart c = charts::hopf7();
  oracle::Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec y = 10.0 * rng.normal_vec(4);
    for (int j = 0; j < 3; ++j) {
      const Mat fd = jacobian([&](const Vec& v) -> Vec { return c.B(v).col(j); }, y);
      // Analytic: B(y) e_j = (unit j+1) * y, hand-coded Hamilton left multiplication.
      Vec unit = Vec::Zero(4);
      unit(j) = 1.0;
      Mat analytic(4, 4);
      for (int col = 0; col < 4; ++col) analytic.col(col) = oracle::hamilton(unit, Vec::Unit(4, col));
      CHECK((fd - analytic).norm() <= 1e-8);
    }
  }
}

TEST_CASE("kron and complex structure") {
  const Mat j = complex_structure(3);
  CHECK((j * j + Mat::Identity(6, 6)).norm() == 0.0);
  CHECK((j.transpose() * j - Mat::Identity(6, 6)).norm() == 0.0);
  Mat a(2, 2), b(1, 2);
  a << 1, 2, 3, 4;
  b << 5, 6;
  Mat expected(2, 4);
  expected << 5, 6, 10, 12, 15, 18, 20, 24;
  CHECK((kron(a, b) - expected).norm() == 0.0);
}

TEST_CASE("tolerance threshold is relative plus absolute") {
  Tolerance tol;
  CHECK(tol.singular(1e-9, 1.0));
  CHECK(!tol.singular(1e-7, 1.0));
  CHECK(tol.singular(1e-13, 0.0));
  CHECK(tol.singular(1e-3, 1e6));
}

TEST_CASE("sample streams are deterministic and order independent") {
  for (SampleMode mode : {SampleMode::pseudo_random, SampleMode::low_discrepancy}) {
    SampleStream a(42, mode), b(42, mode);
    const auto xs = a.take_units(500, 5);
    const auto ys = b.take_units(500, 5);
    for (std::size_t i = 0; i < xs.size(); ++i)
      CHECK(std::memcmp(xs[i].data(), ys[i].data(), sizeof(double) * 5) == 0);
    // Out of order access gives the same values.
    const SampleStream c(42, mode);
    for (std::size_t i = 500; i-- > 0;) CHECK((c.unit_at(i, 5) - xs[i]).norm() == 0.0);
    CHECK(a.counter() == 500);
  }
  SampleStream p(1), q(2);
  CHECK((p.next_unit(3) - q.next_unit(3)).norm() > 0);
}

TEST_CASE("samples land where they should") {
  for (SampleMode mode : {SampleMode::pseudo_random, SampleMode::low_discrepancy}) {
    const SampleStream s(9, mode);
    Vec mean = Vec::Zero(3);
    for (std::uint64_t i = 0; i < 4000; ++i) {
      const Vec u = s.unit_at(i, 3);
      CHECK(std::abs(u.norm() - 1.0) < 1e-14);
      mean += u;
      CHECK(s.ball_at(i, 4, 2.5).norm() <= 2.5 + 1e-12);
      const double r = s.log_ball_at(i, 4, 100.0).norm();
      CHECK(r <= 100.0 + 1e-9);
      CHECK(r >= 0.1 - 1e-12);
      const Vec cube = s.cube_at(i, 6);
      CHECK(cube.minCoeff() > 0.0);
      CHECK(cube.maxCoeff() < 1.0);
    }
    CHECK(mean.norm() / 4000 < 0.05);
  }
  const SampleStream one(3);
  int plus = 0;
  for (std::uint64_t i = 0; i < 200; ++i) plus += one.unit_at(i, 1)(0) > 0;
  CHECK(plus > 50);
  CHECK(plus < 150);
}
