#pragma once

// Seeded, counter-based sampling. Sample i of a stream depends only on
// (seed, mode, i), never on what was drawn before it, so pre-generated sample
// lists are identical no matter how the consumer schedules its work.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

#include "skewfib/error.hpp"
#include "skewfib/numeric.hpp"

namespace skewfib {

enum class SampleMode { pseudo_random, low_discrepancy };

inline std::string_view to_string(SampleMode mode) {
  return mode == SampleMode::pseudo_random ? "pseudo-random" : "low-discrepancy";
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Uniform in the open interval (0, 1).
inline double hashed_uniform(std::uint64_t seed, std::uint64_t index, std::uint64_t component) {
  const std::uint64_t h = splitmix64(splitmix64(seed ^ splitmix64(index)) + component);
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

/// Generator of the R_d Kronecker sequence: the positive root of x^{d+1} = x + 1.
inline double kronecker_root(int d) {
  double x = 2.0;
  for (int it = 0; it < 64; ++it) x = std::pow(1.0 + x, 1.0 / (d + 1));
  return x;
}

inline double frac(double x) { return x - std::floor(x); }

}  // namespace detail

class SampleStream {
 public:
  explicit SampleStream(std::uint64_t seed = 0, SampleMode mode = SampleMode::pseudo_random)
      : seed_(seed), mode_(mode) {}

  std::uint64_t seed() const { return seed_; }
  SampleMode mode() const { return mode_; }
  std::uint64_t counter() const { return counter_; }

  /// Point of the unit cube [0,1)^dim for sample `index`.
  Vec cube_at(std::uint64_t index, int dim) const {
    Vec u(dim);
    if (mode_ == SampleMode::pseudo_random) {
      for (int c = 0; c < dim; ++c) u(c) = detail::hashed_uniform(seed_, index, c);
      return u;
    }
    // R_d sequence with a seed-dependent Cranley-Patterson shift.
    const double g = detail::kronecker_root(dim);
    double power = 1.0;
    for (int c = 0; c < dim; ++c) {
      power /= g;
      const double shift = detail::hashed_uniform(seed_, 0xffffffffULL, c);
      double v = detail::frac(shift + static_cast<double>(index + 1) * power);
      if (v <= 0.0) v = 0x1.0p-53;
      u(c) = v;
    }
    return u;
  }

  /// Standard Gaussian vector (Box-Muller on pairs of cube coordinates).
  Vec gaussian_at(std::uint64_t index, int dim) const {
    const int pairs = (dim + 1) / 2;
    const Vec u = cube_at(index, 2 * pairs);
    Vec g(dim);
    for (int p = 0; p < pairs; ++p) {
      const double r = std::sqrt(-2.0 * std::log(u(2 * p)));
      const double theta = 2.0 * std::numbers::pi * u(2 * p + 1);
      g(2 * p) = r * std::cos(theta);
      if (2 * p + 1 < dim) g(2 * p + 1) = r * std::sin(theta);
    }
    return g;
  }

  /// Uniform point on S^{dim-1}: a normalized Gaussian vector.
  Vec unit_at(std::uint64_t index, int dim) const {
    require(dim >= 1, ErrorCode::invalid_input, "sphere dimension must be positive");
    if (dim == 1) return Vec::Constant(1, cube_at(index, 1)(0) < 0.5 ? -1.0 : 1.0);
    Vec g = gaussian_at(index, dim);
    double nrm = g.norm();
    // A zero Gaussian draw has probability zero; nudge deterministically anyway.
    if (nrm == 0.0) {
      g(0) = 1.0;
      nrm = 1.0;
    }
    return g / nrm;
  }

  /// Uniform point in the closed ball of the given radius.
  Vec ball_at(std::uint64_t index, int dim, double radius) const {
    const Vec dir = unit_at(index, dim);
    const double u = detail::hashed_uniform(seed_ ^ 0x5bd1e995ULL, index, 7);
    return radius * std::pow(u, 1.0 / dim) * dir;
  }

  /// Point in the ball with log-uniform radius in [radius * floor_ratio, radius].
  /// Covers every scale of a large ball, which uniform sampling does not.
  Vec log_ball_at(std::uint64_t index, int dim, double radius, double floor_ratio = 1e-3) const {
    const Vec dir = unit_at(index, dim);
    const double u = detail::hashed_uniform(seed_ ^ 0x27d4eb2fULL, index, 11);
    return radius * std::pow(floor_ratio, 1.0 - u) * dir;
  }

  double uniform_at(std::uint64_t index, std::uint64_t component = 0) const {
    return detail::hashed_uniform(seed_ ^ 0x68e31da4ULL, index, component);
  }

  Vec next_unit(int dim) { return unit_at(counter_++, dim); }
  Vec next_ball(int dim, double radius) { return ball_at(counter_++, dim, radius); }
  Vec next_gaussian(int dim) { return gaussian_at(counter_++, dim); }
  double next_uniform() { return uniform_at(counter_++); }

  std::vector<Vec> take_units(std::size_t count, int dim) {
    std::vector<Vec> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(next_unit(dim));
    return out;
  }

 private:
  std::uint64_t seed_;
  SampleMode mode_;
  std::uint64_t counter_ = 0;
};

}  // namespace skewfib
