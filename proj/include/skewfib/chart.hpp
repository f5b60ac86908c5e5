#pragma once

// A chart is a map B: R^q -> Hom(R^k, R^q) over a transverse coordinate plane
// E = {t = 0} of R^n = R^k x R^q. The fiber through y in E is the graph
// {(t, B(y) t + y)}. Points of R^n are laid out t-first: x = (t, z).

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "skewfib/bilinear.hpp"
#include "skewfib/error.hpp"
#include "skewfib/numeric.hpp"

namespace skewfib {

enum class ChartKind { linear, affine, smooth };
enum class ChartStatus { candidate, verified };

inline std::string_view to_string(ChartKind kind) {
  switch (kind) {
    case ChartKind::linear: return "linear";
    case ChartKind::affine: return "affine";
    case ChartKind::smooth: return "smooth";
  }
  return "unknown";
}

class Chart {
 public:
  using Eval = std::function<Mat(const Vec&)>;
  using Derivative = std::function<std::vector<Mat>(const Vec&)>;

  Chart() = default;

  /// B(y) t = sum_j t_j C_j y
  static Chart linear(std::vector<Mat> c) {
    require(!c.empty(), ErrorCode::invalid_input, "linear chart needs k >= 1 matrices");
    Chart out;
    out.k_ = static_cast<int>(c.size());
    out.q_ = static_cast<int>(c.front().rows());
    for (const Mat& m : c)
      require(m.rows() == out.q_ && m.cols() == out.q_, ErrorCode::invalid_input,
              "chart matrices must be q x q");
    out.kind_ = ChartKind::linear;
    out.c_ = std::move(c);
    return out;
  }

  /// B(y) = B0 + (C_1 y | ... | C_k y)
  static Chart affine(std::vector<Mat> c, Mat b0) {
    Chart out = linear(std::move(c));
    require(b0.rows() == out.q_ && b0.cols() == out.k_, ErrorCode::invalid_input, "B0 must be q x k");
    out.kind_ = ChartKind::affine;
    out.b0_ = std::move(b0);
    return out;
  }

  /// A smooth chart given by closed forms. Without `derivative` the chart
  /// differentiates itself by Richardson-extrapolated central differences.
  static Chart smooth(int k, int q, Eval eval, Derivative derivative = {}) {
    require(k >= 1 && q >= 1, ErrorCode::invalid_input, "chart needs k, q >= 1");
    require(static_cast<bool>(eval), ErrorCode::invalid_input, "smooth chart needs an evaluator");
    Chart out;
    out.k_ = k;
    out.q_ = q;
    out.kind_ = ChartKind::smooth;
    out.eval_ = std::move(eval);
    out.deriv_ = std::move(derivative);
    return out;
  }

  int k() const { return k_; }
  int q() const { return q_; }
  int n() const { return k_ + q_; }
  ChartKind kind() const { return kind_; }
  bool is_linear_or_affine() const { return kind_ != ChartKind::smooth; }
  bool has_analytic_derivative() const { return kind_ != ChartKind::smooth || static_cast<bool>(deriv_); }

  const std::vector<Mat>& linear_part() const { return c_; }
  Mat offset() const { return kind_ == ChartKind::affine ? b0_ : Mat::Zero(q_, k_); }

  /// q x k matrix B(y).
  Mat B(const Vec& y) const {
    require(y.size() == q_, ErrorCode::dimension_mismatch, "point of E has the wrong dimension");
    if (kind_ == ChartKind::smooth) return eval_(y);
    Mat out(q_, k_);
    for (int j = 0; j < k_; ++j) out.col(j) = c_[j] * y;
    if (kind_ == ChartKind::affine) out += b0_;
    return out;
  }

  /// q x (k+1) matrix [B(y) | y].
  Mat A(const Vec& y) const {
    Mat out(q_, k_ + 1);
    out.leftCols(k_) = B(y);
    out.col(k_) = y;
    return out;
  }

  /// D_j = d(B(y) e_j)/dy, j = 1..k, each q x q.
  std::vector<Mat> derivative(const Vec& y) const {
    if (kind_ != ChartKind::smooth) return c_;
    if (deriv_) return deriv_(y);
    std::vector<Mat> out;
    for (int j = 0; j < k_; ++j)
      out.push_back(jacobian_richardson([&](const Vec& p) -> Vec { return eval_(p).col(j); }, y));
    return out;
  }

  /// The bilinear map (xi, (t, lambda)) -> dB_y(xi) t + lambda xi as matrices {D_1..D_k, I}.
  BilinearMap differential(const Vec& y) const {
    std::vector<Mat> mats = derivative(y);
    mats.push_back(Mat::Identity(q_, q_));
    return BilinearMap(std::move(mats));
  }

  // Provenance, used for serialization and reports.
  const std::string& name() const { return name_; }
  const std::map<std::string, double>& params() const { return params_; }
  const std::shared_ptr<const Chart>& inner() const { return inner_; }
  Chart& named(std::string name, std::map<std::string, double> params = {},
               std::shared_ptr<const Chart> inner = nullptr) {
    name_ = std::move(name);
    params_ = std::move(params);
    inner_ = std::move(inner);
    return *this;
  }

  ChartStatus status() const { return status_; }
  double verified_margin() const { return margin_; }
  Chart& mark_verified(double margin) {
    status_ = ChartStatus::verified;
    margin_ = margin;
    return *this;
  }

 private:
  int k_ = 0;
  int q_ = 0;
  ChartKind kind_ = ChartKind::linear;
  std::vector<Mat> c_;
  Mat b0_;
  Eval eval_;
  Derivative deriv_;
  std::string name_;
  std::map<std::string, double> params_;
  std::shared_ptr<const Chart> inner_;
  ChartStatus status_ = ChartStatus::candidate;
  double margin_ = 0.0;
};

/// Linear chart of a nonsingular bilinear map, normalized so the y-column
/// (the first matrix, the identity unit of the algebras) becomes I:
/// C_j = M_1^{-1} M_{j+1}.
inline Chart from_bilinear(const BilinearMap& a, const Tolerance& tol = {}) {
  require(a.kp1() >= 2, ErrorCode::invalid_input, "from_bilinear needs kp1 >= 2");
  const Vec s = singular_values(a.mat(0));
  require(!tol.singular(s(s.size() - 1), s(0)), ErrorCode::singular_y_column,
          "first matrix of the bilinear map is not invertible");
  const auto lu = a.mat(0).partialPivLu();
  std::vector<Mat> c;
  for (int j = 1; j < a.kp1(); ++j) c.push_back(lu.solve(a.mat(j)));
  return Chart::linear(std::move(c));
}

/// 2m x 2m matrix with [[0, 1/2], [-1/2, 0]] blocks on the diagonal and an
/// identity block in the top right corner. No real eigenvalues, yet M - M^T
/// is singular.
inline Mat gluck_yang_matrix(int m) {
  require(m >= 2, ErrorCode::invalid_input, "gluck_yang needs m >= 2");
  Mat g = Mat::Zero(2 * m, 2 * m);
  for (int b = 0; b < m; ++b) {
    g(2 * b, 2 * b + 1) = 0.5;
    g(2 * b + 1, 2 * b) = -0.5;
  }
  g.block(0, 2 * (m - 1), 2, 2) += Mat::Identity(2, 2);
  require(min_abs_imag(eigenvalues(g)) > 0.1, ErrorCode::convergence_failure,
          "gluck_yang spectrum check failed");
  require(sigma_min(g - g.transpose()) <= 1e-12, ErrorCode::convergence_failure,
          "gluck_yang antisymmetric part unexpectedly invertible");
  return g;
}

namespace charts {

inline Chart hopf_line(int m, double a, double b) {
  require(m >= 1, ErrorCode::invalid_input, "hopf_line needs m >= 1");
  require(b != 0.0, ErrorCode::invalid_input, "hopf_line needs b != 0");
  Chart c = Chart::linear({a * Mat::Identity(2 * m, 2 * m) + b * complex_structure(m)});
  c.named("hopf_line", {{"m", m}, {"a", a}, {"b", b}});
  return c;
}

inline Chart hopf3() {
  Chart c = from_bilinear(from_algebra("complex", 2));
  c.named("hopf3");
  return c;
}

inline Chart hopf7() {
  Chart c = from_bilinear(from_algebra("quaternion", 4));
  c.named("hopf7");
  return c;
}

inline Chart hopf15() {
  Chart c = from_bilinear(from_algebra("octonion", 8));
  c.named("hopf15");
  return c;
}

/// A Hopf chart with its last column translated by a constant x0: the fiber
/// over 0 no longer passes through the origin, the linear part is unchanged.
inline Chart hopf_shifted(int dim, const Vec& x0) {
  Chart base = dim == 3 ? hopf3() : dim == 7 ? hopf7() : dim == 15 ? hopf15() : Chart();
  require(base.k() > 0, ErrorCode::invalid_input, "Hopf charts exist for dim 3, 7, 15");
  require(x0.size() == base.q(), ErrorCode::dimension_mismatch, "shift has the wrong dimension");
  Mat b0 = Mat::Zero(base.q(), base.k());
  b0.col(base.k() - 1) = x0;
  Chart c = Chart::affine(base.linear_part(), b0);
  std::map<std::string, double> params{{"dim", dim}};
  for (int i = 0; i < x0.size(); ++i) params["x0_" + std::to_string(i)] = x0(i);
  c.named("hopf_shifted", params);
  return c;
}

inline Chart gluck_yang(int m) {
  Chart c = Chart::linear({gluck_yang_matrix(m)});
  c.named("gluck_yang", {{"m", m}});
  return c;
}

/// B == 0: every fiber is a translate of R^k x {0}. Degenerate, not skew.
inline Chart parallel(int k, int q) {
  require(k >= 1 && q >= 1, ErrorCode::invalid_input, "parallel chart needs k, q >= 1");
  Chart c = Chart::linear(std::vector<Mat>(k, Mat::Zero(q, q)));
  c.named("parallel", {{"k", k}, {"q", q}});
  return c;
}

/// Germ B(y) = J y + eps (y1^2, y1 y2) on R^2, k = 1.
inline Chart quadratic_germ(double eps) {
  auto eval = [eps](const Vec& y) -> Mat {
    Mat b(2, 1);
    b(0, 0) = -y(1) + eps * y(0) * y(0);
    b(1, 0) = y(0) + eps * y(0) * y(1);
    return b;
  };
  auto deriv = [eps](const Vec& y) -> std::vector<Mat> {
    Mat d(2, 2);
    d << 2 * eps * y(0), -1.0, 1.0 + eps * y(1), eps * y(0);
    return {d};
  };
  Chart c = Chart::smooth(1, 2, eval, deriv);
  c.named("quadratic_germ", {{"eps", eps}});
  return c;
}

}  // namespace charts

}  // namespace skewfib
