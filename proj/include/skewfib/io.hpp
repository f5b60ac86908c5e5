#pragma once

// JSON and CSV formats. Matrices are flat row-major arrays (nested arrays are
// accepted on input). Every document carries "schema_version".

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "skewfib/bilinear.hpp"
#include "skewfib/chart.hpp"
#include "skewfib/contact.hpp"
#include "skewfib/error.hpp"
#include "skewfib/fibration.hpp"
#include "skewfib/report.hpp"
#include "skewfib/sphere.hpp"

namespace skewfib::io {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Non-finite doubles become null.
inline json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

inline json to_json(const Mat& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(number(m(i, j)));
  return out;
}

inline Vec vec_from_json(const json& j) {
  require(j.is_array(), ErrorCode::invalid_input, "expected an array of numbers");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    require(j[i].is_number(), ErrorCode::invalid_input, "expected a number");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

/// Flat row-major or nested rows.
inline Mat mat_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  require(j.is_array(), ErrorCode::invalid_input, "expected a matrix array");
  Mat m(rows, cols);
  if (!j.empty() && j.front().is_array()) {
    require(static_cast<Eigen::Index>(j.size()) == rows, ErrorCode::invalid_input, "matrix has the wrong row count");
    for (Eigen::Index i = 0; i < rows; ++i) {
      const Vec row = vec_from_json(j[i]);
      require(row.size() == cols, ErrorCode::invalid_input, "matrix row has the wrong length");
      m.row(i) = row.transpose();
    }
    return m;
  }
  const Vec flat = vec_from_json(j);
  require(flat.size() == rows * cols, ErrorCode::invalid_input, "matrix has the wrong number of entries");
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = flat(i * cols + c);
  return m;
}

/// Square matrix document: {"rows", "cols", "data"} or a bare (nested) array.
inline json matrix_document(const Mat& m) {
  return {{"schema_version", kSchemaVersion}, {"rows", m.rows()}, {"cols", m.cols()}, {"data", to_json(m)}};
}

inline Mat matrix_from_document(const json& j) {
  if (j.is_object() && j.contains("data")) {
    return mat_from_json(j.at("data"), j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  }
  require(j.is_array() && !j.empty(), ErrorCode::invalid_input, "expected a matrix document");
  if (j.front().is_array()) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    return mat_from_json(j, rows, static_cast<Eigen::Index>(j.front().size()));
  }
  const auto side = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(j.size()))));
  require(side * side == static_cast<Eigen::Index>(j.size()), ErrorCode::invalid_input,
          "flat matrix without dimensions must be square");
  return mat_from_json(j, side, side);
}

// Bilinear maps: {"q", "kp1", "mats": [flat q x q]}.

inline json to_json(const BilinearMap& a) {
  json mats = json::array();
  for (const Mat& m : a.mats()) mats.push_back(to_json(m));
  return {{"schema_version", kSchemaVersion}, {"q", a.q()}, {"kp1", a.kp1()}, {"mats", mats}};
}

inline BilinearMap bilinear_from_json(const json& j) {
  const int q = j.at("q").get<int>();
  const int kp1 = j.at("kp1").get<int>();
  require(q >= 1 && kp1 >= 1, ErrorCode::invalid_input, "bilinear map needs q, kp1 >= 1");
  const json& mats = j.at("mats");
  require(mats.is_array() && static_cast<int>(mats.size()) == kp1, ErrorCode::invalid_input,
          "bilinear map must list kp1 matrices");
  std::vector<Mat> out;
  for (const json& m : mats) out.push_back(mat_from_json(m, q, q));
  return BilinearMap(std::move(out));
}

// Charts.

inline json to_json(const Chart& c) {
  json out;
  out["schema_version"] = kSchemaVersion;
  out["k"] = c.k();
  out["q"] = c.q();
  if (!c.name().empty()) {
    out["kind"] = "builtin";
    json params = json::object();
    for (const auto& [key, value] : c.params()) params[key] = value;
    json builtin = {{"name", c.name()}, {"params", params}};
    if (c.inner()) builtin["local"] = to_json(*c.inner());
    out["builtin"] = builtin;
  } else {
    require(c.is_linear_or_affine(), ErrorCode::invalid_input, "anonymous smooth charts cannot be serialized");
    out["kind"] = std::string(to_string(c.kind()));
  }
  if (c.is_linear_or_affine()) {
    json mats = json::array();
    for (const Mat& m : c.linear_part()) mats.push_back(to_json(m));
    out["C"] = mats;
    if (c.kind() == ChartKind::affine) out["B0"] = to_json(c.offset());
  }
  out["status"] = c.status() == ChartStatus::verified ? "verified" : "candidate";
  if (c.status() == ChartStatus::verified) out["margin"] = number(c.verified_margin());
  return out;
}

inline double param(const json& params, const char* key) {
  require(params.contains(key), ErrorCode::invalid_input, std::string("builtin parameter '") + key + "' missing");
  return params.at(key).get<double>();
}

inline Chart chart_from_json(const json& j);

inline Chart builtin_chart(const std::string& name, const json& params, const json* local) {
  if (name == "hopf3") return charts::hopf3();
  if (name == "hopf7") return charts::hopf7();
  if (name == "hopf15") return charts::hopf15();
  if (name == "hopf_line")
    return charts::hopf_line(static_cast<int>(param(params, "m")), param(params, "a"), param(params, "b"));
  if (name == "gluck_yang") return charts::gluck_yang(static_cast<int>(param(params, "m")));
  if (name == "parallel")
    return charts::parallel(static_cast<int>(param(params, "k")), static_cast<int>(param(params, "q")));
  if (name == "quadratic_germ") return charts::quadratic_germ(param(params, "eps"));
  if (name == "hopf_shifted") {
    const int dim = static_cast<int>(param(params, "dim"));
    const int q = (dim + 1) / 2;
    Vec x0(q);
    for (int i = 0; i < q; ++i) x0(i) = param(params, ("x0_" + std::to_string(i)).c_str());
    return charts::hopf_shifted(dim, x0);
  }
  if (name == "extended") {
    require(local != nullptr, ErrorCode::invalid_input, "extended chart needs its local chart");
    return blend_germ(chart_from_json(*local), param(params, "blend_r"));
  }
  throw Error(ErrorCode::invalid_input, "unknown builtin chart '" + name + "'");
}

inline Chart chart_from_json(const json& j) {
  require(j.is_object(), ErrorCode::invalid_input, "chart must be a JSON object");
  const std::string kind = j.value("kind", std::string("linear"));
  Chart c;
  if (kind == "builtin") {
    const json& b = j.at("builtin");
    const json params = b.value("params", json::object());
    const json* local = b.contains("local") ? &b.at("local") : nullptr;
    c = builtin_chart(b.at("name").get<std::string>(), params, local);
  } else {
    const int k = j.at("k").get<int>();
    const int q = j.at("q").get<int>();
    require(k >= 1 && q >= 1, ErrorCode::invalid_input, "chart needs k, q >= 1");
    const json& mats = j.at("C");
    require(mats.is_array() && static_cast<int>(mats.size()) == k, ErrorCode::invalid_input,
            "chart must list k matrices C");
    std::vector<Mat> cs;
    for (const json& m : mats) cs.push_back(mat_from_json(m, q, q));
    if (kind == "linear")
      c = Chart::linear(std::move(cs));
    else if (kind == "affine")
      c = Chart::affine(std::move(cs), mat_from_json(j.at("B0"), q, k));
    else
      throw Error(ErrorCode::invalid_input, "unknown chart kind '" + kind + "'");
  }
  if (j.contains("k")) require(j.at("k").get<int>() == c.k(), ErrorCode::invalid_input, "chart k does not match");
  if (j.contains("q")) require(j.at("q").get<int>() == c.q(), ErrorCode::invalid_input, "chart q does not match");
  if (j.value("status", std::string("candidate")) == "verified" && j.contains("margin") && j.at("margin").is_number())
    c.mark_verified(j.at("margin").get<double>());
  return c;
}

// Reports.

inline json to_json(const VerificationReport& r) {
  json witnesses = json::array();
  for (const Witness& w : r.witnesses) {
    json inputs = json::array();
    for (const Vec& v : w.inputs) inputs.push_back(to_json(v));
    witnesses.push_back({{"label", w.label}, {"inputs", inputs}, {"value", number(w.value)}});
  }
  json details = json::object();
  for (const auto& [key, value] : r.details) details[key] = number(value);
  return {{"schema_version", kSchemaVersion},
          {"check", r.check},
          {"verdict", std::string(to_string(r.verdict))},
          {"exact", r.exact},
          {"margin", number(r.margin)},
          {"witnesses", witnesses},
          {"sampling",
           {{"seed", r.sampling.seed},
            {"N", r.sampling.count},
            {"radius", number(r.sampling.radius)},
            {"mode", std::string(to_string(r.sampling.mode))}}},
          {"details", details},
          {"notes", r.notes}};
}

inline json to_json(const ContactReport& r) {
  return {{"schema_version", kSchemaVersion}, {"check", "contact"},      {"point", to_json(r.point)},
          {"det_margin", number(r.det_margin)},   {"is_contact", r.is_contact}, {"crosscheck", number(r.crosscheck)}};
}

inline json to_json(const PlaneInvariantReport& r) {
  return {{"schema_version", kSchemaVersion},
          {"check", "invariant-planes"},
          {"is_invariant", r.is_invariant},
          {"a", number(r.a)},
          {"b", number(r.b)},
          {"identity_residual", number(r.identity_residual)},
          {"spectrum_spread", number(r.spectrum_spread)},
          {"max_residual", number(r.max_residual)},
          {"worst_u", to_json(r.worst_u)}};
}

// Files.

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::invalid_input, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::invalid_input, "malformed JSON in '" + path + "': " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  require(out.good(), ErrorCode::invalid_input, "cannot write '" + path + "'");
  out << text;
}

// CSV.

inline std::string format_double(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

/// fiber_id, i1..ik, x1..xn
inline void write_fiber_csv(std::ostream& out, const std::vector<FiberSample>& samples, int k, int n) {
  out << "fiber_id";
  for (int j = 1; j <= k; ++j) out << ",i" << j;
  for (int j = 1; j <= n; ++j) out << ",x" << j;
  out << '\n';
  for (const FiberSample& s : samples) {
    out << s.fiber_id;
    for (int i : s.index) out << ',' << i;
    for (Eigen::Index j = 0; j < s.x.size(); ++j) out << ',' << format_double(s.x(j));
    out << '\n';
  }
}

/// circle_id, theta, x1..x_{2m+2}
inline void write_circle_csv(std::ostream& out, const std::vector<std::vector<Vec>>& circles) {
  const Eigen::Index dim = circles.empty() || circles.front().empty() ? 0 : circles.front().front().size();
  out << "circle_id,theta";
  for (Eigen::Index j = 1; j <= dim; ++j) out << ",x" << j;
  out << '\n';
  for (std::size_t c = 0; c < circles.size(); ++c) {
    const std::size_t steps = circles[c].size();
    for (std::size_t s = 0; s < steps; ++s) {
      out << c << ',' << format_double(2.0 * M_PI * static_cast<double>(s) / static_cast<double>(steps));
      for (Eigen::Index j = 0; j < dim; ++j) out << ',' << format_double(circles[c][s](j));
      out << '\n';
    }
  }
}

}  // namespace skewfib::io
