#pragma once

// Command-line front end. run() is the whole program; main only forwards.
// Exit codes: 0 success, 1 verification failed, 2 usage or input error.

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "skewfib/skewfib.hpp"

namespace skewfib::cli {

using io::json;

inline constexpr int kOk = 0;
inline constexpr int kFailed = 1;
inline constexpr int kUsage = 2;

/// SKEWFIB_TOL = "rel[,abs]"
inline Tolerance tolerance_from_env(const char* value) {
  Tolerance tol;
  if (value == nullptr || *value == '\0') return tol;
  std::string text(value);
  const auto comma = text.find(',');
  try {
    std::size_t used = 0;
    const std::string rel = text.substr(0, comma);
    tol.rel = std::stod(rel, &used);
    require(used == rel.size(), ErrorCode::invalid_input, "bad SKEWFIB_TOL");
    if (comma != std::string::npos) {
      const std::string abs = text.substr(comma + 1);
      tol.abs = std::stod(abs, &used);
      require(used == abs.size(), ErrorCode::invalid_input, "bad SKEWFIB_TOL");
    }
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::invalid_input, "SKEWFIB_TOL must be 'rel[,abs]'");
  }
  require(tol.rel > 0 && tol.abs > 0, ErrorCode::invalid_input, "SKEWFIB_TOL values must be positive");
  return tol;
}

/// "0" means the zero vector of the given dimension; otherwise a comma list.
inline Vec parse_point(const std::string& text, Eigen::Index dim) {
  if (text == "0") return Vec::Zero(dim);
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      require(used == item.size(), ErrorCode::invalid_input, "bad number '" + item + "'");
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::invalid_input, "bad number '" + item + "'");
    }
  }
  require(static_cast<Eigen::Index>(values.size()) == dim, ErrorCode::invalid_input,
          "expected " + std::to_string(dim) + " coordinates, got " + std::to_string(values.size()));
  return Eigen::Map<Vec>(values.data(), dim);
}

inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::invalid_input, "bad number '" + item + "'");
    }
  }
  return out;
}

inline std::vector<Vec> points_from_json(const json& j, Eigen::Index dim) {
  require(j.is_array(), ErrorCode::invalid_input, "points file must hold an array of points");
  std::vector<Vec> out;
  for (const json& p : j) {
    Vec v = io::vec_from_json(p);
    require(v.size() == dim, ErrorCode::invalid_input, "point has the wrong dimension");
    out.push_back(std::move(v));
  }
  return out;
}

inline SampleMode parse_mode(const std::string& mode) {
  if (mode == "pseudo" || mode == "pseudo-random") return SampleMode::pseudo_random;
  if (mode == "lds" || mode == "low-discrepancy") return SampleMode::low_discrepancy;
  throw Error(ErrorCode::invalid_input, "mode must be pseudo or lds");
}

/// circle:R:N | ball:R:N | file:PATH, as points of E.
inline std::vector<Vec> parse_grid(const std::string& spec, int q, std::uint64_t seed) {
  const auto colon = spec.find(':');
  require(colon != std::string::npos, ErrorCode::invalid_input, "grid must be circle:R:N, ball:R:N or file:PATH");
  const std::string kind = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  if (kind == "file") return points_from_json(io::read_json_file(rest), q);
  const auto colon2 = rest.find(':');
  require(colon2 != std::string::npos, ErrorCode::invalid_input, "grid needs a radius and a count");
  double radius = 0;
  long count = 0;
  try {
    radius = std::stod(rest.substr(0, colon2));
    count = std::stol(rest.substr(colon2 + 1));
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::invalid_input, "bad grid radius or count");
  }
  require(radius >= 0 && count >= 1 && count <= 100000, ErrorCode::invalid_input, "grid count must be in 1..100000");
  std::vector<Vec> out;
  if (kind == "circle") {
    require(q >= 2, ErrorCode::invalid_input, "circle grids need q >= 2");
    for (long i = 0; i < count; ++i) {
      Vec y = Vec::Zero(q);
      const double th = 2.0 * M_PI * static_cast<double>(i) / static_cast<double>(count);
      y(0) = radius * std::cos(th);
      y(1) = radius * std::sin(th);
      out.push_back(y);
    }
    return out;
  }
  if (kind == "ball") {
    const SampleStream stream(seed);
    for (long i = 0; i < count; ++i) out.push_back(stream.ball_at(static_cast<std::uint64_t>(i), q, radius));
    return out;
  }
  throw Error(ErrorCode::invalid_input, "unknown grid kind '" + kind + "'");
}

/// A matrix from a matrix document, or C_1 of a k = 1 linear chart.
inline Mat load_matrix(const std::string& path) {
  const json j = io::read_json_file(path);
  if (j.is_object() && (j.contains("C") || j.contains("builtin"))) {
    const Chart c = io::chart_from_json(j);
    require(c.k() == 1 && c.is_linear_or_affine(), ErrorCode::invalid_input, "chart must be linear with k = 1");
    return c.linear_part()[0];
  }
  return io::matrix_from_document(j);
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"skewfib: skew fibrations of R^n and great sphere fibrations of S^n"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  // Shared option storage.
  std::string chart_path, matrix_path, bilinear_path, out_path, point_text, mode_text = "pseudo";
  std::uint64_t seed = 0, samples = 1000;
  double radius = 100.0;
  std::function<int()> action;

  auto emit = [&](const json& j) {
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty())
      out << text;
    else
      io::write_text_file(out_path, text);
  };
  auto load_chart = [&]() { return io::chart_from_json(io::read_json_file(chart_path)); };
  auto add_sampling = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Sampling seed")->capture_default_str();
    cmd->add_option("--samples", samples, "Number of samples")->capture_default_str()->check(CLI::PositiveNumber);
    cmd->add_option("--mode", mode_text, "pseudo | lds")->capture_default_str();
  };
  Tolerance tol;

  // dims
  auto* dims_cmd = app.add_subcommand("dims", "Hurwitz-Radon arithmetic and dimension tables");
  dims_cmd->require_subcommand(1);
  std::int64_t rho_q = 0;
  auto* rho_cmd = dims_cmd->add_subcommand("rho", "Hurwitz-Radon number rho(Q)");
  rho_cmd->add_option("Q", rho_q)->required();
  rho_cmd->callback([&] {
    action = [&] {
      emit({{"schema_version", io::kSchemaVersion}, {"q", rho_q}, {"rho", dims::rho(rho_q)}});
      return kOk;
    };
  });
  int adm_k = 0, adm_n = 0;
  bool adm_sphere = false;
  auto* adm_cmd = dims_cmd->add_subcommand("admissible", "Is (K, N) admissible?");
  adm_cmd->add_option("K", adm_k)->required();
  adm_cmd->add_option("N", adm_n)->required();
  adm_cmd->add_flag("--sphere", adm_sphere, "Explain the great sphere answer");
  adm_cmd->callback([&] {
    action = [&] {
      const dims::DimPair p{adm_k, adm_n};
      require(p.valid(), ErrorCode::invalid_input, "need 0 <= K < N");
      json j = {{"schema_version", io::kSchemaVersion},
                {"admissible_skew", dims::admissible_skew(p)},
                {"admissible_sphere", dims::admissible_sphere(p)}};
      if (adm_sphere && !dims::admissible_sphere(p)) j["message"] = "no sphere fibration exists";
      emit(j);
      return kOk;
    };
  });
  int table_n_max = 24;
  bool table_json = false;
  auto* table_cmd = dims_cmd->add_subcommand("table", "Admissible k for each n");
  table_cmd->add_option("--n-max", table_n_max)->capture_default_str()->check(CLI::Range(2, 4096));
  table_cmd->add_flag("--json", table_json);
  table_cmd->callback([&] {
    action = [&] {
      if (table_json) {
        json rows = json::array();
        for (int n = 3; n <= table_n_max; ++n) rows.push_back({{"n", n}, {"k", dims::skew_column(n)}});
        emit({{"schema_version", io::kSchemaVersion}, {"table", rows}});
        return kOk;
      }
      std::ostringstream s;
      s << "n\tadmissible k (skew fibrations of R^n by k-planes)\n";
      for (int n = 3; n <= table_n_max; ++n) {
        s << n << '\t';
        const std::vector<int> ks = dims::skew_column(n);
        if (ks.empty()) s << '-';
        for (std::size_t i = 0; i < ks.size(); ++i) s << (i ? " " : "") << ks[i];
        s << '\n';
      }
      out << s.str();
      return kOk;
    };
  });

  // build
  auto* build_cmd = app.add_subcommand("build", "Construct charts and bilinear maps");
  build_cmd->require_subcommand(1);
  int hopf_dim = 3;
  std::string shift_text;
  auto* hopf_cmd = build_cmd->add_subcommand("hopf", "Hopf chart of R^3, R^7 or R^15");
  hopf_cmd->add_option("--dim", hopf_dim)->capture_default_str();
  hopf_cmd->add_option("--shift", shift_text, "Translate the last column by x0 (comma list)");
  hopf_cmd->add_option("--out", out_path);
  hopf_cmd->callback([&] {
    action = [&] {
      require(hopf_dim == 3 || hopf_dim == 7 || hopf_dim == 15, ErrorCode::invalid_input, "--dim must be 3, 7 or 15");
      if (!shift_text.empty()) {
        emit(io::to_json(charts::hopf_shifted(hopf_dim, parse_point(shift_text, (hopf_dim + 1) / 2))));
      } else {
        emit(io::to_json(hopf_dim == 3 ? charts::hopf3() : hopf_dim == 7 ? charts::hopf7() : charts::hopf15()));
      }
      return kOk;
    };
  });
  int line_m = 1;
  double line_a = 0.0, line_b = 1.0;
  auto* line_cmd = build_cmd->add_subcommand("hopf-line", "Line chart B = aI + bJ on R^{2m}");
  line_cmd->add_option("--m", line_m)->capture_default_str();
  line_cmd->add_option("--a", line_a)->capture_default_str();
  line_cmd->add_option("--b", line_b)->capture_default_str();
  line_cmd->add_option("--out", out_path);
  line_cmd->callback([&] { action = [&] { emit(io::to_json(charts::hopf_line(line_m, line_a, line_b))); return kOk; }; });
  int gy_m = 2;
  auto* gy_cmd = build_cmd->add_subcommand("gluck-yang", "Non-contact line chart");
  gy_cmd->add_option("--m", gy_m)->capture_default_str();
  gy_cmd->add_option("--out", out_path);
  gy_cmd->callback([&] { action = [&] { emit(io::to_json(charts::gluck_yang(gy_m))); return kOk; }; });
  int par_k = 1, par_q = 2;
  auto* par_cmd = build_cmd->add_subcommand("parallel", "Degenerate chart B = 0");
  par_cmd->add_option("--k", par_k)->capture_default_str();
  par_cmd->add_option("--q", par_q)->capture_default_str();
  par_cmd->add_option("--out", out_path);
  par_cmd->callback([&] { action = [&] { emit(io::to_json(charts::parallel(par_k, par_q))); return kOk; }; });
  double germ_eps = 0.05;
  auto* qg_cmd = build_cmd->add_subcommand("quadratic-germ", "Germ B(y) = Jy + eps (y1^2, y1 y2)");
  qg_cmd->add_option("--eps", germ_eps)->capture_default_str();
  qg_cmd->add_option("--out", out_path);
  qg_cmd->callback([&] { action = [&] { emit(io::to_json(charts::quadratic_germ(germ_eps))); return kOk; }; });
  std::string algebra_name;
  int bl_kp1 = 0;
  std::int64_t hr_q = 0;
  bool as_chart = false;
  auto* bl_cmd = build_cmd->add_subcommand("bilinear", "Bilinear map from an algebra or a Hurwitz-Radon family");
  bl_cmd->add_option("--algebra", algebra_name, "complex | quaternion | octonion");
  bl_cmd->add_option("--hr-q", hr_q, "Hurwitz-Radon family on R^q");
  bl_cmd->add_option("--kp1", bl_kp1, "Number of matrices")->required();
  bl_cmd->add_flag("--chart", as_chart, "Emit the chart instead of the map");
  bl_cmd->add_option("--out", out_path);
  bl_cmd->callback([&] {
    action = [&] {
      require(algebra_name.empty() != (hr_q == 0), ErrorCode::invalid_input, "give exactly one of --algebra, --hr-q");
      const BilinearMap a = algebra_name.empty() ? hr_family(hr_q, bl_kp1) : from_algebra(algebra_name, bl_kp1);
      emit(as_chart ? io::to_json(from_bilinear(a, tol)) : io::to_json(a));
      return kOk;
    };
  });
  auto* fj_cmd = build_cmd->add_subcommand("from-json", "Chart from a bilinear map file");
  fj_cmd->add_option("--bilinear", bilinear_path)->required();
  fj_cmd->add_option("--out", out_path);
  fj_cmd->callback([&] {
    action = [&] {
      emit(io::to_json(from_bilinear(io::bilinear_from_json(io::read_json_file(bilinear_path)), tol)));
      return kOk;
    };
  });

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Run a verifier and print its JSON report");
  verify_cmd->require_subcommand(1);
  auto report_exit = [&](const VerificationReport& r) {
    emit(io::to_json(r));
    return r.failed() ? kFailed : kOk;
  };
  auto* vs_cmd = verify_cmd->add_subcommand("skew", "Sampled kernel test for skewness");
  vs_cmd->add_option("--chart", chart_path)->required();
  vs_cmd->add_option("--radius", radius)->capture_default_str();
  add_sampling(vs_cmd);
  vs_cmd->callback([&] {
    action = [&] {
      return report_exit(verify_skew(load_chart(), radius, std::max<std::uint64_t>(samples, 2),
                                     SampleStream(seed, parse_mode(mode_text)), tol));
    };
  });
  auto* vn_cmd = verify_cmd->add_subcommand("nondeg", "Nondegeneracy of dA");
  vn_cmd->add_option("--chart", chart_path)->required();
  vn_cmd->add_option("--radius", radius)->capture_default_str();
  add_sampling(vn_cmd);
  vn_cmd->callback([&] {
    action = [&] {
      return report_exit(verify_nondegenerate(load_chart(), radius, samples, SampleStream(seed, parse_mode(mode_text)), tol));
    };
  });
  auto* vb_cmd = verify_cmd->add_subcommand("bilinear", "Nonsingularity of a bilinear map");
  vb_cmd->add_option("--bilinear", bilinear_path)->required();
  add_sampling(vb_cmd);
  vb_cmd->callback([&] {
    action = [&] {
      return report_exit(verify_nonsingular(io::bilinear_from_json(io::read_json_file(bilinear_path)),
                                            SampleStream(seed, parse_mode(mode_text)), samples, tol));
    };
  });
  auto* ve_cmd = verify_cmd->add_subcommand("eigen", "Spectrum of dB for a linear line chart (or a matrix)");
  ve_cmd->add_option("--chart", chart_path);
  ve_cmd->add_option("--matrix", matrix_path);
  ve_cmd->callback([&] {
    action = [&] {
      require(chart_path.empty() != matrix_path.empty(), ErrorCode::invalid_input, "give exactly one of --chart, --matrix");
      const Mat m = load_matrix(chart_path.empty() ? matrix_path : chart_path);
      const std::vector<Complex> spec = eigenvalues(m);
      json values = json::array();
      for (const Complex& z : spec) values.push_back({io::number(z.real()), io::number(z.imag())});
      const double margin = min_abs_imag(spec);
      const bool real = margin <= tol.threshold(std::max(1.0, sigma_max(m)));
      emit({{"schema_version", io::kSchemaVersion},
            {"check", "eigen"},
            {"verdict", real ? "fail" : "pass"},
            {"exact", true},
            {"margin", io::number(margin)},
            {"eigenvalues", values}});
      return real ? kFailed : kOk;
    };
  });
  auto* vc_cmd = verify_cmd->add_subcommand("contact", "Contact condition at one point of E");
  vc_cmd->add_option("--chart", chart_path)->required();
  vc_cmd->add_option("--point", point_text, "Point of E (comma list, or 0)")->default_val("0");
  vc_cmd->callback([&] {
    action = [&] {
      const Chart c = load_chart();
      const ContactReport r = contact_check(c, parse_point(point_text, c.q()), 1e-8, tol);
      emit(io::to_json(r));
      return r.is_contact ? kOk : kFailed;
    };
  });
  auto* vi_cmd = verify_cmd->add_subcommand("invariant-planes", "Is M invariant on planes?");
  vi_cmd->add_option("--matrix", matrix_path)->required();
  add_sampling(vi_cmd);
  vi_cmd->callback([&] {
    action = [&] {
      const PlaneInvariantReport r =
          invariant_on_planes(load_matrix(matrix_path), samples, SampleStream(seed, parse_mode(mode_text)), tol);
      emit(io::to_json(r));
      return r.is_invariant ? kOk : kFailed;
    };
  });

  // fiber
  auto* fiber_cmd = app.add_subcommand("fiber", "The fiber through a point of R^n");
  fiber_cmd->add_option("--chart", chart_path)->required();
  fiber_cmd->add_option("--point", point_text, "Point (t, z) of R^n, comma list")->required();
  fiber_cmd->callback([&] {
    action = [&] {
      const Chart c = load_chart();
      const Vec x = parse_point(point_text, c.n());
      const Vec y = fiber_solve(c, x, tol);
      const AffinePlane p = fiber_plane(c, y);
      emit({{"schema_version", io::kSchemaVersion},
            {"point", io::to_json(x)},
            {"y", io::to_json(y)},
            {"residual", io::number(fiber_residual(c, x, y))},
            {"direction", io::to_json(p.direction().frame())},
            {"base", io::to_json(p.base())},
            {"distance", io::number(p.base().norm())},
            {"off_plane", io::number(p.distance(x))}});
      return kOk;
    };
  });

  // sample
  std::string grid_spec = "circle:1:12", t_range = "-5:5";
  int steps = 21;
  auto* sample_cmd = app.add_subcommand("sample", "Export fiber samples as CSV");
  sample_cmd->add_option("--chart", chart_path)->required();
  sample_cmd->add_option("--grid", grid_spec, "circle:R:N | ball:R:N | file:PATH")->capture_default_str();
  sample_cmd->add_option("--t-range", t_range, "a:b")->capture_default_str();
  sample_cmd->add_option("--steps", steps)->capture_default_str()->check(CLI::PositiveNumber);
  sample_cmd->add_option("--seed", seed);
  sample_cmd->add_option("--out", out_path);
  sample_cmd->callback([&] {
    action = [&] {
      const Chart c = load_chart();
      const auto colon = t_range.find(':');
      require(colon != std::string::npos, ErrorCode::invalid_input, "--t-range must be a:b");
      double t0 = 0, t1 = 0;
      try {
        t0 = std::stod(t_range.substr(0, colon));
        t1 = std::stod(t_range.substr(colon + 1));
      } catch (const std::logic_error&) {
        throw Error(ErrorCode::invalid_input, "--t-range must be a:b");
      }
      const auto samples_out = sample_fibers(c, parse_grid(grid_spec, c.q(), seed), t0, t1, steps);
      std::ostringstream csv;
      io::write_fiber_csv(csv, samples_out, c.k(), c.n());
      if (out_path.empty())
        out << csv.str();
      else
        io::write_text_file(out_path, csv.str());
      return kOk;
    };
  });

  // sphere
  auto* sphere_cmd = app.add_subcommand("sphere", "Great sphere fibrations");
  sphere_cmd->require_subcommand(1);
  auto* cc_cmd = sphere_cmd->add_subcommand("complete-check", "Does the chart complete to S^n?");
  cc_cmd->add_option("--chart", chart_path)->required();
  add_sampling(cc_cmd);
  cc_cmd->callback([&] {
    action = [&] {
      const Chart c = load_chart();
      if (!dims::admissible_sphere({c.k(), c.n()})) {
        emit({{"schema_version", io::kSchemaVersion},
              {"check", "completion"},
              {"verdict", "fail"},
              {"exact", true},
              {"k", c.k()},
              {"n", c.n()},
              {"message", "no sphere fibration exists"}});
        return kFailed;
      }
      return report_exit(completion_check(c, SampleStream(seed, parse_mode(mode_text)), samples, tol));
    };
  });
  bool probe = false;
  int circles = 0;
  auto* as_cmd = sphere_cmd->add_subcommand("assemble", "Great circle fibration of S^{2m+1} from M");
  as_cmd->add_option("--matrix", matrix_path)->required();
  as_cmd->add_flag("--probe", probe, "Check convergence of circles near the equatorial sphere");
  as_cmd->add_option("--circles", circles, "Export this many circles as CSV to --out");
  as_cmd->add_option("--seed", seed);
  as_cmd->add_option("--out", out_path);
  as_cmd->callback([&] {
    action = [&] {
      const GreatCircleAssembly assembly = assemble_great_circles(load_matrix(matrix_path), tol);
      const int d = 2 * assembly.m();
      const SampleStream stream(seed);
      json j = {{"schema_version", io::kSchemaVersion},
                {"check", "assemble"},
                {"m", assembly.m()},
                {"invariant", io::to_json(assembly.invariant())}};
      int code = kOk;
      if (probe) {
        const std::vector<double> dist{1e-1, 1e-2, 1e-3, 1e-4};
        const AssemblyProbe p = assembly_convergence(assembly, stream.unit_at(0, d), 0.3, dist);
        const bool ok = p.angles.back() <= 1e-3;
        j["probe"] = {{"distances", p.distances}, {"angles", p.angles}, {"converged", ok}};
        if (!ok) code = kFailed;
      }
      if (circles > 0) {
        require(!out_path.empty(), ErrorCode::invalid_input, "--circles needs --out");
        std::vector<std::vector<Vec>> pts;
        for (int i = 0; i < circles; ++i)
          pts.push_back(assembly.sample_circle(SpherePoint(stream.unit_at(1 + i, d + 2)), 64));
        std::ostringstream csv;
        io::write_circle_csv(csv, pts);
        io::write_text_file(out_path, csv.str());
      }
      out << j.dump(2) << "\n";
      return code;
    };
  });
  std::string fiber_y = "0", offset_text, t_values_text = "1e2,1e4,1e6";
  double cone_n = 1.0, cone_delta = 0.5;
  auto* pr_cmd = sphere_cmd->add_subcommand("probe", "Continuity at infinity along a ray");
  pr_cmd->add_option("--chart", chart_path)->required();
  pr_cmd->add_option("--fiber", fiber_y, "Point of E whose fiber gives the direction ell")->capture_default_str();
  pr_cmd->add_option("--offset", offset_text, "Base point of the ray (comma list)");
  pr_cmd->add_option("--t", t_values_text)->capture_default_str();
  pr_cmd->add_option("--cone-n", cone_n)->capture_default_str();
  pr_cmd->add_option("--delta", cone_delta)->capture_default_str();
  pr_cmd->callback([&] {
    action = [&] {
      const Chart c = load_chart();
      ConeProbe cp;
      cp.ell = fiber_plane(c, parse_point(fiber_y, c.q())).direction().frame().col(0);
      cp.N = cone_n;
      cp.delta = cone_delta;
      cp.t_values = parse_list(t_values_text);
      cp.offset = offset_text.empty() ? Vec::Zero(c.n()) : parse_point(offset_text, c.n());
      const std::vector<double> angles = continuity_probe(c, cp, tol);
      bool decreasing = true;
      for (std::size_t i = 1; i < angles.size(); ++i) decreasing = decreasing && angles[i] <= angles[i - 1];
      emit({{"schema_version", io::kSchemaVersion},
            {"check", "continuity-probe"},
            {"ell", io::to_json(cp.ell)},
            {"t", cp.t_values},
            {"angles", angles},
            {"decreasing", decreasing}});
      return decreasing ? kOk : kFailed;
    };
  });

  // germ
  auto* germ_cmd = app.add_subcommand("germ", "Germ extension");
  germ_cmd->require_subcommand(1);
  double blend = 1.0;
  auto* ext_cmd = germ_cmd->add_subcommand("extend", "Extend a local chart to all of R^q");
  ext_cmd->add_option("--chart", chart_path)->required();
  ext_cmd->add_option("--radius", blend, "Initial blend radius")->capture_default_str();
  add_sampling(ext_cmd);
  ext_cmd->add_option("--out", out_path, "Write the extended chart here");
  ext_cmd->callback([&] {
    action = [&] {
      const GermExtension e = extend_germ(load_chart(), blend, samples, seed, tol);
      json j = {{"schema_version", io::kSchemaVersion},
                {"blend_r", e.blend_r},
                {"halvings", e.halvings},
                {"report", io::to_json(e.report)}};
      if (out_path.empty())
        j["chart"] = io::to_json(e.chart);
      else
        io::write_text_file(out_path, io::to_json(e.chart).dump(2) + "\n");
      out << j.dump(2) << "\n";
      return e.report.failed() ? kFailed : kOk;
    };
  });

  // contact
  auto* contact_cmd = app.add_subcommand("contact", "Contact structures of line fibrations");
  contact_cmd->require_subcommand(1);
  std::string points_path;
  double contact_radius = 1.0;
  auto* ck_cmd = contact_cmd->add_subcommand("check", "Contact condition at several points of E");
  ck_cmd->add_option("--chart", chart_path)->required();
  auto* pts_opt = ck_cmd->add_option("--points", points_path, "JSON array of points of E");
  auto* smp_opt = ck_cmd->add_option("--samples", samples, "Number of sampled points");
  pts_opt->excludes(smp_opt);
  ck_cmd->add_option("--seed", seed);
  ck_cmd->add_option("--radius", contact_radius)->capture_default_str();
  ck_cmd->callback([&] {
    action = [&] {
      const Chart c = load_chart();
      std::vector<Vec> pts;
      if (!points_path.empty()) {
        pts = points_from_json(io::read_json_file(points_path), c.q());
      } else {
        const SampleStream stream(seed);
        for (std::uint64_t i = 0; i < samples; ++i) pts.push_back(stream.ball_at(i, c.q(), contact_radius));
      }
      json reports = json::array();
      bool all = true;
      double worst = std::numeric_limits<double>::infinity();
      for (const Vec& y : pts) {
        const ContactReport r = contact_check(c, y, 1e-8, tol);
        all = all && r.is_contact;
        worst = std::min(worst, r.det_margin);
        reports.push_back(io::to_json(r));
      }
      emit({{"schema_version", io::kSchemaVersion},
            {"check", "contact"},
            {"all_contact", all},
            {"min_det_margin", io::number(worst)},
            {"reports", reports}});
      return all ? kOk : kFailed;
    };
  });

  try {
    tol = tolerance_from_env(std::getenv("SKEWFIB_TOL"));
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << '\n' << app.help();
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  if (!action) {
    err << app.help();
    return kUsage;
  }
  try {
    return action();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace skewfib::cli
