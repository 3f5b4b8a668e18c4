// Command-line driver: build boundary kernels, run half-space Dirichlet
// solves, and execute the verification experiment suites.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hs/error.hpp"
#include "hs/experiments.hpp"
#include "hs/io.hpp"
#include "hs/solver.hpp"

using namespace hs;
using nlohmann::json;

namespace {

constexpr int kExitFail = 1;      // an experiment or report check failed
constexpr int kExitBadInput = 2;  // unusable input or contract violation
constexpr int kExitMathError = 3; // construction refused (splitting, radiality, ...)

EllipticSystem parse_system(const std::string& spec) {
  // either a JSON file path, or laplacian:n=2,M=1 / lame:n=2,mu=1,lambda=1
  if (spec.rfind("laplacian:", 0) == 0 || spec.rfind("lame:", 0) == 0) {
    std::map<std::string, double> kv;
    std::string args = spec.substr(spec.find(':') + 1);
    size_t pos = 0;
    while (pos < args.size()) {
      size_t eq = args.find('=', pos);
      size_t comma = args.find(',', pos);
      if (comma == std::string::npos) comma = args.size();
      if (eq == std::string::npos || eq > comma) fail(Err::BadInput, "bad system spec: " + spec);
      kv[args.substr(pos, eq - pos)] = std::strtod(args.substr(eq + 1, comma - eq - 1).c_str(), nullptr);
      pos = comma + 1;
    }
    if (spec.rfind("laplacian:", 0) == 0)
      return laplacian(static_cast<int>(kv.at("n")), kv.count("M") ? static_cast<int>(kv.at("M")) : 1);
    return lame(static_cast<int>(kv.at("n")), kv.at("mu"), kv.at("lambda"));
  }
  if (!std::filesystem::exists(spec)) fail(Err::BadInput, "system file not found: " + spec);
  return load_system(spec);
}

BoundaryField parse_datum(const std::string& spec, const BoundaryGrid& grid, int channels) {
  auto starts = [&spec](const char* p) { return spec.rfind(p, 0) == 0; };
  if (starts("constant:")) {
    double c = std::strtod(spec.c_str() + 9, nullptr);
    return sample(grid, channels, [c, channels](const double*, cplx* out) {
      for (int i = 0; i < channels; ++i) out[i] = cplx(c, 0.0);
    });
  }
  if (starts("indicator:")) {
    double r = std::strtod(spec.c_str() + 10, nullptr);
    return sample(grid, channels, [r, channels, &grid](const double* x, cplx* out) {
      double d2 = x[0] * x[0] + (grid.dim == 2 ? x[1] * x[1] : 0.0);
      double v = d2 < r * r ? 1.0 : 0.0;
      for (int i = 0; i < channels; ++i) out[i] = cplx(v, 0.0);
    });
  }
  if (starts("bumps:")) {
    unsigned seed = static_cast<unsigned>(std::strtoul(spec.c_str() + 6, nullptr, 10));
    return random_bumps(grid, channels, seed, false, grid.R / 4.0);
  }
  if (!std::filesystem::exists(spec + ".json"))
    fail(Err::BadInput, "datum field not found: " + spec + ".json");
  return load_field(spec);
}

std::vector<double> parse_list(const std::string& csv) {
  std::vector<double> out;
  size_t pos = 0;
  while (pos < csv.size()) {
    size_t comma = csv.find(',', pos);
    if (comma == std::string::npos) comma = csv.size();
    out.push_back(std::strtod(csv.substr(pos, comma - pos).c_str(), nullptr));
    pos = comma + 1;
  }
  return out;
}

json report_to_json(const PoissonReport& rep) {
  return json{{"decay_sup", rep.decay_sup},
              {"norm_deviation", rep.norm_deviation},
              {"pde_residual", rep.pde_residual},
              {"pde_residual_coarse", rep.pde_residual_coarse},
              {"pde_order", rep.pde_order},
              {"homogeneity_err", rep.homogeneity_err},
              {"green_consistency", rep.green_consistency}};
}

int cmd_kernel(const std::string& system_spec, const std::string& method_name, int dim, double R,
               int N, const std::string& t_csv, const std::string& out_dir, bool plot) {
  EllipticSystem sys = parse_system(system_spec);
  BoundaryGrid grid = make_grid(dim > 0 ? dim : sys.n - 1, R, N);
  KernelMethod method = kernel_method_from_string(method_name);
  PoissonConstruction pc = build_kernel(sys, grid, method);

  std::filesystem::create_directories(out_dir);
  for (double t : parse_list(t_csv)) {
    KernelMatrix kt = pc.slice(t, false);
    char name[64];
    std::snprintf(name, sizeof(name), "kernel_t%.17g", t);
    save_kernel(kt, (std::filesystem::path(out_dir) / name).string());
  }
  PoissonReport rep = verify_poisson_properties(pc);
  write_text_file((std::filesystem::path(out_dir) / "kernel_report.json").string(),
                  report_to_json(rep).dump(2) + "\n");
  if (plot && grid.dim == 1) {
    std::vector<double> xs, ys;
    for (int k = 0; k < grid.N; ++k) {
      xs.push_back(grid.coord(k));
      ys.push_back(pc.profile.at(k, 0, 0).real());
    }
    write_svg_curve((std::filesystem::path(out_dir) / "kernel_profile.svg").string(), xs, ys,
                    "kernel profile, first channel");
  }
  std::cout << "kernel written to " << out_dir << ", normalization deviation "
            << fmt17(rep.norm_deviation) << "\n";
  return 0;
}

int cmd_solve(const std::string& system_spec, const std::string& datum_spec,
              const std::string& method_name, const std::string& heights_csv, int dim, double R,
              int N, const std::string& out_base) {
  EllipticSystem sys = parse_system(system_spec);
  KernelMethod method = kernel_method_from_string(method_name);
  BoundaryGrid grid = make_grid(dim > 0 ? dim : sys.n - 1, R, N);
  BoundaryField f = parse_datum(datum_spec, grid, sys.M);
  if (!(f.grid == grid)) grid = f.grid;  // file data carries its own grid
  std::vector<double> heights = parse_list(heights_csv);

  PoissonConstruction pc = build_kernel(sys, grid, method);
  HalfSpaceField u = solve_with_kernel(pc, f, heights);
  if (!out_base.empty()) {
    std::filesystem::create_directories(std::filesystem::path(out_base).parent_path().string().empty()
                                            ? "."
                                            : std::filesystem::path(out_base).parent_path().string());
    save_halfspace_field(u, out_base);
  }
  TraceReport tr = trace_convergence(u, f, ConeSpec{1.0, std::nullopt});
  json rep = {{"max_trace_deviation", tr.max_deviation},
              {"trace_decay_rate", tr.decay_rate},
              {"probe_count", tr.probe_count}};
  if (!out_base.empty()) write_text_file(out_base + "_trace.json", rep.dump(2) + "\n");
  std::cout << rep.dump(2) << "\n";
  return 0;
}

int cmd_verify(const std::string& config_path, const std::string& out_path, int jobs) {
  RunConfig cfg = load_run_config(config_path);
  Envelopes env = load_envelopes(cfg.envelopes_path);
  auto results = run_experiments(cfg, env, jobs);
  std::string summary = summary_json(cfg, results);
  if (!out_path.empty()) {
    write_text_file(out_path, summary);
  } else {
    std::cout << summary;
  }
  for (const auto& r : results)
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name
              << (r.detail.empty() ? "" : "  [" + r.detail + "]") << "\n";
  return all_pass(results) ? 0 : kExitFail;
}

int cmd_spaces_norm(const std::string& spec_path, const std::string& field_base) {
  NormSpec spec = spec_from_json_file(spec_path);
  BoundaryField f = load_field(field_base);
  double value = norm(f, spec);
  json out = {{"space", spec.label()}, {"norm", value}};
  std::cout << out.dump(2) << "\n";
  return 0;
}

int cmd_maxop(const std::string& field_base, const std::string& weight_base, double p,
              const std::string& out_base) {
  BoundaryField f = load_field(field_base);
  BoundaryField mf = hl_maximal(f);
  if (!out_base.empty()) save_field(mf, out_base);
  json out;
  double lo = 1e300, hi = 0.0;
  for (long k = 0; k < f.grid.nodes(); ++k) {
    lo = std::min(lo, mf.at(k, 0).real());
    hi = std::max(hi, mf.at(k, 0).real());
  }
  out["maximal"] = {{"min", lo}, {"max", hi}};
  if (!weight_base.empty()) {
    Weight w = make_weight(load_field(weight_base), weight_base);
    ApReport ap = ap_constant(w, p);
    out["muckenhoupt"] = {{"p", ap.p},
                          {"constant", ap.constant},
                          {"argmax_side", ap.argmax_side},
                          {"argmax_center", ap.argmax_center}};
  }
  std::cout << out.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"half-space Dirichlet kernels, solves, and verification suites"};
  app.require_subcommand(1);

  // kernel
  auto* ck = app.add_subcommand("kernel", "build a boundary kernel and verify its properties");
  std::string k_system, k_method = "symbol", k_t = "1", k_out = "out";
  int k_dim = 0, k_N = 1024;
  double k_R = 64.0;
  bool k_plot = false;
  ck->add_option("--system", k_system, "system JSON file or laplacian:/lame: shorthand")->required();
  ck->add_option("--method", k_method, "explicit|radial|symbol");
  ck->add_option("--R", k_R, "grid half-width");
  ck->add_option("--N", k_N, "nodes per axis (power of two)");
  ck->add_option("--dim", k_dim, "boundary dimension (default n-1)");
  ck->add_option("--t", k_t, "comma-separated kernel heights");
  ck->add_option("--out", k_out, "output directory");
  ck->add_flag("--plot", k_plot, "emit an SVG profile plot");

  // solve
  auto* cs = app.add_subcommand("solve", "solve the Dirichlet problem by boundary convolution");
  std::string s_system, s_datum, s_method = "symbol", s_heights = "0.25,0.5,1,2", s_out;
  int s_dim = 0, s_N = 1024;
  double s_R = 64.0;
  cs->add_option("--system", s_system)->required();
  cs->add_option("--datum", s_datum, "field base path or constant:/indicator:/bumps: shorthand")
      ->required();
  cs->add_option("--method", s_method, "explicit|radial|symbol");
  cs->add_option("--heights", s_heights, "comma-separated heights (>= 2h)");
  cs->add_option("--R", s_R);
  cs->add_option("--N", s_N);
  cs->add_option("--dim", s_dim);
  cs->add_option("--out", s_out, "output base path for the solution field");

  // verify
  auto* cv = app.add_subcommand("verify", "run the experiment suite from a config file");
  std::string v_config, v_out;
  int v_jobs = 1;
  cv->add_option("--config", v_config)->required();
  cv->add_option("--out", v_out, "summary JSON path (stdout when omitted)");
  cv->add_option("--jobs", v_jobs, "independent-experiment parallelism");

  // spaces
  auto* cn = app.add_subcommand("spaces", "norm calculator");
  auto* cnn = cn->add_subcommand("norm", "evaluate a function norm");
  std::string n_spec, n_field;
  cnn->add_option("--spec", n_spec, "norm spec JSON file")->required();
  cnn->add_option("--field", n_field, "field base path")->required();

  // maxop
  auto* cm = app.add_subcommand("maxop", "maximal function and Muckenhoupt constants");
  std::string m_field, m_weight, m_out;
  double m_p = 2.0;
  cm->add_option("--field", m_field, "field base path")->required();
  cm->add_option("--weight", m_weight, "weight field base path for the A_p sweep");
  cm->add_option("--p", m_p, "Muckenhoupt exponent");
  cm->add_option("--out", m_out, "output base path for the maximal field");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ck->parsed()) return cmd_kernel(k_system, k_method, k_dim, k_R, k_N, k_t, k_out, k_plot);
    if (cs->parsed())
      return cmd_solve(s_system, s_datum, s_method, s_heights, s_dim, s_R, s_N, s_out);
    if (cv->parsed()) return cmd_verify(v_config, v_out, v_jobs);
    if (cn->parsed() && cnn->parsed()) return cmd_spaces_norm(n_spec, n_field);
    if (cm->parsed()) return cmd_maxop(m_field, m_weight, m_p, m_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case Err::BadInput:
      case Err::NonPowerOfTwo:
      case Err::GridMismatch:
      case Err::NonFiniteSample:
      case Err::EmptyHeights:
      case Err::SpecViolation:
        return kExitBadInput;
      default:
        return kExitMathError;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return 0;
}
