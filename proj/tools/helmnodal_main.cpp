// Pipeline driver: construct -> trace -> build -> verify -> render.
// Stages communicate only through files in the output directory, so each
// stage can be rerun independently and reruns are byte-identical.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "helmnodal/manifest.hpp"
#include "helmnodal/render.hpp"
#include "helmnodal/solution.hpp"
#include "helmnodal/trace.hpp"
#include "helmnodal/verify.hpp"

namespace fs = std::filesystem;
using namespace helmnodal;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitConstructFail = 2;
constexpr int kExitUsage = 3;

struct StageError : std::runtime_error {
  int code;
  StageError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

std::string manifest_path(const RunConfig& cfg) { return cfg.out_dir + "/manifest.json"; }

void require_file(const std::string& path, const std::string& stage_hint) {
  if (!fs::exists(path))
    throw StageError(kExitUsage, "missing " + path + "; run `" + stage_hint +
                                     "` first (stage order)");
}

Manifest load_manifest(const RunConfig& cfg) {
  require_file(manifest_path(cfg), "construct");
  ordered_json j = ordered_json::parse(read_text_file(manifest_path(cfg)));
  return Manifest::from_json(j);
}

TraceResult load_trace(const RunConfig& cfg) {
  require_file(cfg.out_dir + "/trace.json", "trace");
  ordered_json j = ordered_json::parse(read_text_file(cfg.out_dir + "/trace.json"));
  TraceResult tr;
  tr.s = from_str(j.at("s").get<std::string>());
  auto read_curve = [&](const std::string& name, NodalCurve& c) {
    const std::string body = read_text_file(cfg.out_dir + "/curves/" + name);
    std::istringstream is(body);
    std::string line;
    std::getline(is, line);  // header
    while (std::getline(is, line)) {
      const auto comma = line.find(',');
      if (comma == std::string::npos) continue;
      c.samples.push_back({from_str(line.substr(0, comma)),
                           from_str(line.substr(comma + 1))});
    }
  };
  read_curve("mu.csv", tr.mu);
  read_curve("interior.csv", tr.interior);
  return tr;
}

int cmd_construct(const RunConfig& cfg) {
  fs::create_directories(cfg.out_dir);
  std::printf("[construct] selecting waveset from start_k=%d\n", cfg.start_k);
  WaveSet ws;
  Perturbation p;
  try {
    ws = select_waveset(cfg.start_k);
    p = solve_perturbation(ws);
  } catch (const std::exception& e) {
    throw StageError(kExitConstructFail, std::string("construct: ") + e.what());
  }
  std::printf("[construct] waveset k = (%d, %d, %d, %d, %d)\n", ws.k[0], ws.k[1],
              ws.k[2], ws.k[3], ws.k[4]);

  WConditionReport wrep = verify_w_conditions(p);
  if (!wrep.pass)
    throw StageError(kExitConstructFail, "construct: (W2)-(W5) verification failed");

  Manifest m;
  m.perturbation = p;
  m.w_report = wrep;
  if (cfg.epsilon_auto) {
    try {
      auto [eps, rep] = select_epsilon(p, cfg.cond_grids);
      m.epsilon = eps;
      m.epsilon_log2 = static_cast<int>(std::lround(std::log2(eps)));
      m.condition_report = rep;
    } catch (const std::exception& e) {
      throw StageError(kExitConstructFail, std::string("construct: ") + e.what());
    }
  } else {
    m.epsilon = cfg.epsilon_fixed;
    const double l2 = std::log2(cfg.epsilon_fixed);
    m.epsilon_log2 = (l2 == std::floor(l2)) ? static_cast<int>(l2) : 0;
    m.condition_report = certify_epsilon(cfg.epsilon_fixed, p, cfg.cond_grids);
    if (!m.condition_report.pass) {
      std::string failing;
      for (const auto& [name, margin] : m.condition_report.margins)
        if (margin <= 0) failing += (failing.empty() ? "" : ", ") + name;
      throw StageError(kExitConstructFail,
                       "construct: fixed epsilon fails condition(s): " + failing);
    }
  }
  std::printf("[construct] epsilon = %.17g (2^%d)\n", m.epsilon, m.epsilon_log2);
  write_text_file(manifest_path(cfg), m.to_json().dump(2) + "\n");
  std::printf("[construct] wrote %s\n", manifest_path(cfg).c_str());
  return kExitOk;
}

int cmd_trace(const RunConfig& cfg) {
  Manifest m = load_manifest(cfg);
  TraceResult tr;
  try {
    tr = trace_all(m.epsilon, m.perturbation, cfg.trace_samples);
  } catch (const std::exception& e) {
    throw StageError(kExitConstructFail, std::string("trace: ") + e.what());
  }
  fs::create_directories(cfg.out_dir + "/curves");
  write_text_file(cfg.out_dir + "/curves/mu.csv", curve_csv(tr.mu));
  write_text_file(cfg.out_dir + "/curves/interior.csv", curve_csv(tr.interior));
  auto [xi, eta] = local_xi_eta(m.epsilon, m.perturbation,
                                m.condition_report.regions);
  write_text_file(cfg.out_dir + "/curves/xi.csv", curve_csv(xi));
  write_text_file(cfg.out_dir + "/curves/eta.csv", curve_csv(eta));
  ordered_json j;
  j["s"] = to_str17(tr.s);
  j["n_samples"] = cfg.trace_samples;
  j["files"] = {"curves/mu.csv", "curves/interior.csv", "curves/xi.csv",
                "curves/eta.csv"};
  write_text_file(cfg.out_dir + "/trace.json", j.dump(2) + "\n");
  std::printf("[trace] s = %.17g, %zu boundary samples\n", tr.s,
              tr.mu.samples.size());
  return kExitOk;
}

int cmd_build(const RunConfig& cfg) {
  Manifest m = load_manifest(cfg);
  TraceResult tr = load_trace(cfg);
  SolutionU sol(build_domain(tr, m.epsilon, m.perturbation));
  SourceH h;
  try {
    h = build_h(sol, tr, cfg.h_samples);
  } catch (const std::exception& e) {
    throw StageError(kExitConstructFail, std::string("build: ") + e.what());
  }
  fs::create_directories(cfg.out_dir + "/build");

  {
    std::ostringstream os;
    os << "x,y\n";
    for (const auto& b : sol.domain().boundary_samples(cfg.export_grid))
      os << to_str17(b[0]) << "," << to_str17(b[1]) << "\n";
    write_text_file(cfg.out_dir + "/build/boundary.csv", os.str());
  }
  {
    std::ostringstream os;
    os << "y,h\n";
    for (std::size_t i = 0; i < h.y.size(); ++i)
      os << to_str17(h.y[i]) << "," << to_str17(h.h[i]) << "\n";
    write_text_file(cfg.out_dir + "/build/h.csv", os.str());
  }
  {
    // u on a regular grid over the bounding box, NaN outside Omega
    const int n = cfg.export_grid;
    const double xext = (*sol.domain().mu)(0.0);
    std::ostringstream os;
    os << "x,y,u\n";
    for (int j = 0; j < n; ++j) {
      const double y = -tr.s + 2 * tr.s * j / (n - 1);
      for (int i = 0; i < n; ++i) {
        const double x = -xext + 2 * xext * i / (n - 1);
        os << to_str17(x) << "," << to_str17(y) << ",";
        if (sol.domain().contains(x, y))
          os << to_str17(sol.value_unchecked(x, y)) << "\n";
        else
          os << "nan\n";
      }
    }
    write_text_file(cfg.out_dir + "/build/u_grid.csv", os.str());
  }
  ordered_json j;
  j["sigma"] = sol.sigma();
  j["h_at_s"] = to_str17(h.h_at_s);
  j["h_extrap_at_c1"] = to_str17(h.extrap_at_c1);
  j["h_samples"] = cfg.h_samples;
  j["files"] = {"build/boundary.csv", "build/h.csv", "build/u_grid.csv"};
  write_text_file(cfg.out_dir + "/build.json", j.dump(2) + "\n");
  std::printf("[build] sigma = %d, h(s) = %.6g, wrote build artifacts\n",
              sol.sigma(), h.h_at_s);
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg) {
  Manifest m = load_manifest(cfg);
  TraceResult tr = load_trace(cfg);
  require_file(cfg.out_dir + "/build.json", "build");
  SolutionU sol(build_domain(tr, m.epsilon, m.perturbation));
  SourceH h = build_h(sol, tr, cfg.h_samples);
  const std::string provenance = read_text_file(manifest_path(cfg));
  VerificationReport rep =
      run_suite(sol, tr, h, m.condition_report, provenance, cfg.verify);
  write_text_file(cfg.out_dir + "/verify_report.json",
                  report_to_json(rep).dump(2) + "\n");
  for (const auto& c : rep.checks)
    std::printf("[verify] %-28s %s  worst %.3e  tol %.3e\n", c.name.c_str(),
                c.pass ? "PASS" : "FAIL", c.worst, c.tolerance);
  std::printf("[verify] overall: %s\n", rep.pass ? "PASS" : "FAIL");
  return rep.pass ? kExitOk : kExitVerifyFail;
}

int cmd_render(const RunConfig& cfg) {
  Manifest m = load_manifest(cfg);
  TraceResult tr = load_trace(cfg);
  require_file(cfg.out_dir + "/verify_report.json", "verify");
  ordered_json rep = ordered_json::parse(
      read_text_file(cfg.out_dir + "/verify_report.json"));
  if (!rep.at("pass").get<bool>())
    throw StageError(kExitVerifyFail, "render: verification did not pass");
  SolutionU sol(build_domain(tr, m.epsilon, m.perturbation));
  fs::create_directories(cfg.out_dir + "/figures");
  FigurePaths paths = render_figures(sol, tr, cfg.out_dir + "/figures");
  std::printf("[render] %s\n[render] %s\n[render] %s\n", paths.u_nodal.c_str(),
              paths.v_signs.c_str(), paths.w_unperturbed.c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "constructs a planar counterexample solution with a two-curve nodal "
      "set and certifies its properties"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  std::optional<double> eps_override;
  std::optional<int> start_k_override, grid_override;
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--epsilon", eps_override, "fixed epsilon (skips the search)");
  app.add_option("--start-k", start_k_override, "first even wavenumber");
  app.add_option("--grid", grid_override, "export/verification grid size");

  auto* c_construct = app.add_subcommand(
      "construct", "select waveset, solve coefficients, certify epsilon");
  auto* c_trace = app.add_subcommand("trace", "trace the nodal curves");
  auto* c_build = app.add_subcommand(
      "build", "assemble the domain, solution and source term");
  auto* c_verify = app.add_subcommand("verify", "run the verification suite");
  auto* c_render = app.add_subcommand("render", "emit the three figures");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) cfg = RunConfig::from_json_file(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (eps_override) {
      cfg.epsilon_auto = false;
      cfg.epsilon_fixed = *eps_override;
    }
    if (start_k_override) cfg.start_k = *start_k_override;
    if (grid_override) {
      cfg.export_grid = *grid_override;
      cfg.verify.u_grid = std::max(*grid_override, 64);
    }
    cfg.validate();

    if (c_construct->parsed()) return cmd_construct(cfg);
    if (c_trace->parsed()) return cmd_trace(cfg);
    if (c_build->parsed()) return cmd_build(cfg);
    if (c_verify->parsed()) return cmd_verify(cfg);
    if (c_render->parsed()) return cmd_render(cfg);
    return kExitUsage;
  } catch (const StageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.code;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConstructFail;
  }
}
