#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "helmnodal/conditions.hpp"
#include "helmnodal/verify.hpp"

namespace helmnodal {

using ordered_json = nlohmann::ordered_json;

/// Reals are exported as decimal strings so the files stay diff-able and
/// language-portable; 17 significant digits round-trips a double exactly.
inline std::string to_str17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double from_str(const std::string& s) { return std::stod(s); }

struct RunConfig {
  int start_k = 6;
  bool epsilon_auto = true;
  double epsilon_fixed = 0;
  int trace_samples = 2001;
  int h_samples = 8001;
  int export_grid = 501;
  ConditionGrids cond_grids;
  VerifyConfig verify;
  std::string out_dir = "out";

  void validate() const {
    if (start_k <= 4 || start_k % 2 != 0)
      throw std::invalid_argument("start_k must be even and > 4");
    if (!epsilon_auto && !(epsilon_fixed > 0))
      throw std::invalid_argument("fixed epsilon must be positive");
    for (int g : {trace_samples, h_samples, export_grid, cond_grids.rect_n,
                  verify.u_grid, verify.flood_grid, verify.oracle_grid})
      if (g < 64) throw std::invalid_argument("grid sizes must be >= 64");
    for (double t :
         {verify.tol_helmholtz, verify.tol_systc, verify.tol_mu_endpoint,
          verify.tol_mu_residual, verify.tol_equal_angle_deg,
          verify.tol_u_nonneg, verify.tol_u_zero, verify.tol_u_positive_floor,
          verify.tol_neumann, verify.tol_pde, verify.tol_h_even,
          verify.tol_h_dispersion, verify.tol_h_zero_extrap, verify.tol_eps0_u,
          verify.tol_eps0_h, verify.tol_grid_refinement})
      if (!(t > 0)) throw std::invalid_argument("tolerances must be positive");
  }

  static RunConfig from_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot read config " + path);
    ordered_json j = ordered_json::parse(f);
    RunConfig c;
    if (j.contains("start_k")) c.start_k = j["start_k"].get<int>();
    if (j.contains("epsilon")) {
      if (j["epsilon"].is_string() && j["epsilon"] == "auto") {
        c.epsilon_auto = true;
      } else {
        c.epsilon_auto = false;
        c.epsilon_fixed = j["epsilon"].is_string()
                              ? from_str(j["epsilon"].get<std::string>())
                              : j["epsilon"].get<double>();
      }
    }
    if (j.contains("trace_samples")) c.trace_samples = j["trace_samples"].get<int>();
    if (j.contains("h_samples")) c.h_samples = j["h_samples"].get<int>();
    if (j.contains("export_grid")) c.export_grid = j["export_grid"].get<int>();
    if (j.contains("rect_grid")) c.cond_grids.rect_n = j["rect_grid"].get<int>();
    if (j.contains("verify_grid")) c.verify.u_grid = j["verify_grid"].get<int>();
    if (j.contains("flood_grid")) c.verify.flood_grid = j["flood_grid"].get<int>();
    if (j.contains("out_dir")) c.out_dir = j["out_dir"].get<std::string>();
    c.validate();
    return c;
  }
};

/// The construct-stage manifest: everything later stages need, with the
/// coefficients at full decimal precision (36 digits round-trips binary128).
struct Manifest {
  Perturbation perturbation;
  double epsilon = 0;
  int epsilon_log2 = 0;  // nonzero when epsilon is an exact power of two
  ConditionReport condition_report;
  WConditionReport w_report;

  ordered_json to_json() const {
    ordered_json j;
    j["schema"] = "helmnodal-manifest-v1";
    ordered_json ws;
    ws["k"] = perturbation.waveset.k;
    ordered_json nus = ordered_json::array();
    for (double n : perturbation.waveset.nu) nus.push_back(to_str17(n));
    ws["nu"] = nus;
    j["waveset"] = ws;
    ordered_json ds = ordered_json::array();
    for (int i = 0; i < 5; ++i) ds.push_back(perturbation.d_str(i));
    j["d"] = ds;
    ordered_json rs = ordered_json::array();
    for (double r : perturbation.residuals) rs.push_back(to_str17(r));
    j["constraint_residuals"] = rs;
    if (epsilon_log2 != 0) {
      j["epsilon"] = {{"log2", epsilon_log2}, {"value", to_str17(epsilon)}};
    } else {
      j["epsilon"] = {{"value", to_str17(epsilon)}};
    }
    ordered_json cond;
    cond["pass"] = condition_report.pass;
    ordered_json margins;
    for (const auto& [k, v] : condition_report.margins) margins[k] = to_str17(v);
    cond["margins"] = margins;
    cond["regions"] = {{"alpha", to_str17(condition_report.regions.alpha)},
                       {"beta", to_str17(condition_report.regions.beta)},
                       {"gamma", to_str17(condition_report.regions.gamma)},
                       {"delta", to_str17(condition_report.regions.delta)},
                       {"r", to_str17(condition_report.regions.r)}};
    j["condition_report"] = cond;
    ordered_json wrep;
    wrep["pass"] = w_report.pass;
    ordered_json wm;
    for (const auto& [k, v] : w_report.margins) wm[k] = to_str17(v);
    wrep["margins"] = wm;
    j["w_report"] = wrep;
    return j;
  }

  static Manifest from_json(const ordered_json& j) {
    if (j.at("schema") != "helmnodal-manifest-v1")
      throw std::runtime_error("unknown manifest schema");
    Manifest m;
    std::array<int, 5> k{};
    for (int i = 0; i < 5; ++i) k[i] = j.at("waveset").at("k").at(i).get<int>();
    m.perturbation.waveset = WaveSet::from_k(k);
    for (int i = 0; i < 5; ++i)
      m.perturbation.d[i] =
          qm::from_string(j.at("d").at(i).get<std::string>().c_str());
    for (int i = 0; i < 5; ++i)
      m.perturbation.residuals[i] =
          from_str(j.at("constraint_residuals").at(i).get<std::string>());
    if (j.at("epsilon").contains("log2")) {
      m.epsilon_log2 = j.at("epsilon").at("log2").get<int>();
      m.epsilon = std::ldexp(1.0, m.epsilon_log2);
    } else {
      m.epsilon = from_str(j.at("epsilon").at("value").get<std::string>());
    }
    const auto& cond = j.at("condition_report");
    m.condition_report.pass = cond.at("pass").get<bool>();
    for (auto it = cond.at("margins").begin(); it != cond.at("margins").end(); ++it)
      m.condition_report.margins[it.key()] = from_str(it.value().get<std::string>());
    const auto& reg = cond.at("regions");
    m.condition_report.regions.alpha = from_str(reg.at("alpha").get<std::string>());
    m.condition_report.regions.beta = from_str(reg.at("beta").get<std::string>());
    m.condition_report.regions.gamma = from_str(reg.at("gamma").get<std::string>());
    m.condition_report.regions.delta = from_str(reg.at("delta").get<std::string>());
    m.condition_report.regions.r = from_str(reg.at("r").get<std::string>());
    m.condition_report.epsilon = m.epsilon;
    return m;
  }
};

inline void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << body;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

inline std::string curve_csv(const NodalCurve& c) {
  std::ostringstream os;
  os << "param,coord\n";
  for (const auto& s : c.samples)
    os << to_str17(s[0]) << "," << to_str17(s[1]) << "\n";
  return os.str();
}

inline ordered_json report_to_json(const VerificationReport& rep) {
  ordered_json j;
  j["pass"] = rep.pass;
  j["provenance_hash"] = rep.provenance_hash;
  j["flood_fill_resolution"] = rep.flood_fill_resolution;
  j["nodal_domain_count"] = rep.nodal_domain_count;
  j["raw_sign_component_count"] = rep.raw_sign_component_count;
  j["u_max"] = to_str17(rep.u_max);
  j["grad_max"] = to_str17(rep.grad_max);
  ordered_json checks = ordered_json::array();
  for (const auto& c : rep.checks) {
    ordered_json e;
    e["name"] = c.name;
    e["pass"] = c.pass;
    e["worst_residual"] = to_str17(c.worst);
    e["tolerance"] = to_str17(c.tolerance);
    e["location"] = c.location;
    checks.push_back(e);
  }
  j["checks"] = checks;
  return j;
}

}  // namespace helmnodal
