#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "helmnodal/conditions.hpp"
#include "helmnodal/solution.hpp"

namespace helmnodal {

/// One verified claim: pass iff worst <= tolerance. Floor-style conditions
/// are folded into this form as worst = -(margin), tolerance = 0, so that
/// loosening any tolerance can only keep a passing check passing.
struct CheckResult {
  std::string name;
  bool pass = false;
  double worst = 0;
  double tolerance = 0;
  std::string location;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  bool pass = false;
  std::string provenance_hash;
  int flood_fill_resolution = 0;
  int nodal_domain_count = 0;
  int raw_sign_component_count = 0;
  double u_max = 0;
  double grad_max = 0;

  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

struct VerifyConfig {
  long helmholtz_samples = 1000000;
  long pde_samples = 100000;
  int boundary_samples = 10000;
  int u_grid = 2001;
  int flood_grid = 1001;
  int oracle_grid = 301;
  std::uint64_t seed = 0x48454C4D4E4F4441ull;  // fixed: determinism contract
  // tolerances, pinned
  double tol_helmholtz = 1e-11;
  double tol_systc = 1e-9;
  double tol_mu_endpoint = 1e-9;
  double tol_mu_residual = 1e-10;
  double tol_equal_angle_deg = 1.0;
  double tol_u_nonneg = 1e-11;       // relative to max u
  double tol_u_zero = 1e-10;         // relative to max u
  double tol_u_positive_floor = 1e-6;
  double tol_neumann = 1e-8;         // relative to max |grad u|
  double tol_pde = 1e-6;
  double tol_h_even = 1e-12;
  double tol_h_dispersion = 1e-6;
  double tol_h_zero_extrap = 1e-6;
  double tol_eps0_u = 1e-10;
  double tol_eps0_h = 1e-8;
  double tol_grid_refinement = 1e-9;
};

namespace detail {

inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline void push(VerificationReport& rep, const std::string& name, double worst,
                 double tol, const std::string& loc = "") {
  rep.checks.push_back({name, worst <= tol, worst, tol, loc});
}

/// 4-connectivity flood fill over a boolean mask; returns component count.
inline int count_components(const std::vector<std::uint8_t>& mask, int nx, int ny) {
  std::vector<std::int32_t> label(mask.size(), -1);
  std::vector<std::int32_t> stack;
  int comps = 0;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask[start] || label[start] >= 0) continue;
    ++comps;
    stack.push_back(static_cast<std::int32_t>(start));
    label[start] = comps;
    while (!stack.empty()) {
      const std::int32_t cur = stack.back();
      stack.pop_back();
      const int i = cur % nx, j = cur / nx;
      const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
      for (auto& [ni, nj] : nb) {
        if (ni < 0 || ni >= nx || nj < 0 || nj >= ny) continue;
        const std::int32_t id = nj * nx + ni;
        if (mask[id] && label[id] < 0) {
          label[id] = comps;
          stack.push_back(id);
        }
      }
    }
  }
  return comps;
}

}  // namespace detail

/// Runs every verifiable claim of the construction against one artifact set
/// and aggregates the outcomes. Deterministic for a fixed config.
inline VerificationReport run_suite(const SolutionU& sol, const TraceResult& trace,
                                    const SourceH& h, const ConditionReport& cond,
                                    const std::string& provenance,
                                    const VerifyConfig& cfg = {}) {
  VerificationReport rep;
  rep.provenance_hash = detail::fnv1a_hex(provenance);
  rep.flood_fill_resolution = cfg.flood_grid;

  const Perturbation& p = sol.perturbation();
  const double eps = sol.epsilon();
  const double s = trace.s;
  const MuInterpolant& mu = *sol.domain().mu;

  // --- Helmholtz identity for v from closed-form jets
  {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> ux(-2 * kPi, 2 * kPi);
    std::uniform_real_distribution<double> uy(-kTopY, kTopY);
    double worst = 0, wx = 0, wy = 0;
    for (long i = 0; i < cfg.helmholtz_samples; ++i) {
      const double x = ux(rng), y = uy(rng);
      DerivativeJet j = eval_v(x, y, eps, p);
      const double r = std::fabs(helmholtz_residual(j)) / (1 + std::fabs(j.value));
      if (r > worst) { worst = r; wx = x; wy = y; }
    }
    detail::push(rep, "helmholtz_v", worst, cfg.tol_helmholtz,
                 "(" + std::to_string(wx) + "," + std::to_string(wy) + ")");
  }

  // --- (W2)-(W5) structural conditions of psi
  {
    WConditionReport w = verify_w_conditions(p);
    double minm = 1e300;
    std::string worst_name;
    for (const auto& [k, m] : w.margins)
      if (m < minm) { minm = m; worst_name = k; }
    detail::push(rep, "w_conditions", -minm, 0.0, worst_name);
  }

  // --- constraint-system residuals, including the z0 degeneracy
  {
    double worst = 0;
    for (double r : p.residuals) worst = std::max(worst, std::fabs(r));
    QJet z0 = psi_jet_q(pi_q(), c1_q(), p);
    for (qreal v : {z0.value, z0.dx, z0.dy, z0.dxx, z0.dxy, z0.dyy})
      worst = std::max(worst, std::fabs(static_cast<double>(v)));
    detail::push(rep, "systc_residuals", worst, cfg.tol_systc);
  }

  // --- epsilon certification margins
  {
    double minm = 1e300;
    std::string worst_name;
    for (const auto& [k, m] : cond.margins)
      if (m < minm) { minm = m; worst_name = k; }
    detail::push(rep, "condition_margins", -minm, 0.0, worst_name);
  }

  // --- structure of the traced boundary
  {
    detail::push(rep, "s_bracket", std::max(kC1 - s, s - kTopY), 0.0);
    double mu_c1 = -1;
    for (const auto& sm : trace.mu.samples)
      if (sm[0] == kC1) mu_c1 = sm[1];
    detail::push(rep, "mu_endpoint_pi", std::fabs(mu_c1 - kPi), cfg.tol_mu_endpoint);
    double range_viol = (trace.mu.samples.back()[1] == 0.0) ? -1.0 : 1.0;
    double mono = -1e300;
    for (std::size_t i = 1; i < trace.mu.samples.size(); ++i) {
      mono = std::max(mono, trace.mu.samples[i][1] - trace.mu.samples[i - 1][1]);
      if (i + 1 < trace.mu.samples.size()) {
        const double v = trace.mu.samples[i][1];
        if (!(v > 0 && v < 2 * kPi)) range_viol = 1.0;
      }
    }
    detail::push(rep, "mu_monotone", mono, 0.0);
    detail::push(rep, "mu_range", range_viol, 0.0);
    detail::push(rep, "mu_residual",
                 std::max(trace.mu.max_residual(eps, p),
                          trace.interior.max_residual(eps, p)),
                 cfg.tol_mu_residual);
    // mu mu' approaches a finite limit at s: products over the last samples
    // stay bounded and their magnitudes settle
    const auto& sm = trace.mu.samples;
    double prev = 0, worst = 0;
    bool first = true;
    for (std::size_t i = sm.size() - 10; i + 1 < sm.size(); ++i) {
      const double dmu = (sm[i + 1][1] - sm[i][1]) / (sm[i + 1][0] - sm[i][0]);
      const double prod = sm[i][1] * dmu;
      if (!std::isfinite(prod)) worst = 1e300;
      if (!first && std::fabs(prod) > std::fabs(prev) + 1e-12) worst = std::max(worst, std::fabs(prod) - std::fabs(prev));
      prev = prod;
      first = false;
    }
    worst = std::max(worst, std::fabs(prev) - 0.01);  // the limit is ~ -3 sqrt(2 eps/3)
    detail::push(rep, "mu_mu_prime_limit", worst, 0.0);
  }

  // --- equal-angle property at z0: six rays with pi/3 spacing
  {
    // measured tangent slope of the traced curve through z0 by a symmetric
    // secant at the nearest samples on both sides
    const auto& smp = trace.mu.samples;
    std::size_t ic = 0;
    for (std::size_t i = 0; i < smp.size(); ++i)
      if (smp[i][0] == kC1) ic = i;
    const std::size_t off = 4;
    const double m_meas = (smp[ic + off][1] - smp[ic - off][1]) /
                          (smp[ic + off][0] - smp[ic - off][0]);
    // ray angles: vertical line, traced curve, mirrored curve
    auto deg = [](double rad) { return rad * 180.0 / kPi; };
    std::vector<double> rays = {90.0, 270.0};
    const double a1 = deg(std::atan2(1.0, m_meas));        // curve, upward ray
    rays.push_back(a1);
    rays.push_back(std::fmod(a1 + 180.0, 360.0));
    const double a2 = deg(std::atan2(1.0, -m_meas));       // mirrored curve
    rays.push_back(a2);
    rays.push_back(std::fmod(a2 + 180.0, 360.0));
    std::sort(rays.begin(), rays.end());
    double worst = 0;
    for (std::size_t i = 0; i < rays.size(); ++i) {
      const double next = (i + 1 < rays.size()) ? rays[i + 1] : rays[0] + 360.0;
      worst = std::max(worst, std::fabs((next - rays[i]) - 60.0));
    }
    detail::push(rep, "equal_angle_z0", worst, cfg.tol_equal_angle_deg);
  }

  // --- u nonnegativity on the verification grid (and umax/gradmax scan)
  const double x_extent = (*sol.domain().mu)(0.0);
  {
    const int n = cfg.u_grid;
    double umin = 0, umax = 0, gmax = 0;
    double locx = 0, locy = 0;
    for (int j = 0; j < n; ++j) {
      const double y = -s + 2.0 * s * j / (n - 1);
      const double m = mu(y);
      for (int i = 0; i < n; ++i) {
        const double x = -x_extent + 2.0 * x_extent * i / (n - 1);
        if (std::fabs(x) >= m) continue;
        auto vg = sol.value_grad(x, y);
        if (vg[0] < umin) { umin = vg[0]; locx = x; locy = y; }
        umax = std::max(umax, vg[0]);
        gmax = std::max(gmax, std::hypot(vg[1], vg[2]));
      }
    }
    rep.u_max = umax;
    rep.grad_max = gmax;
    detail::push(rep, "u_nonnegative", -umin / umax, cfg.tol_u_nonneg,
                 "(" + std::to_string(locx) + "," + std::to_string(locy) + ")");
  }

  // --- Dirichlet and Neumann data on the boundary
  {
    double worst_u = 0, worst_g = 0;
    for (auto& b : sol.domain().boundary_samples(cfg.boundary_samples / 4)) {
      auto vg = sol.value_grad(b[0], b[1]);
      worst_u = std::max(worst_u, std::fabs(vg[0]));
      worst_g = std::max(worst_g, std::hypot(vg[1], vg[2]));
    }
    detail::push(rep, "dirichlet_boundary", worst_u / rep.u_max, cfg.tol_u_zero);
    detail::push(rep, "neumann_boundary", worst_g / rep.grad_max, cfg.tol_neumann);
  }

  // --- u vanishes along the interior curves; stays positive away from
  //     the nodal set
  {
    double worst = 0;
    for (const auto& c : trace.interior.samples) {
      const double u = sol.value_unchecked(c[1], c[0]);
      worst = std::max(worst, std::fabs(u));
      const double um = sol.value_unchecked(-c[1], c[0]);
      worst = std::max(worst, std::fabs(um));
    }
    detail::push(rep, "u_zero_interior_curves", worst / rep.u_max, cfg.tol_u_zero);

    // distance measured against a polyline sampling of the full nodal set
    // (boundary mirrored four ways plus the two interior curves)
    std::vector<std::array<double, 2>> nodal;
    for (const auto& c : trace.mu.samples) {
      nodal.push_back({c[1], c[0]});
      nodal.push_back({c[1], -c[0]});
      nodal.push_back({-c[1], c[0]});
      nodal.push_back({-c[1], -c[0]});
    }
    for (const auto& c : trace.interior.samples) {
      nodal.push_back({c[1], c[0]});
      nodal.push_back({-c[1], c[0]});
    }
    // thin to ~0.005 spacing to keep the scan cheap
    std::vector<std::array<double, 2>> pts;
    for (const auto& q : nodal) {
      bool keep = true;
      for (auto it = pts.rbegin(); it != pts.rend() && it - pts.rbegin() < 8; ++it)
        if (std::hypot(q[0] - (*it)[0], q[1] - (*it)[1]) < 0.004) { keep = false; break; }
      if (keep) pts.push_back(q);
    }
    std::mt19937_64 rng(cfg.seed ^ 0x51ull);
    std::uniform_real_distribution<double> uy(-s, s);
    double umin_away = 1e300;
    long tested = 0;
    while (tested < 20000) {
      const double y = uy(rng);
      const double m = mu(y);
      std::uniform_real_distribution<double> ux(-m, m);
      const double x = ux(rng);
      double d2min = 1e300;
      for (const auto& q : pts) {
        const double dx = x - q[0], dy = y - q[1];
        const double d2 = dx * dx + dy * dy;
        if (d2 < d2min) d2min = d2;
      }
      if (d2min <= 0.11 * 0.11) continue;  // slack for the polyline thinning
      umin_away = std::min(umin_away, sol.value_unchecked(x, y));
      ++tested;
    }
    detail::push(rep, "u_positive_away",
                 -(umin_away / rep.u_max - cfg.tol_u_positive_floor), 0.0);
  }

  // --- PDE residual with the tabulated source
  {
    std::mt19937_64 rng(cfg.seed ^ 0x9DEull);
    std::uniform_real_distribution<double> uy(-s, s);
    std::uniform_real_distribution<double> uu(-1.0, 1.0);
    double worst = 0, wx = 0, wy = 0;
    long done = 0;
    while (done < cfg.pde_samples) {
      const double y = uy(rng);
      if (std::fabs(std::fabs(y) - kC1) < 1e-2 || std::fabs(y) > s - 1e-2)
        continue;
      const double x = uu(rng) * mu(y) * 0.999;
      const double res = sol.uxx(x, y) + sol.uyy(x, y) +
                         4 * sol.value_unchecked(x, y) + h(y);
      const double rel = std::fabs(res) / (1 + std::fabs(h(y)));
      if (rel > worst) { worst = rel; wx = x; wy = y; }
      ++done;
    }
    detail::push(rep, "pde_residual", worst, cfg.tol_pde,
                 "(" + std::to_string(wx) + "," + std::to_string(wy) + ")");
  }

  // --- source-term consistency
  {
    double worst = 0;
    for (int i = 0; i <= 400; ++i) {
      const double y = s * i / 400;
      worst = std::max(worst, std::fabs(h(y) - h(-y)));
    }
    detail::push(rep, "h_even", worst, cfg.tol_h_even);

    double disp = 0;
    for (double y : {0.25, 0.4, 0.8, 1.1, 1.45, 2.1, 2.5, 3.0, 3.35}) {
      std::vector<double> xs;
      for (int i = 1; i <= 5; ++i) xs.push_back(mu(y) * i / 6.0);
      HResidual r = residual_h(sol, y, xs);
      disp = std::max(disp, r.spread);
      for (double v : r.values) disp = std::max(disp, std::fabs(v - h(y)));
    }
    detail::push(rep, "h_x_independence", disp, cfg.tol_h_dispersion);
    detail::push(rep, "h_zero_at_c1", std::fabs(h.extrap_at_c1), cfg.tol_h_zero_extrap);
    detail::push(rep, "h_extrap_windows",
                 std::max(h.extrap_mismatch_c1, h.extrap_mismatch_s),
                 cfg.tol_h_dispersion);
  }

  // --- unperturbed-oracle equivalence of the field paths
  {
    SolutionU sol0(build_domain(rhombus_trace(2001), 0.0, p));
    double worst_u = 0;
    const int n = cfg.oracle_grid;
    for (int j = 0; j < n; ++j) {
      const double y = -(kTopY - 0.1) + 2 * (kTopY - 0.1) * j / (n - 1);
      const double m0 = 2 * kPi - kSqrt3d * std::fabs(y);
      for (int i = 0; i < n; ++i) {
        const double x = -m0 + 2 * m0 * i / (n - 1);
        const double c = std::cos(x) - std::cos(kSqrt3d * y);
        worst_u = std::max(worst_u,
                           std::fabs(sol0.value_unchecked(x, y) - c * c / 2));
      }
    }
    detail::push(rep, "eps0_u_oracle", worst_u, cfg.tol_eps0_u);

    SourceH h0 = build_h(sol0, rhombus_trace(2001), 2001);
    double worst_h = 0;
    for (int i = 0; i <= 400; ++i) {
      const double y = kTopY * i / 400;
      const double ref = -4 * std::pow(std::sin(kSqrt3d * y), 2);
      worst_h = std::max(worst_h, std::fabs(h0(y) - ref));
    }
    detail::push(rep, "eps0_h_oracle", worst_h, cfg.tol_eps0_h);
  }

  // --- grid-refinement convergence of the trace (outside the corner zone,
  //     where the square-root profile dominates any polynomial interpolant)
  {
    NodalCurve a = trace_mu(eps, p, 1001, s);
    NodalCurve b = trace_mu(eps, p, 2002, s);
    MuInterpolant ib(b);
    double worst = 0;
    for (std::size_t i = 0; i < a.samples.size(); i += 5) {
      const double y = a.samples[i][0];
      if (y < 0.02 || y > s - 0.02) continue;
      worst = std::max(worst, std::fabs(a.samples[i][1] - ib(y)));
    }
    detail::push(rep, "grid_refinement", worst, cfg.tol_grid_refinement);
  }

  // --- nodal topology by flood fill: the positive set must decompose into
  //     exactly the three domains cut out by the two traced interior arcs.
  //     The middle domain's waist at the origin is ~sqrt(2 eps) wide, far
  //     below any feasible pixel size, so raw component counting
  //     over-segments it; components are therefore classified against the
  //     traced arcs: a component spanning two classes would expose a leak
  //     across a curve, and the class count is the domain count.
  {
    const int n = cfg.flood_grid;
    const std::size_t nn = static_cast<std::size_t>(n) * n;
    std::vector<std::uint8_t> mask(nn, 0);
    std::vector<std::uint8_t> cls(nn, 0);  // 1 = left, 2 = middle, 3 = right
    const double thresh = 1e-12 * rep.u_max;
    for (int j = 0; j < n; ++j) {
      const double y = -s + 2.0 * s * j / (n - 1);
      const double m = mu(y);
      const bool has_curves = std::fabs(y) < kC1;
      const double xi_here = has_curves ? 2 * kPi - m : 1e300;
      for (int i = 0; i < n; ++i) {
        const double x = -x_extent + 2.0 * x_extent * i / (n - 1);
        if (std::fabs(x) >= m) continue;
        const std::size_t id = static_cast<std::size_t>(j) * n + i;
        if (sol.value_unchecked(x, y) > thresh) {
          mask[id] = 1;
          cls[id] = (x <= -xi_here) ? 1 : (x >= xi_here) ? 3 : 2;
        }
      }
    }
    // flood fill with class tracking
    std::vector<std::int32_t> label(nn, -1);
    std::vector<std::int32_t> stack;
    int raw = 0, mixed = 0;
    bool class_seen[4] = {false, false, false, false};
    for (std::size_t start = 0; start < nn; ++start) {
      if (!mask[start] || label[start] >= 0) continue;
      ++raw;
      int comp_class = cls[start];
      bool comp_mixed = false;
      stack.push_back(static_cast<std::int32_t>(start));
      label[start] = raw;
      while (!stack.empty()) {
        const std::int32_t cur = stack.back();
        stack.pop_back();
        if (cls[cur] != comp_class) comp_mixed = true;
        const int i = cur % n, j = cur / n;
        const int nb[4][2] = {{i - 1, j}, {i + 1, j}, {i, j - 1}, {i, j + 1}};
        for (auto& [ni, nj] : nb) {
          if (ni < 0 || ni >= n || nj < 0 || nj >= n) continue;
          const std::int32_t id = nj * n + ni;
          if (mask[id] && label[id] < 0) {
            label[id] = raw;
            stack.push_back(id);
          }
        }
      }
      if (comp_mixed) ++mixed;
      class_seen[comp_class] = true;
    }
    int classes = 0;
    for (int k2 = 1; k2 <= 3; ++k2)
      if (class_seen[k2]) ++classes;
    rep.nodal_domain_count = classes;
    detail::push(rep, "nodal_domains_flood_fill",
                 std::fabs(classes - 3.0) + 1e6 * mixed, 0.0,
                 std::to_string(classes) + " domains (" + std::to_string(raw) +
                     " raw components, " + std::to_string(mixed) + " mixed)");
  }

  // --- sign chart of v: six alternating sign regions across the five
  //     interior nodal components (slot-classified; the raw grid component
  //     count is also recorded, but the micro-pinches near the degenerate
  //     zeros sit far below any feasible grid resolution)
  {
    const int n = cfg.flood_grid;
    // slots between -mu, -pi, -(2pi-mu), 0, 2pi-mu, pi, mu
    // expected signs with sigma = +1:   +    -        +  -        +   -
    int slot_sign[6] = {1, -1, 1, -1, 1, -1};
    long counts[6] = {0, 0, 0, 0, 0, 0};
    long bad = 0;
    std::vector<std::uint8_t> sign_mask_pos(static_cast<std::size_t>(n) * n, 0);
    std::vector<std::uint8_t> sign_mask_neg(static_cast<std::size_t>(n) * n, 0);
    for (int j = 0; j < n; ++j) {
      const double y = -s + 2.0 * s * j / (n - 1);
      const double m = mu(y);
      const bool has_curves = std::fabs(y) < kC1;
      const double xi_here = has_curves ? 2 * kPi - mu(y) : 0;
      for (int i = 0; i < n; ++i) {
        const double x = -x_extent + 2.0 * x_extent * i / (n - 1);
        if (std::fabs(x) >= m) continue;
        const double v = sol.sigma() * eval_v(x, y, sol.epsilon(), p).value;
        if (std::fabs(v) < 1e-12) continue;  // too close to the nodal set
        if (v > 0)
          sign_mask_pos[static_cast<std::size_t>(j) * n + i] = 1;
        else
          sign_mask_neg[static_cast<std::size_t>(j) * n + i] = 1;
        // slots left to right: (-mu,-pi) (-pi,-(2pi-mu)) (-(2pi-mu),0)
        //                      (0,2pi-mu) (2pi-mu,pi) (pi,mu)
        int slot;
        const double ax = std::fabs(x);
        if (!has_curves || ax < xi_here) slot = 3;
        else if (ax < kPi) slot = 4;
        else slot = 5;
        if (x < 0) slot = 5 - slot;  // oddness mirrors 3,4,5 onto 2,1,0
        const int expect = slot_sign[slot];
        ++counts[slot];
        if (v * expect < 0) ++bad;
      }
    }
    // every slot populated and sign-consistent
    double worst = static_cast<double>(bad);
    for (int k2 = 0; k2 < 6; ++k2)
      if (counts[k2] == 0) worst += 1e6;
    detail::push(rep, "v_sign_regions", worst, 0.0);
    rep.raw_sign_component_count =
        detail::count_components(sign_mask_pos, n, n) +
        detail::count_components(sign_mask_neg, n, n);
  }

  rep.pass = true;
  for (const auto& c : rep.checks)
    if (!c.pass) rep.pass = false;
  return rep;
}

}  // namespace helmnodal
