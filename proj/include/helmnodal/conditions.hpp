#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "helmnodal/field.hpp"

namespace helmnodal {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kSqrt3d = 1.7320508075688772935274463415058724;
inline constexpr double kC1 = kPi / kSqrt3d;       // pi/sqrt3
inline constexpr double kTopY = 2 * kPi / kSqrt3d; // 2pi/sqrt3

// z0 = (pi, pi/sqrt3), z1 = (0,0), z2 = (0, 2pi/sqrt3)

/// Rectangle/ball sizes used by the local certificates. gamma/delta live on
/// the sqrt(eps) scale of the corner rounding at z2; alpha/beta/r stay on the
/// menu scale.
struct ConditionRegions {
  double alpha = 0, beta = 0;    // z1 rectangle half-sizes
  double gamma = 0, delta = 0;   // z2 rectangle sizes
  double r = 0.1;                // analysis ball radius at z0

  void validate() const {
    if (!(alpha > 0 && alpha < kPi)) throw std::invalid_argument("alpha out of range");
    if (!(beta > 0 && beta < kC1)) throw std::invalid_argument("beta out of range");
    if (!(gamma > 0 && delta > 0)) throw std::invalid_argument("gamma/delta not positive");
    if (!(r > 0)) throw std::invalid_argument("r not positive");
    if (!(r < 0.2)) throw std::invalid_argument("z0 ball exceeds analysis ball");
    if (!(r < alpha && r < beta)) throw std::invalid_argument("z1 ball exceeds rectangle");
    // At z2 the admissible rectangle usually lives on the sqrt(eps) scale,
    // inside the corner ball; a menu-sized rectangle covering the ball is
    // also acceptable.
    if (!((gamma <= r && delta <= r) || (r <= gamma && r <= delta)))
      throw std::invalid_argument("z2 rectangle incompatible with corner ball");
  }
};

/// Outcome of the epsilon certification: named margins (positive = condition
/// held with that slack on the checked grid) plus the regions used.
struct ConditionReport {
  bool pass = false;
  double epsilon = 0;
  ConditionRegions regions;
  std::map<std::string, double> margins;
};

struct ConditionGrids {
  int rect_n = 200;        // intervals per side on the z1/z2 rectangles
  int global_nx = 641;
  int global_ny = 741;
};

// Exclusion radius of the global sweep. It must stay large enough that the
// tube margin (~2 sin x * tube) dominates eps * psit near the corners, which
// ties it to the admissible eps rather than to the micro rectangles.
inline constexpr double kGlobalBallRadius = 0.3;
inline constexpr double kTubeRadius = 0.2;
inline constexpr double kGradientFloor = 0.05;
inline constexpr double kEigenFloor = 0.1;
inline constexpr double kEigenProximity = 0.9;  // |lambda - (-1)|, |lambda - 3| bound

/// Saddle certificate at z0: g vanishes to second order contact there and the
/// Hessian stays near diag(-1, 3), one negative and one positive direction.
inline double check_saddle_z0(double eps, const Perturbation& p) {
  DerivativeJet j = eval_g(kPi, kC1, eps, p);
  double m = 1e-10 - std::fabs(j.value);
  m = std::min(m, 1e-10 - std::hypot(j.dx, j.dy));
  const double tr = j.dxx + j.dyy;
  const double det = j.dxx * j.dyy - j.dxy * j.dxy;
  const double disc = tr * tr - 4 * det;
  if (disc < 0) return -1;  // complex eigenvalues: not a saddle
  const double lam1 = (tr - std::sqrt(disc)) / 2;
  const double lam2 = (tr + std::sqrt(disc)) / 2;
  m = std::min(m, kEigenProximity - std::fabs(lam1 + 1.0));
  m = std::min(m, kEigenProximity - std::fabs(lam2 - 3.0));
  m = std::min(m, std::fabs(lam1) - kEigenFloor);
  m = std::min(m, std::fabs(lam2) - kEigenFloor);
  m = std::min(m, -lam1);  // signature (-, +)
  m = std::min(m, lam2);
  return m;
}

struct RectResult {
  double margin = -1;
  double a = 0, b = 0;   // the rectangle that was checked (best or passing)
};

/// z1 certificate on [0,alpha] x [-beta,beta]: g < 0 on the left edge,
/// psit < 0 and g_xx > 0 on the rectangle, g_yy < 0 off the y-axis, g > 0 on
/// the right edge. Searches the menu of rectangle sizes; first pass wins.
/// Edges are swept before the interior so inadmissible rectangles fail fast.
inline RectResult check_rect_z1(double eps, const Perturbation& p, int n = 200) {
  static constexpr double menu[] = {0.1, 0.2, 0.3, 0.5};
  RectResult best;
  for (double alpha : menu) {
    for (double beta : menu) {
      double m = 1e300;
      for (int jj = 0; jj <= n && m > 0; ++jj) {
        const double y = beta * (2.0 * jj / n - 1.0);
        m = std::min(m, -eval_g(0.0, y, eps, p).value);    // g < 0 on {0} side
        if (m > 0)
          m = std::min(m, eval_g(alpha, y, eps, p).value); // g > 0 on {alpha} side
      }
      for (int i = 0; i <= n && m > 0; ++i) {
        const double x = alpha * i / n;
        for (int jj = 0; jj <= n; ++jj) {
          const double y = beta * (2.0 * jj / n - 1.0);
          DerivativeJet gj = eval_g(x, y, eps, p);
          m = std::min(m, -eval_psit(x, y, p).value);      // psit < 0
          m = std::min(m, gj.dxx);                         // g_xx > 0
          if (i > 0) m = std::min(m, -gj.dyy);             // g_yy < 0
          if (m <= 0) break;
        }
      }
      if (m > 0) return {m, alpha, beta};
      if (m > best.margin) best = {m, alpha, beta};
    }
  }
  return best;  // margin <= 0: no admissible rectangle found
}

/// z2 certificate on [-gamma,gamma] x [T-delta, T]: g > 0 on the top edge,
/// g < 0 on the bottom edge, g_y > 0 throughout, g_xx > 0 on the x >= 0 half.
/// The menu sizes always fail here (the corner rounding lives on the
/// sqrt(eps) scale), so sqrt(eps)-proportioned candidates follow them.
inline RectResult check_rect_z2(double eps, const Perturbation& p, int n = 200) {
  std::vector<std::pair<double, double>> cands;
  static constexpr double menu[] = {0.1, 0.2, 0.3, 0.5};
  for (double gm : menu)
    for (double dl : menu) cands.push_back({gm, dl});
  const double tstar = std::sqrt(2 * eps / 3);
  for (double dmul : {2.0, 3.0, 4.0}) {
    const double dl = dmul * tstar;
    const double gm = 0.9 * std::sqrt(3 * dl * dl - 2 * eps);
    cands.push_back({gm, dl});
  }
  RectResult best;
  for (auto [gamma, delta] : cands) {
    if (!(gamma > 0) || !(delta > 0) || delta >= kTopY - kC1) continue;
    double m = 1e300;
    for (int i = -n; i <= n && m > 0; ++i) {
      const double x = gamma * i / n;
      m = std::min(m, eval_g(x, kTopY, eps, p).value);           // top edge
      if (m > 0)
        m = std::min(m, -eval_g(x, kTopY - delta, eps, p).value); // bottom edge
    }
    for (int i = -n; i <= n && m > 0; ++i) {
      const double x = gamma * i / n;
      for (int jj = 0; jj <= n; ++jj) {
        const double y = kTopY - delta * jj / n;
        DerivativeJet gj = eval_g(x, y, eps, p);
        m = std::min(m, gj.dy);                    // g_y > 0
        if (i >= 0) m = std::min(m, gj.dxx);       // g_xx > 0 on right half
        if (m <= 0) break;
      }
    }
    if (m > 0) return {m, gamma, delta};
    if (m > best.margin) best = {m, gamma, delta};
  }
  return best;
}

namespace detail {

inline double dist2(double x, double y, double px, double py) {
  return (x - px) * (x - px) + (y - py) * (y - py);
}

inline bool in_global_region(double x, double y) {
  if (detail::dist2(x, y, kPi, kC1) < kGlobalBallRadius * kGlobalBallRadius) return false;
  if (detail::dist2(x, y, 0, 0) < kGlobalBallRadius * kGlobalBallRadius) return false;
  if (detail::dist2(x, y, 0, kTopY) < kGlobalBallRadius * kGlobalBallRadius) return false;
  return true;
}

// signed perpendicular distances to the unperturbed nodal lines
inline double dist_line_down(double x, double y) { return (x + kSqrt3d * y - 2 * kPi) / 2; }
inline double dist_line_up(double x, double y) { return (x - kSqrt3d * y) / 2; }

}  // namespace detail

/// Global certificate on [0,pi] x [0, 2pi/sqrt3] minus the three corner
/// balls: away from 0.2-tubes around the unperturbed nodal lines, g keeps
/// the sign of its unperturbed part; on the tube boundaries the signs match
/// the crossing direction; at zero crossings inside the tubes the gradient
/// stays above the floor.
inline double check_global(double eps, const Perturbation& p,
                           const ConditionGrids& grids = {}) {
  double margin = 1e300;

  // off-tube sign sweep (also covers the tube boundary by continuity; the
  // boundary itself is sampled explicitly below)
  for (int i = 0; i <= grids.global_nx; ++i) {
    const double x = kPi * i / grids.global_nx;
    for (int jj = 0; jj <= grids.global_ny; ++jj) {
      const double y = kTopY * jj / grids.global_ny;
      if (!detail::in_global_region(x, y)) continue;
      const double d1 = detail::dist_line_down(x, y);
      const double d2 = detail::dist_line_up(x, y);
      if (std::fabs(d1) <= kTubeRadius || std::fabs(d2) <= kTubeRadius) continue;
      // expected sign of the unperturbed factor: positive right of either line
      const double expect = (d1 > 0 || d2 > 0) ? 1.0 : -1.0;
      const double slack = expect * eval_g(x, y, eps, p).value;
      margin = std::min(margin, slack);
      if (margin <= 0) return margin;
    }
  }

  // fine sweep of the band hugging the top edge, where psit peaks near
  // 1e12 and the off-tube margin is thinnest (the coarse grid can step
  // across the violation sliver there)
  {
    static constexpr double depths[] = {0.0,  2e-3, 5e-3, 1e-2, 2e-2,
                                        4e-2, 6e-2, 1e-1, 1.5e-1};
    const int nfine = 8000;
    for (double t : depths) {
      const double y = kTopY - t;
      for (int i = 0; i <= nfine; ++i) {
        const double x = 1.6 * i / nfine;
        if (!detail::in_global_region(x, y)) continue;
        const double d1 = detail::dist_line_down(x, y);
        const double d2 = detail::dist_line_up(x, y);
        if (std::fabs(d1) <= kTubeRadius || std::fabs(d2) <= kTubeRadius) continue;
        const double expect = (d1 > 0 || d2 > 0) ? 1.0 : -1.0;
        margin = std::min(margin, expect * eval_g(x, y, eps, p).value);
        if (margin <= 0) return margin;
      }
    }
  }

  // tube-boundary sign samples along both lines
  const int nb = 2 * grids.global_ny;
  for (int line = 0; line < 2; ++line) {
    for (int i = 0; i <= nb; ++i) {
      const double yy = kTopY * i / nb;
      const double xx = (line == 0) ? 2 * kPi - kSqrt3d * yy : kSqrt3d * yy;
      // unit normal (1, sqrt3)/2 resp. (1, -sqrt3)/2
      const double nxv = 0.5, nyv = (line == 0) ? kSqrt3d / 2 : -kSqrt3d / 2;
      for (double side : {-1.0, 1.0}) {
        const double px = xx + side * kTubeRadius * nxv;
        const double py = yy + side * kTubeRadius * nyv;
        if (px < 0 || px > kPi || py < 0 || py > kTopY) continue;
        if (!detail::in_global_region(px, py)) continue;
        const double slack = side * eval_g(px, py, eps, p).value;
        margin = std::min(margin, slack);
        if (margin <= 0) return margin;
      }
    }
  }

  // gradient floor at zero crossings, located along grid rows inside tubes
  for (int jj = 0; jj <= grids.global_ny; ++jj) {
    const double y = kTopY * jj / grids.global_ny;
    double xprev = 0, gprev = 0;
    bool have = false;
    for (int i = 0; i <= grids.global_nx; ++i) {
      const double x = kPi * i / grids.global_nx;
      if (!detail::in_global_region(x, y)) { have = false; continue; }
      const double gv = eval_g(x, y, eps, p).value;
      if (have && gv * gprev < 0) {
        double lo = xprev, hi = x, glo = gprev;
        for (int it = 0; it < 60; ++it) {
          const double mid = (lo + hi) / 2;
          const double gm = eval_g(mid, y, eps, p).value;
          if (gm == 0) { lo = hi = mid; break; }
          if ((gm > 0) == (glo > 0)) { lo = mid; glo = gm; }
          else hi = mid;
        }
        DerivativeJet j = eval_g((lo + hi) / 2, y, eps, p);
        margin = std::min(margin, std::hypot(j.dx, j.dy) - kGradientFloor);
        if (margin <= 0) return margin;
      }
      xprev = x; gprev = gv; have = true;
    }
  }
  return margin;
}

// The admissible eps for the canonical waveset sits near 2^-41: the global
// sign margins force eps * psit below the tube floor, and psit grows to
// ~1e12 near the top edge. The search floor leaves headroom below that.
inline constexpr int kEpsilonSearchMaxLog2 = 60;

/// Halving search from eps = 1: the first eps = 2^-m for which all four
/// certificates pass, together with its report.
inline std::pair<double, ConditionReport> select_epsilon(
    const Perturbation& p, const ConditionGrids& grids = {}) {
  std::string last_fail;
  for (int m = 0; m <= kEpsilonSearchMaxLog2; ++m) {
    const double eps = std::ldexp(1.0, -m);
    ConditionReport rep;
    rep.epsilon = eps;

    const double ms = check_saddle_z0(eps, p);
    rep.margins["saddle_z0"] = ms;
    if (ms <= 0) { last_fail = "saddle_z0"; continue; }

    const RectResult r1 = check_rect_z1(eps, p, grids.rect_n);
    rep.margins["rect_z1"] = r1.margin;
    if (r1.margin <= 0) { last_fail = "rect_z1"; continue; }

    const RectResult r2 = check_rect_z2(eps, p, grids.rect_n);
    rep.margins["rect_z2"] = r2.margin;
    if (r2.margin <= 0) { last_fail = "rect_z2"; continue; }

    rep.regions.alpha = r1.a;
    rep.regions.beta = r1.b;
    rep.regions.gamma = r2.a;
    rep.regions.delta = r2.b;
    rep.regions.r = 0.5 * std::min({r1.a, r1.b, 0.2});

    const double mg = check_global(eps, p, grids);
    rep.margins["global"] = mg;
    if (mg <= 0) { last_fail = "global"; continue; }

    rep.regions.validate();
    rep.pass = true;
    return {eps, rep};
  }
  throw std::runtime_error("no admissible epsilon down to 2^-" +
                           std::to_string(kEpsilonSearchMaxLog2) +
                           "; last failing condition: " + last_fail);
}

/// Re-runs the four certificates at a fixed eps (for --epsilon overrides).
inline ConditionReport certify_epsilon(double eps, const Perturbation& p,
                                       const ConditionGrids& grids = {}) {
  if (!(eps > 0)) throw std::invalid_argument("epsilon must be positive");
  ConditionReport rep;
  rep.epsilon = eps;
  rep.margins["saddle_z0"] = check_saddle_z0(eps, p);
  const RectResult r1 = check_rect_z1(eps, p, grids.rect_n);
  rep.margins["rect_z1"] = r1.margin;
  const RectResult r2 = check_rect_z2(eps, p, grids.rect_n);
  rep.margins["rect_z2"] = r2.margin;
  rep.regions.alpha = r1.a;
  rep.regions.beta = r1.b;
  rep.regions.gamma = r2.a;
  rep.regions.delta = r2.b;
  rep.regions.r = 0.5 * std::min({r1.a, r1.b, 0.2});
  rep.margins["global"] = check_global(eps, p, grids);
  rep.pass = true;
  for (const auto& [name, m] : rep.margins)
    if (m <= 0) rep.pass = false;
  if (rep.pass) rep.regions.validate();
  return rep;
}

}  // namespace helmnodal
