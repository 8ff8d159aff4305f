#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "helmnodal/conditions.hpp"
#include "helmnodal/field.hpp"

namespace helmnodal {

inline constexpr double kCurveResidualTol = 1e-10;
inline constexpr double kSaddleWindow = 0.05;   // |y - pi/sqrt3| for the q-march
inline constexpr double kClusterWindow = 0.1;   // refinement windows at pi/sqrt3, s

enum class CurveAxis { ByY, ByX };

/// Ordered samples (parameter, coordinate) of one zero curve of g, with
/// optional unit tangents (pointing toward increasing parameter).
struct NodalCurve {
  CurveAxis axis = CurveAxis::ByY;
  std::vector<std::array<double, 2>> samples;
  std::vector<std::array<double, 2>> tangents;

  double max_residual(double eps, const Perturbation& p) const {
    double worst = 0;
    for (const auto& s : samples) {
      const double x = (axis == CurveAxis::ByY) ? s[1] : s[0];
      const double y = (axis == CurveAxis::ByY) ? s[0] : s[1];
      worst = std::max(worst, std::fabs(eval_g(x, y, eps, p).value));
    }
    return worst;
  }
};

struct TraceResult {
  double s = 0;
  NodalCurve mu;        // boundary graph x = mu(y), y in [0, s]
  NodalCurve interior;  // {(2pi - mu(y), y) : |y| <= pi/sqrt3}
};

namespace detail {

struct RootFn {
  double eps;
  const Perturbation* p;
  double y;
  double operator()(double x) const { return eval_g(x, y, eps, *p).value; }
  double deriv(double x) const { return eval_g(x, y, eps, *p).dx; }
};

/// Safeguarded Newton inside a sign-changing bracket; falls back to
/// bisection whenever the Newton step leaves the bracket or stalls.
/// Newton typically converges one-sidedly, so the far bracket end can stay
/// coarse; the iterate with the smallest |f| is the answer, not the
/// bracket midpoint.
template <typename F, typename DF>
double newton_bisect(F f, DF df, double lo, double hi, double flo, double fhi,
                     double x0) {
  if (flo == 0) return lo;
  if (fhi == 0) return hi;
  if ((flo > 0) == (fhi > 0)) throw std::runtime_error("bracket without sign change");
  double x = std::clamp(x0, lo, hi);
  double fx = (x == lo) ? flo : (x == hi) ? fhi : f(x);
  double best_x = x, best_f = std::fabs(fx);
  for (int it = 0; it < 200; ++it) {
    if (fx == 0) return x;
    if (std::fabs(fx) < best_f) { best_f = std::fabs(fx); best_x = x; }
    if ((fx > 0) == (fhi > 0)) { hi = x; fhi = fx; }
    else { lo = x; flo = fx; }
    if (hi - lo <= 4e-16 * (std::fabs(lo) + std::fabs(hi) + 1e-3)) break;
    const double d = df(x);
    double xn = (d != 0) ? x - fx / d : 0.5 * (lo + hi);
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    const double step = std::fabs(xn - x);
    x = xn;
    fx = f(x);
    if (it > 2 && step <= 2e-16 * (std::fabs(x) + 1e-6)) {
      if (std::fabs(fx) < best_f) { best_f = std::fabs(fx); best_x = x; }
      break;
    }
  }
  const double mid = 0.5 * (lo + hi);
  const double fm = f(mid);
  return (std::fabs(fm) < best_f) ? mid : best_x;
}

}  // namespace detail

/// Height of the top boundary point: the root of g(0, .) in
/// (pi/sqrt3, 2pi/sqrt3). Bisection first, then derivative polish.
inline double find_s(double eps, const Perturbation& p) {
  if (!(eps > 0)) throw std::invalid_argument("find_s requires eps > 0");
  double lo = kC1, hi = kTopY;
  double flo = eval_g(0, lo, eps, p).value;   // = -2 exactly
  double fhi = eval_g(0, hi, eps, p).value;   // = eps * psit(0, top) > 0
  if (!(flo < 0 && fhi > 0))
    throw std::runtime_error("find_s: no sign change in (pi/sqrt3, 2pi/sqrt3)");
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    const double fm = eval_g(0, mid, eps, p).value;
    if (fm == 0) { lo = hi = mid; break; }
    if (fm < 0) { lo = mid; flo = fm; }
    else { hi = mid; fhi = fm; }
  }
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 8; ++it) {  // Newton polish
    DerivativeJet j = eval_g(0, s, eps, p);
    if (j.dy == 0) break;
    const double step = j.value / j.dy;
    const double sn = std::clamp(s - step, lo, hi);
    if (sn == s) break;
    s = sn;
  }
  if (!(eval_g(0, s, eps, p).dy > 0))
    throw std::runtime_error("find_s: g_y(0,s) not positive");
  return s;
}

namespace detail {

/// y-grid on [0, s]: cosine-spaced toward s, with 10x uniform refinement
/// inside the windows around pi/sqrt3 and s; always contains 0, pi/sqrt3, s.
inline std::vector<double> trace_grid(double s, int n) {
  std::vector<double> ys;
  ys.reserve(2 * n);
  for (int i = 0; i < n; ++i)
    ys.push_back(s * std::sin(kPi * i / (2.0 * (n - 1))));
  const double base_h = s / n;
  auto refine = [&](double a, double b) {
    a = std::max(a, 0.0);
    b = std::min(b, s);
    const int m = static_cast<int>(std::ceil((b - a) / (base_h / 10)));
    for (int i = 0; i <= m; ++i) ys.push_back(a + (b - a) * i / m);
  };
  refine(kC1 - kClusterWindow, kC1 + kClusterWindow);
  refine(s - kClusterWindow, s);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end(),
                       [](double a, double b) { return std::fabs(a - b) < 1e-13; }),
           ys.end());
  // the pinned parameters must be hit exactly
  auto snap = [&](double v) {
    auto it = std::min_element(ys.begin(), ys.end(), [&](double a, double b) {
      return std::fabs(a - v) < std::fabs(b - v);
    });
    *it = v;
  };
  snap(0.0);
  snap(kC1);
  snap(s);
  return ys;
}

}  // namespace detail

/// Traces the boundary graph x = mu(y) on [0, s] by predictor-corrector
/// continuation in y, switching to the even variable q = (x - pi)^2 inside
/// the saddle window around pi/sqrt3. Endpoints are pinned to mu(pi/sqrt3) =
/// pi and mu(s) = 0.
inline NodalCurve trace_mu(double eps, const Perturbation& p, int n_samples,
                           double s_hint = -1) {
  if (n_samples < 64) throw std::invalid_argument("n_samples too small");
  const double s = (s_hint > 0) ? s_hint : find_s(eps, p);
  const std::vector<double> ys = detail::trace_grid(s, n_samples);

  NodalCurve curve;
  curve.axis = CurveAxis::ByY;
  curve.samples.reserve(ys.size());
  curve.tangents.reserve(ys.size());

  auto fail = [](double y, const char* what) {
    std::ostringstream os;
    os << "trace_mu: " << what << " at y = " << y;
    throw std::runtime_error(os.str());
  };

  // initial root at y = 0, just below x = 2 pi
  double xq;
  {
    detail::RootFn f{eps, &p, 0.0};
    double lo = 2 * kPi - 0.5, hi = 2 * kPi;
    double flo = f(lo), fhi = f(hi);
    if ((flo > 0) == (fhi > 0)) fail(0.0, "no starting bracket near 2 pi");
    xq = detail::newton_bisect(f, [&](double x) { return f.deriv(x); }, lo, hi,
                               flo, fhi, 2 * kPi - std::sqrt(2 * eps));
  }

  double x_prev = xq, y_prev = 0.0;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double y = ys[i];
    double x;
    if (y == 0.0) {
      x = xq;
    } else if (y == kC1) {
      x = kPi;  // saddle point of g: exact by the coefficient constraints
    } else if (y == s) {
      x = 0.0;  // top corner: root of g(0, .)
    } else if (std::fabs(y - kC1) < kSaddleWindow) {
      // even-variable march through the saddle: solve phi(q) = g(pi+sqrt(q), y)
      const double dy = y - y_prev;
      double q_prev = (x_prev - kPi) * (x_prev - kPi);
      auto phi = [&](double q) { return eval_g(kPi + std::sqrt(q), y, eps, p).value; };
      auto phi_q = [&](double q) {
        const double t = std::sqrt(q);
        DerivativeJet j = eval_g(kPi + t, y, eps, p);
        return (t > 1e-5) ? j.dx / (2 * t) : 0.5 * j.dxx;
      };
      // predictor along dq/dy
      double q = q_prev;
      {
        const double t = std::sqrt(std::max(q_prev, 0.0));
        DerivativeJet j = eval_g(kPi + t, y_prev, eps, p);
        const double fq = (t > 1e-5) ? j.dx / (2 * t) : 0.5 * j.dxx;
        if (fq != 0) q = std::max(0.0, q_prev - j.dy / fq * dy);
      }
      // bracket: phi(0) > 0 away from c1, phi decreasing in q
      double lo = 0.0, flo = phi(0.0);
      if (flo <= 0) fail(y, "saddle bracket lost (phi(0) <= 0)");
      double hi = std::max(2 * q, 3 * (y - kC1) * (y - kC1) * 4 + 16 * eps);
      double fhi = phi(hi);
      for (int t = 0; t < 60 && fhi > 0; ++t) { hi *= 2; fhi = phi(hi); }
      if (fhi > 0) fail(y, "saddle bracket lost (phi stays positive)");
      q = detail::newton_bisect(phi, phi_q, lo, hi, flo, fhi, q);
      x = kPi + ((y < kC1) ? 1.0 : -1.0) * std::sqrt(std::max(q, 0.0));
    } else {
      // regular continuation: predictor + safeguarded corrector
      const double dy = y - y_prev;
      DerivativeJet jp = eval_g(x_prev, y_prev, eps, p);
      double slope = (jp.dx != 0) ? -jp.dy / jp.dx : 0.0;
      slope = std::clamp(slope, -100.0, 100.0);
      const double x_pred = x_prev + slope * dy;
      detail::RootFn f{eps, &p, y};
      double h = std::max({1.5 * std::fabs(x_pred - x_prev), 10 * dy, 1e-9});
      // branch guards: x > 0 above the saddle height, x < 2pi (where the
      // mirror root across the even line x = 2pi lives) below it
      auto clampb = [&](double& lo, double& hi) {
        if (y > kC1) lo = std::max(lo, 1e-14);
        if (y < kC1) hi = std::min(hi, 2 * kPi);
      };
      double lo = x_pred - h, hi = x_pred + h;
      clampb(lo, hi);
      double flo = f(lo), fhi = f(hi);
      int grow = 0;
      while ((flo > 0) == (fhi > 0) && grow++ < 60) {
        h *= 2;
        lo = x_pred - h;
        hi = x_pred + h;
        clampb(lo, hi);
        flo = f(lo);
        fhi = f(hi);
      }
      if ((flo > 0) == (fhi > 0)) fail(y, "bracket lost");
      x = detail::newton_bisect(f, [&](double t) { return f.deriv(t); }, lo, hi,
                                flo, fhi, x_pred);
    }

    if (i > 0 && !(x < x_prev + 1e-15)) fail(y, "non-monotone sequence");

    // unit tangent toward increasing y
    double tx, ty;
    if (y == kC1) {
      tx = -kSqrt3d / 2; ty = 0.5;  // from the saddle Hessian diag(-1,3)
    } else if (y == s) {
      tx = -1; ty = 0;
    } else {
      DerivativeJet j = eval_g(x, y, eps, p);
      if (j.dx == 0) { tx = -1; ty = 0; }
      else {
        const double m = -j.dy / j.dx;
        const double nrm = std::hypot(m, 1.0);
        tx = m / nrm; ty = 1.0 / nrm;
      }
    }
    curve.samples.push_back({y, x});
    curve.tangents.push_back({tx, ty});
    x_prev = x;
    y_prev = y;
  }
  return curve;
}

/// Reflection of the traced boundary through x -> 2pi - x restricted to
/// |y| <= pi/sqrt3: the right interior nodal curve of v. Residuals are
/// re-verified directly, which checks the trace against the evenness of g
/// about x = pi.
inline NodalCurve derive_interior(const NodalCurve& mu, double eps,
                                  const Perturbation& p) {
  NodalCurve out;
  out.axis = CurveAxis::ByY;
  std::vector<std::array<double, 2>> upper;
  std::vector<std::array<double, 2>> upper_tan;
  for (std::size_t i = 0; i < mu.samples.size(); ++i) {
    const double y = mu.samples[i][0];
    if (y > kC1 + 1e-15) break;
    upper.push_back({y, 2 * kPi - mu.samples[i][1]});
    upper_tan.push_back({-mu.tangents[i][0], mu.tangents[i][1]});
  }
  for (std::size_t i = upper.size(); i-- > 0;) {
    if (upper[i][0] == 0.0) continue;
    out.samples.push_back({-upper[i][0], upper[i][1]});
    out.tangents.push_back({-upper_tan[i][0], upper_tan[i][1]});
  }
  for (std::size_t i = 0; i < upper.size(); ++i) {
    out.samples.push_back(upper[i]);
    out.tangents.push_back(upper_tan[i]);
  }
  double worst = 0;
  for (const auto& sm : out.samples)
    worst = std::max(worst, std::fabs(eval_g(sm[1], sm[0], eps, p).value));
  if (worst > kCurveResidualTol)
    throw std::runtime_error(
        "derive_interior: reflected curve residual above tolerance (trace vs "
        "symmetry inconsistency)");
  return out;
}

/// Local graphs at the degenerate corners: xi(y) on [0, beta] with the zero
/// of g(., y) in (0, alpha), and eta(x) on [0, gamma] with the zero of
/// g(x, .) in (T - delta, T). Verifies the derivative signs the local
/// analysis asserts: xi' > 0, eta' < 0, eta''(0) < 0.
inline std::pair<NodalCurve, NodalCurve> local_xi_eta(
    double eps, const Perturbation& p, const ConditionRegions& regions,
    int n = 256) {
  NodalCurve xi, eta;
  xi.axis = CurveAxis::ByY;
  eta.axis = CurveAxis::ByX;

  for (int i = 0; i <= n; ++i) {
    const double y = regions.beta * i / n;
    detail::RootFn f{eps, &p, y};
    double lo = 1e-14, hi = regions.alpha;
    double flo = f(lo), fhi = f(hi);
    if ((flo > 0) == (fhi > 0))
      throw std::runtime_error("local_xi_eta: xi bracket failed");
    const double x = detail::newton_bisect(
        f, [&](double t) { return f.deriv(t); }, lo, hi, flo, fhi,
        (i == 0) ? std::sqrt(2 * eps) : xi.samples.back()[1]);
    xi.samples.push_back({y, x});
  }
  for (std::size_t i = 1; i < xi.samples.size(); ++i)
    if (!(xi.samples[i][1] > xi.samples[i - 1][1]))
      throw std::runtime_error("local_xi_eta: xi not strictly increasing");

  for (int i = 0; i <= n; ++i) {
    const double x = regions.gamma * i / n;
    auto f = [&](double y) { return eval_g(x, y, eps, p).value; };
    auto df = [&](double y) { return eval_g(x, y, eps, p).dy; };
    double lo = kTopY - regions.delta, hi = kTopY;
    double flo = f(lo), fhi = f(hi);
    if ((flo > 0) == (fhi > 0))
      throw std::runtime_error("local_xi_eta: eta bracket failed");
    const double y = detail::newton_bisect(
        f, df, lo, hi, flo, fhi,
        (i == 0) ? kTopY - std::sqrt(2 * eps / 3) : eta.samples.back()[1]);
    eta.samples.push_back({x, y});
  }
  for (std::size_t i = 1; i < eta.samples.size(); ++i)
    if (!(eta.samples[i][1] < eta.samples[i - 1][1]))
      throw std::runtime_error("local_xi_eta: eta not strictly decreasing");
  // eta''(0) < 0 by second differences at the axis
  {
    const double h = regions.gamma / n;
    const double d2 =
        (eta.samples[2][1] - 2 * eta.samples[1][1] + eta.samples[0][1]) / (h * h);
    if (!(d2 < 0))
      throw std::runtime_error("local_xi_eta: eta''(0) not negative");
  }
  return {xi, eta};
}

/// The eps = 0 limit of the trace: the rhombus boundary mu(y) = 2pi -
/// sqrt3 |y| with s = 2pi/sqrt3, used by the unperturbed-oracle paths.
inline TraceResult rhombus_trace(int n_samples = 2001) {
  TraceResult tr;
  tr.s = kTopY;
  tr.mu.axis = CurveAxis::ByY;
  std::vector<double> ys;
  for (int i = 0; i <= n_samples; ++i) ys.push_back(kTopY * i / n_samples);
  ys.push_back(kC1);
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  for (double y : ys) {
    const double x = (y == kC1) ? kPi : 2 * kPi - kSqrt3d * y;
    tr.mu.samples.push_back({y, std::max(x, 0.0)});
    tr.mu.tangents.push_back({-kSqrt3d / 2, 0.5});
  }
  tr.mu.samples.back() = {kTopY, 0.0};
  tr.interior.axis = CurveAxis::ByY;
  std::vector<double> half;
  for (double y : ys)
    if (y <= kC1) half.push_back(y);
  for (std::size_t i = half.size(); i-- > 1;)
    tr.interior.samples.push_back({-half[i], kSqrt3d * half[i]});
  for (double y : half) tr.interior.samples.push_back({y, kSqrt3d * y});
  return tr;
}

/// Full nodal trace: s, the boundary graph, and the interior curve.
inline TraceResult trace_all(double eps, const Perturbation& p,
                             int n_samples = 2001) {
  TraceResult tr;
  tr.s = find_s(eps, p);
  tr.mu = trace_mu(eps, p, n_samples, tr.s);
  tr.interior = derive_interior(tr.mu, eps, p);

  // structural invariants of the trace
  if (!(tr.s > kC1 && tr.s < kTopY))
    throw std::runtime_error("trace_all: s outside (pi/sqrt3, 2pi/sqrt3)");
  double mu_c1 = 0;
  for (const auto& sm : tr.mu.samples)
    if (sm[0] == kC1) mu_c1 = sm[1];
  if (std::fabs(mu_c1 - kPi) > 1e-9)
    throw std::runtime_error("trace_all: mu(pi/sqrt3) != pi");
  for (const auto& sm : tr.mu.samples) {
    const bool last = (sm[0] == tr.mu.samples.back()[0]);
    if (!last && !(sm[1] > 0 && sm[1] < 2 * kPi))
      throw std::runtime_error("trace_all: mu leaves (0, 2pi)");
  }
  if (tr.mu.samples.back()[1] != 0.0)
    throw std::runtime_error("trace_all: mu(s) not pinned to 0");
  return tr;
}

}  // namespace helmnodal
