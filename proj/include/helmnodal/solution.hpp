#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "helmnodal/trace.hpp"

namespace helmnodal {

inline constexpr double kHWindow = 1e-3;  // half-width of the singular windows

/// Cubic (4-point Lagrange) interpolant of the traced boundary graph,
/// even in y, with optional Newton polish back onto the zero set.
class MuInterpolant {
 public:
  explicit MuInterpolant(const NodalCurve& mu) {
    if (mu.axis != CurveAxis::ByY || mu.samples.size() < 8)
      throw std::invalid_argument("mu interpolant needs a ByY curve");
    ys_.reserve(mu.samples.size());
    xs_.reserve(mu.samples.size());
    for (const auto& sm : mu.samples) {
      ys_.push_back(sm[0]);
      xs_.push_back(sm[1]);
    }
  }

  double s() const { return ys_.back(); }

  double operator()(double y) const {
    double yy = std::fabs(y);
    if (yy > ys_.back() + 1e-12) throw std::domain_error("mu queried beyond s");
    yy = std::min(yy, ys_.back());
    auto it = std::upper_bound(ys_.begin(), ys_.end(), yy);
    std::size_t i = static_cast<std::size_t>(it - ys_.begin());
    i = std::min(std::max<std::size_t>(i, 2), ys_.size() - 2);
    const std::size_t a = i - 2;
    double out = 0;
    for (std::size_t m = 0; m < 4; ++m) {
      double term = xs_[a + m];
      for (std::size_t l = 0; l < 4; ++l) {
        if (l == m) continue;
        term *= (yy - ys_[a + l]) / (ys_[a + m] - ys_[a + l]);
      }
      out += term;
    }
    return out;
  }

  /// Newton polish of the interpolated value back onto g = 0.
  double polished(double y, double eps, const Perturbation& p) const {
    const double yy = std::fabs(y);
    double x = (*this)(yy);
    if (x < 1e-7) return x;  // top corner: g_x degenerates, interp is enough
    double best = x, bestf = std::fabs(eval_g(x, yy, eps, p).value);
    for (int it = 0; it < 4; ++it) {
      DerivativeJet j = eval_g(x, yy, eps, p);
      if (j.dx == 0) break;
      x -= j.value / j.dx;
      const double f = std::fabs(eval_g(x, yy, eps, p).value);
      if (f < bestf) { bestf = f; best = x; }
      else break;
    }
    return best;
  }

 private:
  std::vector<double> ys_, xs_;
};

/// The constructed domain: x-convex, symmetric about both axes, bounded by
/// the traced graph x = +-mu(|y|) for |y| < s.
struct DomainOmega {
  double s = 0;
  int sigma = 1;  // sign normalization applied to v
  std::shared_ptr<const MuInterpolant> mu;
  std::shared_ptr<const Perturbation> perturbation;
  double epsilon = 0;

  bool contains(double x, double y) const {
    if (!(std::fabs(y) < s)) return false;
    double m = (*mu)(y);
    if (std::fabs(std::fabs(x) - m) < 1e-6)
      m = mu->polished(y, epsilon, *perturbation);
    return std::fabs(x) < m;
  }

  bool on_closure(double x, double y) const {
    if (std::fabs(y) > s) return false;
    const double m = (*mu)(y);
    return std::fabs(x) <= m + 1e-9;
  }

  /// Boundary samples (x, y) over the full closed curve, n per quadrant.
  std::vector<std::array<double, 2>> boundary_samples(int n) const {
    std::vector<std::array<double, 2>> out;
    out.reserve(4 * n);
    for (int i = 0; i < n; ++i) {
      const double y = s * i / n;
      const double m = mu->polished(y, epsilon, *perturbation);
      out.push_back({m, y});
      out.push_back({m, -y});
      out.push_back({-m, y});
      out.push_back({-m, -y});
    }
    return out;
  }
};

inline DomainOmega build_domain(const TraceResult& trace, double eps,
                                const Perturbation& p) {
  DomainOmega d;
  d.s = trace.s;
  d.mu = std::make_shared<MuInterpolant>(trace.mu);
  d.perturbation = std::make_shared<Perturbation>(p);
  d.epsilon = eps;
  const double v_left = eval_v(-3 * kPi / 2, 0.0, eps, p).value;
  d.sigma = (v_left >= 0) ? 1 : -1;
  return d;
}

/// The solution u(x, y) = sigma (U(x,y) - U(mu(|y|), y)), the closed-form
/// realization of the x-antiderivative of v started on the boundary.
class SolutionU {
 public:
  SolutionU(DomainOmega domain) : dom_(std::move(domain)) {}

  const DomainOmega& domain() const { return dom_; }
  double epsilon() const { return dom_.epsilon; }
  const Perturbation& perturbation() const { return *dom_.perturbation; }
  int sigma() const { return dom_.sigma; }

  double value(double x, double y) const {
    check_inside(x, y);
    return value_unchecked(x, y);
  }

  double value_unchecked(double x, double y) const {
    const double m = (*dom_.mu)(y);
    return dom_.sigma * (eval_U(x, y, dom_.epsilon, *dom_.perturbation).value -
                         eval_U(m, y, dom_.epsilon, *dom_.perturbation).value);
  }

  /// (u, u_x, u_y); u_x = sigma v and u_y needs no mu' term because
  /// U_x = v vanishes along the boundary curve.
  std::array<double, 3> value_grad(double x, double y) const {
    const double m = (*dom_.mu)(y);
    DerivativeJet a = eval_U(x, y, dom_.epsilon, *dom_.perturbation);
    DerivativeJet b = eval_U(m, y, dom_.epsilon, *dom_.perturbation);
    return {dom_.sigma * (a.value - b.value), dom_.sigma * a.dx,
            dom_.sigma * (a.dy - b.dy)};
  }

  /// u_xx = sigma v_x, closed form.
  double uxx(double x, double y) const {
    return dom_.sigma * eval_U(x, y, dom_.epsilon, *dom_.perturbation).dxx;
  }

  /// u_yy = sigma (U_yy(x,y) - d/dy U_y(mu(y), y)); the boundary term is the
  /// one mu-dependent piece and is differenced to fourth order with polished
  /// roots at the stencil heights.
  double uyy(double x, double y, double fd_step = 2e-4) const {
    const double h = fd_step;
    auto B = [&](double yy) {
      const double m = dom_.mu->polished(yy, dom_.epsilon, *dom_.perturbation);
      return eval_U(m, yy, dom_.epsilon, *dom_.perturbation).dy;
    };
    const double dB = (B(y - 2 * h) - 8 * B(y - h) + 8 * B(y + h) - B(y + 2 * h)) / (12 * h);
    return dom_.sigma *
           (eval_U(x, y, dom_.epsilon, *dom_.perturbation).dyy - dB);
  }

 private:
  void check_inside(double x, double y) const {
    if (!dom_.on_closure(x, y))
      throw std::domain_error("u evaluated outside the closure of Omega");
  }

  DomainOmega dom_;
};

/// Tabulated source term h on [-s, s] with the two singular heights filled
/// by even-order polynomial extrapolation and pinned endpoint values.
struct SourceH {
  std::vector<double> y;   // ascending over [-s, s]
  std::vector<double> h;
  double s = 0;
  double h_at_s = 0;       // pinned: -sigma g_y(0,s)^2 / g_xx(0,s)
  double extrap_mismatch_c1 = 0;  // two-sided extrapolation disagreement
  double extrap_at_c1 = 0;        // extrapolated value at pi/sqrt3 (pin: 0)
  double extrap_mismatch_s = 0;   // one-sided extrapolation vs pinned value

  double operator()(double yy) const {
    if (std::fabs(yy) > s + 1e-12) throw std::domain_error("h queried beyond s");
    const double t = std::clamp(yy, y.front(), y.back());
    auto it = std::upper_bound(y.begin(), y.end(), t);
    std::size_t i = static_cast<std::size_t>(it - y.begin());
    i = std::min(std::max<std::size_t>(i, 2), y.size() - 2);
    const std::size_t a = i - 2;
    double out = 0;
    for (std::size_t m = 0; m < 4; ++m) {
      double term = h[a + m];
      for (std::size_t l = 0; l < 4; ++l) {
        if (l == m) continue;
        term *= (t - y[a + l]) / (y[a + m] - y[a + l]);
      }
      out += term;
    }
    return out;
  }
};

namespace detail {

/// Least-squares fit of c0 + c2 d^2 + c4 d^4 over (d_i, v_i); d normalized
/// by its largest magnitude before forming the normal equations.
inline std::array<double, 3> even_quartic_fit(const std::vector<double>& d,
                                              const std::vector<double>& v) {
  double dmax = 0;
  for (double t : d) dmax = std::max(dmax, std::fabs(t));
  if (dmax == 0) throw std::invalid_argument("degenerate fit abscissae");
  double A[3][3] = {};
  double b[3] = {};
  for (std::size_t i = 0; i < d.size(); ++i) {
    const double q = (d[i] / dmax) * (d[i] / dmax);
    const double phi[3] = {1.0, q, q * q};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) A[r][c] += phi[r] * phi[c];
      b[r] += phi[r] * v[i];
    }
  }
  // 3x3 Gaussian elimination with partial pivoting
  int idx[3] = {0, 1, 2};
  for (int s = 0; s < 3; ++s) {
    int piv = s;
    for (int r = s + 1; r < 3; ++r)
      if (std::fabs(A[idx[r]][s]) > std::fabs(A[idx[piv]][s])) piv = r;
    std::swap(idx[s], idx[piv]);
    for (int r = s + 1; r < 3; ++r) {
      const double f = A[idx[r]][s] / A[idx[s]][s];
      for (int c = s; c < 3; ++c) A[idx[r]][c] -= f * A[idx[s]][c];
      b[idx[r]] -= f * b[idx[s]];
    }
  }
  double c[3];
  for (int s = 3; s-- > 0;) {
    double acc = b[idx[s]];
    for (int c2 = s + 1; c2 < 3; ++c2) acc -= A[idx[s]][c2] * c[c2];
    c[s] = acc / A[idx[s]][s];
  }
  // undo the normalization
  c[1] /= dmax * dmax;
  c[2] /= dmax * dmax * dmax * dmax;
  return {c[0], c[1], c[2]};
}

inline double eval_even_quartic(const std::array<double, 3>& c, double d) {
  return c[0] + c[1] * d * d + c[2] * d * d * d * d;
}

}  // namespace detail

/// Builds the source table h(y) = sigma (v_y mu' - v_x) = -sigma
/// (v_x^2 + v_y^2)/v_x evaluated along the boundary curve, excluding windows
/// around the two heights where the ratio degenerates to 0/0, which are
/// refilled by even-order quartic extrapolation and pinned limits.
inline SourceH build_h(const SolutionU& sol, const TraceResult& trace,
                       int n_samples = 8001) {
  const double eps = sol.epsilon();
  const Perturbation& p = sol.perturbation();
  const double s = trace.s;
  const int sigma = sol.sigma();
  const MuInterpolant& mu = *sol.domain().mu;

  SourceH out;
  out.s = s;
  // pinned endpoint: local expansion of -(v_x^2+v_y^2)/v_x along the curve
  {
    DerivativeJet j = eval_g(0.0, s, eps, p);
    out.h_at_s = -sigma * j.dy * j.dy / j.dxx;
  }

  std::vector<double> yg, hg;
  std::vector<std::size_t> window_idx;  // indexes into yg needing fill
  for (int i = 0; i <= n_samples; ++i) {
    const double y = s * i / n_samples;
    yg.push_back(y);
    const bool in_c1 = std::fabs(y - kC1) < kHWindow;
    const bool in_s = y > s - kHWindow;
    if (in_c1 || in_s) {
      hg.push_back(0);  // placeholder
      window_idx.push_back(yg.size() - 1);
      continue;
    }
    const double x = mu.polished(y, eps, p);
    DerivativeJet v = eval_v(x, y, eps, p);
    hg.push_back(-sigma * (v.dx * v.dx + v.dy * v.dy) / v.dx);
  }

  // Window fits. Direct evaluation of h is reliable down to ~1e-5 from the
  // degenerate heights (the 0/0 ratio keeps full relative accuracy there),
  // while the corner-localized eps corrections make h's Taylor coefficients
  // vary on the 1/nu_5 scale; so the fits draw on probes just inside the
  // window rather than on far-out grid samples.
  auto h_direct = [&](double yy) {
    const double x = mu.polished(yy, eps, p);
    DerivativeJet v = eval_v(x, yy, eps, p);
    return -sigma * (v.dx * v.dx + v.dy * v.dy) / v.dx;
  };
  static constexpr double kProbeOffsets[] = {1e-5, 2e-5, 5e-5, 1e-4,
                                             2e-4, 4e-4, 7e-4, 1e-3};
  auto collect_side = [&](double center, double side, std::vector<double>& dd,
                          std::vector<double>& vv) {
    for (double off : kProbeOffsets) {
      const double yy = center + side * off;
      if (yy <= 0 || yy >= s - std::min(1e-5, (kTopY - s))) continue;
      dd.push_back(yy - center);
      vv.push_back(h_direct(yy));
    }
  };
  {
    std::vector<double> dl, vl, dr, vr;
    collect_side(kC1, -1.0, dl, vl);
    collect_side(kC1, +1.0, dr, vr);
    if (dl.size() < 5 || dr.size() < 5)
      throw std::runtime_error("build_h: too few samples flanking pi/sqrt3");
    const auto cl = detail::even_quartic_fit(dl, vl);
    const auto cr = detail::even_quartic_fit(dr, vr);
    out.extrap_mismatch_c1 =
        std::fabs(detail::eval_even_quartic(cl, 0) - detail::eval_even_quartic(cr, 0));
    out.extrap_at_c1 =
        0.5 * (detail::eval_even_quartic(cl, 0) + detail::eval_even_quartic(cr, 0));
    if (out.extrap_mismatch_c1 > 1e-6)
      throw std::runtime_error("build_h: window extrapolations disagree at pi/sqrt3");
    for (std::size_t idx : window_idx) {
      const double d = yg[idx] - kC1;
      if (std::fabs(d) >= kHWindow) continue;
      hg[idx] = 0.5 * (detail::eval_even_quartic(cl, d) +
                       detail::eval_even_quartic(cr, d));
    }
  }
  // one-sided extrapolation into the s window, checked against the pin
  {
    std::vector<double> dl, vl;
    collect_side(s, -1.0, dl, vl);
    if (dl.size() < 5)
      throw std::runtime_error("build_h: too few samples flanking s");
    const auto cl = detail::even_quartic_fit(dl, vl);
    out.extrap_mismatch_s =
        std::fabs(detail::eval_even_quartic(cl, 0) - out.h_at_s);
    if (out.extrap_mismatch_s > 1e-6)
      throw std::runtime_error("build_h: extrapolation vs endpoint pin disagree at s");
    for (std::size_t idx : window_idx) {
      const double d = yg[idx] - s;
      if (yg[idx] <= s - kHWindow) continue;
      hg[idx] = detail::eval_even_quartic(cl, d);
    }
  }
  // exact pins
  for (std::size_t i = 0; i < yg.size(); ++i) {
    if (yg[i] == kC1) hg[i] = 0;
    if (yg[i] == s) hg[i] = out.h_at_s;
  }

  // mirror into an even table on [-s, s]
  out.y.reserve(2 * yg.size());
  out.h.reserve(2 * yg.size());
  for (std::size_t i = yg.size(); i-- > 1;) {
    out.y.push_back(-yg[i]);
    out.h.push_back(hg[i]);
  }
  for (std::size_t i = 0; i < yg.size(); ++i) {
    out.y.push_back(yg[i]);
    out.h.push_back(hg[i]);
  }
  return out;
}

/// -(Delta u + 4 u) at several abscissae of one height; the construction
/// makes it a function of y alone, so the spread across x is a consistency
/// residual. Returns {values..., spread}.
struct HResidual {
  std::vector<double> values;
  double spread = 0;
};

inline HResidual residual_h(const SolutionU& sol, double y,
                            const std::vector<double>& xs) {
  HResidual r;
  for (double x : xs) {
    const double u = sol.value_unchecked(x, y);
    const double val = -(sol.uxx(x, y) + sol.uyy(x, y) + 4 * u);
    r.values.push_back(val);
  }
  const auto [mn, mx] = std::minmax_element(r.values.begin(), r.values.end());
  r.spread = *mx - *mn;
  return r;
}

}  // namespace helmnodal
