#pragma once

#include <cmath>
#include <memory>
#include <stdexcept>

#include "helmnodal/jet.hpp"
#include "helmnodal/perturbation.hpp"

namespace helmnodal {

// All hot-path evaluation runs in long double. The psi part is always
// multiplied by epsilon (~2^-41) before it meets the trigonometric part,
// so its large internal terms never contaminate the returned jet; the
// raw psi jets (no epsilon shield) go through psi_jet_q instead.

namespace detail {

struct TrigX {
  long double s1, c1;                    // sin x, cos x
  long double sk[5], ck[5];              // sin(k_j x), cos(k_j x)
};

/// sin/cos of the five even multiples of x by an angle-addition ladder.
inline TrigX trig_ladder(long double x, const WaveSet& ws) {
  TrigX t;
  t.s1 = sinl(x);
  t.c1 = cosl(x);
  long double s2 = 2 * t.s1 * t.c1;
  long double c2 = 1 - 2 * t.s1 * t.s1;
  long double sm = s2, cm = c2;  // current multiple m = 2
  int m = 2, idx = 0;
  while (idx < 5) {
    if (ws.k[idx] == m) {
      t.sk[idx] = sm;
      t.ck[idx] = cm;
      ++idx;
      if (idx == 5) break;
    }
    long double sn = sm * c2 + cm * s2;
    long double cn = cm * c2 - sm * s2;
    sm = sn; cm = cn; m += 2;
    if (m > 400) throw std::logic_error("trig ladder ran away");
  }
  return t;
}

struct HypY {
  long double ch[5], sh[5];              // cosh(nu_j y), sinh(nu_j y)
};

inline HypY hyp_modes(long double y, const WaveSet& ws) {
  HypY h;
  for (int j = 0; j < 5; ++j) {
    long double nu = sqrtl(static_cast<long double>(ws.k[j]) * ws.k[j] - 4);
    long double a = nu * y;
    if (fabsl(a) > kCoshArgCap)
      throw std::domain_error("field evaluation out of range: |nu y| above cap");
    if (fabsl(a) < 0.01L) {
      h.ch[j] = coshl(a);
      h.sh[j] = sinhl(a);
    } else {
      long double e = expl(a), r = 1 / e;
      h.ch[j] = (e + r) / 2;
      h.sh[j] = (e - r) / 2;
    }
  }
  return h;
}

inline constexpr long double kSqrt3 = 1.73205080756887729352744634150587237L;

}  // namespace detail

/// Jet of w(x,y) = (cos(sqrt3 y) - cos x) sin x, the unperturbed solution.
inline DerivativeJet eval_w(double x, double y) {
  const long double sx = sinl((long double)x), cx = cosl((long double)x);
  const long double a = detail::kSqrt3 * (long double)y;
  const long double C = cosl(a), S = sinl(a);
  const long double s2 = 2 * sx * cx, c2 = 1 - 2 * sx * sx;  // sin 2x, cos 2x
  DerivativeJet j;
  j.value = (double)((C - cx) * sx);
  j.dx = (double)(C * cx - c2);
  j.dy = (double)(-detail::kSqrt3 * S * sx);
  j.dxx = (double)(-C * sx + 2 * s2);
  j.dxy = (double)(-detail::kSqrt3 * S * cx);
  j.dyy = (double)(-3 * C * sx);
  return j;
}

/// Jet of psi for the solved perturbation, from the full-precision path.
inline DerivativeJet eval_psi(double x, double y, const Perturbation& p) {
  QJet q = psi_jet_q((qreal)x, (qreal)y, p);
  DerivativeJet j;
  j.value = (double)q.value;
  j.dx = (double)q.dx;
  j.dy = (double)q.dy;
  j.dxx = (double)q.dxx;
  j.dxy = (double)q.dxy;
  j.dyy = (double)q.dyy;
  return j;
}

namespace detail {

struct LJet {
  long double value = 0, dx = 0, dy = 0, dxx = 0, dxy = 0, dyy = 0;
};

inline LJet psi_jet_fast(long double x, long double y, const Perturbation& p) {
  const TrigX t = trig_ladder(x, p.waveset);
  const HypY h = hyp_modes(y, p.waveset);
  LJet o;
  for (int j = 0; j < 5; ++j) {
    const long double k = p.waveset.k[j];
    const long double nu = sqrtl(k * k - 4);
    const long double a = p.d_ldbl(j) / k;
    o.value += a * t.sk[j] * h.ch[j];
    o.dx += a * k * t.ck[j] * h.ch[j];
    o.dy += a * nu * t.sk[j] * h.sh[j];
    o.dxx -= a * k * k * t.sk[j] * h.ch[j];
    o.dxy += a * k * nu * t.ck[j] * h.sh[j];
    o.dyy += a * nu * nu * t.sk[j] * h.ch[j];
  }
  return o;
}

}  // namespace detail

/// Jet of v = w + eps psi.
inline DerivativeJet eval_v(double x, double y, double eps, const Perturbation& p) {
  const long double sx = sinl((long double)x), cx = cosl((long double)x);
  const long double a = detail::kSqrt3 * (long double)y;
  const long double C = cosl(a), S = sinl(a);
  const long double s2 = 2 * sx * cx, c2 = 1 - 2 * sx * sx;
  const detail::LJet q = detail::psi_jet_fast((long double)x, (long double)y, p);
  const long double e = eps;
  DerivativeJet j;
  j.value = (double)((C - cx) * sx + e * q.value);
  j.dx = (double)(C * cx - c2 + e * q.dx);
  j.dy = (double)(-detail::kSqrt3 * S * sx + e * q.dy);
  j.dxx = (double)(-C * sx + 2 * s2 + e * q.dxx);
  j.dxy = (double)(-detail::kSqrt3 * S * cx + e * q.dxy);
  j.dyy = (double)(-3 * C * sx + e * q.dyy);
  return j;
}

namespace detail {

/// Jet of the factored perturbation
///   psit(x,y) = sum_j (d_j/k_j) U_{k_j-1}(cos x) cosh(nu_j y),
/// so that psi = psit sin x. Regular across x = k pi.
inline LJet psit_jet_fast(long double x, long double y, const Perturbation& p) {
  const long double sx = sinl(x), cx = cosl(x);
  const HypY h = hyp_modes(y, p.waveset);

  // U_m(c), U'_m(c), U''_m(c) by the recurrence U_{m+1} = 2c U_m - U_{m-1}
  const int kmax = p.waveset.k[4];
  long double u0 = 1, u1 = 2 * cx;          // U_0, U_1
  long double du0 = 0, du1 = 2;
  long double dd0 = 0, dd1 = 0;
  long double U[5], dU[5], ddU[5];
  int idx = 0;
  for (int m = 1; m <= kmax - 1; ++m) {
    if (m == p.waveset.k[idx] - 1) {
      U[idx] = u1; dU[idx] = du1; ddU[idx] = dd1;
      if (++idx == 5) break;
    }
    long double u2 = 2 * cx * u1 - u0;
    long double du2 = 2 * u1 + 2 * cx * du1 - du0;
    long double dd2 = 4 * du1 + 2 * cx * dd1 - dd0;
    u0 = u1; u1 = u2; du0 = du1; du1 = du2; dd0 = dd1; dd1 = dd2;
  }

  LJet o;
  for (int j = 0; j < 5; ++j) {
    const long double k = p.waveset.k[j];
    const long double nu = sqrtl(k * k - 4);
    const long double a = p.d_ldbl(j) / k;
    const long double Sx = -dU[j] * sx;                    // d/dx U_{k-1}(cos x)
    const long double Sxx = ddU[j] * sx * sx - dU[j] * cx;
    o.value += a * U[j] * h.ch[j];
    o.dx += a * Sx * h.ch[j];
    o.dy += a * nu * U[j] * h.sh[j];
    o.dxx += a * Sxx * h.ch[j];
    o.dxy += a * nu * Sx * h.sh[j];
    o.dyy += a * nu * nu * U[j] * h.ch[j];
  }
  return o;
}

}  // namespace detail

/// Jet of the factored perturbation psit with psi = psit sin x.
inline DerivativeJet eval_psit(double x, double y, const Perturbation& p) {
  const detail::LJet q = detail::psit_jet_fast((long double)x, (long double)y, p);
  DerivativeJet j;
  j.value = (double)q.value;
  j.dx = (double)q.dx;
  j.dy = (double)q.dy;
  j.dxx = (double)q.dxx;
  j.dxy = (double)q.dxy;
  j.dyy = (double)q.dyy;
  return j;
}

/// Jet of the analytic factor g with v = g sin x. The psi part is written
/// through Chebyshev polynomials of the second kind, sin(kx) = sin(x)
/// U_{k-1}(cos x), so g stays regular across the lines x = k pi where the
/// nodal curves meet the vertical segments.
inline DerivativeJet eval_g(double x, double y, double eps, const Perturbation& p) {
  const long double sx = sinl((long double)x), cx = cosl((long double)x);
  const long double ay = detail::kSqrt3 * (long double)y;
  const long double C = cosl(ay), S = sinl(ay);
  const detail::LJet q = detail::psit_jet_fast((long double)x, (long double)y, p);
  const long double e = eps;
  DerivativeJet j;
  j.value = (double)(C - cx + e * q.value);
  j.dx = (double)(sx + e * q.dx);
  j.dy = (double)(-detail::kSqrt3 * S + e * q.dy);
  j.dxx = (double)(cx + e * q.dxx);
  j.dxy = (double)(e * q.dxy);
  j.dyy = (double)(-3 * C + e * q.dyy);
  return j;
}

/// Jet of the x-antiderivative U with dU/dx = v as an algebraic identity:
///   U(x,y) = -cos(sqrt3 y) cos x - sin^2(x)/2
///            - eps sum_j (d_j/k_j^2) cos(k_j x) cosh(nu_j y).
inline DerivativeJet eval_U(double x, double y, double eps, const Perturbation& p) {
  const long double sx = sinl((long double)x), cx = cosl((long double)x);
  const long double ay = detail::kSqrt3 * (long double)y;
  const long double C = cosl(ay), S = sinl(ay);
  const long double c2 = 1 - 2 * sx * sx;
  const detail::TrigX t = detail::trig_ladder((long double)x, p.waveset);
  const detail::HypY h = detail::hyp_modes((long double)y, p.waveset);

  long double pv = 0, px = 0, py = 0, pxx = 0, pxy = 0, pyy = 0;
  for (int j = 0; j < 5; ++j) {
    const long double k = p.waveset.k[j];
    const long double nu = sqrtl(k * k - 4);
    const long double b = p.d_ldbl(j) / (k * k);
    pv += b * t.ck[j] * h.ch[j];
    px -= b * k * t.sk[j] * h.ch[j];      // -> d/dx gives +(d/k) sin term in v
    py += b * nu * t.ck[j] * h.sh[j];
    pxx -= b * k * k * t.ck[j] * h.ch[j];
    pxy -= b * k * nu * t.sk[j] * h.sh[j];
    pyy += b * nu * nu * t.ck[j] * h.ch[j];
  }
  const long double e = eps;
  DerivativeJet j;
  j.value = (double)(-C * cx - sx * sx / 2 - e * pv);
  j.dx = (double)((C - cx) * sx - e * px);                          // = v
  j.dy = (double)(detail::kSqrt3 * S * cx - e * py);
  j.dxx = (double)(C * cx - c2 - e * pxx);                          // = v_x
  j.dxy = (double)(-detail::kSqrt3 * S * sx - e * pxy);             // = v_y
  j.dyy = (double)(3 * C * cx - e * pyy);
  return j;
}

enum class FieldKind { W, Psi, V, G, U };

/// Immutable handle bundling a field kind with the perturbation and eps.
/// Evaluation is pure; handles are safe to share across threads.
class FieldHandle {
 public:
  FieldHandle(FieldKind kind, double eps, std::shared_ptr<const Perturbation> p)
      : kind_(kind), eps_(eps), p_(std::move(p)) {
    if (eps_ < 0) throw std::invalid_argument("epsilon must be nonnegative");
    if (kind_ != FieldKind::W && !p_)
      throw std::invalid_argument("field kind requires a perturbation");
  }

  FieldKind kind() const { return kind_; }
  double epsilon() const { return eps_; }
  const Perturbation& perturbation() const { return *p_; }

  DerivativeJet eval(double x, double y) const {
    switch (kind_) {
      case FieldKind::W: return eval_w(x, y);
      case FieldKind::Psi: return eval_psi(x, y, *p_);
      case FieldKind::V: return eval_v(x, y, eps_, *p_);
      case FieldKind::G: return eval_g(x, y, eps_, *p_);
      case FieldKind::U: return eval_U(x, y, eps_, *p_);
    }
    throw std::logic_error("unreachable");
  }

 private:
  FieldKind kind_;
  double eps_;
  std::shared_ptr<const Perturbation> p_;
};

}  // namespace helmnodal
