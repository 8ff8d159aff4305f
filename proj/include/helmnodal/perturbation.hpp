#pragma once

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

#include "helmnodal/jet.hpp"
#include "helmnodal/waveset.hpp"

namespace helmnodal {

inline constexpr double kConstraintResidualTol = 1e-9;

/// Scaled coefficients d_j = k_j c_{k_j} of the perturbation
///   psi(x, y) = sum_j (d_j / k_j) sin(k_j x) cosh(nu_j y),
/// solved from the five-point constraint system, plus the residuals
/// measured afterwards by direct jet evaluation.
///
/// d is kept in binary128: rounding it to double would already move the
/// large-argument constraint values by ~1e-7.
struct Perturbation {
  WaveSet waveset;
  std::array<qreal, 5> d{};
  std::array<double, 5> residuals{};

  double d_dbl(int j) const { return static_cast<double>(d[j]); }
  long double d_ldbl(int j) const { return static_cast<long double>(d[j]); }
  std::string d_str(int j) const { return qm::to_string(d[j]); }
};

/// Full-precision jet of psi; the public double-jet evaluator in field.hpp
/// wraps this. Evaluation must stay in binary128: near |y| = 2pi/sqrt3 the
/// mode terms reach ~1e13 and cancel down to order one.
struct QJet {
  qreal value = 0, dx = 0, dy = 0, dxx = 0, dxy = 0, dyy = 0;
};

inline QJet psi_jet_q(qreal x, qreal y, const Perturbation& p) {
  QJet out;
  for (int j = 0; j < 5; ++j) {
    const qreal k = p.waveset.k[j];
    const qreal nu = p.waveset.nu_q(j);
    if (static_cast<double>(qm::fabs(nu * y)) > kCoshArgCap)
      throw std::domain_error("psi evaluation out of range: |nu y| above cap");
    const qreal a = p.d[j] / k;
    const qreal sk = qm::sin(k * x), ck = qm::cos(k * x);
    const qreal ch = qm::cosh(nu * y), sh = qm::sinh(nu * y);
    out.value += a * sk * ch;
    out.dx += a * k * ck * ch;          // = d_j cos(kx) cosh
    out.dy += a * nu * sk * sh;
    out.dxx -= a * k * k * sk * ch;
    out.dxy += a * k * nu * ck * sh;    // = d_j nu cos(kx) sinh
    out.dyy += a * nu * nu * sk * ch;
  }
  return out;
}

namespace detail {

inline QVec<5> solve_constraint_system(const std::array<int, 5>& k, bool equilibrated) {
  QMat<5> m = constraint_matrix_q(k);
  QVec<5> rhs{qreal(-1), qreal(0), qreal(0), qreal(1), qreal(1)};
  if (equilibrated) {
    QVec<5> rs, cs;
    equilibrate<5>(m, rs, cs);
    for (int i = 0; i < 5; ++i) rhs[i] *= rs[i];
    qreal det = full_pivot_eliminate<5>(m, &rhs);
    if (det == 0) throw std::runtime_error("constraint matrix singular");
    for (int j = 0; j < 5; ++j) rhs[j] *= cs[j];  // undo column scaling
  } else {
    qreal det = full_pivot_eliminate<5>(m, &rhs);
    if (det == 0) throw std::runtime_error("constraint matrix singular");
  }
  return rhs;
}

}  // namespace detail

/// Solves the constraint system on the equilibrated matrix, then verifies
/// every constraint (and the automatic identities at z0) by evaluating psi
/// jets directly. Residual above tolerance means the waveset conditioned the
/// system too badly; callers should re-select.
inline Perturbation solve_perturbation(const WaveSet& ws) {
  Perturbation p;
  p.waveset = ws;
  detail::QVec<5> d = detail::solve_constraint_system(ws.k, /*equilibrated=*/true);
  for (int j = 0; j < 5; ++j) p.d[j] = d[j];

  const qreal c1 = c1_q();   // pi/sqrt3
  const qreal piq = pi_q();
  const QJet j_origin = psi_jet_q(0, 0, p);
  const QJet j_z0 = psi_jet_q(piq, c1, p);
  const QJet j_z2 = psi_jet_q(0, 2 * c1, p);

  p.residuals[0] = static_cast<double>(j_origin.dx + 1);  // psi_x(0,0) = -1
  p.residuals[1] = static_cast<double>(j_z0.dx);          // psi_x(z0)  =  0
  p.residuals[2] = static_cast<double>(j_z0.dxy);         // psi_xy(z0) =  0
  p.residuals[3] = static_cast<double>(j_z2.dx - 1);      // psi_x(z2)  =  1
  p.residuals[4] = static_cast<double>(j_z2.dxy - 1);     // psi_xy(z2) =  1

  double worst = 0;
  for (double r : p.residuals) worst = std::max(worst, std::fabs(r));
  // automatic identities at z0 from sin(k pi) = 0
  worst = std::max(worst, std::fabs(static_cast<double>(j_z0.value)));
  worst = std::max(worst, std::fabs(static_cast<double>(j_z0.dy)));
  worst = std::max(worst, std::fabs(static_cast<double>(j_z0.dxx)));
  worst = std::max(worst, std::fabs(static_cast<double>(j_z0.dyy)));
  if (worst > kConstraintResidualTol)
    throw std::runtime_error("constraint residual " + std::to_string(worst) +
                             " above tolerance; re-select waveset");
  return p;
}

/// Named outcomes of the (W2)-(W5) verification.
struct WConditionReport {
  bool pass = false;
  std::map<std::string, double> margins;  // positive = satisfied with slack
};

/// Checks the structural properties of psi: vanishing and oddness across
/// the vertical lines x = k pi, evenness in y, the second-order degeneracy
/// at z0, and the strict sign conditions.
inline WConditionReport verify_w_conditions(const Perturbation& p) {
  WConditionReport rep;
  const qreal piq = pi_q(), c1 = c1_q();

  // (W2): psi(k pi, .) == 0 and oddness, sampled
  double w2 = 0;
  for (int k = -1; k <= 1; ++k) {
    for (int i = 0; i <= 20; ++i) {
      qreal y = c1 * (qreal(i) / 10 - 1) * 2;  // y in [-2pi/sqrt3, 2pi/sqrt3]
      w2 = std::max(w2, std::fabs(static_cast<double>(psi_jet_q(k * piq, y, p).value)));
      qreal x = qreal(37) / 100 + qreal(13 * (i + 1)) / 100;
      qreal l = psi_jet_q(k * piq - x, y, p).value;
      qreal r = psi_jet_q(k * piq + x, y, p).value;
      w2 = std::max(w2, std::fabs(static_cast<double>(l + r)));
    }
  }
  rep.margins["W2_vanish_odd"] = 1e-12 - w2;

  // (W3): evenness about the x-axis
  double w3 = 0;
  for (int i = 0; i <= 20; ++i) {
    qreal x = -piq + 2 * piq * qreal(i) / 20 + qreal(1) / 100;
    qreal y = qreal(11) / 10 * qreal(i % 7 + 1) / 7;
    qreal a = psi_jet_q(x, y, p).value, b = psi_jet_q(x, -y, p).value;
    w3 = std::max(w3, std::fabs(static_cast<double>(a - b)));
  }
  rep.margins["W3_even"] = 1e-12 - w3;

  // (W4): full second-order degeneracy at z0
  QJet z0 = psi_jet_q(piq, c1, p);
  double w4 = 0;
  for (qreal v : {z0.value, z0.dx, z0.dy, z0.dxx, z0.dxy, z0.dyy})
    w4 = std::max(w4, std::fabs(static_cast<double>(v)));
  rep.margins["W4_degenerate_z0"] = 1e-9 - w4;

  // (W5): strict signs at z1 and z2
  QJet z1 = psi_jet_q(0, 0, p);
  QJet z2 = psi_jet_q(0, 2 * c1, p);
  rep.margins["W5_psix_z1_neg"] = static_cast<double>(-z1.dx);
  rep.margins["W5_psix_z2_pos"] = static_cast<double>(z2.dx);
  rep.margins["W5_psixy_z2_pos"] = static_cast<double>(z2.dxy);

  rep.pass = true;
  for (const auto& [name, m] : rep.margins)
    if (m <= 0) rep.pass = false;
  return rep;
}

}  // namespace helmnodal
