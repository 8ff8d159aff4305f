#pragma once

#include <array>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "helmnodal/detail/pivot.hpp"
#include "helmnodal/qreal.hpp"

namespace helmnodal {

inline constexpr double kMinorDetFloor = 1e-10;  // on the equilibrated minors
inline constexpr double kCoshArgCap = 700.0;     // hard overflow guard

inline qreal pi_q() { return qm::pi(); }
inline qreal c1_q() { return qm::pi() / qm::sqrt(qreal(3)); }  // pi/sqrt(3)

/// Five even wavenumbers k_1 < ... < k_5 > 4 and their frequencies
/// nu_j = sqrt(k_j^2 - 4). The modes sin(k x) cosh(nu y) solve the
/// Helmholtz equation with lambda = 4.
struct WaveSet {
  std::array<int, 5> k{};
  std::array<double, 5> nu{};

  qreal nu_q(int j) const {
    return qm::sqrt(qreal(k[j]) * qreal(k[j]) - 4);
  }

  static WaveSet from_k(const std::array<int, 5>& kk) {
    for (int j = 0; j < 5; ++j) {
      if (kk[j] <= 4) throw std::invalid_argument("wavenumbers must exceed 4");
      if (kk[j] % 2 != 0) throw std::invalid_argument("wavenumbers must be even");
      if (j > 0 && kk[j] <= kk[j - 1])
        throw std::invalid_argument("wavenumbers must be strictly increasing");
    }
    WaveSet ws;
    ws.k = kk;
    for (int j = 0; j < 5; ++j) ws.nu[j] = static_cast<double>(ws.nu_q(j));
    return ws;
  }
};

/// The 5x5 constraint matrix of the coefficient system, rows
///   (1), (cosh(pi nu/sqrt3)), (nu sinh(pi nu/sqrt3)),
///   (cosh(2pi nu/sqrt3)), (nu sinh(2pi nu/sqrt3)),
/// stored unscaled, together with the equilibration scales.
struct ConstraintMatrix {
  std::array<std::array<double, 5>, 5> entries{};
  std::array<double, 5> row_scales{};
  std::array<double, 5> col_scales{};
};

namespace detail {

inline void constraint_column(int k, QVec<5>& col) {
  qreal nu = qm::sqrt(qreal(k) * qreal(k) - 4);
  qreal a = c1_q() * nu;
  if (static_cast<double>(2 * a) > kCoshArgCap)
    throw std::overflow_error("cosh argument above cap for k=" + std::to_string(k));
  col[0] = 1;
  col[1] = qm::cosh(a);
  col[2] = nu * qm::sinh(a);
  col[3] = qm::cosh(2 * a);
  col[4] = nu * qm::sinh(2 * a);
}

inline QMat<5> constraint_matrix_q(const std::array<int, 5>& k) {
  QMat<5> m{};
  for (int j = 0; j < 5; ++j) {
    QVec<5> col;
    constraint_column(k[j], col);
    for (int i = 0; i < 5; ++i) m[i][j] = col[i];
  }
  return m;
}

/// Determinant of the m-th leading principal minor after max-norm
/// column-then-row equilibration of that m x m block.
inline double scaled_minor_det(const int* k, int m) {
  // build the m x m block in quad
  std::array<QVec<5>, 5> cols;
  for (int j = 0; j < m; ++j) constraint_column(k[j], cols[j]);
  // equilibrate block-locally
  std::array<std::array<qreal, 5>, 5> b{};
  for (int j = 0; j < m; ++j) {
    qreal cm = 0;
    for (int i = 0; i < m; ++i) cm = std::max(cm, qm::fabs(cols[j][i]));
    for (int i = 0; i < m; ++i) b[i][j] = cols[j][i] / cm;
  }
  for (int i = 0; i < m; ++i) {
    qreal rm = 0;
    for (int j = 0; j < m; ++j) rm = std::max(rm, qm::fabs(b[i][j]));
    for (int j = 0; j < m; ++j) b[i][j] /= rm;
  }
  // expand to full-pivot det on an m-sized problem (pad identity)
  QMat<5> a{};
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) a[i][j] = (i == j) ? qreal(1) : qreal(0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) a[i][j] = b[i][j];
  return static_cast<double>(full_pivot_det<5>(a));
}

}  // namespace detail

/// Unscaled constraint matrix plus equilibration scales for a waveset.
inline ConstraintMatrix assemble_matrix(const WaveSet& ws) {
  detail::QMat<5> m = detail::constraint_matrix_q(ws.k);
  ConstraintMatrix out;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) out.entries[i][j] = static_cast<double>(m[i][j]);
  detail::QVec<5> rs, cs;
  detail::equilibrate<5>(m, rs, cs);
  for (int i = 0; i < 5; ++i) {
    out.row_scales[i] = static_cast<double>(rs[i]);
    out.col_scales[i] = static_cast<double>(cs[i]);
  }
  return out;
}

/// Leading principal minor determinant of the equilibrated matrix.
inline double scaled_minor_det(const WaveSet& ws, int m) {
  return detail::scaled_minor_det(ws.k.data(), m);
}

/// Greedy wavenumber selection: starting from k_1 = start_k, extend with
/// successive even candidates until each new equilibrated leading minor
/// clears the determinant floor.
inline WaveSet select_waveset(int start_k) {
  if (start_k <= 4 || start_k % 2 != 0)
    throw std::invalid_argument("start_k must be even and greater than 4");
  std::array<int, 5> k{};
  k[0] = start_k;
  if (std::fabs(detail::scaled_minor_det(k.data(), 1)) <= kMinorDetFloor)
    throw std::runtime_error("first minor degenerate");  // cannot happen: det = 1
  for (int j = 1; j < 5; ++j) {
    int cand = k[j - 1] + 2;
    for (;;) {
      k[j] = cand;
      double det = 0;
      try {
        det = detail::scaled_minor_det(k.data(), j + 1);
      } catch (const std::overflow_error&) {
        std::ostringstream os;
        os << "waveset selection failed: minor " << j + 1
           << " stayed below " << kMinorDetFloor << " up to the overflow cap";
        throw std::runtime_error(os.str());
      }
      if (std::fabs(det) > kMinorDetFloor) break;
      cand += 2;
    }
  }
  return WaveSet::from_k(k);
}

}  // namespace helmnodal
