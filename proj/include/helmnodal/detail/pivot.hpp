#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>

#include "helmnodal/qreal.hpp"

namespace helmnodal::detail {

template <std::size_t N>
using QMat = std::array<std::array<qreal, N>, N>;
template <std::size_t N>
using QVec = std::array<qreal, N>;

/// Gaussian elimination with full pivoting, in place. Returns the
/// determinant of the (possibly permuted) matrix with correct sign.
/// If rhs != nullptr it is reduced alongside and back-substituted into
/// the original unknown order.
template <std::size_t N>
qreal full_pivot_eliminate(QMat<N>& a, QVec<N>* rhs) {
  std::array<std::size_t, N> col_of;  // col_of[i] = original column in slot i
  for (std::size_t i = 0; i < N; ++i) col_of[i] = i;
  qreal det = 1;
  for (std::size_t step = 0; step < N; ++step) {
    std::size_t pr = step, pc = step;
    qreal best = qm::fabs(a[step][step]);
    for (std::size_t r = step; r < N; ++r)
      for (std::size_t c = step; c < N; ++c)
        if (qm::fabs(a[r][c]) > best) { best = qm::fabs(a[r][c]); pr = r; pc = c; }
    if (best == 0) return 0;
    if (pr != step) {
      std::swap(a[pr], a[step]);
      if (rhs) std::swap((*rhs)[pr], (*rhs)[step]);
      det = -det;
    }
    if (pc != step) {
      for (std::size_t r = 0; r < N; ++r) std::swap(a[r][pc], a[r][step]);
      std::swap(col_of[pc], col_of[step]);
      det = -det;
    }
    det *= a[step][step];
    for (std::size_t r = step + 1; r < N; ++r) {
      qreal f = a[r][step] / a[step][step];
      a[r][step] = 0;
      for (std::size_t c = step + 1; c < N; ++c) a[r][c] -= f * a[step][c];
      if (rhs) (*rhs)[r] -= f * (*rhs)[step];
    }
  }
  if (rhs) {
    QVec<N> x{};
    for (std::size_t ii = N; ii-- > 0;) {
      qreal s = (*rhs)[ii];
      for (std::size_t c = ii + 1; c < N; ++c) s -= a[ii][c] * x[c];
      x[ii] = s / a[ii][ii];
    }
    for (std::size_t i = 0; i < N; ++i) (*rhs)[col_of[i]] = x[i];
  }
  return det;
}

template <std::size_t N>
qreal full_pivot_det(QMat<N> a) {
  return full_pivot_eliminate<N>(a, nullptr);
}

/// Max-norm equilibration: scale columns to unit max magnitude, then rows.
/// Scales are written out so callers can undo them.
template <std::size_t N>
void equilibrate(QMat<N>& a, QVec<N>& row_scale, QVec<N>& col_scale) {
  for (std::size_t c = 0; c < N; ++c) {
    qreal m = 0;
    for (std::size_t r = 0; r < N; ++r) m = std::max(m, qm::fabs(a[r][c]));
    col_scale[c] = (m > 0) ? 1 / m : qreal(1);
    for (std::size_t r = 0; r < N; ++r) a[r][c] *= col_scale[c];
  }
  for (std::size_t r = 0; r < N; ++r) {
    qreal m = 0;
    for (std::size_t c = 0; c < N; ++c) m = std::max(m, qm::fabs(a[r][c]));
    row_scale[r] = (m > 0) ? 1 / m : qreal(1);
    for (std::size_t c = 0; c < N; ++c) a[r][c] *= row_scale[r];
  }
}

}  // namespace helmnodal::detail
