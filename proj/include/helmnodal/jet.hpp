#pragma once

#include <cmath>

namespace helmnodal {

/// Value and partial derivatives up to second order of a scalar field
/// at one point. Filled from closed-form expressions, never from
/// numerical differentiation.
struct DerivativeJet {
  double value = 0;
  double dx = 0;
  double dy = 0;
  double dxx = 0;
  double dxy = 0;
  double dyy = 0;
};

/// Residual of the Helmholtz identity dxx + dyy + 4*value for jets of
/// fields solving the linear equation.
inline double helmholtz_residual(const DerivativeJet& j) {
  return j.dxx + j.dyy + 4.0 * j.value;
}

/// Magnitude scale used to normalize the identity residual.
inline double helmholtz_scale(const DerivativeJet& j) {
  return std::fabs(j.dxx) + std::fabs(j.dyy) + 4.0 * std::fabs(j.value) + 1.0;
}

}  // namespace helmnodal
