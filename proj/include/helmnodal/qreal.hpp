#pragma once

// Extended-precision scalar used by the coefficient pipeline.
//
// The constraint matrix mixes entries from 1 up to ~5e22, and the solved
// coefficients have to reproduce the constraint values to 1e-9 *absolute*
// after products of that size cancel. Double (and even 80-bit long double)
// arithmetic cannot carry that cancellation; binary128 can.

#if defined(__GNUC__) && !defined(__clang__)
#define HELMNODAL_HAVE_FLOAT128 1
#endif

#ifdef HELMNODAL_HAVE_FLOAT128
#include <quadmath.h>
#endif

#include <cmath>
#include <string>
#include <cstdio>

namespace helmnodal {

#ifdef HELMNODAL_HAVE_FLOAT128

using qreal = __float128;

namespace qm {
inline qreal sin(qreal x) { return sinq(x); }
inline qreal cos(qreal x) { return cosq(x); }
inline qreal sinh(qreal x) { return sinhq(x); }
inline qreal cosh(qreal x) { return coshq(x); }
inline qreal exp(qreal x) { return expq(x); }
inline qreal sqrt(qreal x) { return sqrtq(x); }
inline qreal fabs(qreal x) { return fabsq(x); }
inline qreal pi() { return 2 * asinq(qreal(1)); }

inline qreal from_string(const char* s) { return strtoflt128(s, nullptr); }

// 36 significant digits: enough to round-trip binary128 exactly.
inline std::string to_string(qreal x) {
  char buf[64];
  quadmath_snprintf(buf, sizeof buf, "%.35Qe", x);
  return buf;
}
}  // namespace qm

#else  // fallback: 80-bit long double (loses residual margin on large wavesets)

using qreal = long double;

namespace qm {
inline qreal sin(qreal x) { return std::sin(x); }
inline qreal cos(qreal x) { return std::cos(x); }
inline qreal sinh(qreal x) { return std::sinh(x); }
inline qreal cosh(qreal x) { return std::cosh(x); }
inline qreal exp(qreal x) { return std::exp(x); }
inline qreal sqrt(qreal x) { return std::sqrt(x); }
inline qreal fabs(qreal x) { return std::fabs(x); }
inline qreal pi() { return 2 * std::asin(1.0L); }

inline qreal from_string(const char* s) { return std::strtold(s, nullptr); }

inline std::string to_string(qreal x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.35Le", x);
  return buf;
}
}  // namespace qm

#endif

}  // namespace helmnodal
