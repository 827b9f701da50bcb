#pragma once

// Scalar reference implementations of the transcendental functions used in
// the simulation inner loops. The AVX2 kernels in kernels_avx2.cpp transcribe
// these algorithms operation-for-operation; together with -ffp-contract=off
// and explicit std::fma this makes scalar and SIMD streams bit-identical.
//
// Range/accuracy contracts:
//   vm_exp     full double range, ~2 ulp
//   vm_log     x in (0, inf), normal doubles, ~2 ulp
//   vm_sincos  |x| < 1e6 (two-term Cody-Waite reduction), abs error ~2e-16
//   vm_sincos_2pi_unit  u in [0, 1), angle 2*pi*u

#include <cmath>
#include <cstdint>
#include <cstring>

namespace stq::vm {

// Shared constants (fdlibm splits).
inline constexpr double kLog2E = 1.4426950408889634074;
inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;
inline constexpr double kTwoOverPi = 6.36619772367581382433e-01;
inline constexpr double kPio2Hi = 1.57079632673412561417e+00;  // 33 bits of pi/2
inline constexpr double kPio2Lo = 6.07710050650619224932e-11;
inline constexpr double kPio2 = 1.5707963267948966;
inline constexpr double kSqrt2 = 1.41421356237309514547;

// exp(r) Taylor coefficients on |r| <= ln2/2, Horner order high to low.
inline constexpr double kExpC[14] = {
    1.0 / 6227020800.0,  // 1/13!
    1.0 / 479001600.0,   // 1/12!
    1.0 / 39916800.0,    // 1/11!
    1.0 / 3628800.0,     // 1/10!
    1.0 / 362880.0,      // 1/9!
    1.0 / 40320.0,       // 1/8!
    1.0 / 5040.0,        // 1/7!
    1.0 / 720.0,         // 1/6!
    1.0 / 120.0,         // 1/5!
    1.0 / 24.0,          // 1/4!
    1.0 / 6.0,           // 1/3!
    0.5, 1.0, 1.0,
};

// sin(r) = r + r^3 * S(r^2) on |r| <= pi/4 (Taylor), high to low.
inline constexpr double kSinC[8] = {
    1.0 / 355687428096000.0,   // +1/17!
    -1.0 / 1307674368000.0,    // -1/15!
    1.0 / 6227020800.0,        // +1/13!
    -1.0 / 39916800.0,         // -1/11!
    1.0 / 362880.0,            // +1/9!
    -1.0 / 5040.0,             // -1/7!
    1.0 / 120.0,               // +1/5!
    -1.0 / 6.0,                // -1/3!
};

// cos(r) = 1 - r^2/2 + r^4 * C(r^2) on |r| <= pi/4, high to low.
inline constexpr double kCosC[8] = {
    -1.0 / 6402373705728000.0,  // -1/18!
    1.0 / 20922789888000.0,     // +1/16!
    -1.0 / 87178291200.0,       // -1/14!
    1.0 / 479001600.0,          // +1/12!
    -1.0 / 3628800.0,           // -1/10!
    1.0 / 40320.0,              // +1/8!
    -1.0 / 720.0,               // -1/6!
    1.0 / 24.0,                 // +1/4!
};

// 2*atanh(s) series: log(m) = s * L(s^2), high to low.
inline constexpr double kLogC[10] = {
    2.0 / 19.0, 2.0 / 17.0, 2.0 / 15.0, 2.0 / 13.0, 2.0 / 11.0,
    2.0 / 9.0,  2.0 / 7.0,  2.0 / 5.0,  2.0 / 3.0,  2.0,
};

inline double bits_to_double(uint64_t b) {
  double d;
  std::memcpy(&d, &b, sizeof d);
  return d;
}

inline uint64_t double_to_bits(double d) {
  uint64_t b;
  std::memcpy(&b, &d, sizeof b);
  return b;
}

// y * 2^k in two steps so |k| up to ~1080 stays in the normal exponent range
// of each factor.
inline double ldexp2(double y, int k) {
  int k1 = k / 2;
  int k2 = k - k1;
  double s1 = bits_to_double(static_cast<uint64_t>(1023 + k1) << 52);
  double s2 = bits_to_double(static_cast<uint64_t>(1023 + k2) << 52);
  return (y * s1) * s2;
}

inline double vm_exp(double x) {
  if (x > 709.782712893384) return HUGE_VAL;
  if (x < -745.2) return 0.0;
  double kd = std::nearbyint(x * kLog2E);
  int k = static_cast<int>(kd);
  double r = std::fma(-kd, kLn2Hi, x);
  r = std::fma(-kd, kLn2Lo, r);
  double p = kExpC[0];
  for (int i = 1; i < 14; ++i) p = std::fma(p, r, kExpC[i]);
  return ldexp2(p, k);
}

inline double vm_log(double x) {
  uint64_t bits = double_to_bits(x);
  int e = static_cast<int>(bits >> 52) - 1023;
  double m = bits_to_double((bits & 0x000FFFFFFFFFFFFFull) | 0x3FF0000000000000ull);
  if (m > kSqrt2) {
    m *= 0.5;
    e += 1;
  }
  double s = (m - 1.0) / (m + 1.0);
  double w = s * s;
  double p = kLogC[0];
  for (int i = 1; i < 10; ++i) p = std::fma(p, w, kLogC[i]);
  double ed = static_cast<double>(e);
  double lo = std::fma(ed, kLn2Lo, s * p);
  return std::fma(ed, kLn2Hi, lo);
}

// Quadrant polynomials; |r| <= pi/4 + reduction slack.
inline double sin_poly(double r) {
  double w = r * r;
  double p = kSinC[0];
  for (int i = 1; i < 8; ++i) p = std::fma(p, w, kSinC[i]);
  return std::fma(r * w, p, r);
}

inline double cos_poly(double r) {
  double w = r * r;
  double p = kCosC[0];
  for (int i = 1; i < 8; ++i) p = std::fma(p, w, kCosC[i]);
  double w2 = w * w;
  return std::fma(w2, p, 1.0 - 0.5 * w);
}

// sin/cos with two-term Cody-Waite reduction; caller guarantees |x| < 1e6.
inline void vm_sincos(double x, double* s, double* c) {
  double nd = std::nearbyint(x * kTwoOverPi);
  int64_t n = static_cast<int64_t>(nd);
  double r = std::fma(-nd, kPio2Hi, x);
  r = std::fma(-nd, kPio2Lo, r);
  double sp = sin_poly(r);
  double cp = cos_poly(r);
  switch (n & 3) {
    case 0: *s = sp;  *c = cp;  break;
    case 1: *s = cp;  *c = -sp; break;
    case 2: *s = -sp; *c = -cp; break;
    default: *s = -cp; *c = sp; break;
  }
}

// sin/cos of 2*pi*u for u in [0, 1). The quadrant split v = 4u keeps the
// reduced argument exact; the single rounding of d*pi/2 costs < 1e-16 phase.
inline void vm_sincos_2pi_unit(double u, double* s, double* c) {
  double v = 4.0 * u;
  double nd = std::nearbyint(v);
  int64_t n = static_cast<int64_t>(nd);
  double r = (v - nd) * kPio2;
  double sp = sin_poly(r);
  double cp = cos_poly(r);
  switch (n & 3) {
    case 0: *s = sp;  *c = cp;  break;
    case 1: *s = cp;  *c = -sp; break;
    case 2: *s = -sp; *c = -cp; break;
    default: *s = -cp; *c = sp; break;
  }
}

// 64 random bits -> uniform in (0, 1), 52-bit resolution, never 0 or 1.
inline double bits_to_unit(uint64_t bits) {
  return static_cast<double>(bits >> 12) * 0x1.0p-52 + 0x1.0p-53;
}

}  // namespace stq::vm
