// AVX2 variants of the inner-loop kernels. Each function is an
// operation-for-operation transcription of its scalar reference in
// vmath.hpp / kernels_scalar.cpp; the test suite asserts bitwise equality.

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <cmath>
#include <cstring>

#include "stq/kernels.hpp"
#include "stq/vmath.hpp"

namespace stq::detail {

void gauss_fill_scalar(PhiloxKey key, uint64_t first_draw, std::size_t n, double* out);
void exp_block_scalar(const double* x, std::size_t n, double* out);
void sincos_block_scalar(const double* x, std::size_t n, double* s, double* c);

namespace {

const __m256i kMask32 = _mm256_set1_epi64x(0xFFFFFFFFll);
const __m256d kSignMask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x8000000000000000ll));

inline __m256d round_nearest(__m256d x) {
  return _mm256_round_pd(x, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
}

// Exact double(v) for u64 lanes with v < 2^52.
inline __m256d u52_to_double(__m256i v) {
  const __m256i magic = _mm256_set1_epi64x(0x4330000000000000ll);
  return _mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(v, magic)), _mm256_set1_pd(0x1.0p52));
}

inline __m256d unit_from_bits(__m256i bits) {
  __m256d d = u52_to_double(_mm256_srli_epi64(bits, 12));
  return _mm256_add_pd(_mm256_mul_pd(d, _mm256_set1_pd(0x1.0p-52)), _mm256_set1_pd(0x1.0p-53));
}

inline __m256d log_pd(__m256d x) {
  __m256i bits = _mm256_castpd_si256(x);
  __m256i eu = _mm256_srli_epi64(bits, 52);
  __m256i mant = _mm256_or_si256(_mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFll)),
                                 _mm256_set1_epi64x(0x3FF0000000000000ll));
  __m256d m = _mm256_castsi256_pd(mant);
  __m256d big = _mm256_cmp_pd(m, _mm256_set1_pd(vm::kSqrt2), _CMP_GT_OQ);
  m = _mm256_blendv_pd(m, _mm256_mul_pd(m, _mm256_set1_pd(0.5)), big);
  __m256d ed = _mm256_sub_pd(u52_to_double(eu), _mm256_set1_pd(1023.0));
  ed = _mm256_add_pd(ed, _mm256_and_pd(big, _mm256_set1_pd(1.0)));
  __m256d one = _mm256_set1_pd(1.0);
  __m256d s = _mm256_div_pd(_mm256_sub_pd(m, one), _mm256_add_pd(m, one));
  __m256d w = _mm256_mul_pd(s, s);
  __m256d p = _mm256_set1_pd(vm::kLogC[0]);
  for (int i = 1; i < 10; ++i) p = _mm256_fmadd_pd(p, w, _mm256_set1_pd(vm::kLogC[i]));
  __m256d lo = _mm256_fmadd_pd(ed, _mm256_set1_pd(vm::kLn2Lo), _mm256_mul_pd(s, p));
  return _mm256_fmadd_pd(ed, _mm256_set1_pd(vm::kLn2Hi), lo);
}

inline __m256d sin_poly_pd(__m256d r) {
  __m256d w = _mm256_mul_pd(r, r);
  __m256d p = _mm256_set1_pd(vm::kSinC[0]);
  for (int i = 1; i < 8; ++i) p = _mm256_fmadd_pd(p, w, _mm256_set1_pd(vm::kSinC[i]));
  return _mm256_fmadd_pd(_mm256_mul_pd(r, w), p, r);
}

inline __m256d cos_poly_pd(__m256d r) {
  __m256d w = _mm256_mul_pd(r, r);
  __m256d p = _mm256_set1_pd(vm::kCosC[0]);
  for (int i = 1; i < 8; ++i) p = _mm256_fmadd_pd(p, w, _mm256_set1_pd(vm::kCosC[i]));
  __m256d w2 = _mm256_mul_pd(w, w);
  __m256d base = _mm256_sub_pd(_mm256_set1_pd(1.0), _mm256_mul_pd(_mm256_set1_pd(0.5), w));
  return _mm256_fmadd_pd(w2, p, base);
}

// Quadrant combination shared by both sincos flavours. q = n & 3 per lane:
// odd q swaps sin/cos; sign(sin) flips on bit1, sign(cos) on bit0 ^ bit1.
inline void quadrant_select(__m256d nd, __m256d sp, __m256d cp, __m256d* s, __m256d* c) {
  __m128i ni = _mm256_cvtpd_epi32(nd);
  __m128i bit0 = _mm_cmpeq_epi32(_mm_and_si128(ni, _mm_set1_epi32(1)), _mm_set1_epi32(1));
  __m128i bit1 = _mm_cmpeq_epi32(_mm_and_si128(ni, _mm_set1_epi32(2)), _mm_set1_epi32(2));
  __m256d swap = _mm256_castsi256_pd(_mm256_cvtepi32_epi64(bit0));
  __m256d neg_s = _mm256_castsi256_pd(_mm256_cvtepi32_epi64(bit1));
  __m256d neg_c = _mm256_xor_pd(swap, neg_s);
  __m256d sv = _mm256_blendv_pd(sp, cp, swap);
  __m256d cv = _mm256_blendv_pd(cp, sp, swap);
  *s = _mm256_xor_pd(sv, _mm256_and_pd(neg_s, kSignMask));
  *c = _mm256_xor_pd(cv, _mm256_and_pd(neg_c, kSignMask));
}

inline void sincos_pd(__m256d x, __m256d* s, __m256d* c) {
  __m256d nd = round_nearest(_mm256_mul_pd(x, _mm256_set1_pd(vm::kTwoOverPi)));
  __m256d r = _mm256_fnmadd_pd(nd, _mm256_set1_pd(vm::kPio2Hi), x);
  r = _mm256_fnmadd_pd(nd, _mm256_set1_pd(vm::kPio2Lo), r);
  quadrant_select(nd, sin_poly_pd(r), cos_poly_pd(r), s, c);
}

inline void sincos_2pi_unit_pd(__m256d u, __m256d* s, __m256d* c) {
  __m256d v = _mm256_mul_pd(_mm256_set1_pd(4.0), u);
  __m256d nd = round_nearest(v);
  __m256d r = _mm256_mul_pd(_mm256_sub_pd(v, nd), _mm256_set1_pd(vm::kPio2));
  quadrant_select(nd, sin_poly_pd(r), cos_poly_pd(r), s, c);
}

inline __m256d exp_pd(__m256d x) {
  __m256d hi_cut = _mm256_set1_pd(709.782712893384);
  __m256d lo_cut = _mm256_set1_pd(-745.2);
  __m256d too_big = _mm256_cmp_pd(x, hi_cut, _CMP_GT_OQ);
  __m256d too_small = _mm256_cmp_pd(x, lo_cut, _CMP_LT_OQ);
  __m256d xc = _mm256_min_pd(_mm256_max_pd(x, lo_cut), hi_cut);
  __m256d kd = round_nearest(_mm256_mul_pd(xc, _mm256_set1_pd(vm::kLog2E)));
  __m256d r = _mm256_fnmadd_pd(kd, _mm256_set1_pd(vm::kLn2Hi), xc);
  r = _mm256_fnmadd_pd(kd, _mm256_set1_pd(vm::kLn2Lo), r);
  __m256d p = _mm256_set1_pd(vm::kExpC[0]);
  for (int i = 1; i < 14; ++i) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(vm::kExpC[i]));
  // ldexp2: truncated k/2 split, two exact power-of-two factors.
  __m128i k = _mm256_cvtpd_epi32(kd);
  __m128i sign = _mm_srli_epi32(k, 31);
  __m128i k1 = _mm_srai_epi32(_mm_add_epi32(k, sign), 1);
  __m128i k2 = _mm_sub_epi32(k, k1);
  const __m256i bias = _mm256_set1_epi64x(1023);
  __m256d s1 = _mm256_castsi256_pd(
      _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(k1), bias), 52));
  __m256d s2 = _mm256_castsi256_pd(
      _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(k2), bias), 52));
  __m256d result = _mm256_mul_pd(_mm256_mul_pd(p, s1), s2);
  result = _mm256_blendv_pd(result, _mm256_setzero_pd(), too_small);
  result = _mm256_blendv_pd(result, _mm256_set1_pd(HUGE_VAL), too_big);
  return result;
}

// Four Philox4x32-10 blocks, counters in the low half of each 64-bit lane.
inline void philox4_pd(PhiloxKey key, uint64_t pair0, __m256i* bits0, __m256i* bits1) {
  __m256i ctr = _mm256_add_epi64(_mm256_set1_epi64x(static_cast<long long>(pair0)),
                                 _mm256_set_epi64x(3, 2, 1, 0));
  __m256i c0 = _mm256_and_si256(ctr, kMask32);
  __m256i c1 = _mm256_srli_epi64(ctr, 32);
  __m256i c2 = _mm256_setzero_si256();
  __m256i c3 = _mm256_setzero_si256();
  const __m256i m0 = _mm256_set1_epi64x(rngconst::kMul0);
  const __m256i m1 = _mm256_set1_epi64x(rngconst::kMul1);
  for (int rnd = 0; rnd < 10; ++rnd) {
    uint32_t rk0 = key.k0 + static_cast<uint32_t>(rnd) * rngconst::kWeyl0;
    uint32_t rk1 = key.k1 + static_cast<uint32_t>(rnd) * rngconst::kWeyl1;
    __m256i p0 = _mm256_mul_epu32(c0, m0);
    __m256i p1 = _mm256_mul_epu32(c2, m1);
    __m256i hi0 = _mm256_srli_epi64(p0, 32);
    __m256i lo0 = _mm256_and_si256(p0, kMask32);
    __m256i hi1 = _mm256_srli_epi64(p1, 32);
    __m256i lo1 = _mm256_and_si256(p1, kMask32);
    __m256i n0 = _mm256_xor_si256(_mm256_xor_si256(hi1, c1), _mm256_set1_epi64x(rk0));
    __m256i n2 = _mm256_xor_si256(_mm256_xor_si256(hi0, c3), _mm256_set1_epi64x(rk1));
    c0 = n0;
    c1 = lo1;
    c2 = n2;
    c3 = lo0;
  }
  *bits0 = _mm256_or_si256(_mm256_slli_epi64(c0, 32), c1);
  *bits1 = _mm256_or_si256(_mm256_slli_epi64(c2, 32), c3);
}

}  // namespace

void gauss_fill_avx2(PhiloxKey key, uint64_t first_draw, std::size_t n, double* out) {
  std::size_t i = 0;
  uint64_t draw = first_draw;
  if (n > 0 && (draw & 1)) {
    gauss_fill_scalar(key, draw, 1, out);
    ++i;
    ++draw;
  }
  while (i + 8 <= n) {
    __m256i b0, b1;
    philox4_pd(key, draw >> 1, &b0, &b1);
    __m256d u1 = unit_from_bits(b0);
    __m256d u2 = unit_from_bits(b1);
    __m256d radius = _mm256_sqrt_pd(_mm256_mul_pd(_mm256_set1_pd(-2.0), log_pd(u1)));
    __m256d s, c;
    sincos_2pi_unit_pd(u2, &s, &c);
    __m256d z0 = _mm256_mul_pd(radius, c);
    __m256d z1 = _mm256_mul_pd(radius, s);
    __m256d lo = _mm256_unpacklo_pd(z0, z1);
    __m256d hi = _mm256_unpackhi_pd(z0, z1);
    _mm256_storeu_pd(out + i, _mm256_permute2f128_pd(lo, hi, 0x20));
    _mm256_storeu_pd(out + i + 4, _mm256_permute2f128_pd(lo, hi, 0x31));
    i += 8;
    draw += 8;
  }
  if (i < n) gauss_fill_scalar(key, draw, n - i, out + i);
}

void exp_block_avx2(const double* x, std::size_t n, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, exp_pd(_mm256_loadu_pd(x + i)));
  if (i < n) exp_block_scalar(x + i, n - i, out + i);
}

void sincos_block_avx2(const double* x, std::size_t n, double* s, double* c) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d sv, cv;
    sincos_pd(_mm256_loadu_pd(x + i), &sv, &cv);
    _mm256_storeu_pd(s + i, sv);
    _mm256_storeu_pd(c + i, cv);
  }
  if (i < n) sincos_block_scalar(x + i, n - i, s + i, c + i);
}

}  // namespace stq::detail

#endif  // x86
