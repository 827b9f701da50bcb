#include <cmath>

#include "stq/kernels.hpp"
#include "stq/vmath.hpp"

namespace stq::detail {

namespace {

// One Box-Muller pair from Philox block `pair_index`.
inline void gauss_pair(PhiloxKey key, uint64_t pair_index, double* z0, double* z1) {
  auto w = philox4x32(key, pair_index);
  uint64_t b0 = (static_cast<uint64_t>(w[0]) << 32) | w[1];
  uint64_t b1 = (static_cast<uint64_t>(w[2]) << 32) | w[3];
  double u1 = vm::bits_to_unit(b0);
  double u2 = vm::bits_to_unit(b1);
  double radius = std::sqrt(-2.0 * vm::vm_log(u1));
  double s, c;
  vm::vm_sincos_2pi_unit(u2, &s, &c);
  *z0 = radius * c;
  *z1 = radius * s;
}

}  // namespace

void gauss_fill_scalar(PhiloxKey key, uint64_t first_draw, std::size_t n, double* out) {
  std::size_t i = 0;
  uint64_t draw = first_draw;
  if (n > 0 && (draw & 1)) {
    double z0, z1;
    gauss_pair(key, draw >> 1, &z0, &z1);
    out[i++] = z1;
    ++draw;
  }
  while (i + 1 < n) {
    gauss_pair(key, draw >> 1, &out[i], &out[i + 1]);
    i += 2;
    draw += 2;
  }
  if (i < n) {
    double z0, z1;
    gauss_pair(key, draw >> 1, &z0, &z1);
    out[i] = z0;
  }
}

void exp_block_scalar(const double* x, std::size_t n, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = vm::vm_exp(x[i]);
}

void sincos_block_scalar(const double* x, std::size_t n, double* s, double* c) {
  for (std::size_t i = 0; i < n; ++i) vm::vm_sincos(x[i], &s[i], &c[i]);
}

}  // namespace stq::detail
