#include "stq/rng.hpp"

#include <cmath>

namespace stq {

namespace {

inline void philox_round(uint32_t c[4], uint32_t k0, uint32_t k1) {
  uint64_t p0 = static_cast<uint64_t>(rngconst::kMul0) * c[0];
  uint64_t p1 = static_cast<uint64_t>(rngconst::kMul1) * c[2];
  uint32_t hi0 = static_cast<uint32_t>(p0 >> 32);
  uint32_t lo0 = static_cast<uint32_t>(p0);
  uint32_t hi1 = static_cast<uint32_t>(p1 >> 32);
  uint32_t lo1 = static_cast<uint32_t>(p1);
  uint32_t n0 = hi1 ^ c[1] ^ k0;
  uint32_t n1 = lo1;
  uint32_t n2 = hi0 ^ c[3] ^ k1;
  uint32_t n3 = lo0;
  c[0] = n0;
  c[1] = n1;
  c[2] = n2;
  c[3] = n3;
}

}  // namespace

std::array<uint32_t, 4> philox4x32(PhiloxKey key, uint64_t counter) {
  uint32_t c[4] = {static_cast<uint32_t>(counter),
                   static_cast<uint32_t>(counter >> 32), 0u, 0u};
  for (int r = 0; r < 10; ++r) {
    philox_round(c, key.k0 + static_cast<uint32_t>(r) * rngconst::kWeyl0,
                 key.k1 + static_cast<uint32_t>(r) * rngconst::kWeyl1);
  }
  return {c[0], c[1], c[2], c[3]};
}

PhiloxKey derive_key(uint64_t master_seed, std::initializer_list<uint64_t> fields) {
  uint64_t h = master_seed;
  for (uint64_t f : fields) h = splitmix64(h ^ f);
  return PhiloxKey{static_cast<uint32_t>(h), static_cast<uint32_t>(h >> 32)};
}

double gaussian_draw(PhiloxKey key, uint64_t index) {
  auto w = philox4x32(key, index >> 1);
  uint64_t b0 = (static_cast<uint64_t>(w[0]) << 32) | w[1];
  uint64_t b1 = (static_cast<uint64_t>(w[2]) << 32) | w[3];
  double u1 = vm::bits_to_unit(b0);
  double u2 = vm::bits_to_unit(b1);
  double radius = std::sqrt(-2.0 * vm::vm_log(u1));
  double s, c;
  vm::vm_sincos_2pi_unit(u2, &s, &c);
  return (index & 1) ? radius * s : radius * c;
}

uint32_t uniform_below(PhiloxKey key, uint64_t& cursor, uint32_t n) {
  // Largest multiple of n that fits in 2^32; draws at or above it are
  // rejected so the result is exactly uniform.
  uint64_t span = (0x100000000ull / n) * n;
  for (;;) {
    auto w = philox4x32(key, cursor++);
    for (int i = 0; i < 4; ++i) {
      if (w[i] < span) return w[i] % n;
    }
  }
}

}  // namespace stq
