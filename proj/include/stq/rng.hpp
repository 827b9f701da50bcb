#pragma once

// Counter-based randomness. Every consumer of randomness owns a Philox4x32-10
// stream addressed by a derived 64-bit key; draw i of a stream is a pure
// function of (key, i). This is what makes component-masked re-execution and
// fast-forwarding exactly reproducible: no stream ever depends on how another
// stream was consumed.

#include <array>
#include <cstdint>
#include <string_view>

#include "stq/vmath.hpp"

namespace stq {

struct PhiloxKey {
  uint32_t k0 = 0;
  uint32_t k1 = 0;
};

namespace rngconst {
inline constexpr uint32_t kMul0 = 0xD2511F53u;
inline constexpr uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr uint32_t kWeyl1 = 0xBB67AE85u;
}  // namespace rngconst

// One 10-round Philox4x32 block. counter occupies words (c0, c1) = lo/hi of a
// 64-bit block index; words 2 and 3 are zero.
std::array<uint32_t, 4> philox4x32(PhiloxKey key, uint64_t counter);

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (char ch : s) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ull;
  }
  return h;
}

// Stream purposes; part of the documented key-derivation scheme.
enum class StreamPurpose : uint64_t {
  noise_component = 1,
  circuit_sampling = 2,
  compile_start = 3,
  bootstrap = 4,
  measurement_shot = 5,
  validate_subsample = 6,
  test_generic = 7,
};

// key = chain of splitmix64 absorptions:
//   h = master_seed; for f in fields: h = splitmix64(h ^ f)
PhiloxKey derive_key(uint64_t master_seed, std::initializer_list<uint64_t> fields);

inline PhiloxKey derive_stream_key(uint64_t master_seed, StreamPurpose purpose,
                                   uint64_t model_hash, uint64_t seed_index,
                                   uint64_t component_index) {
  return derive_key(master_seed, {static_cast<uint64_t>(purpose), model_hash,
                                  seed_index, component_index});
}

// Standard-normal draw `index` of the stream: Box-Muller pair (index >> 1),
// lane (index & 1). Pure function, random access.
double gaussian_draw(PhiloxKey key, uint64_t index);

// Uniform in (0, 1): the first 64 bits of block `index`.
inline double uniform_draw(PhiloxKey key, uint64_t index) {
  auto w = philox4x32(key, index);
  return vm::bits_to_unit((static_cast<uint64_t>(w[0]) << 32) | w[1]);
}

// Uniform integer in [0, n) by rejection (no modulo bias). Consumes one or
// more 32-bit words; `cursor` advances by the number of blocks consumed.
uint32_t uniform_below(PhiloxKey key, uint64_t& cursor, uint32_t n);

// Sequential view over a keyed stream.
class GaussianStream {
 public:
  explicit GaussianStream(PhiloxKey key, uint64_t start = 0)
      : key_(key), index_(start) {}
  double next() { return gaussian_draw(key_, index_++); }
  uint64_t index() const { return index_; }

 private:
  PhiloxKey key_;
  uint64_t index_;
};

}  // namespace stq
