#include "stq/sha256.hpp"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace stq {

namespace {

constexpr int kPrimes[64] = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,  47,  53,
    59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107, 109, 113, 127, 131,
    137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197, 199, 211, 223,
    227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311};

// floor(cbrt(p) * 2^32) mod 2^32 via exact integer search on x^3 <= p * 2^96
uint32_t cbrt_frac_bits(int p) {
  unsigned __int128 target = static_cast<unsigned __int128>(p) << 96;
  uint64_t lo = 0, hi = UINT64_C(1) << 36;
  while (lo + 1 < hi) {
    uint64_t mid = lo + (hi - lo) / 2;
    unsigned __int128 m = mid;
    if (m * m * m <= target)
      lo = mid;
    else
      hi = mid;
  }
  return static_cast<uint32_t>(lo);
}

// floor(sqrt(p) * 2^32) mod 2^32
uint32_t sqrt_frac_bits(int p) {
  unsigned __int128 target = static_cast<unsigned __int128>(p) << 64;
  uint64_t lo = 0, hi = UINT64_C(1) << 35;
  while (lo + 1 < hi) {
    uint64_t mid = lo + (hi - lo) / 2;
    unsigned __int128 m = mid;
    if (m * m <= target)
      lo = mid;
    else
      hi = mid;
  }
  return static_cast<uint32_t>(lo);
}

struct Tables {
  uint32_t k[64];
  uint32_t h0[8];
  Tables() {
    for (int i = 0; i < 64; ++i) k[i] = cbrt_frac_bits(kPrimes[i]);
    for (int i = 0; i < 8; ++i) h0[i] = sqrt_frac_bits(kPrimes[i]);
  }
};

const Tables& tables() {
  static Tables t;
  return t;
}

inline uint32_t rotr(uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

}  // namespace

Sha256::Sha256() {
  const Tables& t = tables();
  std::memcpy(h_, t.h0, sizeof h_);
}

void Sha256::process_block(const uint8_t* block) {
  const Tables& t = tables();
  uint32_t w[64];
  for (int i = 0; i < 16; ++i)
    w[i] = (uint32_t(block[4 * i]) << 24) | (uint32_t(block[4 * i + 1]) << 16) |
           (uint32_t(block[4 * i + 2]) << 8) | uint32_t(block[4 * i + 3]);
  for (int i = 16; i < 64; ++i) {
    uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
    uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
    w[i] = w[i - 16] + s0 + w[i - 7] + s1;
  }
  uint32_t a = h_[0], b = h_[1], c = h_[2], d = h_[3];
  uint32_t e = h_[4], f = h_[5], g = h_[6], h = h_[7];
  for (int i = 0; i < 64; ++i) {
    uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
    uint32_t ch = (e & f) ^ (~e & g);
    uint32_t temp1 = h + s1 + ch + t.k[i] + w[i];
    uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
    uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
    uint32_t temp2 = s0 + maj;
    h = g;
    g = f;
    f = e;
    e = d + temp1;
    d = c;
    c = b;
    b = a;
    a = temp1 + temp2;
  }
  h_[0] += a; h_[1] += b; h_[2] += c; h_[3] += d;
  h_[4] += e; h_[5] += f; h_[6] += g; h_[7] += h;
}

void Sha256::update(const void* data, std::size_t len) {
  const uint8_t* p = static_cast<const uint8_t*>(data);
  total_bytes_ += len;
  while (len > 0) {
    std::size_t take = std::min(len, sizeof buffer_ - buffered_);
    std::memcpy(buffer_ + buffered_, p, take);
    buffered_ += take;
    p += take;
    len -= take;
    if (buffered_ == sizeof buffer_) {
      process_block(buffer_);
      buffered_ = 0;
    }
  }
}

std::string Sha256::hex_digest() {
  uint64_t bits = total_bytes_ * 8;
  uint8_t pad = 0x80;
  update(&pad, 1);
  uint8_t zero = 0;
  while (buffered_ != 56) update(&zero, 1);
  uint8_t len_be[8];
  for (int i = 0; i < 8; ++i) len_be[i] = static_cast<uint8_t>(bits >> (56 - 8 * i));
  update(len_be, 8);

  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (uint32_t v : h_) {
    for (int shift = 28; shift >= 0; shift -= 4) out.push_back(hex[(v >> shift) & 0xF]);
  }
  return out;
}

std::string Sha256::of_string(std::string_view s) {
  Sha256 h;
  h.update(s.data(), s.size());
  return h.hex_digest();
}

std::string Sha256::of_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash missing file: " + path);
  Sha256 h;
  char buf[65536];
  while (in) {
    in.read(buf, sizeof buf);
    h.update(buf, static_cast<std::size_t>(in.gcount()));
  }
  return h.hex_digest();
}

}  // namespace stq
