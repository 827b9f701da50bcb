#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace stq {

// FIPS 180-4 SHA-256; round constants are derived at first use from integer
// cube/square roots of the first 64 primes, so no opaque magic tables.
class Sha256 {
 public:
  Sha256();
  void update(const void* data, std::size_t len);
  std::string hex_digest();  // finalizes

  static std::string of_string(std::string_view s);
  static std::string of_file(const std::string& path);

 private:
  void process_block(const uint8_t* block);
  uint32_t h_[8];
  uint8_t buffer_[64];
  std::size_t buffered_ = 0;
  uint64_t total_bytes_ = 0;
};

}  // namespace stq
