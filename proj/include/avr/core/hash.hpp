#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace avr {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

// FNV-1a, 64 bit. Used for provenance hashes, not security. Pass a previous
// result as `h` to hash a sequence of chunks.
inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = kFnvOffset) noexcept {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string hash_hex(std::string_view data) { return hex64(fnv1a64(data)); }

}  // namespace avr
