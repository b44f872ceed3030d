#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace causalrag {

inline constexpr std::uint64_t kFnv1a64Offset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnv1a64Prime = 0x100000001b3ULL;

/// 64-bit FNV-1a over the raw bytes of `data`.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t seed = kFnv1a64Offset) noexcept {
  std::uint64_t h = seed;
  for (char c : data) {
    h ^= static_cast<unsigned char>(c);
    h *= kFnv1a64Prime;
  }
  return h;
}

/// 16 lowercase hex digits.
std::string to_hex64(std::uint64_t value);

} // namespace causalrag
