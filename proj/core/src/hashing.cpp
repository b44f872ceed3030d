#include "causalrag/hashing.hpp"
#include "causalrag/version.hpp"

namespace causalrag {

std::string to_hex64(std::uint64_t value) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[value & 0xF];
    value >>= 4;
  }
  return out;
}

std::string_view library_version() noexcept { return CAUSALRAG_VERSION; }

} // namespace causalrag
