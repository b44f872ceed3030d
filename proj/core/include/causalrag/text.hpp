#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace causalrag {

/// ASCII whitespace: space, \t, \n, \v, \f, \r.
constexpr bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f' || c == '\r';
}

/// Word characters for whole-word matching: ASCII alphanumerics, '_' and any
/// byte of a multi-byte UTF-8 sequence.
constexpr bool is_word_char(char c) noexcept {
  const auto u = static_cast<unsigned char>(c);
  return (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') ||
         u == '_' || u >= 0x80;
}

constexpr char ascii_lower(char c) noexcept {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

std::string to_lower_ascii(std::string_view s);

/// Collapses every run of whitespace (including line breaks) to one space and
/// strips both ends. Case and all other characters are preserved.
std::string normalize_text(std::string_view raw);

/// Number of whitespace-separated tokens.
std::size_t word_count(std::string_view text) noexcept;

/// Number of UTF-8 code points (continuation bytes are not counted).
std::size_t utf8_length(std::string_view text) noexcept;

} // namespace causalrag
