#pragma once

#include <cctype>
#include <optional>
#include <string>
#include <string_view>

#include "lzae/aes128.hpp"
#include "lzae/bytes.hpp"
#include "lzae/error.hpp"

namespace lzae {

inline std::optional<Bytes> parse_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) return std::nullopt;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  Bytes out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2) {
    const int hi = nibble(hex[i]), lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
  }
  return out;
}

inline std::string to_hex(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    s.push_back(kDigits[b >> 4]);
    s.push_back(kDigits[b & 15]);
  }
  return s;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

/// Parses a key given as 32 hex characters (surrounding whitespace ignored).
inline aes::Key key_from_hex(std::string_view text) {
  const auto t = trim(text);
  const auto bytes = parse_hex(t);
  if (!bytes)
    throw Error(Errc::invalid_argument, "key must be 32 hex characters (16 bytes)");
  if (bytes->size() != aes::kKeySize)
    throw Error(Errc::invalid_argument, "key must be 16 bytes (32 hex characters), got " +
                                            std::to_string(bytes->size()) + " bytes");
  aes::Key k;
  std::copy(bytes->begin(), bytes->end(), k.begin());
  return k;
}

/// Key file contents: either 32 hex characters or exactly 16 raw bytes.
inline aes::Key key_from_file_contents(std::string_view contents) {
  const auto t = trim(contents);
  if (t.size() == 2 * aes::kKeySize && parse_hex(t)) return key_from_hex(t);
  if (contents.size() == aes::kKeySize) {
    aes::Key k;
    std::copy(contents.begin(), contents.end(), k.begin());
    return k;
  }
  throw Error(Errc::invalid_argument,
              "key file must hold 16 raw bytes or 32 hex characters, got " +
                  std::to_string(contents.size()) + " bytes");
}

}  // namespace lzae
