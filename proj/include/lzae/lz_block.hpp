#pragma once

// Single-block compression in the LZ4 block wire format.
//
// A block is a series of sequences. Each sequence is a token byte whose high
// nibble is the literal count and low nibble is (match length - 4), optional
// 255-continued length extensions, the literal bytes, a 16-bit little-endian
// match offset and the match-length extension. The final sequence carries
// literals only. The last 5 bytes of a block are always literals and no match
// starts within the last 12 bytes.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include "lzae/bytes.hpp"
#include "lzae/error.hpp"

namespace lzae::lz {

inline constexpr std::size_t kMinMatch = 4;
inline constexpr std::size_t kLastLiterals = 5;
inline constexpr std::size_t kMatchFindLimit = 12;
inline constexpr std::size_t kMaxOffset = 65535;
inline constexpr std::size_t kMaxInputSize = 0x7FFFFFFF;
inline constexpr std::size_t kDefaultTableSize = 4096;

constexpr std::size_t worst_case_bound(std::size_t n) noexcept { return n + n / 255 + 16; }

namespace detail {

inline std::uint32_t read32(const std::uint8_t* p) noexcept {
  std::uint32_t v;
  std::memcpy(&v, p, sizeof v);
  if constexpr (std::endian::native == std::endian::big) v = __builtin_bswap32(v);
  return v;
}

inline std::uint32_t hash4(std::uint32_t word, unsigned bits) noexcept {
  return (word * 2654435761u) >> (32 - bits);
}

inline void put_length(Bytes& out, std::size_t extra) {
  while (extra >= 255) {
    out.push_back(255);
    extra -= 255;
  }
  out.push_back(static_cast<std::uint8_t>(extra));
}

inline void emit_sequence(Bytes& out, const std::uint8_t* literals, std::size_t literal_len,
                          std::size_t offset, std::size_t match_len) {
  const std::size_t ml = match_len - kMinMatch;
  const std::uint8_t lit_nibble = literal_len >= 15 ? 15 : static_cast<std::uint8_t>(literal_len);
  const std::uint8_t ml_nibble = ml >= 15 ? 15 : static_cast<std::uint8_t>(ml);
  out.push_back(static_cast<std::uint8_t>((lit_nibble << 4) | ml_nibble));
  if (literal_len >= 15) put_length(out, literal_len - 15);
  out.insert(out.end(), literals, literals + literal_len);
  out.push_back(static_cast<std::uint8_t>(offset & 0xFF));
  out.push_back(static_cast<std::uint8_t>(offset >> 8));
  if (ml >= 15) put_length(out, ml - 15);
}

inline void emit_last_literals(Bytes& out, const std::uint8_t* literals, std::size_t literal_len) {
  const std::uint8_t lit_nibble = literal_len >= 15 ? 15 : static_cast<std::uint8_t>(literal_len);
  out.push_back(static_cast<std::uint8_t>(lit_nibble << 4));
  if (literal_len >= 15) put_length(out, literal_len - 15);
  out.insert(out.end(), literals, literals + literal_len);
}

// Length of the common prefix of a and b, compared up to `limit` bytes of a.
inline std::size_t common_length(const std::uint8_t* a, const std::uint8_t* b,
                                 const std::uint8_t* limit) noexcept {
  const std::uint8_t* start = a;
  while (a + 8 <= limit) {
    std::uint64_t x, y;
    std::memcpy(&x, a, 8);
    std::memcpy(&y, b, 8);
    const std::uint64_t diff = x ^ y;
    if (diff != 0) {
      if constexpr (std::endian::native == std::endian::little)
        return static_cast<std::size_t>(a - start) + (std::countr_zero(diff) >> 3);
      else
        return static_cast<std::size_t>(a - start) + (std::countl_zero(diff) >> 3);
    }
    a += 8;
    b += 8;
  }
  while (a < limit && *a == *b) {
    ++a;
    ++b;
  }
  return static_cast<std::size_t>(a - start);
}

}  // namespace detail

/// Greedy single-pass compressor with a hash table of `table_size` entries
/// (power of two, >= 256). Output is deterministic in (input, table_size).
inline Bytes compress_block(ByteView input, std::size_t table_size = kDefaultTableSize) {
  if (table_size < 256 || !std::has_single_bit(table_size))
    throw Error(Errc::invalid_argument,
                "hash table size must be a power of two >= 256, got " + std::to_string(table_size));
  if (input.size() > kMaxInputSize)
    throw Error(Errc::size_limit, "block input of " + std::to_string(input.size()) + " bytes");

  Bytes out;
  const std::size_t n = input.size();
  if (n == 0) return out;
  out.reserve(worst_case_bound(n));

  const std::uint8_t* const base = input.data();
  std::size_t anchor = 0;

  if (n > kMatchFindLimit) {
    const unsigned bits = static_cast<unsigned>(std::countr_zero(table_size));
    std::vector<std::uint32_t> table(table_size, 0);
    const std::size_t last_match_start = n - kMatchFindLimit;
    const std::uint8_t* const match_end_limit = base + n - kLastLiterals;

    std::size_t ip = 0;
    for (;;) {
      // Search forward for a 4-byte match; the step grows over incompressible runs.
      std::size_t candidate = 0;
      bool found = false;
      unsigned attempts = 1u << 6;
      while (ip <= last_match_start) {
        const std::uint32_t word = detail::read32(base + ip);
        const std::uint32_t h = detail::hash4(word, bits);
        candidate = table[h];
        table[h] = static_cast<std::uint32_t>(ip);
        if (candidate < ip && ip - candidate <= kMaxOffset &&
            detail::read32(base + candidate) == word) {
          found = true;
          break;
        }
        ip += attempts++ >> 6;
      }
      if (!found) break;

      while (ip > anchor && candidate > 0 && base[ip - 1] == base[candidate - 1]) {
        --ip;
        --candidate;
      }
      const std::size_t match_len =
          kMinMatch + detail::common_length(base + ip + kMinMatch, base + candidate + kMinMatch,
                                            match_end_limit);

      detail::emit_sequence(out, base + anchor, ip - anchor, ip - candidate, match_len);
      ip += match_len;
      anchor = ip;
      if (ip > last_match_start) break;
      table[detail::hash4(detail::read32(base + ip - 2), bits)] = static_cast<std::uint32_t>(ip - 2);
    }
  }

  detail::emit_last_literals(out, base + anchor, n - anchor);
  return out;
}

namespace detail {

inline std::size_t read_length(ByteView in, std::size_t& ip, std::size_t initial) {
  std::size_t len = initial;
  if (initial != 15) return len;
  std::uint8_t b;
  do {
    if (ip >= in.size())
      throw Error(Errc::malformed_truncated, "length extension runs past end of block",
                  std::nullopt, ip);
    b = in[ip++];
    len += b;
    if (len > kMaxInputSize)
      throw Error(Errc::malformed_output_overflow, "length field exceeds 2^31", std::nullopt,
                  ip - 1);
  } while (b == 255);
  return len;
}

}  // namespace detail

/// Decodes one block, producing at most `max_output` bytes.
inline Bytes decompress_block(ByteView input, std::size_t max_output) {
  Bytes out;
  if (input.empty()) return out;
  std::size_t op = 0;
  // The buffer is kept ahead of `op` where possible so short copies can move
  // 16 bytes at a time; trailing garbage is cut off at the end.
  constexpr std::size_t kSlack = 32;
  auto reserve = [&](std::size_t n) {
    if (op + n + kSlack <= out.size()) return;
    const std::size_t grow = std::max({out.size() * 2, op + n + kSlack, input.size() * 4 + 64});
    out.resize(std::min(grow, max_output + kSlack));
  };

  std::size_t ip = 0;
  for (;;) {
    if (ip >= input.size())
      throw Error(Errc::malformed_truncated, "expected sequence token", std::nullopt, ip);
    const std::size_t token_pos = ip;
    const std::uint8_t token = input[ip++];

    const std::size_t literal_len = detail::read_length(input, ip, token >> 4);
    if (literal_len > input.size() - ip)
      throw Error(Errc::malformed_truncated,
                  "literal run of " + std::to_string(literal_len) + " bytes exceeds block",
                  std::nullopt, ip);
    if (literal_len > max_output - op)
      throw Error(Errc::malformed_output_overflow,
                  "literals exceed output limit of " + std::to_string(max_output), std::nullopt,
                  token_pos);
    reserve(literal_len);
    if (literal_len <= 16 && input.size() - ip >= 16)
      std::memcpy(out.data() + op, input.data() + ip, 16);
    else if (literal_len)
      std::memcpy(out.data() + op, input.data() + ip, literal_len);
    op += literal_len;
    ip += literal_len;

    if (ip == input.size()) break;

    if (input.size() - ip < 2)
      throw Error(Errc::malformed_truncated, "match offset cut short", std::nullopt, ip);
    const std::size_t offset_pos = ip;
    const std::size_t offset = load_le16(input.data() + ip);
    ip += 2;
    if (offset == 0)
      throw Error(Errc::malformed_zero_offset, "", std::nullopt, offset_pos);
    if (offset > op)
      throw Error(Errc::malformed_offset_out_of_range,
                  "offset " + std::to_string(offset) + " with " + std::to_string(op) +
                      " bytes produced",
                  std::nullopt, offset_pos);

    const std::size_t match_len = detail::read_length(input, ip, token & 0x0F) + kMinMatch;
    if (match_len > max_output - op)
      throw Error(Errc::malformed_output_overflow,
                  "match exceeds output limit of " + std::to_string(max_output), std::nullopt,
                  token_pos);
    reserve(match_len);

    // Bytes from `src` onward repeat with period `offset`, so the copy can
    // double its chunk size each step without overlapping.
    std::uint8_t* const src = out.data() + op - offset;
    std::uint8_t* dst = out.data() + op;
    std::size_t remaining = match_len;
    if (offset >= 16) {
      for (std::size_t k = 0; k < remaining; k += 16) std::memcpy(dst + k, src + k, 16);
    } else if (offset == 1) {
      std::memset(dst, *src, remaining);
    } else {
      while (remaining > 0) {
        const std::size_t k = std::min(remaining, static_cast<std::size_t>(dst - src));
        std::memcpy(dst, src, k);
        dst += k;
        remaining -= k;
      }
    }
    op += match_len;
  }
  out.resize(op);
  return out;
}

}  // namespace lzae::lz
