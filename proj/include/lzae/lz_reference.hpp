#pragma once

// Slow reference codec for the LZ4 block format, used as a test oracle.
// Shares no code with lz_block.hpp: the encoder does an exhaustive
// longest-match search and the decoder goes through an explicit list of
// sequences.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "lzae/bytes.hpp"

namespace lzae::lz::reference {

struct Match {
  std::size_t offset = 0;
  std::size_t length = 0;
};

/// One literal run optionally followed by a back-reference.
struct Sequence {
  Bytes literals;
  std::optional<Match> match;  // absent only in the terminal sequence
};

inline constexpr std::size_t kMaxNaiveInput = std::size_t{1} << 20;

/// Exhaustive longest-match encoder. Quadratic; inputs up to 1 MiB.
inline std::vector<Sequence> find_sequences(ByteView in) {
  if (in.size() > kMaxNaiveInput) throw std::length_error("naive oracle input above 1 MiB");
  std::vector<Sequence> seqs;
  const std::size_t n = in.size();
  Sequence pending;
  std::size_t pos = 0;
  while (n >= 13 && pos + 12 <= n) {
    std::size_t best_len = 0, best_off = 0;
    const std::size_t window_start = pos > 65535 ? pos - 65535 : 0;
    for (std::size_t cand = pos; cand-- > window_start;) {
      std::size_t len = 0;
      while (pos + len < n - 5 && in[cand + len] == in[pos + len]) ++len;
      if (len > best_len) {
        best_len = len;
        best_off = pos - cand;
      }
    }
    if (best_len >= 4) {
      pending.match = Match{best_off, best_len};
      seqs.push_back(std::move(pending));
      pending = Sequence{};
      pos += best_len;
    } else {
      pending.literals.push_back(in[pos]);
      ++pos;
    }
  }
  while (pos < n) pending.literals.push_back(in[pos++]);
  if (n > 0) seqs.push_back(std::move(pending));
  return seqs;
}

inline void write_varlen(Bytes& out, std::size_t value) {
  // value already had 15 subtracted
  for (; value >= 255; value -= 255) out.push_back(0xFF);
  out.push_back(static_cast<std::uint8_t>(value));
}

inline Bytes serialize(const std::vector<Sequence>& seqs) {
  Bytes out;
  for (const auto& s : seqs) {
    const std::size_t lit = s.literals.size();
    const std::size_t ml = s.match ? s.match->length - 4 : 0;
    std::uint8_t token = static_cast<std::uint8_t>((lit < 15 ? lit : 15) << 4);
    if (s.match) token |= static_cast<std::uint8_t>(ml < 15 ? ml : 15);
    out.push_back(token);
    if (lit >= 15) write_varlen(out, lit - 15);
    out.insert(out.end(), s.literals.begin(), s.literals.end());
    if (s.match) {
      out.push_back(static_cast<std::uint8_t>(s.match->offset % 256));
      out.push_back(static_cast<std::uint8_t>(s.match->offset / 256));
      if (ml >= 15) write_varlen(out, ml - 15);
    }
  }
  return out;
}

inline Bytes reference_compress_naive(ByteView in) { return serialize(find_sequences(in)); }

/// Splits a block into sequences; throws std::runtime_error on any defect.
inline std::vector<Sequence> parse_sequences(ByteView block) {
  std::vector<Sequence> seqs;
  std::size_t i = 0;
  auto need = [&](std::size_t k) {
    if (block.size() - i < k) throw std::runtime_error("reference decode: truncated block");
  };
  auto varlen = [&](std::size_t nibble) {
    std::size_t v = nibble;
    if (nibble == 15) {
      for (;;) {
        need(1);
        const std::uint8_t b = block[i++];
        v += b;
        if (b != 255) break;
      }
    }
    return v;
  };
  while (i < block.size()) {
    Sequence s;
    const std::uint8_t token = block[i++];
    const std::size_t lit = varlen(token >> 4);
    need(lit);
    s.literals.assign(block.begin() + static_cast<std::ptrdiff_t>(i),
                      block.begin() + static_cast<std::ptrdiff_t>(i + lit));
    i += lit;
    if (i == block.size()) {
      seqs.push_back(std::move(s));
      break;
    }
    need(2);
    Match m;
    m.offset = block[i] + 256u * block[i + 1];
    i += 2;
    m.length = varlen(token & 15) + 4;
    s.match = m;
    seqs.push_back(std::move(s));
  }
  if (!seqs.empty() && seqs.back().match)
    throw std::runtime_error("reference decode: block does not end with literals");
  return seqs;
}

inline Bytes apply_sequences(const std::vector<Sequence>& seqs) {
  Bytes out;
  for (const auto& s : seqs) {
    out.insert(out.end(), s.literals.begin(), s.literals.end());
    if (!s.match) continue;
    if (s.match->offset == 0 || s.match->offset > out.size())
      throw std::runtime_error("reference decode: bad offset");
    for (std::size_t k = 0; k < s.match->length; ++k) out.push_back(out[out.size() - s.match->offset]);
  }
  return out;
}

inline Bytes reference_decompress_naive(ByteView block) { return apply_sequences(parse_sequences(block)); }

}  // namespace lzae::lz::reference
