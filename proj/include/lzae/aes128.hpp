#pragma once

// AES-128 forward cipher (FIPS-197): key expansion and 10-round encryption.
// Byte-oriented implementation with a constant S-box and xtime-based
// MixColumns. No constant-time guarantees.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

#include "lzae/error.hpp"

namespace lzae::aes {

inline constexpr std::size_t kBlockSize = 16;
inline constexpr std::size_t kKeySize = 16;
inline constexpr std::size_t kRounds = 10;

using Block = std::array<std::uint8_t, kBlockSize>;
using Key = std::array<std::uint8_t, kKeySize>;

// clang-format off
inline constexpr std::array<std::uint8_t, 256> kSbox = [] {
  std::array<std::uint8_t, 256> s = {
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
  };
#ifdef LZAE_FAULT_INJECT_SBOX
  // Test builds only: a single wrong entry must make the known-answer check fail.
  s[0x00] ^= 0x01;
#endif
  return s;
}();
// clang-format on

inline constexpr std::array<std::uint8_t, kRounds> kRcon = {0x01, 0x02, 0x04, 0x08, 0x10,
                                                            0x20, 0x40, 0x80, 0x1b, 0x36};

/// Expanded key: 11 round keys, the first equal to the cipher key.
class KeySchedule {
 public:
  using RoundKey = std::array<std::uint8_t, kBlockSize>;

  explicit KeySchedule(const Key& key) noexcept {
    std::uint8_t* w = &round_keys_[0][0];
    for (std::size_t i = 0; i < kKeySize; ++i) w[i] = key[i];
    for (std::size_t word = 4; word < 4 * (kRounds + 1); ++word) {
      std::uint8_t t[4] = {w[4 * word - 4], w[4 * word - 3], w[4 * word - 2], w[4 * word - 1]};
      if (word % 4 == 0) {
        // RotWord, SubWord, Rcon
        const std::uint8_t first = t[0];
        t[0] = static_cast<std::uint8_t>(kSbox[t[1]] ^ kRcon[word / 4 - 1]);
        t[1] = kSbox[t[2]];
        t[2] = kSbox[t[3]];
        t[3] = kSbox[first];
      }
      for (std::size_t b = 0; b < 4; ++b)
        w[4 * word + b] = static_cast<std::uint8_t>(w[4 * (word - 4) + b] ^ t[b]);
    }
  }

  const RoundKey& operator[](std::size_t round) const noexcept { return round_keys_[round]; }
  static constexpr std::size_t size() noexcept { return kRounds + 1; }

 private:
  std::array<RoundKey, kRounds + 1> round_keys_{};
};

inline KeySchedule expand_key(const Key& key) noexcept { return KeySchedule(key); }

inline KeySchedule expand_key(std::span<const std::uint8_t> key) {
  if (key.size() != kKeySize)
    throw Error(Errc::invalid_argument,
                "AES-128 key must be 16 bytes, got " + std::to_string(key.size()));
  Key k;
  for (std::size_t i = 0; i < kKeySize; ++i) k[i] = key[i];
  return KeySchedule(k);
}

namespace detail {

constexpr std::uint8_t xtime(std::uint8_t x) noexcept {
  return static_cast<std::uint8_t>((x << 1) ^ ((x & 0x80) ? 0x1b : 0x00));
}

inline void add_round_key(Block& s, const KeySchedule::RoundKey& k) noexcept {
  for (std::size_t i = 0; i < kBlockSize; ++i) s[i] ^= k[i];
}

// State is column-major: byte (row r, column c) lives at s[4*c + r].
inline void sub_bytes_shift_rows(Block& s) noexcept {
  const Block t = s;
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t r = 0; r < 4; ++r) s[4 * c + r] = kSbox[t[4 * ((c + r) % 4) + r]];
}

inline void mix_column(std::uint8_t* col, std::uint8_t a0, std::uint8_t a1, std::uint8_t a2,
                       std::uint8_t a3) noexcept {
  const std::uint8_t all = static_cast<std::uint8_t>(a0 ^ a1 ^ a2 ^ a3);
  col[0] = static_cast<std::uint8_t>(a0 ^ all ^ xtime(static_cast<std::uint8_t>(a0 ^ a1)));
  col[1] = static_cast<std::uint8_t>(a1 ^ all ^ xtime(static_cast<std::uint8_t>(a1 ^ a2)));
  col[2] = static_cast<std::uint8_t>(a2 ^ all ^ xtime(static_cast<std::uint8_t>(a2 ^ a3)));
  col[3] = static_cast<std::uint8_t>(a3 ^ all ^ xtime(static_cast<std::uint8_t>(a3 ^ a0)));
}

// SubBytes, ShiftRows and MixColumns of one full round.
inline void round_transform(Block& s) noexcept {
  const Block t = s;
  for (std::size_t c = 0; c < 4; ++c)
    mix_column(&s[4 * c], kSbox[t[4 * c]], kSbox[t[4 * ((c + 1) % 4) + 1]],
               kSbox[t[4 * ((c + 2) % 4) + 2]], kSbox[t[4 * ((c + 3) % 4) + 3]]);
}

}  // namespace detail

inline Block encrypt_block(const Block& plain, const KeySchedule& ks) noexcept {
  Block s = plain;
  detail::add_round_key(s, ks[0]);
  for (std::size_t round = 1; round < kRounds; ++round) {
    detail::round_transform(s);
    detail::add_round_key(s, ks[round]);
  }
  detail::sub_bytes_shift_rows(s);
  detail::add_round_key(s, ks[kRounds]);
  return s;
}

}  // namespace lzae::aes
