#pragma once

// Counter-mode keystream over AES-128. Every frame block gets a counter
// range derived from its index alone, so blocks encrypt independently.

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>

#include "lzae/aes128.hpp"
#include "lzae/bytes.hpp"
#include "lzae/error.hpp"

namespace lzae::ctr {

inline constexpr std::size_t kNonceSize = 8;
using Nonce = std::array<std::uint8_t, kNonceSize>;

/// nonce (8 bytes) followed by the counter as 8-byte big-endian.
inline aes::Block counter_block(const Nonce& nonce, std::uint64_t counter) noexcept {
  aes::Block b{};
  for (std::size_t i = 0; i < kNonceSize; ++i) b[i] = nonce[i];
  for (std::size_t i = 0; i < 8; ++i) b[15 - i] = static_cast<std::uint8_t>(counter >> (8 * i));
  return b;
}

inline std::uint64_t counter_base(std::uint64_t block_index, std::uint64_t max_block_size) {
  if (max_block_size == 0 || max_block_size % aes::kBlockSize != 0)
    throw Error(Errc::invalid_argument, "max block size must be a positive multiple of 16");
  const std::uint64_t per_block = max_block_size / aes::kBlockSize;
  if (block_index > std::numeric_limits<std::uint64_t>::max() / per_block)
    throw Error(Errc::frame_too_large,
                "counter base overflows 64 bits at block " + std::to_string(block_index),
                block_index);
  return block_index * per_block;
}

/// XORs `data` in place with the keystream starting at counter `base`.
inline void xcrypt_inplace(std::span<std::uint8_t> data, const aes::KeySchedule& ks,
                           const Nonce& nonce, std::uint64_t base) {
  const std::uint64_t blocks = (data.size() + aes::kBlockSize - 1) / aes::kBlockSize;
  if (blocks > 0 && base > std::numeric_limits<std::uint64_t>::max() - (blocks - 1))
    throw Error(Errc::frame_too_large, "keystream counter would wrap");

  std::size_t pos = 0;
  for (std::uint64_t i = 0; i < blocks; ++i) {
    const aes::Block ks_block = aes::encrypt_block(counter_block(nonce, base + i), ks);
    const std::size_t n = std::min(aes::kBlockSize, data.size() - pos);
    for (std::size_t j = 0; j < n; ++j) data[pos + j] ^= ks_block[j];
    pos += n;
  }
}

inline Bytes xcrypt(ByteView payload, const aes::KeySchedule& ks, const Nonce& nonce,
                    std::uint64_t base) {
  Bytes out(payload.begin(), payload.end());
  xcrypt_inplace(out, ks, nonce, base);
  return out;
}

}  // namespace lzae::ctr
