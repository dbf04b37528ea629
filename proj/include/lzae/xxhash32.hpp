#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>

#include "lzae/bytes.hpp"

namespace lzae {

/// Streaming xxHash32.
class XxHash32 {
 public:
  explicit XxHash32(std::uint32_t seed = 0) noexcept { reset(seed); }

  void reset(std::uint32_t seed = 0) noexcept {
    seed_ = seed;
    acc_[0] = seed + kPrime1 + kPrime2;
    acc_[1] = seed + kPrime2;
    acc_[2] = seed;
    acc_[3] = seed - kPrime1;
    total_ = 0;
    buffered_ = 0;
  }

  void update(ByteView data) noexcept {
    const std::uint8_t* p = data.data();
    std::size_t n = data.size();
    total_ += n;

    if (buffered_ + n < 16) {
      if (n) std::memcpy(buffer_ + buffered_, p, n);
      buffered_ += n;
      return;
    }
    if (buffered_) {
      const std::size_t fill = 16 - buffered_;
      std::memcpy(buffer_ + buffered_, p, fill);
      consume_stripe(buffer_);
      p += fill;
      n -= fill;
      buffered_ = 0;
    }
    while (n >= 16) {
      consume_stripe(p);
      p += 16;
      n -= 16;
    }
    if (n) std::memcpy(buffer_, p, n);
    buffered_ = n;
  }

  std::uint32_t digest() const noexcept {
    std::uint32_t h;
    if (total_ >= 16)
      h = std::rotl(acc_[0], 1) + std::rotl(acc_[1], 7) + std::rotl(acc_[2], 12) +
          std::rotl(acc_[3], 18);
    else
      h = seed_ + kPrime5;
    h += static_cast<std::uint32_t>(total_);

    const std::uint8_t* p = buffer_;
    std::size_t n = buffered_;
    while (n >= 4) {
      h += load_le32(p) * kPrime3;
      h = std::rotl(h, 17) * kPrime4;
      p += 4;
      n -= 4;
    }
    while (n > 0) {
      h += *p * kPrime5;
      h = std::rotl(h, 11) * kPrime1;
      ++p;
      --n;
    }
    h ^= h >> 15;
    h *= kPrime2;
    h ^= h >> 13;
    h *= kPrime3;
    h ^= h >> 16;
    return h;
  }

 private:
  static constexpr std::uint32_t kPrime1 = 0x9E3779B1u;
  static constexpr std::uint32_t kPrime2 = 0x85EBCA77u;
  static constexpr std::uint32_t kPrime3 = 0xC2B2AE3Du;
  static constexpr std::uint32_t kPrime4 = 0x27D4EB2Fu;
  static constexpr std::uint32_t kPrime5 = 0x165667B1u;

  static std::uint32_t round(std::uint32_t acc, std::uint32_t lane) noexcept {
    acc += lane * kPrime2;
    acc = std::rotl(acc, 13);
    return acc * kPrime1;
  }

  void consume_stripe(const std::uint8_t* p) noexcept {
    for (int i = 0; i < 4; ++i) acc_[i] = round(acc_[i], load_le32(p + 4 * i));
  }

  std::uint32_t seed_ = 0;
  std::uint32_t acc_[4]{};
  std::uint64_t total_ = 0;
  std::uint8_t buffer_[16]{};
  std::size_t buffered_ = 0;
};

inline std::uint32_t xxhash32(ByteView data, std::uint32_t seed = 0) noexcept {
  XxHash32 h(seed);
  h.update(data);
  return h.digest();
}

}  // namespace lzae
