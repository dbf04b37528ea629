#pragma once

// Frame container layout (all integers little-endian):
//
//   magic        4 bytes   4C 5A 41 45 ("LZAE")
//   descriptor  12 bytes   version, flags, block-size code, nonce[8], header check
//   blocks                 { u32 header, payload, [u32 xxh32(payload)] }*
//   EoS          4 bytes   00 00 00 00
//   checksum   0/4 bytes   xxh32 of the original plaintext, when flagged
//
// A block header holds the payload length; its top bit marks a payload that
// is stored uncompressed. Payloads are ciphertext; headers are in the clear.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "lzae/bytes.hpp"
#include "lzae/ctr.hpp"
#include "lzae/error.hpp"
#include "lzae/xxhash32.hpp"

namespace lzae::frame {

inline constexpr std::array<std::uint8_t, 4> kMagic = {0x4C, 0x5A, 0x41, 0x45};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kDescriptorSize = 12;
inline constexpr std::size_t kHeaderSize = kMagic.size() + kDescriptorSize;
inline constexpr std::size_t kBlockHeaderSize = 4;
inline constexpr std::uint32_t kRawFlag = 0x80000000u;

inline constexpr std::uint8_t kFlagBlockChecksums = 0x01;
inline constexpr std::uint8_t kFlagContentChecksum = 0x02;

enum class BlockSizeCode : std::uint8_t { kib64 = 0, kib256 = 1, mib1 = 2, mib4 = 3, mib8 = 4 };

constexpr std::size_t block_size_bytes(BlockSizeCode code) noexcept {
  switch (code) {
    case BlockSizeCode::kib64: return std::size_t{64} << 10;
    case BlockSizeCode::kib256: return std::size_t{256} << 10;
    case BlockSizeCode::mib1: return std::size_t{1} << 20;
    case BlockSizeCode::mib4: return std::size_t{4} << 20;
    case BlockSizeCode::mib8: return std::size_t{8} << 20;
  }
  return 0;
}

/// Smallest block-size code that can hold `bytes`.
inline std::optional<BlockSizeCode> smallest_code_for(std::size_t bytes) noexcept {
  for (auto c : {BlockSizeCode::kib64, BlockSizeCode::kib256, BlockSizeCode::mib1,
                 BlockSizeCode::mib4, BlockSizeCode::mib8})
    if (bytes <= block_size_bytes(c)) return c;
  return std::nullopt;
}

struct FrameDescriptor {
  std::uint8_t version = kVersion;
  bool block_checksums = true;
  bool content_checksum = true;
  BlockSizeCode block_size = BlockSizeCode::mib4;
  ctr::Nonce nonce{};

  std::size_t max_block_size() const noexcept { return block_size_bytes(block_size); }
  bool operator==(const FrameDescriptor&) const = default;
};

inline std::array<std::uint8_t, kHeaderSize> encode_descriptor(const FrameDescriptor& d) {
  std::array<std::uint8_t, kHeaderSize> out{};
  std::copy(kMagic.begin(), kMagic.end(), out.begin());
  std::uint8_t* desc = out.data() + kMagic.size();
  desc[0] = d.version;
  desc[1] = static_cast<std::uint8_t>((d.block_checksums ? kFlagBlockChecksums : 0) |
                                      (d.content_checksum ? kFlagContentChecksum : 0));
  desc[2] = static_cast<std::uint8_t>(d.block_size);
  std::copy(d.nonce.begin(), d.nonce.end(), desc + 3);
  desc[11] = static_cast<std::uint8_t>(xxhash32(ByteView(desc, kDescriptorSize - 1)) & 0xFF);
  return out;
}

inline FrameDescriptor decode_descriptor(ByteView bytes) {
  if (bytes.size() < kHeaderSize)
    throw Error(Errc::truncated_frame,
                "header needs 16 bytes, have " + std::to_string(bytes.size()), std::nullopt,
                bytes.size());
  if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) throw Error(Errc::not_our_format, "bad magic number", std::nullopt, 0);

  const std::uint8_t* desc = bytes.data() + kMagic.size();
  if (desc[0] != kVersion)
    throw Error(Errc::unsupported_version, "version " + std::to_string(desc[0]), std::nullopt, 4);
  const std::uint8_t check = static_cast<std::uint8_t>(xxhash32(ByteView(desc, kDescriptorSize - 1)) & 0xFF);
  if (check != desc[11])
    throw Error(Errc::corrupt_header, "header check mismatch", std::nullopt, kHeaderSize - 1);
  if (desc[1] & ~(kFlagBlockChecksums | kFlagContentChecksum))
    throw Error(Errc::corrupt_header, "reserved flag bits set", std::nullopt, 5);
  if (desc[2] > static_cast<std::uint8_t>(BlockSizeCode::mib8))
    throw Error(Errc::corrupt_header, "unknown block size code " + std::to_string(desc[2]),
                std::nullopt, 6);

  FrameDescriptor d;
  d.version = desc[0];
  d.block_checksums = (desc[1] & kFlagBlockChecksums) != 0;
  d.content_checksum = (desc[1] & kFlagContentChecksum) != 0;
  d.block_size = static_cast<BlockSizeCode>(desc[2]);
  std::copy(desc + 3, desc + 11, d.nonce.begin());
  return d;
}

inline std::array<std::uint8_t, kBlockHeaderSize> encode_block_header(
    std::size_t wire_len, bool is_compressed, std::size_t max_block_size) {
  if (wire_len == 0)
    throw Error(Errc::size_limit, "block length 0 is reserved for the end-of-stream marker");
  if (wire_len > max_block_size || wire_len > 0x7FFFFFFF)
    throw Error(Errc::size_limit, "block length " + std::to_string(wire_len) +
                                      " exceeds maximum " + std::to_string(max_block_size));
  std::array<std::uint8_t, kBlockHeaderSize> out{};
  store_le32(out.data(), static_cast<std::uint32_t>(wire_len) | (is_compressed ? 0u : kRawFlag));
  return out;
}

/// One frame block. On the wire `payload` is ciphertext; inside the pipeline
/// it holds the compressed (or raw) plaintext before encryption.
struct BlockUnit {
  std::uint64_t index = 0;
  Bytes payload;
  bool is_compressed = false;
  std::uint32_t plain_len = 0;  // unknown (0) for compressed blocks read off the wire
  std::optional<std::uint32_t> block_checksum;
};

/// Sequential frame writer. Emits the header on construction.
class FrameWriter {
 public:
  FrameWriter(std::ostream& sink, const FrameDescriptor& d) : sink_(sink), desc_(d) {
    const auto header = encode_descriptor(d);
    put(header.data(), header.size());
  }

  void write_block(const BlockUnit& b) {
    if (finished_) throw Error(Errc::invalid_argument, "frame already finished");
    if (b.index != next_index_)
      throw Error(Errc::invalid_argument,
                  "blocks out of order: got " + std::to_string(b.index) + ", expected " +
                      std::to_string(next_index_),
                  b.index);
    const auto header = encode_block_header(b.payload.size(), b.is_compressed, desc_.max_block_size());
    put(header.data(), header.size());
    put(b.payload.data(), b.payload.size());
    if (desc_.block_checksums) {
      std::uint8_t sum[4];
      store_le32(sum, b.block_checksum ? *b.block_checksum : xxhash32(b.payload));
      put(sum, 4);
    }
    ++next_index_;
  }

  /// Writes the EoS marker and, when flagged, the content checksum.
  void finish(std::optional<std::uint32_t> content_checksum) {
    if (finished_) return;
    const std::uint8_t eos[4] = {0, 0, 0, 0};
    put(eos, 4);
    if (desc_.content_checksum) {
      if (!content_checksum)
        throw Error(Errc::invalid_argument, "frame flags a content checksum but none was given");
      std::uint8_t sum[4];
      store_le32(sum, *content_checksum);
      put(sum, 4);
    }
    sink_.flush();
    if (!sink_) throw Error(Errc::io_error, "flush failed", std::nullopt, bytes_written_, Stage::write);
    finished_ = true;
  }

  std::uint64_t bytes_written() const noexcept { return bytes_written_; }
  std::uint64_t blocks_written() const noexcept { return next_index_; }
  const FrameDescriptor& descriptor() const noexcept { return desc_; }

 private:
  void put(const std::uint8_t* p, std::size_t n) {
    sink_.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!sink_)
      throw Error(Errc::io_error, "sink write failed", std::nullopt, bytes_written_, Stage::write);
    bytes_written_ += n;
  }

  std::ostream& sink_;
  FrameDescriptor desc_;
  std::uint64_t next_index_ = 0;
  std::uint64_t bytes_written_ = 0;
  bool finished_ = false;
};

/// Incremental frame parser. Bytes are pushed with feed(); complete blocks are
/// pulled with next_block(). Nothing past the 16-byte header is examined until
/// the header has been fully received and verified.
class FrameParser {
 public:
  void feed(ByteView data) {
    if (state_ == State::done && !data.empty())
      throw Error(Errc::trailing_data, std::to_string(data.size()) + " bytes after frame end",
                  std::nullopt, consumed_);
    compact();
    buf_.insert(buf_.end(), data.begin(), data.end());
  }

  /// Declares end of input. Throws if the frame is incomplete.
  void finish() {
    if (ready_) throw Error(Errc::invalid_argument, "finish() called with an undrained block");
    poll();
    if (state_ == State::done) return;
    if (state_ == State::block_header && available() == 0)
      throw Error(Errc::missing_eos, "input ended after block " + std::to_string(next_index_),
                  std::nullopt, consumed_);
    throw Error(Errc::truncated_frame, state_name(), std::nullopt, consumed_ + available());
  }

  /// Next complete block, or nullopt if more input is needed or the frame ended.
  std::optional<BlockUnit> next_block() {
    poll();
    if (ready_) {
      std::optional<BlockUnit> b = std::move(ready_);
      ready_.reset();
      return b;
    }
    return std::nullopt;
  }

  bool header_complete() const noexcept { return desc_.has_value(); }
  const std::optional<FrameDescriptor>& descriptor() const noexcept { return desc_; }
  bool done() const noexcept { return state_ == State::done; }
  std::optional<std::uint32_t> stream_checksum() const noexcept { return stream_checksum_; }
  std::uint64_t bytes_consumed() const noexcept { return consumed_; }
  std::uint64_t blocks_parsed() const noexcept { return next_index_; }
  /// Payload bytes run through block-checksum verification so far.
  std::uint64_t bytes_hashed() const noexcept { return hashed_; }

 private:
  enum class State { header, block_header, payload, block_checksum, stream_checksum, done };

  std::size_t available() const noexcept { return buf_.size() - pos_; }
  const std::uint8_t* cursor() const noexcept { return buf_.data() + pos_; }

  void advance(std::size_t n) noexcept {
    pos_ += n;
    consumed_ += n;
  }

  void compact() {
    if (pos_ > 0 && (pos_ >= buf_.size() / 2 || pos_ == buf_.size())) {
      buf_.erase(buf_.begin(), buf_.begin() + static_cast<std::ptrdiff_t>(pos_));
      pos_ = 0;
    }
  }

  const char* state_name() const noexcept {
    switch (state_) {
      case State::header: return "inside frame header";
      case State::block_header: return "inside block header";
      case State::payload: return "inside block payload";
      case State::block_checksum: return "inside block checksum";
      case State::stream_checksum: return "inside stream checksum";
      case State::done: return "complete";
    }
    return "";
  }

  void poll() {
    while (!ready_) {
      switch (state_) {
        case State::header:
          if (available() < kHeaderSize) return;
          desc_ = decode_descriptor(ByteView(cursor(), kHeaderSize));
          advance(kHeaderSize);
          state_ = State::block_header;
          break;
        case State::block_header: {
          if (available() < kBlockHeaderSize) return;
          const std::uint32_t raw = load_le32(cursor());
          if (raw == 0) {
            advance(kBlockHeaderSize);
            state_ = desc_->content_checksum ? State::stream_checksum : State::done;
            break;
          }
          pending_.index = next_index_;
          pending_.is_compressed = (raw & kRawFlag) == 0;
          pending_len_ = raw & ~kRawFlag;
          if (pending_len_ > desc_->max_block_size())
            throw Error(Errc::block_too_large,
                        std::to_string(pending_len_) + " > " +
                            std::to_string(desc_->max_block_size()),
                        next_index_, consumed_);
          if (pending_len_ == 0)
            throw Error(Errc::block_too_large, "raw block of length 0", next_index_, consumed_);
          advance(kBlockHeaderSize);
          state_ = State::payload;
          break;
        }
        case State::payload:
          if (available() < pending_len_) return;
          pending_.payload.assign(cursor(), cursor() + pending_len_);
          pending_.plain_len = pending_.is_compressed ? 0 : static_cast<std::uint32_t>(pending_len_);
          advance(pending_len_);
          if (desc_->block_checksums) {
            state_ = State::block_checksum;
          } else {
            emit();
          }
          break;
        case State::block_checksum: {
          if (available() < 4) return;
          const std::uint32_t stored = load_le32(cursor());
          const std::uint32_t actual = xxhash32(pending_.payload);
          hashed_ += pending_.payload.size();
          if (stored != actual)
            throw Error(Errc::block_checksum_mismatch, "", pending_.index, consumed_);
          pending_.block_checksum = stored;
          advance(4);
          emit();
          break;
        }
        case State::stream_checksum:
          if (available() < 4) return;
          stream_checksum_ = load_le32(cursor());
          advance(4);
          state_ = State::done;
          break;
        case State::done:
          if (available() > 0)
            throw Error(Errc::trailing_data, std::to_string(available()) + " bytes after frame end",
                        std::nullopt, consumed_);
          return;
      }
    }
  }

  void emit() {
    ready_ = std::move(pending_);
    pending_ = BlockUnit{};
    ++next_index_;
    state_ = State::block_header;
  }

  Bytes buf_;
  std::size_t pos_ = 0;
  std::uint64_t consumed_ = 0;
  std::uint64_t hashed_ = 0;
  State state_ = State::header;
  std::optional<FrameDescriptor> desc_;
  BlockUnit pending_;
  std::size_t pending_len_ = 0;
  std::optional<BlockUnit> ready_;
  std::uint64_t next_index_ = 0;
  std::optional<std::uint32_t> stream_checksum_;
};

struct Frame {
  FrameDescriptor descriptor;
  std::vector<BlockUnit> blocks;
  std::optional<std::uint32_t> stream_checksum;
};

inline void write_frame(std::span<const BlockUnit> blocks, const FrameDescriptor& d, std::ostream& sink,
                        std::optional<std::uint32_t> content_checksum = std::nullopt) {
  FrameWriter w(sink, d);
  for (const auto& b : blocks) w.write_block(b);
  w.finish(content_checksum);
}

inline Frame read_frame(std::istream& source, std::size_t read_size = 64 * 1024) {
  FrameParser p;
  Frame f;
  Bytes chunk(read_size);
  for (;;) {
    source.read(reinterpret_cast<char*>(chunk.data()), static_cast<std::streamsize>(chunk.size()));
    const auto got = static_cast<std::size_t>(source.gcount());
    if (source.bad()) throw Error(Errc::io_error, "source read failed", std::nullopt, p.bytes_consumed(), Stage::read);
    p.feed(ByteView(chunk.data(), got));
    while (auto b = p.next_block()) f.blocks.push_back(std::move(*b));
    if (got < chunk.size()) break;
  }
  p.finish();
  f.descriptor = *p.descriptor();
  f.stream_checksum = p.stream_checksum();
  return f;
}

}  // namespace lzae::frame
