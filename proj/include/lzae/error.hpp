#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lzae {

enum class Errc {
  invalid_argument,
  size_limit,

  // LZ4 block decoding; byte_offset points into the compressed block.
  malformed_truncated,
  malformed_zero_offset,
  malformed_offset_out_of_range,
  malformed_output_overflow,

  // Container framing.
  not_our_format,
  unsupported_version,
  corrupt_header,
  truncated_frame,
  missing_eos,
  trailing_data,
  block_too_large,
  block_checksum_mismatch,
  stream_checksum_mismatch,
  frame_too_large,

  probable_key_mismatch,
  io_error,
  integrity_failure,
};

enum class Stage { none, read, compress, encrypt, decrypt, decompress, write, verify };

constexpr std::string_view to_string(Stage s) noexcept {
  switch (s) {
    case Stage::none: return "none";
    case Stage::read: return "read";
    case Stage::compress: return "compress";
    case Stage::encrypt: return "encrypt";
    case Stage::decrypt: return "decrypt";
    case Stage::decompress: return "decompress";
    case Stage::write: return "write";
    case Stage::verify: return "verify";
  }
  return "?";
}

constexpr std::string_view to_string(Errc e) noexcept {
  switch (e) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::size_limit: return "size limit exceeded";
    case Errc::malformed_truncated: return "malformed block: truncated";
    case Errc::malformed_zero_offset: return "malformed block: zero match offset";
    case Errc::malformed_offset_out_of_range: return "malformed block: match offset beyond output";
    case Errc::malformed_output_overflow: return "malformed block: output exceeds limit";
    case Errc::not_our_format: return "not an lzae frame";
    case Errc::unsupported_version: return "unsupported frame version";
    case Errc::corrupt_header: return "corrupt frame header";
    case Errc::truncated_frame: return "truncated frame";
    case Errc::missing_eos: return "missing end-of-stream marker";
    case Errc::trailing_data: return "trailing data after frame";
    case Errc::block_too_large: return "block exceeds maximum block size";
    case Errc::block_checksum_mismatch: return "block checksum mismatch";
    case Errc::stream_checksum_mismatch: return "stream checksum mismatch";
    case Errc::frame_too_large: return "frame too large for counter space";
    case Errc::probable_key_mismatch: return "probable key mismatch";
    case Errc::io_error: return "I/O error";
    case Errc::integrity_failure: return "benchmark integrity failure";
  }
  return "unknown error";
}

constexpr bool is_malformed_block(Errc e) noexcept {
  return e == Errc::malformed_truncated || e == Errc::malformed_zero_offset ||
         e == Errc::malformed_offset_out_of_range || e == Errc::malformed_output_overflow;
}

/// Exception type for every failure raised by the library. Carries the
/// failing pipeline stage and, where meaningful, a block index and byte offset.
class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string detail, std::optional<std::uint64_t> block_index = std::nullopt,
        std::optional<std::uint64_t> byte_offset = std::nullopt, Stage stage = Stage::none)
      : std::runtime_error(format(code, detail, block_index, byte_offset, stage)),
        code_(code),
        detail_(std::move(detail)),
        block_index_(block_index),
        byte_offset_(byte_offset),
        stage_(stage) {}

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }
  std::optional<std::uint64_t> block_index() const noexcept { return block_index_; }
  std::optional<std::uint64_t> byte_offset() const noexcept { return byte_offset_; }
  Stage stage() const noexcept { return stage_; }

  Error with_stage(Stage s) const { return Error(code_, detail_, block_index_, byte_offset_, s); }

  Error with_block(std::uint64_t index) const {
    return Error(code_, detail_, index, byte_offset_, stage_);
  }

 private:
  static std::string format(Errc code, const std::string& detail,
                            std::optional<std::uint64_t> block_index,
                            std::optional<std::uint64_t> byte_offset, Stage stage) {
    std::string msg;
    if (stage != Stage::none) {
      msg += "[";
      msg += to_string(stage);
      msg += "] ";
    }
    msg += to_string(code);
    if (block_index) msg += " (block " + std::to_string(*block_index) + ")";
    if (byte_offset) msg += " at byte " + std::to_string(*byte_offset);
    if (!detail.empty()) msg += ": " + detail;
    return msg;
  }

  Errc code_;
  std::string detail_;
  std::optional<std::uint64_t> block_index_;
  std::optional<std::uint64_t> byte_offset_;
  Stage stage_;
};

}  // namespace lzae
