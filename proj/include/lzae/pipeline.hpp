#pragma once

// Overlapped compress -> encrypt (pack) and decrypt -> decompress (unpack).
//
// pack:   reader/compressor thread --queue--> N cipher workers --reorder--> writer
// unpack: frame reader thread      --queue--> N cipher workers --reorder--> decompressor/writer
//
// The number of blocks alive anywhere in the pipeline is capped at
// queue_capacity + workers; a block's slot is returned when it is written.

#include <atomic>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <istream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "lzae/aes128.hpp"
#include "lzae/bytes.hpp"
#include "lzae/concurrency.hpp"
#include "lzae/ctr.hpp"
#include "lzae/error.hpp"
#include "lzae/frame.hpp"
#include "lzae/lz_block.hpp"
#include "lzae/xxhash32.hpp"

namespace lzae::pipeline {

using Clock = std::chrono::steady_clock;
using Duration = std::chrono::nanoseconds;

/// Per-block artificial delay, keyed by block index. Test and benchmark use only.
using DelayFn = std::function<Duration(std::uint64_t index)>;

inline DelayFn constant_delay(Duration d) {
  return [d](std::uint64_t) { return d; };
}

enum class Direction { pack, unpack };

/// Per-block stage timestamps, relative to pipeline start.
///   pack:   first = compressed, second = encrypted, written
///   unpack: first = read off the wire, second = decrypted, written
struct BlockEvent {
  std::uint64_t index = 0;
  std::optional<Duration> first, second, written;
};

class EventLog {
 public:
  enum class Point { first, second, written };

  void start(Direction dir, Clock::time_point t0) {
    std::lock_guard lk(mu_);
    dir_ = dir;
    t0_ = t0;
    events_.clear();
  }

  void mark(std::uint64_t index, Point p, Clock::time_point t = Clock::now()) {
    std::lock_guard lk(mu_);
    auto& e = events_[index];
    e.index = index;
    const Duration rel = std::chrono::duration_cast<Duration>(t - t0_);
    switch (p) {
      case Point::first: e.first = rel; break;
      case Point::second: e.second = rel; break;
      case Point::written: e.written = rel; break;
    }
  }

  std::vector<BlockEvent> events() const {
    std::lock_guard lk(mu_);
    std::vector<BlockEvent> out;
    out.reserve(events_.size());
    for (const auto& [_, e] : events_) out.push_back(e);
    return out;
  }

  Direction direction() const {
    std::lock_guard lk(mu_);
    return dir_;
  }

  /// One JSON object per block; timestamps in microseconds.
  void write_jsonl(std::ostream& os) const {
    const bool pack = direction() == Direction::pack;
    const char* k1 = pack ? "compressed_at" : "read_at";
    const char* k2 = pack ? "encrypted_at" : "decrypted_at";
    auto us = [](const std::optional<Duration>& d) -> nlohmann::json {
      if (!d) return nullptr;
      return std::chrono::duration<double, std::micro>(*d).count();
    };
    for (const auto& e : events()) {
      nlohmann::json j;
      j["direction"] = pack ? "pack" : "unpack";
      j["index"] = e.index;
      j[k1] = us(e.first);
      j[k2] = us(e.second);
      j["written_at"] = us(e.written);
      os << j.dump() << '\n';
    }
  }

 private:
  mutable std::mutex mu_;
  Direction dir_ = Direction::pack;
  Clock::time_point t0_{};
  std::map<std::uint64_t, BlockEvent> events_;
};

struct PipelineConfig {
  std::size_t chunk_size = std::size_t{4} << 20;
  frame::BlockSizeCode block_size = frame::BlockSizeCode::mib4;
  unsigned workers = 1;
  std::size_t queue_capacity = 0;  // 0 selects 2 * workers
  bool block_checksums = true;
  bool content_checksum = true;
  std::size_t table_size = lz::kDefaultTableSize;
  DelayFn synthetic_delay_compress;  // also applied to decompression in unpack
  DelayFn synthetic_delay_cipher;
  std::optional<ctr::Nonce> nonce;  // fixed nonce for reproducible frames
  EventLog* events = nullptr;

  std::size_t effective_queue_capacity() const noexcept {
    return queue_capacity ? queue_capacity : 2 * std::size_t{workers};
  }
  std::size_t residency_bound() const noexcept { return effective_queue_capacity() + workers; }

  void validate() const {
    if (workers < 1) throw Error(Errc::invalid_argument, "workers must be >= 1");
    if (chunk_size < 1) throw Error(Errc::invalid_argument, "chunk size must be >= 1");
    if (chunk_size > frame::block_size_bytes(block_size))
      throw Error(Errc::invalid_argument,
                  "chunk size " + std::to_string(chunk_size) + " exceeds max block size " +
                      std::to_string(frame::block_size_bytes(block_size)));
  }
};

struct StageTiming {
  std::uint64_t blocks = 0;
  std::uint64_t bytes_in = 0;
  std::uint64_t bytes_out = 0;
  Duration busy{0};  // summed over all threads running the stage
  Duration wall{0};  // first block start to last block end

  /// Stage speed in bytes/s of input, from busy time.
  double throughput() const noexcept {
    const double s = std::chrono::duration<double>(busy).count();
    return s > 0 ? static_cast<double>(bytes_in) / s : 0.0;
  }
  double output_throughput() const noexcept {
    const double s = std::chrono::duration<double>(busy).count();
    return s > 0 ? static_cast<double>(bytes_out) / s : 0.0;
  }
};

struct StageStats {
  Direction direction = Direction::pack;
  StageTiming read, compress, cipher, decompress, write;
  Duration total_wall{0};
  std::uint64_t plain_bytes = 0;
  std::uint64_t frame_bytes = 0;
  std::uint64_t blocks = 0;
  std::size_t peak_resident_blocks = 0;
  std::size_t residency_bound = 0;
  std::size_t queue_high_water = 0;

  /// Plaintext bytes over stored payload bytes (raw fallback blocks included).
  double compression_ratio() const noexcept {
    const auto& s = direction == Direction::pack ? compress : decompress;
    const std::uint64_t plain = direction == Direction::pack ? s.bytes_in : s.bytes_out;
    const std::uint64_t stored = direction == Direction::pack ? s.bytes_out : s.bytes_in;
    return stored ? static_cast<double>(plain) / static_cast<double>(stored) : 0.0;
  }
  double compress_throughput() const noexcept { return compress.throughput(); }
  /// Decompression speed counts plaintext produced.
  double decompress_throughput() const noexcept { return decompress.output_throughput(); }
  double cipher_throughput() const noexcept { return cipher.throughput(); }
  double end_to_end_throughput() const noexcept {
    const double s = std::chrono::duration<double>(total_wall).count();
    return s > 0 ? static_cast<double>(plain_bytes) / s : 0.0;
  }
};

namespace detail {

class StageAccumulator {
 public:
  void add(std::uint64_t in, std::uint64_t out, Clock::time_point start, Clock::time_point end) {
    std::lock_guard lk(mu_);
    ++t_.blocks;
    t_.bytes_in += in;
    t_.bytes_out += out;
    t_.busy += std::chrono::duration_cast<Duration>(end - start);
    if (!first_ || start < *first_) first_ = start;
    if (!last_ || end > *last_) last_ = end;
  }

  StageTiming result() const {
    std::lock_guard lk(mu_);
    StageTiming t = t_;
    if (first_ && last_) t.wall = std::chrono::duration_cast<Duration>(*last_ - *first_);
    return t;
  }

 private:
  mutable std::mutex mu_;
  StageTiming t_;
  std::optional<Clock::time_point> first_, last_;
};

inline void synthetic_sleep(const DelayFn& fn, std::uint64_t index) {
  if (!fn) return;
  const Duration d = fn(index);
  if (d > Duration::zero()) std::this_thread::sleep_for(d);
}

inline std::exception_ptr attribute(std::exception_ptr e, Stage stage) {
  try {
    std::rethrow_exception(e);
  } catch (const Error& err) {
    if (err.stage() == Stage::none) return std::make_exception_ptr(err.with_stage(stage));
  } catch (...) {
  }
  return e;
}

inline void mark(EventLog* log, std::uint64_t index, EventLog::Point p) {
  if (log) log->mark(index, p);
}

}  // namespace detail

inline ctr::Nonce random_nonce() {
  std::random_device rd;
  ctr::Nonce n;
  for (std::size_t i = 0; i < n.size(); i += 4) {
    const std::uint32_t v = rd();
    for (std::size_t k = 0; k < 4; ++k) n[i + k] = static_cast<std::uint8_t>(v >> (8 * k));
  }
  return n;
}

/// Splits a byte stream into consecutive chunks of `chunk_size` (last may be short).
class ChunkSource {
 public:
  ChunkSource(std::istream& in, std::size_t chunk_size) : in_(in), chunk_size_(chunk_size) {
    if (chunk_size == 0) throw Error(Errc::invalid_argument, "chunk size must be >= 1");
  }

  std::optional<frame::BlockUnit> next() {
    if (eof_) return std::nullopt;
    frame::BlockUnit unit;
    unit.index = next_index_;
    unit.payload.resize(chunk_size_);
    std::size_t got = 0;
    while (got < chunk_size_) {
      in_.read(reinterpret_cast<char*>(unit.payload.data() + got),
               static_cast<std::streamsize>(chunk_size_ - got));
      const auto n = static_cast<std::size_t>(in_.gcount());
      if (in_.bad())
        throw Error(Errc::io_error, "source read failed", std::nullopt, offset_ + got, Stage::read);
      got += n;
      if (n == 0 || in_.eof()) {
        eof_ = true;
        break;
      }
    }
    if (got == 0) return std::nullopt;
    unit.payload.resize(got);
    unit.plain_len = static_cast<std::uint32_t>(got);
    offset_ += got;
    ++next_index_;
    return unit;
  }

 private:
  std::istream& in_;
  std::size_t chunk_size_;
  std::uint64_t next_index_ = 0;
  std::uint64_t offset_ = 0;
  bool eof_ = false;
};

/// Compresses a plaintext unit in place; keeps it raw when compression does not shrink it.
inline void compress_unit(frame::BlockUnit& u, std::size_t table_size) {
  u.plain_len = static_cast<std::uint32_t>(u.payload.size());
  Bytes packed = lz::compress_block(u.payload, table_size);
  if (packed.size() < u.payload.size()) {
    u.payload = std::move(packed);
    u.is_compressed = true;
  } else {
    u.is_compressed = false;
  }
}

inline StageStats run_pack(std::istream& in, const aes::Key& key, const PipelineConfig& cfg,
                           std::ostream& out) {
  cfg.validate();
  const aes::KeySchedule ks(key);
  frame::FrameDescriptor desc;
  desc.block_checksums = cfg.block_checksums;
  desc.content_checksum = cfg.content_checksum;
  desc.block_size = cfg.block_size;
  desc.nonce = cfg.nonce ? *cfg.nonce : random_nonce();
  const std::uint64_t max_block = desc.max_block_size();

  const auto t0 = Clock::now();
  if (cfg.events) cfg.events->start(Direction::pack, t0);

  frame::FrameWriter writer(out, desc);
  BoundedQueue<frame::BlockUnit> queue(cfg.effective_queue_capacity());
  ReorderBuffer<frame::BlockUnit> reorder;
  ResidencyGate gate(cfg.residency_bound());
  ErrorLatch latch;
  detail::StageAccumulator read_acc, compress_acc, cipher_acc, write_acc;
  XxHash32 content;
  std::atomic<unsigned> live_workers{cfg.workers};
  std::atomic<std::uint64_t> produced{0};

  auto fail = [&](Stage stage) {
    latch.set(detail::attribute(std::current_exception(), stage));
    queue.abort();
    reorder.abort();
    gate.abort();
  };

  std::thread producer([&] {
    Stage stage = Stage::read;
    try {
      ChunkSource source(in, cfg.chunk_size);
      for (;;) {
        if (!gate.acquire()) return;
        stage = Stage::read;
        const auto r0 = Clock::now();
        auto unit = source.next();
        if (!unit) {
          gate.release();
          break;
        }
        const auto r1 = Clock::now();
        read_acc.add(unit->payload.size(), unit->payload.size(), r0, r1);

        stage = Stage::compress;
        const std::uint64_t plain = unit->payload.size();
        if (cfg.content_checksum) content.update(unit->payload);
        detail::synthetic_sleep(cfg.synthetic_delay_compress, unit->index);
        compress_unit(*unit, cfg.table_size);
        compress_acc.add(plain, unit->payload.size(), r1, Clock::now());
        detail::mark(cfg.events, unit->index, EventLog::Point::first);
        produced.fetch_add(1);
        if (!queue.push(std::move(*unit))) return;
      }
      queue.close();
    } catch (...) {
      fail(stage);
    }
  });

  std::vector<std::thread> workers;
  workers.reserve(cfg.workers);
  for (unsigned w = 0; w < cfg.workers; ++w) {
    workers.emplace_back([&] {
      try {
        while (auto unit = queue.pop()) {
          const auto c0 = Clock::now();
          detail::synthetic_sleep(cfg.synthetic_delay_cipher, unit->index);
          ctr::xcrypt_inplace(unit->payload, ks, desc.nonce, ctr::counter_base(unit->index, max_block));
          if (desc.block_checksums) unit->block_checksum = xxhash32(unit->payload);
          cipher_acc.add(unit->payload.size(), unit->payload.size(), c0, Clock::now());
          detail::mark(cfg.events, unit->index, EventLog::Point::second);
          const std::uint64_t index = unit->index;
          reorder.put(index, std::move(*unit));
        }
      } catch (...) {
        fail(Stage::encrypt);
      }
      if (live_workers.fetch_sub(1) == 1) reorder.close();
    });
  }

  std::uint64_t written = 0;
  try {
    for (;; ++written) {
      auto unit = reorder.take(written);
      if (!unit) break;
      const auto w0 = Clock::now();
      const std::uint64_t before = writer.bytes_written();
      writer.write_block(*unit);
      write_acc.add(unit->payload.size(), writer.bytes_written() - before, w0, Clock::now());
      detail::mark(cfg.events, unit->index, EventLog::Point::written);
      unit.reset();
      gate.release();
    }
  } catch (...) {
    fail(Stage::write);
  }

  producer.join();
  for (auto& t : workers) t.join();
  latch.rethrow_if_failed();
  if (written != produced.load())
    throw Error(Errc::invalid_argument, "pipeline lost blocks", written, std::nullopt, Stage::write);

  try {
    writer.finish(cfg.content_checksum ? std::optional<std::uint32_t>(content.digest()) : std::nullopt);
  } catch (...) {
    std::rethrow_exception(detail::attribute(std::current_exception(), Stage::write));
  }

  StageStats s;
  s.direction = Direction::pack;
  s.read = read_acc.result();
  s.compress = compress_acc.result();
  s.cipher = cipher_acc.result();
  s.write = write_acc.result();
  s.total_wall = std::chrono::duration_cast<Duration>(Clock::now() - t0);
  s.plain_bytes = s.compress.bytes_in;
  s.frame_bytes = writer.bytes_written();
  s.blocks = written;
  s.peak_resident_blocks = gate.peak();
  s.residency_bound = gate.limit();
  s.queue_high_water = queue.high_water();
  return s;
}

inline StageStats run_unpack(std::istream& in, const aes::Key& key, const PipelineConfig& cfg,
                             std::ostream& out) {
  if (cfg.workers < 1) throw Error(Errc::invalid_argument, "workers must be >= 1");
  const aes::KeySchedule ks(key);
  const auto t0 = Clock::now();
  if (cfg.events) cfg.events->start(Direction::unpack, t0);

  // Header first: no worker starts until the descriptor is complete and verified.
  frame::FrameParser parser;
  {
    Bytes header(frame::kHeaderSize);
    in.read(reinterpret_cast<char*>(header.data()), static_cast<std::streamsize>(header.size()));
    if (in.bad()) throw Error(Errc::io_error, "source read failed", std::nullopt, 0, Stage::read);
    header.resize(static_cast<std::size_t>(in.gcount()));
    try {
      parser.feed(header);
      (void)parser.next_block();
      if (!parser.header_complete()) parser.finish();
    } catch (const Error& e) {
      throw e.with_stage(Stage::read);
    }
  }
  const frame::FrameDescriptor desc = *parser.descriptor();
  const std::uint64_t max_block = desc.max_block_size();

  BoundedQueue<frame::BlockUnit> queue(cfg.effective_queue_capacity());
  ReorderBuffer<frame::BlockUnit> reorder;
  ResidencyGate gate(cfg.residency_bound());
  ErrorLatch latch;
  detail::StageAccumulator read_acc, cipher_acc, decompress_acc, write_acc;
  std::atomic<unsigned> live_workers{cfg.workers};
  std::atomic<std::uint64_t> parsed{0};
  std::optional<std::uint32_t> stored_checksum;
  std::uint64_t frame_bytes = 0;

  auto fail = [&](Stage stage) {
    latch.set(detail::attribute(std::current_exception(), stage));
    queue.abort();
    reorder.abort();
    gate.abort();
  };

  std::thread reader([&] {
    try {
      Bytes chunk(64 * 1024);
      for (;;) {
        const auto r0 = Clock::now();
        in.read(reinterpret_cast<char*>(chunk.data()), static_cast<std::streamsize>(chunk.size()));
        const auto got = static_cast<std::size_t>(in.gcount());
        if (in.bad())
          throw Error(Errc::io_error, "source read failed", std::nullopt, parser.bytes_consumed());
        parser.feed(ByteView(chunk.data(), got));
        while (auto unit = parser.next_block()) {
          if (!gate.acquire()) return;
          detail::mark(cfg.events, unit->index, EventLog::Point::first);
          read_acc.add(unit->payload.size(), unit->payload.size(), r0, Clock::now());
          parsed.fetch_add(1);
          if (!queue.push(std::move(*unit))) return;
        }
        if (got < chunk.size()) break;
      }
      parser.finish();
      stored_checksum = parser.stream_checksum();
      frame_bytes = parser.bytes_consumed();
      queue.close();
    } catch (...) {
      fail(Stage::read);
    }
  });

  std::vector<std::thread> workers;
  workers.reserve(cfg.workers);
  for (unsigned w = 0; w < cfg.workers; ++w) {
    workers.emplace_back([&] {
      try {
        while (auto unit = queue.pop()) {
          const auto c0 = Clock::now();
          detail::synthetic_sleep(cfg.synthetic_delay_cipher, unit->index);
          ctr::xcrypt_inplace(unit->payload, ks, desc.nonce, ctr::counter_base(unit->index, max_block));
          cipher_acc.add(unit->payload.size(), unit->payload.size(), c0, Clock::now());
          detail::mark(cfg.events, unit->index, EventLog::Point::second);
          const std::uint64_t index = unit->index;
          reorder.put(index, std::move(*unit));
        }
      } catch (...) {
        fail(Stage::decrypt);
      }
      if (live_workers.fetch_sub(1) == 1) reorder.close();
    });
  }

  XxHash32 content;
  std::uint64_t written = 0;
  std::uint64_t plain_bytes = 0;
  Stage stage = Stage::decompress;
  try {
    for (;; ++written) {
      auto unit = reorder.take(written);
      if (!unit) break;
      stage = Stage::decompress;
      const auto d0 = Clock::now();
      detail::synthetic_sleep(cfg.synthetic_delay_compress, unit->index);
      Bytes plain;
      if (unit->is_compressed) {
        try {
          plain = lz::decompress_block(unit->payload, max_block);
        } catch (const Error& e) {
          if (desc.block_checksums)
            throw Error(Errc::probable_key_mismatch,
                        "ciphertext checksum passed but the block does not decode (" +
                            std::string(to_string(e.code())) + ")",
                        unit->index, e.byte_offset(), Stage::decompress);
          throw Error(e.code(), e.detail() + " (data corrupt or wrong key)", unit->index,
                      e.byte_offset(), Stage::decompress);
        }
      } else {
        plain = std::move(unit->payload);
      }
      const auto d1 = Clock::now();
      decompress_acc.add(unit->is_compressed ? unit->payload.size() : plain.size(), plain.size(), d0, d1);
      if (desc.content_checksum) content.update(plain);

      stage = Stage::write;
      out.write(reinterpret_cast<const char*>(plain.data()), static_cast<std::streamsize>(plain.size()));
      if (!out) throw Error(Errc::io_error, "sink write failed", unit->index, plain_bytes);
      plain_bytes += plain.size();
      write_acc.add(plain.size(), plain.size(), d1, Clock::now());
      detail::mark(cfg.events, unit->index, EventLog::Point::written);
      unit.reset();
      gate.release();
    }
  } catch (...) {
    fail(stage);
  }

  reader.join();
  for (auto& t : workers) t.join();
  latch.rethrow_if_failed();
  if (written != parsed.load())
    throw Error(Errc::invalid_argument, "pipeline lost blocks", written, std::nullopt, Stage::write);

  out.flush();
  if (!out) throw Error(Errc::io_error, "sink flush failed", std::nullopt, plain_bytes, Stage::write);

  if (desc.content_checksum) {
    const std::uint32_t actual = content.digest();
    if (!stored_checksum || *stored_checksum != actual) {
      if (desc.block_checksums)
        throw Error(Errc::probable_key_mismatch,
                    "ciphertext checksums passed but the plaintext checksum does not match",
                    std::nullopt, std::nullopt, Stage::verify);
      throw Error(Errc::stream_checksum_mismatch, "data corrupt or wrong key", std::nullopt,
                  std::nullopt, Stage::verify);
    }
  }

  StageStats s;
  s.direction = Direction::unpack;
  s.read = read_acc.result();
  s.cipher = cipher_acc.result();
  s.decompress = decompress_acc.result();
  s.write = write_acc.result();
  s.total_wall = std::chrono::duration_cast<Duration>(Clock::now() - t0);
  s.plain_bytes = plain_bytes;
  s.frame_bytes = frame_bytes;
  s.blocks = written;
  s.peak_resident_blocks = gate.peak();
  s.residency_bound = gate.limit();
  s.queue_high_water = queue.high_water();
  return s;
}

}  // namespace lzae::pipeline
