#pragma once

// std::streambuf adapters for running the pipeline over memory and
// synthetic streams.

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <streambuf>

#include "lzae/bytes.hpp"
#include "lzae/xxhash32.hpp"

namespace lzae::io {

/// Read-only view over existing bytes; no copy.
class SpanSource : public std::streambuf {
 public:
  explicit SpanSource(ByteView data) {
    char* p = const_cast<char*>(reinterpret_cast<const char*>(data.data()));
    setg(p, p, p + data.size());
  }
};

/// Appends everything written to a byte vector.
class VectorSink : public std::streambuf {
 public:
  explicit VectorSink(Bytes& out) : out_(out) {}

 protected:
  std::streamsize xsputn(const char* s, std::streamsize n) override {
    out_.insert(out_.end(), reinterpret_cast<const std::uint8_t*>(s),
                reinterpret_cast<const std::uint8_t*>(s) + n);
    return n;
  }
  int_type overflow(int_type ch) override {
    if (!traits_type::eq_int_type(ch, traits_type::eof()))
      out_.push_back(static_cast<std::uint8_t>(ch));
    return traits_type::not_eof(ch);
  }

 private:
  Bytes& out_;
};

/// Produces `size` zero bytes without holding them in memory.
class ZeroSource : public std::streambuf {
 public:
  explicit ZeroSource(std::uint64_t size) : remaining_(size) {}

 protected:
  std::streamsize xsgetn(char* s, std::streamsize n) override {
    const auto k = static_cast<std::streamsize>(std::min<std::uint64_t>(remaining_, static_cast<std::uint64_t>(n)));
    std::memset(s, 0, static_cast<std::size_t>(k));
    remaining_ -= static_cast<std::uint64_t>(k);
    return k;
  }
  int_type underflow() override {
    if (remaining_ == 0) return traits_type::eof();
    setg(&zero_, &zero_, &zero_ + 1);
    --remaining_;
    return 0;
  }

 private:
  std::uint64_t remaining_;
  char zero_ = 0;
};

/// Discards output, keeping a byte count and an xxHash32 of everything written.
class HashingSink : public std::streambuf {
 public:
  std::uint64_t size() const noexcept { return size_; }
  std::uint32_t digest() const noexcept { return hash_.digest(); }

 protected:
  std::streamsize xsputn(const char* s, std::streamsize n) override {
    hash_.update(ByteView(reinterpret_cast<const std::uint8_t*>(s), static_cast<std::size_t>(n)));
    size_ += static_cast<std::uint64_t>(n);
    return n;
  }
  int_type overflow(int_type ch) override {
    if (!traits_type::eq_int_type(ch, traits_type::eof())) {
      const std::uint8_t b = static_cast<std::uint8_t>(ch);
      hash_.update(ByteView(&b, 1));
      ++size_;
    }
    return traits_type::not_eof(ch);
  }

 private:
  XxHash32 hash_;
  std::uint64_t size_ = 0;
};

}  // namespace lzae::io
