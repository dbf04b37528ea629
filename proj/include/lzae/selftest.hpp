#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lzae/aes128.hpp"
#include "lzae/corpus.hpp"
#include "lzae/frame.hpp"
#include "lzae/io.hpp"
#include "lzae/key.hpp"
#include "lzae/pipeline.hpp"
#include "lzae/xxhash32.hpp"

namespace lzae {

struct SelfTestCheck {
  std::string name;
  std::function<std::string()> run;  // empty string on success, failure detail otherwise
};

inline std::vector<SelfTestCheck> selftest_checks() {
  std::vector<SelfTestCheck> checks;

  checks.push_back({"aes-known-answer", [] () -> std::string {
    aes::Key key;
    aes::Block plain;
    for (int i = 0; i < 16; ++i) {
      key[i] = static_cast<std::uint8_t>(i);
      plain[i] = static_cast<std::uint8_t>(i * 0x11);
    }
    const auto got = to_hex(aes::encrypt_block(plain, aes::expand_key(key)));
    if (got != "69c4e0d86a7b0430d8cdb78070b4c55a") return "ciphertext " + got;
    const auto k = key_from_hex("2b7e151628aed2a6abf7158809cf4f3c");
    const auto rk1 = to_hex(aes::expand_key(k)[1]);
    if (rk1 != "a0fafe1788542cb123a339392a6c7605") return "round key 1 " + rk1;
    return {};
  }});

  checks.push_back({"descriptor-round-trip", [] () -> std::string {
    frame::FrameDescriptor d;
    d.block_checksums = false;
    d.content_checksum = false;
    d.block_size = frame::BlockSizeCode::mib4;
    const auto bytes = frame::encode_descriptor(d);
    if (bytes[15] != 0xfe) return "header check byte " + to_hex(ByteView(&bytes[15], 1));
    for (std::uint8_t i = 0; i < 8; ++i) d.nonce[i] = static_cast<std::uint8_t>(0xA0 + i);
    d.block_checksums = true;
    if (frame::decode_descriptor(frame::encode_descriptor(d)) != d) return "decoded descriptor differs";
    return {};
  }});

  checks.push_back({"checksum-constants", [] () -> std::string {
    if (xxhash32({}) != 0x02CC5D05u) return "xxh32(\"\")";
    if (xxhash32(as_bytes("abc")) != 0x32D153FFu) return "xxh32(\"abc\")";
    return {};
  }});

  checks.push_back({"pack-unpack-1MiB", [] () -> std::string {
    const Bytes data = bench::gen_corpus({bench::CorpusKind::markov_text, 1 << 20, 7});
    const aes::Key key = key_from_hex("000102030405060708090a0b0c0d0e0f");
    pipeline::PipelineConfig cfg;
    cfg.chunk_size = 256 << 10;
    cfg.block_size = frame::BlockSizeCode::kib256;
    cfg.workers = 2;
    cfg.nonce = ctr::Nonce{1, 2, 3, 4, 5, 6, 7, 8};
    Bytes frame_bytes, restored;
    {
      io::SpanSource src(data);
      io::VectorSink dst(frame_bytes);
      std::istream in(&src);
      std::ostream out(&dst);
      pipeline::run_pack(in, key, cfg, out);
    }
    {
      io::SpanSource src(frame_bytes);
      io::VectorSink dst(restored);
      std::istream in(&src);
      std::ostream out(&dst);
      pipeline::run_unpack(in, key, cfg, out);
    }
    if (restored != data) return "round trip output differs";
    return {};
  }});

  return checks;
}

}  // namespace lzae
