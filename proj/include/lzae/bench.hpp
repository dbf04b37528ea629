#pragma once

// Benchmark driver: packs and unpacks a generated corpus several times,
// checks every round trip, and reports median throughputs in the shape of a
// ratio / compression speed / decompression speed table.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "lzae/corpus.hpp"
#include "lzae/error.hpp"
#include "lzae/io.hpp"
#include "lzae/pipeline.hpp"

namespace lzae::bench {

struct BenchRow {
  std::string config;
  CorpusKind corpus = CorpusKind::markov_text;
  std::uint64_t size = 0;
  unsigned workers = 1;
  double ratio = 0;             // plaintext / compressed payload
  double frame_ratio = 0;       // plaintext / whole frame
  double pack_mbps = 0;         // median, MB = 1e6 bytes of plaintext per second
  double unpack_mbps = 0;
  double compress_stage_mbps = 0;
  double cipher_stage_mbps = 0;
  double decompress_stage_mbps = 0;
  int repetitions = 0;
};

struct BenchReport {
  std::string environment;
  std::vector<BenchRow> rows;
};

inline std::string environment_note() {
  std::string cpu = "unknown CPU";
  std::ifstream info("/proc/cpuinfo");
  for (std::string line; std::getline(info, line);) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) cpu = line.substr(colon + 2);
      break;
    }
  }
  return cpu + ", " + std::to_string(std::max(1u, std::thread::hardware_concurrency())) +
         " hardware threads";
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : (v[m - 1] + v[m]) / 2;
}

/// Runs `repetitions` (>= 3) pack/unpack round trips over `data`.
/// Throws integrity_failure if any round trip differs from the input.
inline BenchRow run_bench(ByteView data, CorpusKind kind, const pipeline::PipelineConfig& cfg,
                          int repetitions, const aes::Key& key) {
  if (repetitions < 3) throw Error(Errc::invalid_argument, "benchmark needs at least 3 repetitions");
  using Clock = std::chrono::steady_clock;
  std::vector<double> pack, unpack, comp, ciph, decomp;
  BenchRow row;
  row.corpus = kind;
  row.size = data.size();
  row.workers = cfg.workers;
  row.repetitions = repetitions;
  row.config = std::string(to_string(kind)) + " " + std::to_string(data.size() >> 20) + "MiB w" +
               std::to_string(cfg.workers);

  for (int rep = 0; rep < repetitions; ++rep) {
    Bytes frame;
    frame.reserve(data.size() / 2 + 4096);
    pipeline::StageStats ps, us;
    {
      io::SpanSource src(data);
      io::VectorSink dst(frame);
      std::istream in(&src);
      std::ostream out(&dst);
      const auto t0 = Clock::now();
      ps = pipeline::run_pack(in, key, cfg, out);
      pack.push_back(static_cast<double>(data.size()) / 1e6 /
                     std::chrono::duration<double>(Clock::now() - t0).count());
    }
    Bytes restored;
    restored.reserve(data.size());
    {
      io::SpanSource src(frame);
      io::VectorSink dst(restored);
      std::istream in(&src);
      std::ostream out(&dst);
      const auto t0 = Clock::now();
      us = pipeline::run_unpack(in, key, cfg, out);
      unpack.push_back(static_cast<double>(data.size()) / 1e6 /
                       std::chrono::duration<double>(Clock::now() - t0).count());
    }
    if (restored.size() != data.size() || !std::equal(restored.begin(), restored.end(), data.begin()))
      throw Error(Errc::integrity_failure,
                  row.config + ": round trip differs from input in repetition " + std::to_string(rep));
    row.ratio = ps.compression_ratio();
    row.frame_ratio = frame.empty() ? 0 : static_cast<double>(data.size()) / static_cast<double>(frame.size());
    comp.push_back(ps.compress_throughput() / 1e6);
    ciph.push_back(ps.cipher_throughput() / 1e6);
    decomp.push_back(us.decompress_throughput() / 1e6);
  }
  row.pack_mbps = median(pack);
  row.unpack_mbps = median(unpack);
  row.compress_stage_mbps = median(comp);
  row.cipher_stage_mbps = median(ciph);
  row.decompress_stage_mbps = median(decomp);
  return row;
}

inline BenchRow run_bench(const Corpus& corpus, const pipeline::PipelineConfig& cfg, int repetitions,
                          const aes::Key& key = aes::Key{}) {
  const Bytes data = gen_corpus(corpus);
  return run_bench(data, corpus.kind, cfg, repetitions, key);
}

inline void write_table(std::ostream& os, const BenchReport& report) {
  os << "Environment: " << report.environment << "\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %8s %14s %14s %12s %12s %12s\n", "Name", "Ratio",
                "C. speed MB/s", "D. speed MB/s", "LZ MB/s", "AES MB/s", "unLZ MB/s");
  os << line;
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%-28s %8.3f %14.0f %14.0f %12.0f %12.0f %12.0f\n",
                  r.config.c_str(), r.ratio, r.pack_mbps, r.unpack_mbps, r.compress_stage_mbps,
                  r.cipher_stage_mbps, r.decompress_stage_mbps);
    os << line;
  }
}

inline nlohmann::json to_json(const BenchRow& r) {
  return {{"config", r.config},
          {"corpus", std::string(to_string(r.corpus))},
          {"size", r.size},
          {"workers", r.workers},
          {"repetitions", r.repetitions},
          {"ratio", r.ratio},
          {"frame_ratio", r.frame_ratio},
          {"pack_mbps", r.pack_mbps},
          {"unpack_mbps", r.unpack_mbps},
          {"compress_stage_mbps", r.compress_stage_mbps},
          {"cipher_stage_mbps", r.cipher_stage_mbps},
          {"decompress_stage_mbps", r.decompress_stage_mbps}};
}

/// Line-delimited JSON: one environment record, then one record per row.
inline void write_jsonl(std::ostream& os, const BenchReport& report) {
  os << nlohmann::json{{"environment", report.environment}}.dump() << '\n';
  for (const auto& r : report.rows) os << to_json(r).dump() << '\n';
}

}  // namespace lzae::bench
