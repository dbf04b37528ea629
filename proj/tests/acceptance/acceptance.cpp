// Acceptance runner: evaluates criteria 1-9 and prints one PASS/FAIL line per
// criterion. Exit status is non-zero if any criterion fails.
//
//   lzae_acceptance                       run all criteria
//   lzae_acceptance --only 4,6            run a subset
//   lzae_acceptance --write-golden PATH   regenerate the golden frame fixture

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "../frozen.hpp"
#include "../test_util.hpp"
#include "lzae/aes128.hpp"
#include "lzae/bench.hpp"
#include "lzae/key.hpp"
#include "lzae/lz_block.hpp"
#include "lzae/lz_reference.hpp"

using namespace lzae;
using namespace std::chrono_literals;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void fail(const std::string& why) {
    if (pass) detail.clear();
    pass = false;
    detail += (detail.empty() ? "" : "; ") + why;
  }
  void note(const std::string& what) {
    if (pass) detail += (detail.empty() ? "" : "; ") + what;
  }
};

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Outcome ac1_aes_known_answer() {
  Outcome o;
  const auto t0 = Clock::now();
  aes::Block plain;
  for (int i = 0; i < 16; ++i) plain[i] = static_cast<std::uint8_t>(0x11 * i);
  const auto c = to_hex(aes::encrypt_block(plain, aes::expand_key(key_from_hex("000102030405060708090a0b0c0d0e0f"))));
  if (c != "69c4e0d86a7b0430d8cdb78070b4c55a") o.fail("appendix C ciphertext " + c);
  const auto zero_rk1 = to_hex(aes::expand_key(aes::Key{})[1]);
  if (zero_rk1.substr(0, 8) != "62636363") o.fail("zero-key round key 1 " + zero_rk1);
  const auto a_rk1 = to_hex(aes::expand_key(key_from_hex("2b7e151628aed2a6abf7158809cf4f3c"))[1]);
  if (a_rk1 != "a0fafe1788542cb123a339392a6c7605") o.fail("appendix A round key 1 " + a_rk1);
  const double secs = since(t0);
  if (secs >= 1.0) o.fail("runtime " + fmt("%.3f s", secs));
  o.note("ciphertext " + c + ", runtime " + fmt("%.4f s", secs));
  return o;
}

Outcome ac2_round_trip_fuzz() {
  Outcome o;
  const auto t0 = Clock::now();
  const std::size_t small[] = {0, 1, 15, 16, 17, 65535};
  const std::size_t large[] = {std::size_t{4} << 20, (std::size_t{4} << 20) + 1};
  const int kinds[] = {0, 1, 2};  // zeros, uniform random, markov text
  pipeline::PipelineConfig cfg;
  cfg.workers = 2;
  cfg.nonce = test::test_nonce();
  int failures = 0, large_count = 0;
  const int total = 10000;
  for (int i = 0; i < total; ++i) {
    std::size_t n;
    int kind;
    if (i % 50 == 0) {
      n = large[(i / 50) % 2];
      kind = kinds[(i / 100) % 3];
      ++large_count;
    } else {
      n = small[i % 6];
      kind = kinds[(i / 6) % 3];
    }
    const auto seed = static_cast<std::uint64_t>(i);
    const Bytes in = test::fuzz_input(kind, n, seed);
    bool ok = lz::decompress_block(lz::compress_block(in), n) == in;
    ok = ok && test::unpack(test::pack(in, test::test_key(), cfg), test::test_key(), cfg) == in;
    if (!ok && failures++ < 5) o.fail("seed " + std::to_string(seed) + " size " + std::to_string(n));
  }
  const double secs = since(t0);
  if (failures) o.fail(std::to_string(failures) + " failures");
  if (secs >= 300) o.fail("runtime " + fmt("%.1f s", secs));
  o.note(std::to_string(total) + " inputs (" + std::to_string(large_count) + " of 4 MiB / 4 MiB+1), 0 failures, " +
         fmt("%.1f s", secs));
  return o;
}

Outcome ac3_interop() {
  Outcome o;
  std::mt19937_64 rng(3);
  int oracle_ok = 0, external_ok = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = i % 100 == 0 ? (1u << 20) : rng() % 70000;
    const Bytes in = test::fuzz_input(i % 4, n, static_cast<std::uint64_t>(i));
    const Bytes block = lz::compress_block(in);
    try {
      if (lz::reference::reference_decompress_naive(block) == in)
        ++oracle_ok;
      else
        o.fail("oracle mismatch at input " + std::to_string(i));
    } catch (const std::exception& e) {
      o.fail("oracle rejected input " + std::to_string(i) + ": " + e.what());
    }
#ifdef LZAE_HAVE_LIBLZ4
    Bytes out(n + 1);
    const int got = LZ4_decompress_safe(reinterpret_cast<const char*>(block.data()), reinterpret_cast<char*>(out.data()),
                                        static_cast<int>(block.size()), static_cast<int>(out.size()));
    out.resize(got < 0 ? 0 : static_cast<std::size_t>(got));
    if (got == static_cast<int>(n) && out == in)
      ++external_ok;
    else
      o.fail("liblz4 mismatch at input " + std::to_string(i));
#endif
  }
  o.note(std::to_string(oracle_ok) + "/1000 blocks decode under the naive oracle");
#ifdef LZAE_HAVE_LIBLZ4
  o.note(std::to_string(external_ok) + "/1000 blocks cross-decode under liblz4");
#else
  o.note("external reference decoder absent: liblz4 sub-check SKIPPED");
#endif
  return o;
}

Outcome ac4_ratio() {
  Outcome o;
  const Bytes text = bench::gen_corpus({bench::CorpusKind::markov_text, 1 << 20, 7});
  const Bytes block = lz::compress_block(text);
  const double ratio = static_cast<double>(text.size()) / static_cast<double>(block.size());
  if (ratio < 1.8) o.fail("ratio " + fmt("%.4f", ratio) + " below 1.8");
  if (std::abs(ratio - test::kFrozenMarkovRatio) > 0.01 * test::kFrozenMarkovRatio)
    o.fail("ratio " + fmt("%.4f", ratio) + " outside 1% of frozen " + fmt("%.4f", test::kFrozenMarkovRatio));
  o.note("ratio " + fmt("%.4f", ratio) + " (frozen " + fmt("%.4f", test::kFrozenMarkovRatio) + ", table value 2.084)");
  return o;
}

Outcome ac5_overlap() {
  Outcome o;
  const auto t0 = Clock::now();
  double worst_wall = 0;
  for (int run = 0; run < 3; ++run) {
    auto cfg = test::small_config(4096, 1);
    cfg.synthetic_delay_compress = pipeline::constant_delay(5ms);
    cfg.synthetic_delay_cipher = pipeline::constant_delay(5ms);
    pipeline::StageStats s;
    test::pack(test::fuzz_input(2, 16 * 4096, 5), test::test_key(), cfg, &s);
    const double wall = std::chrono::duration<double>(s.total_wall).count();
    worst_wall = std::max(worst_wall, wall);
    if (s.blocks != 16) o.fail("expected 16 blocks");
  }
  if (worst_wall > 0.7 * 0.160) o.fail("equal-delay wall " + fmt("%.1f ms", worst_wall * 1e3) + " > 112 ms");

  double worst_ratio = 1e9;
  for (int run = 0; run < 3; ++run) {
    auto cfg = test::small_config(4096, 4);
    cfg.synthetic_delay_compress = pipeline::constant_delay(5ms);
    cfg.synthetic_delay_cipher = pipeline::constant_delay(20ms);
    pipeline::StageStats s;
    test::pack(test::fuzz_input(2, 64 * 4096, 5), test::test_key(), cfg, &s);
    worst_ratio = std::min(worst_ratio, s.end_to_end_throughput() / s.compress_throughput());
  }
  if (worst_ratio < 0.8) o.fail("end-to-end / compress-stage " + fmt("%.3f", worst_ratio) + " < 0.8");
  const double secs = since(t0);
  if (secs >= 10) o.fail("runtime " + fmt("%.1f s", secs));
  o.note("equal delays: worst wall " + fmt("%.1f ms", worst_wall * 1e3) + " (limit 112); cipher=4x compress, 4 workers: " +
         "worst end-to-end/compress " + fmt("%.3f", worst_ratio) + " (floor 0.8); " + fmt("%.1f s", secs));
  return o;
}

Bytes golden_frame(unsigned workers, std::size_t queue) {
  return test::pack(test::golden_input(), test::test_key(), test::golden_config(workers, queue));
}

Outcome ac6_determinism(const std::string& golden_path) {
  Outcome o;
  const Bytes in = test::fuzz_input(2, 10 << 20, 6);
  auto cfg = test::small_config(256 * 1024, 1);
  const Bytes reference = test::pack(in, test::test_key(), cfg);
  int frames = 0;
  for (unsigned w : {1u, 2u, 8u})
    for (std::size_t q : {1u, 4u}) {
      cfg.workers = w;
      cfg.queue_capacity = q;
      ++frames;
      if (test::pack(in, test::test_key(), cfg) != reference)
        o.fail("frame differs at workers " + std::to_string(w) + " queue " + std::to_string(q));
    }
  std::ifstream f(golden_path, std::ios::binary);
  if (!f) {
    o.fail("golden fixture missing: " + golden_path);
    return o;
  }
  const Bytes golden((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  for (unsigned w : {1u, 2u, 8u})
    for (int run = 0; run < 2; ++run)
      if (golden_frame(w, 0) != golden) o.fail("golden frame differs at workers " + std::to_string(w));
  o.note(std::to_string(frames) + " frames identical over workers {1,2,8} x queue {1,4}; golden fixture (" +
         std::to_string(golden.size()) + " bytes) reproduced");
  return o;
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(LZAE_CLI_PATH) + " " + args).c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome ac7_corruption_and_keys() {
  Outcome o;
  const auto cfg = test::small_config(16 * 1024, 3);
  const Bytes in = test::fuzz_input(2, 20 * 16 * 1024, 7);
  const Bytes wire = test::pack(in, test::test_key(), cfg);
  std::istringstream is(std::string(wire.begin(), wire.end()));
  const auto f = frame::read_frame(is);
  std::mt19937_64 rng(7);
  int detected = 0;
  for (int t = 0; t < 100; ++t) {
    const std::size_t target = rng() % f.blocks.size();
    std::size_t at = frame::kHeaderSize;
    for (std::size_t i = 0; i < target; ++i) at += 8 + f.blocks[i].payload.size();
    at += 4 + rng() % f.blocks[target].payload.size();
    Bytes bad = wire;
    bad[at] ^= static_cast<std::uint8_t>(1u << (rng() % 8));
    try {
      test::unpack(bad, test::test_key(), cfg);
      o.fail("flip " + std::to_string(t) + " not detected");
    } catch (const Error& e) {
      if (e.code() == Errc::block_checksum_mismatch && e.block_index() == target)
        ++detected;
      else
        o.fail("flip " + std::to_string(t) + " reported as: " + e.what());
    }
  }

  const auto dir = std::filesystem::temp_directory_path() / ("lzae_ac7_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  {
    std::ofstream p(dir / "plain", std::ios::binary);
    const Bytes plain = test::fuzz_input(2, 256 * 1024, 70);
    p.write(reinterpret_cast<const char*>(plain.data()), static_cast<std::streamsize>(plain.size()));
  }
  const std::string key = to_hex(test::test_key());
  if (run_cli("pack " + (dir / "plain").string() + " --key-hex " + key + " --out " + (dir / "frame").string()) != 0)
    o.fail("CLI pack failed");
  int exit3 = 0;
  for (int t = 0; t < 100; ++t) {
    Bytes k(16);
    for (auto& b : k) b = static_cast<std::uint8_t>(rng());
    const int rc = run_cli("unpack " + (dir / "frame").string() + " --key-hex " + to_hex(k) + " --out " +
                           (dir / "out").string() + " 2>/dev/null");
    if (rc == 3)
      ++exit3;
    else
      o.fail("wrong key " + to_hex(k) + " gave exit " + std::to_string(rc));
  }
  std::filesystem::remove_all(dir);
  o.note(std::to_string(detected) + "/100 bit flips named the right block; " + std::to_string(exit3) +
         "/100 wrong keys exited 3");
  return o;
}

Outcome ac8_direction() {
  Outcome o;
  const Bytes data = bench::gen_corpus({bench::CorpusKind::markov_text, 100 << 20, 8});
  pipeline::PipelineConfig cfg;
  cfg.workers = 1;
  const auto row = bench::run_bench(data, bench::CorpusKind::markov_text, cfg, 3, test::test_key());
  if (!(row.unpack_mbps >= row.pack_mbps))
    o.fail("unpack " + fmt("%.1f", row.unpack_mbps) + " MB/s < pack " + fmt("%.1f", row.pack_mbps) + " MB/s");
  o.note("markov_text 100 MiB, 1 worker, median of 3: pack " + fmt("%.1f", row.pack_mbps) + " MB/s, unpack " +
         fmt("%.1f", row.unpack_mbps) + " MB/s, ratio " + fmt("%.3f", row.ratio) + " [" + bench::environment_note() + "]");
  return o;
}

std::uint64_t peak_rss_kib() {
  std::ifstream st("/proc/self/status");
  for (std::string line; std::getline(st, line);)
    if (line.rfind("VmHWM:", 0) == 0) return std::stoull(line.substr(6));
  return 0;
}

Outcome ac9_bounded_memory() {
  Outcome o;
  const std::uint64_t size = std::uint64_t{1} << 30;
  pipeline::PipelineConfig cfg;
  cfg.workers = 2;
  Bytes wire;
  pipeline::StageStats ps, us;
  {
    io::ZeroSource src(size);
    io::VectorSink dst(wire);
    std::istream in(&src);
    std::ostream out(&dst);
    ps = pipeline::run_pack(in, test::test_key(), cfg, out);
  }
  io::SpanSource src(wire);
  io::HashingSink sink;
  {
    std::istream in(&src);
    std::ostream out(&sink);
    us = pipeline::run_unpack(in, test::test_key(), cfg, out);
  }
  XxHash32 expect;
  const Bytes zeros(1 << 20, 0);
  for (int i = 0; i < 1024; ++i) expect.update(zeros);
  if (sink.size() != size || sink.digest() != expect.digest()) o.fail("1 GiB round trip mismatch");
  const std::size_t bound = cfg.residency_bound();
  if (ps.peak_resident_blocks > bound)
    o.fail("pack peak " + std::to_string(ps.peak_resident_blocks) + " > bound " + std::to_string(bound));
  if (us.peak_resident_blocks > bound)
    o.fail("unpack peak " + std::to_string(us.peak_resident_blocks) + " > bound " + std::to_string(bound));
  const std::uint64_t rss_mib = peak_rss_kib() / 1024;

  frame::FrameParser parser;
  parser.feed(ByteView(wire.data(), 15));
  if (parser.next_block() || parser.header_complete() || parser.blocks_parsed() != 0 || parser.bytes_hashed() != 0)
    o.fail("parser acted on a 15-byte header");

  o.note("1 GiB zeros: " + std::to_string(ps.blocks) + " blocks, frame " + std::to_string(wire.size()) +
         " bytes, peak resident blocks pack " + std::to_string(ps.peak_resident_blocks) + " / unpack " +
         std::to_string(us.peak_resident_blocks) + " (bound " + std::to_string(bound) + "), process peak RSS " +
         std::to_string(rss_mib) + " MiB; 15-byte header emitted no block");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lzae acceptance runner"};
  std::string write_golden;
  std::string golden = test::golden_path();
  std::vector<int> only;
  app.add_option("--write-golden", write_golden, "Write the golden frame fixture to this path and exit");
  app.add_option("--golden", golden, "Golden frame fixture to compare against");
  app.add_option("--only", only, "Criteria to run")->delimiter(',');
  CLI11_PARSE(app, argc, argv);

  if (!write_golden.empty()) {
    const Bytes frame = golden_frame(1, 0);
    std::ofstream f(write_golden, std::ios::binary);
    f.write(reinterpret_cast<const char*>(frame.data()), static_cast<std::streamsize>(frame.size()));
    std::cout << "wrote " << frame.size() << " bytes to " << write_golden << "\n";
    return f ? 0 : 1;
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"AC1 AES known-answer", ac1_aes_known_answer},
      {"AC2 codec and pipeline round-trip fuzz", ac2_round_trip_fuzz},
      {"AC3 wire-format interop", ac3_interop},
      {"AC4 ratio reproduction", ac4_ratio},
      {"AC5 pipeline overlap", ac5_overlap},
      {"AC6 determinism across parallelism", [&] { return ac6_determinism(golden); }},
      {"AC7 corruption and key handling", ac7_corruption_and_keys},
      {"AC8 directional speed", ac8_direction},
      {"AC9 bounded memory and header gate", ac9_bounded_memory},
  };

  const std::set<int> selected(only.begin(), only.end());
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!selected.empty() && !selected.count(static_cast<int>(i + 1))) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << criteria[i].first << ": " << o.detail << std::endl;
  }
  return failed ? 1 : 0;
}
