// lzae: compress-then-encrypt stream tool.
//
// Exit codes: 0 success, 1 usage, 2 format/corruption, 3 probable key
// mismatch, 4 I/O.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "lzae/bench.hpp"
#include "lzae/error.hpp"
#include "lzae/key.hpp"
#include "lzae/pipeline.hpp"
#include "lzae/selftest.hpp"

namespace {

enum ExitCode : int { kOk = 0, kUsage = 1, kFormat = 2, kKeyMismatch = 3, kIo = 4 };

int exit_code_for(lzae::Errc e) {
  switch (e) {
    case lzae::Errc::invalid_argument:
    case lzae::Errc::size_limit:
      return kUsage;
    case lzae::Errc::probable_key_mismatch:
      return kKeyMismatch;
    case lzae::Errc::io_error:
      return kIo;
    default:
      return kFormat;
  }
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct StreamOptions {
  std::string input = "-";
  std::string output = "-";
  std::optional<std::string> key_hex, key_file, key_env;
  std::string chunk_size = "4M";
  unsigned workers = 0;
  std::size_t queue_cap = 0;
  bool no_block_checksums = false;
  bool no_content_checksum = false;
  bool stats = false;
  std::optional<std::string> events;
};

std::size_t parse_size(const std::string& text) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos);
  } catch (const std::exception&) {
    throw UsageError("bad size '" + text + "'");
  }
  std::string suffix = text.substr(pos);
  if (suffix == "" || suffix == "B") return v;
  if (suffix == "K" || suffix == "k" || suffix == "KiB") return v << 10;
  if (suffix == "M" || suffix == "m" || suffix == "MiB") return v << 20;
  throw UsageError("bad size suffix in '" + text + "' (use K or M)");
}

unsigned default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return std::clamp(hw == 0 ? 1u : hw, 1u, 8u);
}

lzae::aes::Key resolve_key(const StreamOptions& o) {
  const int sources = (o.key_hex ? 1 : 0) + (o.key_file ? 1 : 0) + (o.key_env ? 1 : 0);
  if (sources != 1) throw UsageError("exactly one of --key-hex, --key-file, --key-env is required");
  try {
    if (o.key_hex) return lzae::key_from_hex(*o.key_hex);
    if (o.key_file) {
      std::ifstream f(*o.key_file, std::ios::binary);
      if (!f) throw IoFailure("cannot open key file " + *o.key_file);
      const std::string contents((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
      return lzae::key_from_file_contents(contents);
    }
    const char* value = std::getenv(o.key_env->c_str());
    if (!value) throw UsageError("environment variable " + *o.key_env + " is not set");
    return lzae::key_from_hex(value);
  } catch (const lzae::Error& e) {
    throw UsageError(e.detail());
  }
}

lzae::pipeline::PipelineConfig make_config(const StreamOptions& o) {
  lzae::pipeline::PipelineConfig cfg;
  cfg.chunk_size = parse_size(o.chunk_size);
  if (cfg.chunk_size == 0) throw UsageError("chunk size must be positive");
  if (cfg.chunk_size > lzae::frame::block_size_bytes(lzae::frame::BlockSizeCode::mib8))
    throw UsageError("chunk size above 8 MiB");
  cfg.block_size = cfg.chunk_size <= lzae::frame::block_size_bytes(lzae::frame::BlockSizeCode::mib4)
                       ? lzae::frame::BlockSizeCode::mib4
                       : lzae::frame::BlockSizeCode::mib8;
  cfg.workers = o.workers ? o.workers : default_workers();
  cfg.queue_capacity = o.queue_cap;
  cfg.block_checksums = !o.no_block_checksums;
  cfg.content_checksum = !o.no_content_checksum;
  return cfg;
}

void print_stats(const lzae::pipeline::StageStats& s) {
  auto mbps = [](double bps) { return bps / 1e6; };
  std::fprintf(stderr,
               "%s: %llu bytes plain, %llu bytes framed, %llu blocks, ratio %.3f\n"
               "  compress %.1f MB/s, decompress %.1f MB/s, cipher %.1f MB/s/worker, end-to-end %.1f MB/s\n"
               "  wall %.3f s, peak resident blocks %zu (bound %zu)\n",
               s.direction == lzae::pipeline::Direction::pack ? "pack" : "unpack",
               static_cast<unsigned long long>(s.plain_bytes),
               static_cast<unsigned long long>(s.frame_bytes),
               static_cast<unsigned long long>(s.blocks), s.compression_ratio(),
               mbps(s.compress_throughput()), mbps(s.decompress_throughput()),
               mbps(s.cipher_throughput()), mbps(s.end_to_end_throughput()),
               std::chrono::duration<double>(s.total_wall).count(), s.peak_resident_blocks,
               s.residency_bound);
}

int run_stream(const StreamOptions& o, bool pack) {
  const auto key = resolve_key(o);
  auto cfg = make_config(o);
  lzae::pipeline::EventLog events;
  if (o.events) cfg.events = &events;

  std::ifstream in_file;
  std::istream* in = &std::cin;
  if (o.input != "-") {
    in_file.open(o.input, std::ios::binary);
    if (!in_file) throw IoFailure("cannot open input " + o.input);
    in = &in_file;
  }
  std::ofstream out_file;
  std::ostream* out = &std::cout;
  if (o.output != "-") {
    out_file.open(o.output, std::ios::binary | std::ios::trunc);
    if (!out_file) throw IoFailure("cannot open output " + o.output);
    out = &out_file;
  }

  auto write_events = [&] {
    if (!o.events) return;
    std::ofstream ev(*o.events);
    if (!ev) throw IoFailure("cannot open event log " + *o.events);
    events.write_jsonl(ev);
  };

  lzae::pipeline::StageStats stats;
  try {
    stats = pack ? lzae::pipeline::run_pack(*in, key, cfg, *out)
                 : lzae::pipeline::run_unpack(*in, key, cfg, *out);
  } catch (...) {
    try {
      write_events();
    } catch (...) {
    }
    throw;
  }
  out->flush();
  if (!*out) throw IoFailure("write to output failed");
  write_events();
  if (o.stats) print_stats(stats);
  return kOk;
}

int run_selftest() {
  for (const auto& check : lzae::selftest_checks()) {
    std::string failure;
    try {
      failure = check.run();
    } catch (const std::exception& e) {
      failure = e.what();
    }
    if (!failure.empty()) {
      std::cerr << "selftest: FAILED " << check.name << ": " << failure << "\n";
      return kFormat;
    }
    std::cout << "ok " << check.name << "\n";
  }
  std::cout << "selftest passed\n";
  return kOk;
}

struct BenchOptions {
  std::vector<std::string> corpora = {"zeros", "markov_text", "uniform_random"};
  std::string size = "16M";
  std::uint64_t seed = 7;
  int reps = 3;
  std::vector<unsigned> workers = {1};
  std::string chunk_size = "4M";
  std::optional<std::string> report, jsonl;
};

int run_bench_cmd(const BenchOptions& o) {
  lzae::bench::BenchReport report;
  report.environment = lzae::bench::environment_note();
  const std::size_t size = parse_size(o.size);
  for (const auto& name : o.corpora) {
    const auto kind = lzae::bench::parse_corpus_kind(name);
    if (!kind) throw UsageError("unknown corpus '" + name + "'");
    const auto data = lzae::bench::gen_corpus({*kind, size, o.seed});
    for (unsigned w : o.workers) {
      StreamOptions so;
      so.chunk_size = o.chunk_size;
      so.workers = w;
      auto cfg = make_config(so);
      report.rows.push_back(lzae::bench::run_bench(data, *kind, cfg, o.reps, lzae::aes::Key{}));
    }
  }
  lzae::bench::write_table(std::cout, report);
  if (o.report) {
    std::ofstream f(*o.report);
    if (!f) throw IoFailure("cannot open report " + *o.report);
    lzae::bench::write_table(f, report);
  }
  if (o.jsonl) {
    std::ofstream f(*o.jsonl);
    if (!f) throw IoFailure("cannot open " + *o.jsonl);
    lzae::bench::write_jsonl(f, report);
  }
  return kOk;
}

void add_stream_options(CLI::App* cmd, StreamOptions& o) {
  cmd->add_option("input", o.input, "Input file ('-' or omitted for stdin)");
  cmd->add_option("--out,-o", o.output, "Output file ('-' or omitted for stdout)");
  cmd->add_option("--key-hex", o.key_hex, "Key as 32 hex characters");
  cmd->add_option("--key-file", o.key_file, "File holding the key (32 hex characters or 16 raw bytes)");
  cmd->add_option("--key-env", o.key_env, "Environment variable holding the key as hex");
  cmd->add_option("--chunk-size", o.chunk_size, "Plaintext chunk size, e.g. 64K, 4M (max 8M)");
  cmd->add_option("--workers", o.workers, "Cipher workers (default: hardware threads, max 8)")
      ->check(CLI::Range(1u, 1024u));
  cmd->add_option("--queue-cap", o.queue_cap, "Cipher queue capacity (default 2 x workers)")
      ->check(CLI::Range(std::size_t{1}, std::size_t{1} << 20));
  cmd->add_flag("--no-block-checksums", o.no_block_checksums, "Omit per-block checksums");
  cmd->add_flag("--no-content-checksum", o.no_content_checksum, "Omit the plaintext checksum");
  cmd->add_flag("--stats", o.stats, "Print stage statistics to stderr");
  cmd->add_option("--events", o.events, "Write per-block stage timestamps (JSON lines)");
}

}  // namespace

int main(int argc, char** argv) {
  std::ios::sync_with_stdio(false);

  CLI::App app{"lzae: LZ4-format compression with AES-128-CTR encryption, pipelined"};
  app.require_subcommand(1);

  StreamOptions pack_opts, unpack_opts;
  auto* pack = app.add_subcommand("pack", "Compress and encrypt");
  add_stream_options(pack, pack_opts);
  auto* unpack = app.add_subcommand("unpack", "Decrypt and decompress");
  add_stream_options(unpack, unpack_opts);

  BenchOptions bench_opts;
  auto* bench = app.add_subcommand("bench", "Ratio and throughput report");
  bench->add_option("--corpus", bench_opts.corpora, "zeros, uniform_random, markov_text");
  bench->add_option("--size", bench_opts.size, "Corpus size, e.g. 16M");
  bench->add_option("--seed", bench_opts.seed, "Corpus seed");
  bench->add_option("--reps", bench_opts.reps, "Repetitions (>= 3)")->check(CLI::Range(3, 1000));
  bench->add_option("--workers", bench_opts.workers, "Worker counts to measure");
  bench->add_option("--chunk-size", bench_opts.chunk_size, "Chunk size");
  bench->add_option("--report", bench_opts.report, "Write the text table here too");
  bench->add_option("--jsonl", bench_opts.jsonl, "Write JSON-lines records here");

  auto* selftest = app.add_subcommand("selftest", "Run built-in known-answer checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*pack) return run_stream(pack_opts, true);
    if (*unpack) return run_stream(unpack_opts, false);
    if (*bench) return run_bench_cmd(bench_opts);
    if (*selftest) return run_selftest();
  } catch (const UsageError& e) {
    std::cerr << "lzae: " << e.what() << "\n";
    return kUsage;
  } catch (const IoFailure& e) {
    std::cerr << "lzae: " << e.what() << "\n";
    return kIo;
  } catch (const lzae::Error& e) {
    std::cerr << "lzae: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "lzae: " << e.what() << "\n";
    return kFormat;
  }
  return kUsage;
}
