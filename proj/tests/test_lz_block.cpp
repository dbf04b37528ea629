#include <gtest/gtest.h>

#include <random>

#include "lzae/corpus.hpp"
#include "lzae/lz_block.hpp"
#include "lzae/lz_reference.hpp"
#include "test_util.hpp"

using namespace lzae;
namespace ref = lzae::lz::reference;

namespace {

Errc decode_error(const Bytes& block, std::size_t max_output, std::optional<std::uint64_t>* offset = nullptr) {
  try {
    lz::decompress_block(block, max_output);
  } catch (const Error& e) {
    if (offset) *offset = e.byte_offset();
    return e.code();
  }
  ADD_FAILURE() << "expected a malformed-block error";
  return Errc::invalid_argument;
}

}  // namespace

TEST(LzBlock, EmptyInputGivesEmptyOutput) {
  EXPECT_TRUE(lz::compress_block({}).empty());
  EXPECT_TRUE(lz::decompress_block({}, 0).empty());
  EXPECT_TRUE(lz::decompress_block({}, 100).empty());
}

TEST(LzBlock, ThousandZerosCompressSmallAndRoundTrip) {
  const Bytes zeros(1024, 0);
  const Bytes block = lz::compress_block(zeros);
  EXPECT_LE(block.size(), 24u);
  EXPECT_EQ(lz::decompress_block(block, zeros.size()), zeros);
  EXPECT_EQ(ref::reference_decompress_naive(block), zeros);
}

TEST(LzBlock, MarkovTextRatioNearTableOne) {
  const Bytes text = bench::gen_corpus({bench::CorpusKind::markov_text, 1 << 20, 7});
  const Bytes block = lz::compress_block(text);
  const double ratio = static_cast<double>(text.size()) / static_cast<double>(block.size());
  EXPECT_NEAR(ratio, 2.084, 0.5);
  EXPECT_EQ(lz::decompress_block(block, text.size()), text);
}

TEST(LzBlock, RandomBytesEncodeAsLiterals) {
  std::mt19937_64 rng(64);
  const Bytes data = test::random_bytes(rng, 64);
  const Bytes block = lz::compress_block(data);
  EXPECT_LE(block.size(), lz::worst_case_bound(64));
  const auto seqs = ref::parse_sequences(block);
  ASSERT_EQ(seqs.size(), 1u);
  EXPECT_FALSE(seqs[0].match.has_value());
  EXPECT_EQ(seqs[0].literals, data);
}

TEST(LzBlock, WorstCaseBoundFormula) {
  EXPECT_EQ(lz::worst_case_bound(0), 16u);
  EXPECT_EQ(lz::worst_case_bound(255), 272u);
  EXPECT_EQ(lz::worst_case_bound(1'000'000), 1'003'937u);
}

TEST(LzBlock, ZeroOffsetIsMalformed) {
  const Bytes block = {0x10, 'a', 0x00, 0x00, 0x00};
  std::optional<std::uint64_t> at;
  EXPECT_EQ(decode_error(block, 100, &at), Errc::malformed_zero_offset);
  EXPECT_EQ(at, 2u);
}

TEST(LzBlock, DistinctMalformedErrorsCarryPositions) {
  std::optional<std::uint64_t> at;
  // offset 5 with only one byte produced
  EXPECT_EQ(decode_error({0x10, 'a', 0x05, 0x00, 0x00}, 100, &at), Errc::malformed_offset_out_of_range);
  EXPECT_EQ(at, 2u);
  // literal length extension missing
  EXPECT_EQ(decode_error({0xF0}, 100, &at), Errc::malformed_truncated);
  EXPECT_EQ(at, 1u);
  // literal run longer than the block
  EXPECT_EQ(decode_error({0x50, 'a', 'b'}, 100, &at), Errc::malformed_truncated);
  // offset cut to one byte
  EXPECT_EQ(decode_error({0x10, 'a', 0x01}, 100, &at), Errc::malformed_truncated);
  EXPECT_EQ(at, 2u);
  // 1 literal + 19-byte match into a 10-byte limit
  EXPECT_EQ(decode_error({0x1F, 'a', 0x01, 0x00, 0x00, 0x00}, 10, &at), Errc::malformed_output_overflow);
  EXPECT_EQ(at, 0u);
  // literals alone over the limit
  EXPECT_EQ(decode_error({0x30, 'a', 'b', 'c'}, 2), Errc::malformed_output_overflow);
  // match-length extension missing
  EXPECT_EQ(decode_error({0x1F, 'a', 0x01, 0x00}, 100), Errc::malformed_truncated);
}

TEST(LzBlock, MalformedDetectionMatchesErrcClassifier) {
  for (Errc e : {Errc::malformed_truncated, Errc::malformed_zero_offset, Errc::malformed_offset_out_of_range,
                 Errc::malformed_output_overflow})
    EXPECT_TRUE(is_malformed_block(e));
  EXPECT_FALSE(is_malformed_block(Errc::corrupt_header));
}

TEST(LzBlock, ValidStreamWithinLimitDecodes) {
  const Bytes block = {0x1F, 'a', 0x01, 0x00, 0x00, 0x50, 'b', 'c', 'd', 'e', 'f'};
  const Bytes out = lz::decompress_block(block, 25);
  EXPECT_EQ(out.size(), 25u);
  EXPECT_EQ(std::string(out.begin(), out.begin() + 20), std::string(20, 'a'));
  EXPECT_THROW(lz::decompress_block(block, 24), Error);
}

TEST(LzBlock, TableSizePreconditions) {
  const Bytes data(100, 1);
  EXPECT_THROW(lz::compress_block(data, 128), Error);
  EXPECT_THROW(lz::compress_block(data, 1000), Error);
  EXPECT_NO_THROW(lz::compress_block(data, 256));
}

TEST(LzBlock, OversizedInputIsSizeError) {
  // Only the length is inspected before the size check fires.
  const std::uint8_t byte = 0;
  const ByteView huge(&byte, lz::kMaxInputSize + 1);
  try {
    lz::compress_block(huge);
    FAIL() << "expected size error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::size_limit);
  }
}

TEST(LzBlock, ReferenceOracleSelfRoundTrip) {
  std::string abab;
  for (int i = 0; i < 32; ++i) abab += "ab";
  const Bytes in(abab.begin(), abab.end());
  const Bytes block = ref::reference_compress_naive(in);
  EXPECT_LT(block.size(), in.size());
  EXPECT_EQ(lz::decompress_block(block, in.size()), in);
  EXPECT_TRUE(ref::reference_compress_naive({}).empty());
}

TEST(LzBlock, ReferenceOracleBlocksDecodeUnderFastDecoder) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    SCOPED_TRACE("seed " + std::to_string(seed));
    const Bytes in = test::fuzz_input(static_cast<int>(seed % 4), 1024, seed);
    const Bytes block = ref::reference_compress_naive(in);
    ASSERT_EQ(lz::decompress_block(block, in.size()), in);
  }
}

TEST(LzBlock, RoundTripAndBoundOverStructuredFuzz) {
  std::mt19937_64 sizes(2024);
  for (std::uint64_t seed = 0; seed < 600; ++seed) {
    SCOPED_TRACE("seed " + std::to_string(seed));
    const std::size_t n = seed < 40 ? seed : sizes() % (seed % 10 == 0 ? 300000 : 5000);
    const Bytes in = test::fuzz_input(static_cast<int>(seed % 4), n, seed);
    const Bytes block = lz::compress_block(in);
    ASSERT_LE(block.size(), lz::worst_case_bound(n));
    ASSERT_EQ(lz::decompress_block(block, n), in);
    ASSERT_EQ(ref::reference_decompress_naive(block), in);
  }
}

TEST(LzBlock, RoundTripAtEightMiB) {
  for (int kind = 0; kind < 4; ++kind) {
    const Bytes in = test::fuzz_input(kind, 8 << 20, 99);
    const Bytes block = lz::compress_block(in);
    ASSERT_LE(block.size(), lz::worst_case_bound(in.size()));
    ASSERT_EQ(lz::decompress_block(block, in.size()), in) << "kind " << kind;
  }
}

TEST(LzBlock, SequenceInvariantsHold) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Bytes in = test::fuzz_input(static_cast<int>(seed % 4), 20000 + seed, seed);
    const auto seqs = ref::parse_sequences(lz::compress_block(in));
    ASSERT_FALSE(seqs.empty());
    std::size_t produced = 0;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      produced += seqs[i].literals.size();
      if (!seqs[i].match) {
        ASSERT_EQ(i + 1, seqs.size()) << "only the terminal sequence lacks a match";
        continue;
      }
      const auto& m = *seqs[i].match;
      ASSERT_GE(m.offset, 1u);
      ASSERT_LE(m.offset, produced);
      ASSERT_LE(m.offset, lz::kMaxOffset);
      ASSERT_GE(m.length, lz::kMinMatch);
      ASSERT_LE(produced, in.size() - lz::kMatchFindLimit) << "match starts too close to the end";
      produced += m.length;
      ASSERT_LE(produced, in.size() - lz::kLastLiterals) << "match reaches into the last literals";
    }
    ASSERT_GE(seqs.back().literals.size(), std::min(in.size(), lz::kLastLiterals));
  }
}

TEST(LzBlock, TableSizeChangesOnlySize) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const Bytes in = test::fuzz_input(static_cast<int>(seed % 4), 70000, seed);
    for (std::size_t table : {256u, 4096u, 65536u})
      ASSERT_EQ(lz::decompress_block(lz::compress_block(in, table), in.size()), in) << table;
  }
}

TEST(LzBlock, Deterministic) {
  const Bytes in = test::fuzz_input(3, 200000, 5);
  for (std::size_t table : {256u, 4096u, 65536u})
    EXPECT_EQ(lz::compress_block(in, table), lz::compress_block(in, table));
}

TEST(LzBlock, LongLiteralAndMatchLengthExtensions) {
  std::mt19937_64 rng(3);
  Bytes in = test::random_bytes(rng, 1000);
  in.insert(in.end(), 5000, 'z');
  const Bytes tail = test::random_bytes(rng, 300);
  in.insert(in.end(), tail.begin(), tail.end());
  const Bytes block = lz::compress_block(in);
  EXPECT_EQ(lz::decompress_block(block, in.size()), in);
  EXPECT_EQ(ref::reference_decompress_naive(block), in);
}

TEST(LzBlock, ExternalDecoderInterop) {
#ifdef LZAE_HAVE_LIBLZ4
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    SCOPED_TRACE("seed " + std::to_string(seed));
    const Bytes in = test::fuzz_input(static_cast<int>(seed % 4), 1 + seed * 97 % 100000, seed);
    const Bytes block = lz::compress_block(in);
    Bytes out(in.size());
    const int n = LZ4_decompress_safe(reinterpret_cast<const char*>(block.data()),
                                      reinterpret_cast<char*>(out.data()), static_cast<int>(block.size()),
                                      static_cast<int>(out.size()));
    ASSERT_EQ(n, static_cast<int>(in.size()));
    ASSERT_EQ(out, in);

    Bytes theirs(lz::worst_case_bound(in.size()));
    const int m = LZ4_compress_default(reinterpret_cast<const char*>(in.data()),
                                       reinterpret_cast<char*>(theirs.data()), static_cast<int>(in.size()),
                                       static_cast<int>(theirs.size()));
    ASSERT_GT(m, 0);
    theirs.resize(static_cast<std::size_t>(m));
    ASSERT_EQ(lz::decompress_block(theirs, in.size()), in);
  }
#else
  GTEST_SKIP() << "liblz4 not found; interop check skipped";
#endif
}
