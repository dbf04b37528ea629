#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "lzae/bytes.hpp"
#include "lzae/detail/markov_source_text.hpp"
#include "lzae/error.hpp"

namespace lzae::bench {

enum class CorpusKind { zeros, uniform_random, markov_text };

constexpr std::string_view to_string(CorpusKind k) noexcept {
  switch (k) {
    case CorpusKind::zeros: return "zeros";
    case CorpusKind::uniform_random: return "uniform_random";
    case CorpusKind::markov_text: return "markov_text";
  }
  return "?";
}

inline std::optional<CorpusKind> parse_corpus_kind(std::string_view s) {
  for (auto k : {CorpusKind::zeros, CorpusKind::uniform_random, CorpusKind::markov_text})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

struct Corpus {
  CorpusKind kind = CorpusKind::markov_text;
  std::uint64_t size = 0;
  std::uint64_t seed = 0;
};

inline constexpr std::uint64_t kMaxCorpusSize = std::uint64_t{1} << 30;

/// Order-2 byte transition table: for each (prev2, prev1) context, the
/// successor bytes seen in the training text with their counts.
class MarkovTable {
 public:
  struct Successor {
    std::uint8_t byte;
    std::uint32_t count;
  };

  explicit MarkovTable(std::string_view text) {
    const std::size_t n = text.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto a = static_cast<std::uint8_t>(text[i]);
      const auto b = static_cast<std::uint8_t>(text[(i + 1) % n]);
      const auto c = static_cast<std::uint8_t>(text[(i + 2) % n]);
      auto& row = rows_[context(a, b)];
      bool found = false;
      for (auto& s : row.successors)
        if (s.byte == c) {
          ++s.count;
          found = true;
          break;
        }
      if (!found) row.successors.push_back({c, 1});
      ++row.total;
    }
    start_ = {static_cast<std::uint8_t>(text[0]), static_cast<std::uint8_t>(text[1 % n])};
  }

  static const MarkovTable& shipped() {
    static const MarkovTable table(detail::kMarkovSourceText);
    return table;
  }

  /// Successor of (a, b) picked by `draw` in [0, total).
  std::uint8_t next(std::uint8_t a, std::uint8_t b, std::uint64_t draw) const {
    const auto& row = rows_[context(a, b)];
    std::uint64_t r = draw % row.total;
    for (const auto& s : row.successors) {
      if (r < s.count) return s.byte;
      r -= s.count;
    }
    return row.successors.back().byte;
  }

  std::array<std::uint8_t, 2> start() const noexcept { return start_; }

 private:
  struct Row {
    std::vector<Successor> successors;
    std::uint32_t total = 0;
  };
  static std::size_t context(std::uint8_t a, std::uint8_t b) noexcept { return (std::size_t{a} << 8) | b; }

  std::vector<Row> rows_ = std::vector<Row>(65536);
  std::array<std::uint8_t, 2> start_{};
};

inline Bytes gen_corpus(const Corpus& c) {
  if (c.size > kMaxCorpusSize)
    throw Error(Errc::size_limit, "corpus size " + std::to_string(c.size) + " exceeds 1 GiB");
  Bytes out(static_cast<std::size_t>(c.size), 0);
  switch (c.kind) {
    case CorpusKind::zeros:
      break;
    case CorpusKind::uniform_random: {
      std::mt19937_64 rng(c.seed);
      std::size_t i = 0;
      while (i < out.size()) {
        std::uint64_t v = rng();
        for (int k = 0; k < 8 && i < out.size(); ++k, v >>= 8) out[i++] = static_cast<std::uint8_t>(v);
      }
      break;
    }
    case CorpusKind::markov_text: {
      const auto& table = MarkovTable::shipped();
      std::mt19937_64 rng(c.seed);
      auto [a, b] = table.start();
      for (auto& byte : out) {
        const std::uint8_t next = table.next(a, b, rng());
        byte = next;
        a = b;
        b = next;
      }
      break;
    }
  }
  return out;
}

}  // namespace lzae::bench
