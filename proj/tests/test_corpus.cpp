#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "puembed/corpus.hpp"

using namespace puembed;

TEST_CASE("tokenize splits on whitespace and lowercases") {
  CHECK(tokenize("The cat sat.") ==
        std::vector<std::string>{"the", "cat", "sat."});
  CHECK(tokenize("").empty());
  CHECK(tokenize("A  a\tA") == std::vector<std::string>{"a", "a", "a"});
  CHECK(tokenize("x1 2,3\ny") ==
        std::vector<std::string>{"x1", "2,3", "y"});
}

TEST_CASE("tokenize rejects invalid UTF-8 with the byte offset") {
  const std::string bad = std::string("ab") + char(0xFF) + "cd";
  CHECK_THROWS_WITH_AS(tokenize(bad), doctest::Contains("offset 2"),
                       std::runtime_error);
  // Truncated multi-byte sequence at the end.
  const std::string trunc = std::string("ok ") + char(0xC3);
  CHECK_THROWS_AS(tokenize(trunc), std::runtime_error);
  // Valid multi-byte content passes.
  CHECK(tokenize("caf\xc3\xa9").size() == 1);
}

TEST_CASE("build_vocabulary filters and orders by count then word") {
  const std::vector<std::string> toks{"a", "b", "a", "c", "a", "b"};
  const auto vocab = build_vocabulary(toks, 2);
  REQUIRE(vocab.size() == 2);
  CHECK(vocab.words[0] == "a");
  CHECK(vocab.counts[0] == 3);
  CHECK(vocab.words[1] == "b");
  CHECK(vocab.counts[1] == 2);
  CHECK(vocab.total_tokens == 5);
  CHECK(vocab.index_of.count("c") == 0);
}

TEST_CASE("build_vocabulary breaks count ties lexicographically") {
  const auto vocab = build_vocabulary({"z", "y", "y", "z", "m", "m"}, 1);
  CHECK(vocab.words == std::vector<std::string>{"m", "y", "z"});
}

TEST_CASE("build_vocabulary single word") {
  const auto vocab = build_vocabulary({"x"}, 1);
  REQUIRE(vocab.size() == 1);
  CHECK(vocab.counts[0] == 1);
}

TEST_CASE("build_vocabulary errors when nothing survives") {
  CHECK_THROWS_AS(build_vocabulary({"a", "b"}, 5), std::runtime_error);
}

TEST_CASE("to_token_stream marks out-of-vocabulary words as sentinels") {
  const std::vector<std::string> toks{"a", "b", "a", "c", "a", "b"};
  const auto vocab = build_vocabulary(toks, 2);
  const auto stream = to_token_stream(toks, vocab);
  CHECK(stream == std::vector<TokenId>{0, 1, 0, kSentinel, 0, 1});
}

namespace {

Vocabulary synthetic_vocab(std::vector<std::uint64_t> counts) {
  Vocabulary v;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    v.words.push_back(std::string(1, static_cast<char>('a' + i)));
    v.index_of[v.words.back()] = static_cast<TokenId>(i);
    v.counts.push_back(counts[i]);
    v.total_tokens += counts[i];
  }
  return v;
}

}  // namespace

TEST_CASE("subsample never removes a word at or below the threshold") {
  // P(a) = 0.1 exactly equals t: removal probability is 0.
  const auto vocab = synthetic_vocab({10000, 90000});
  const std::vector<TokenId> stream(5000, 0);
  const auto out = subsample(stream, vocab, 0.1, 42);
  CHECK(std::count(out.begin(), out.end(), kSentinel) == 0);
}

TEST_CASE("subsample removal rate matches 1 - sqrt(t/f)") {
  // P(a) = 0.4 = 4t with t = 0.1, so removal probability is 0.5.
  const auto vocab = synthetic_vocab({40000, 60000});
  const std::vector<TokenId> stream(100000, 0);
  const auto out = subsample(stream, vocab, 0.1, 7);
  const auto removed = std::count(out.begin(), out.end(), kSentinel);
  const double rate = static_cast<double>(removed) / 100000.0;
  CHECK(rate == doctest::Approx(0.5).epsilon(0.02));  // 0.5 +- 0.01
  CHECK(std::abs(rate - 0.5) < 0.01);
}

TEST_CASE("subsample is deterministic and position-preserving") {
  const auto vocab = synthetic_vocab({80000, 20000});
  std::vector<TokenId> stream;
  for (int i = 0; i < 1000; ++i) stream.push_back(i % 2);
  const auto a = subsample(stream, vocab, 0.01, 123);
  const auto b = subsample(stream, vocab, 0.01, 123);
  CHECK(a == b);
  CHECK(a.size() == stream.size());
  // Surviving tokens keep their original ids.
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != kSentinel) CHECK(a[i] == stream[i]);
  }
  const auto c = subsample(stream, vocab, 0.01, 124);
  CHECK(a != c);
}

TEST_CASE("subsample preserves frequency rank order of survivors") {
  // Three words, strongly separated counts, aggressive threshold.
  const auto vocab = synthetic_vocab({600000, 300000, 100000});
  std::mt19937_64 rng(5);
  std::vector<TokenId> stream;
  for (int i = 0; i < 100000; ++i) {
    const auto r = rng() % 10;
    stream.push_back(r < 6 ? 0 : (r < 9 ? 1 : 2));
  }
  const auto out = subsample(stream, vocab, 1e-3, 11);
  CHECK(out.size() == stream.size());
  std::vector<std::size_t> kept(3, 0);
  for (const auto id : out) {
    if (id != kSentinel) kept[static_cast<std::size_t>(id)]++;
  }
  CHECK(std::count(out.begin(), out.end(), kSentinel) > 0);
  CHECK(kept[0] > kept[1]);
  CHECK(kept[1] > kept[2]);
}

TEST_CASE("subsample validates the threshold") {
  const auto vocab = synthetic_vocab({10});
  const std::vector<TokenId> stream{0};
  CHECK_THROWS_AS(subsample(stream, vocab, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(subsample(stream, vocab, 1.0, 1), std::invalid_argument);
}

TEST_CASE("truncate returns the prefix") {
  std::vector<TokenId> stream(100);
  std::iota(stream.begin(), stream.end(), 0);
  const auto head = truncate(stream, 32);
  REQUIRE(head.size() == 32);
  CHECK(head[31] == 31);
  CHECK(truncate(std::vector<TokenId>(10, 1), 100).size() == 10);
  CHECK_THROWS_AS(truncate(stream, 0), std::invalid_argument);
}
