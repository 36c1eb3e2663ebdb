#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "puembed/embedding.hpp"

using namespace puembed;

namespace {

EmbeddingSet random_embeddings(std::mt19937_64& rng, std::size_t m,
                               std::size_t k) {
  EmbeddingSet emb;
  emb.dim = k;
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    emb.words.push_back("w" + std::to_string(i));
    emb.index_of[emb.words.back()] = i;
    for (std::size_t t = 0; t < k; ++t) emb.vectors.push_back(unit(rng));
  }
  return emb;
}

struct TempFile {
  std::filesystem::path path;
  explicit TempFile(const std::string& name)
      : path(std::filesystem::temp_directory_path() / name) {}
  ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("combine adds the word and context vectors and drops biases") {
  FactorModel model(3, 3, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    model.w_aug(i, 0) = 1.0 + static_cast<double>(i);
    model.w_aug(i, 1) = -2.0;
    model.h_aug(i, 0) = 10.0 * static_cast<double>(i);
    model.h_aug(i, 1) = 0.5;
    model.bias_w(i) = 99.0;  // must not leak into the embeddings
    model.bias_h(i) = -99.0;
  }
  Vocabulary vocab;
  vocab.words = {"aa", "bb", "cc"};
  for (std::size_t i = 0; i < 3; ++i) {
    vocab.index_of[vocab.words[i]] = static_cast<TokenId>(i);
    vocab.counts.push_back(1);
  }
  const auto emb = combine(model, vocab);
  REQUIRE(emb.size() == 3);
  REQUIRE(emb.dim == 2);
  CHECK(emb.words == vocab.words);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(emb.vector(i)[0] == 1.0 + static_cast<double>(i) + 10.0 * i);
    CHECK(emb.vector(i)[1] == -1.5);
  }

  FactorModel rect(3, 4, 2);
  CHECK_THROWS_AS(combine(rect, vocab), std::invalid_argument);
}

TEST_CASE("cosine is 1 on itself, scale invariant, 0 against a zero vector") {
  EmbeddingSet emb;
  emb.dim = 3;
  emb.words = {"a", "b", "c", "z"};
  emb.vectors = {1, 2, 3,       // a
                 2, 4, 6,       // b = 2a
                 -1, -2, -3,    // c = -a
                 0, 0, 0};      // z
  for (std::size_t i = 0; i < 4; ++i) emb.index_of[emb.words[i]] = i;
  CHECK(cosine(emb, 0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine(emb, 0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cosine(emb, 0, 2) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(cosine(emb, 0, 3) == 0.0);
  CHECK(cosine(emb, 3, 3) == 0.0);
  CHECK(dot(emb, 0, 1) == doctest::Approx(28.0).epsilon(1e-12));
}

TEST_CASE("nearest matches a brute-force scan with deterministic ties") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 10; ++trial) {
    const auto emb = random_embeddings(rng, 40, 5);
    std::vector<double> query(5);
    for (auto& v : query) v = std::uniform_real_distribution<double>(-1, 1)(rng);
    const std::unordered_set<std::size_t> exclude{3, 17};

    auto brute = [&] {
      std::vector<std::pair<double, std::size_t>> scored;
      EmbeddingSet probe = emb;
      probe.words.push_back("query");
      probe.index_of["query"] = probe.size();
      probe.vectors.insert(probe.vectors.end(), query.begin(), query.end());
      const std::size_t qid = probe.size() - 1;
      for (std::size_t i = 0; i < emb.size(); ++i) {
        if (exclude.count(i)) continue;
        scored.emplace_back(-cosine(probe, qid, i), i);
      }
      std::sort(scored.begin(), scored.end());
      std::vector<std::size_t> ids;
      for (std::size_t i = 0; i < 7 && i < scored.size(); ++i) {
        ids.push_back(scored[i].second);
      }
      return ids;
    }();
    CHECK(nearest(emb, query, 7, exclude) == brute);
  }
}

TEST_CASE("nearest breaks exact ties by ascending id") {
  EmbeddingSet emb;
  emb.dim = 2;
  emb.words = {"a", "b", "c"};
  emb.vectors = {1, 0, 2, 0, 3, 0};  // all identical directions
  for (std::size_t i = 0; i < 3; ++i) emb.index_of[emb.words[i]] = i;
  const std::vector<double> query{5.0, 0.0};
  CHECK(nearest(emb, query, 3, {}) == std::vector<std::size_t>{0, 1, 2});
  CHECK(nearest(emb, query, 2, {0}) == std::vector<std::size_t>{1, 2});
}

TEST_CASE("text round trip is bit-exact, with and without header") {
  std::mt19937_64 rng(62);
  auto emb = random_embeddings(rng, 25, 6);
  emb.vectors[0] = 0.1;  // not exactly representable
  emb.vectors[1] = -1.0 / 3.0;
  emb.vectors[2] = 1e-300;
  emb.vectors[3] = 12345678.987654321;

  for (const bool header : {true, false}) {
    TempFile tmp(header ? "puembed_emb_h.txt" : "puembed_emb_nh.txt");
    save_text(emb, tmp.path, header);
    const auto back = load_text(tmp.path);
    REQUIRE(back.size() == emb.size());
    REQUIRE(back.dim == emb.dim);
    CHECK(back.words == emb.words);
    CHECK(back.vectors == emb.vectors);  // shortest round-trip rendering
    CHECK(back.index_of.at("w7") == 7);
  }
}

TEST_CASE("load_text reports malformed rows") {
  TempFile tmp("puembed_emb_bad.txt");
  {
    std::ofstream out(tmp.path);
    out << "2 3\n";
    out << "good 1 2 3\n";
    out << "short 1 2\n";
  }
  CHECK_THROWS_WITH_AS(load_text(tmp.path), doctest::Contains(":3:"),
                       std::runtime_error);
}
