#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "puembed/corpus.hpp"
#include "puembed/factorizer.hpp"

namespace puembed {

struct EmbeddingSet {
  std::vector<std::string> words;
  std::unordered_map<std::string, std::size_t> index_of;
  std::size_t dim = 0;
  std::vector<double> vectors;  // row-major, words.size() x dim

  std::span<const double> vector(std::size_t id) const {
    return {vectors.data() + id * dim, dim};
  }
  std::size_t size() const { return words.size(); }
};

// u_i = w_i + h_i; biases discarded. Requires a shared vocabulary (m == n).
EmbeddingSet combine(const FactorModel& model, const Vocabulary& vocab);

// Text format: optional "m k" header, then "word v1 ... vk" per line.
// Values rendered with shortest round-trip precision.
void save_text(const EmbeddingSet& emb, const std::filesystem::path& path,
               bool header = true);
EmbeddingSet load_text(const std::filesystem::path& path);

// Zero-norm vectors compare as similarity 0.
double cosine(const EmbeddingSet& emb, std::size_t a, std::size_t b);
double dot(const EmbeddingSet& emb, std::size_t a, std::size_t b);

// Top-n ids by descending cosine against query, ties by ascending id.
std::vector<std::size_t> nearest(const EmbeddingSet& emb,
                                 std::span<const double> query,
                                 std::size_t top_n,
                                 const std::unordered_set<std::size_t>& exclude);

}  // namespace puembed
