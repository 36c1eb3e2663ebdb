#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "puembed/embedding.hpp"

namespace puembed {

struct SimilarityPair {
  std::string word1, word2;
  double gold;
};
using SimilarityDataset = std::vector<SimilarityPair>;

struct AnalogyQuestion {
  std::string a, a_star, b, b_star;
  std::size_t section;
};
struct AnalogyDataset {
  std::vector<AnalogyQuestion> questions;
  std::vector<std::string> sections;
};

// Pearson correlation of rank vectors, average ranks on ties. Throws on
// fewer than two points or zero rank variance.
double spearman(std::span<const double> xs, std::span<const double> ys);

struct SimilarityResult {
  double score;
  double coverage;  // kept / total
  std::size_t kept, total;
};

enum class SimilarityScore { kCosine, kDot };

SimilarityResult eval_similarity(const EmbeddingSet& emb,
                                 const SimilarityDataset& ds,
                                 SimilarityScore score = SimilarityScore::kCosine);

enum class AnalogyMethod { k3CosAdd, k3CosMul };

struct AnalogyOptions {
  AnalogyMethod method = AnalogyMethod::k3CosMul;
  double epsilon = 0.001;  // 3CosMul denominator guard
};

// Answer to a : a* :: b : ? over unit-normalized vectors, candidates
// excluding {a, a*, b}; ties to the lowest id. nullopt when any query word
// is out of vocabulary.
std::optional<std::size_t> solve_analogy(const EmbeddingSet& emb,
                                         const std::string& a,
                                         const std::string& a_star,
                                         const std::string& b,
                                         const AnalogyOptions& opts);

struct SectionScore {
  std::string name;
  std::size_t correct = 0, answered = 0, skipped = 0;
};
struct AnalogyResult {
  double accuracy;  // exact matches / answered
  double coverage;  // answered / total
  std::size_t correct, answered, total;
  std::vector<SectionScore> sections;
};

AnalogyResult eval_analogy(const EmbeddingSet& emb, const AnalogyDataset& ds,
                           const AnalogyOptions& opts);

// "word1<TAB>word2<TAB>score"; space and comma separation also accepted,
// '#' comment lines skipped.
SimilarityDataset load_similarity(const std::filesystem::path& path);
// Google format: ": section-name" headers, then "a a* b b*" lines.
AnalogyDataset load_analogy(const std::filesystem::path& path);

}  // namespace puembed
