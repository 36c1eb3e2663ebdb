#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace puembed {

using TokenId = std::int32_t;

// Marks positions removed by min-count filtering or subsampling. Windows
// still span these positions, so original distances are preserved.
inline constexpr TokenId kSentinel = -1;

struct Vocabulary {
  std::vector<std::string> words;                       // id -> surface form
  std::unordered_map<std::string, TokenId> index_of;    // surface form -> id
  std::vector<std::uint64_t> counts;                    // id -> raw frequency
  std::uint64_t total_tokens = 0;  // stream occurrences of retained words

  std::size_t size() const { return words.size(); }
  double relative_frequency(TokenId id) const {
    return static_cast<double>(counts[static_cast<std::size_t>(id)]) /
           static_cast<double>(total_tokens);
  }
};

// Splits on whitespace and lowercases ASCII letters. Throws
// std::runtime_error naming the byte offset on invalid UTF-8.
std::vector<std::string> tokenize(std::string_view raw_text);

// Words occurring >= min_count times, ids assigned by (count desc, word asc).
// Throws if nothing survives the filter.
Vocabulary build_vocabulary(const std::vector<std::string>& tokens,
                            std::uint64_t min_count);

// Maps surface tokens to ids; words outside the vocabulary become sentinels.
std::vector<TokenId> to_token_stream(const std::vector<std::string>& tokens,
                                     const Vocabulary& vocab);

// Each occurrence of a word with relative frequency f > t is replaced by the
// sentinel with probability 1 - sqrt(t/f). Words at or below t are never
// touched.
std::vector<TokenId> subsample(std::span<const TokenId> stream,
                               const Vocabulary& vocab, double t,
                               std::uint64_t seed);

std::vector<TokenId> truncate(std::span<const TokenId> stream,
                              std::size_t max_tokens);

// TSV, one "word<TAB>count" per line, in id order.
void save_vocabulary(const Vocabulary& vocab,
                     const std::filesystem::path& path);
Vocabulary load_vocabulary(const std::filesystem::path& path);

}  // namespace puembed
