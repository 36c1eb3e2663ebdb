#include "puembed/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace puembed {

namespace {

// Returns the byte offset of the first invalid UTF-8 sequence, or npos.
std::size_t find_invalid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len;
    if (b0 < 0x80) {
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      if (b0 < 0xC2) return i;  // overlong
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      if (b0 > 0xF4) return i;
      len = 4;
    } else {
      return i;
    }
    if (i + len > s.size()) return i;
    for (std::size_t j = 1; j < len; ++j) {
      const auto b = static_cast<unsigned char>(s[i + j]);
      if ((b & 0xC0) != 0x80) return i;
    }
    if (len == 3) {
      const auto b1 = static_cast<unsigned char>(s[i + 1]);
      if (b0 == 0xE0 && b1 < 0xA0) return i;           // overlong
      if (b0 == 0xED && b1 >= 0xA0) return i;          // surrogate
    } else if (len == 4) {
      const auto b1 = static_cast<unsigned char>(s[i + 1]);
      if (b0 == 0xF0 && b1 < 0x90) return i;           // overlong
      if (b0 == 0xF4 && b1 >= 0x90) return i;          // > U+10FFFF
    }
    i += len;
  }
  return std::string_view::npos;
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' ||
         c == '\f';
}

char lower_ascii(char c) {
  return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

// Uniform double in [0, 1) from the top 53 bits; portable across
// standard-library implementations.
double next_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view raw_text) {
  if (const auto bad = find_invalid_utf8(raw_text);
      bad != std::string_view::npos) {
    throw std::runtime_error("invalid UTF-8 at byte offset " +
                             std::to_string(bad));
  }
  std::vector<std::string> tokens;
  std::string current;
  for (const char c : raw_text) {
    if (is_space(c)) {
      if (!current.empty()) {
        tokens.push_back(std::move(current));
        current.clear();
      }
    } else {
      current.push_back(lower_ascii(c));
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

Vocabulary build_vocabulary(const std::vector<std::string>& tokens,
                            std::uint64_t min_count) {
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
  std::unordered_map<std::string, std::uint64_t> freq;
  for (const auto& tok : tokens) ++freq[tok];

  std::vector<std::pair<std::string, std::uint64_t>> retained;
  for (auto& [word, count] : freq) {
    if (count >= min_count) retained.emplace_back(word, count);
  }
  if (retained.empty()) {
    throw std::runtime_error("no word occurs at least " +
                             std::to_string(min_count) + " times");
  }
  std::sort(retained.begin(), retained.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  Vocabulary vocab;
  vocab.words.reserve(retained.size());
  vocab.counts.reserve(retained.size());
  for (auto& [word, count] : retained) {
    vocab.index_of.emplace(word, static_cast<TokenId>(vocab.words.size()));
    vocab.words.push_back(std::move(word));
    vocab.counts.push_back(count);
    vocab.total_tokens += count;
  }
  return vocab;
}

std::vector<TokenId> to_token_stream(const std::vector<std::string>& tokens,
                                     const Vocabulary& vocab) {
  std::vector<TokenId> stream;
  stream.reserve(tokens.size());
  for (const auto& tok : tokens) {
    const auto it = vocab.index_of.find(tok);
    stream.push_back(it == vocab.index_of.end() ? kSentinel : it->second);
  }
  return stream;
}

std::vector<TokenId> subsample(std::span<const TokenId> stream,
                               const Vocabulary& vocab, double t,
                               std::uint64_t seed) {
  if (!(t > 0.0 && t < 1.0)) {
    throw std::invalid_argument("subsample threshold must be in (0, 1)");
  }
  // Removal probability per word id; <= 0 means keep always.
  std::vector<double> removal(vocab.size(), 0.0);
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    const double f = vocab.relative_frequency(static_cast<TokenId>(id));
    if (f > t) removal[id] = 1.0 - std::sqrt(t / f);
  }

  std::seed_seq seq{seed, static_cast<std::uint64_t>(0x5355'4253u)};  // "SUBS"
  std::mt19937_64 rng(seq);

  std::vector<TokenId> out(stream.begin(), stream.end());
  for (auto& id : out) {
    if (id == kSentinel) continue;
    const double p = removal[static_cast<std::size_t>(id)];
    if (p > 0.0 && next_unit(rng) < p) id = kSentinel;
  }
  return out;
}

std::vector<TokenId> truncate(std::span<const TokenId> stream,
                              std::size_t max_tokens) {
  if (max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");
  const std::size_t n = std::min(stream.size(), max_tokens);
  return {stream.begin(), stream.begin() + static_cast<std::ptrdiff_t>(n)};
}

void save_vocabulary(const Vocabulary& vocab,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  for (std::size_t id = 0; id < vocab.size(); ++id) {
    out << vocab.words[id] << '\t' << vocab.counts[id] << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Vocabulary vocab;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected word<TAB>count");
    }
    std::string word = line.substr(0, tab);
    const std::uint64_t count = std::stoull(line.substr(tab + 1));
    vocab.index_of.emplace(word, static_cast<TokenId>(vocab.words.size()));
    vocab.words.push_back(std::move(word));
    vocab.counts.push_back(count);
    vocab.total_tokens += count;
  }
  return vocab;
}

}  // namespace puembed
