#include "puembed/cooccurrence.hpp"

#include <algorithm>
#include <stdexcept>

namespace puembed {

namespace {

// (word, context) packed as a sortable 64-bit key.
std::uint64_t pack(std::uint32_t w, std::uint32_t c) {
  return (static_cast<std::uint64_t>(w) << 32) | c;
}

// Sorted, duplicate-free accumulator merged chunk-at-a-time so memory stays
// O(nnz) + one chunk regardless of stream length.
class PairAccumulator {
 public:
  explicit PairAccumulator(std::size_t chunk_capacity)
      : chunk_capacity_(chunk_capacity) {
    chunk_.reserve(chunk_capacity);
  }

  void add(std::uint64_t key, double weight) {
    chunk_.emplace_back(key, weight);
    if (chunk_.size() >= chunk_capacity_) flush();
  }

  std::vector<std::pair<std::uint64_t, double>> finish() {
    flush();
    return std::move(base_);
  }

 private:
  void flush() {
    if (chunk_.empty()) return;
    std::sort(chunk_.begin(), chunk_.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    // Aggregate duplicates within the chunk.
    std::size_t w = 0;
    for (std::size_t r = 1; r < chunk_.size(); ++r) {
      if (chunk_[r].first == chunk_[w].first) {
        chunk_[w].second += chunk_[r].second;
      } else {
        chunk_[++w] = chunk_[r];
      }
    }
    chunk_.resize(w + 1);

    std::vector<std::pair<std::uint64_t, double>> merged;
    merged.reserve(base_.size() + chunk_.size());
    std::size_t i = 0, j = 0;
    while (i < base_.size() && j < chunk_.size()) {
      if (base_[i].first < chunk_[j].first) {
        merged.push_back(base_[i++]);
      } else if (base_[i].first > chunk_[j].first) {
        merged.push_back(chunk_[j++]);
      } else {
        merged.emplace_back(base_[i].first, base_[i].second + chunk_[j].second);
        ++i, ++j;
      }
    }
    merged.insert(merged.end(), base_.begin() + static_cast<std::ptrdiff_t>(i),
                  base_.end());
    merged.insert(merged.end(), chunk_.begin() + static_cast<std::ptrdiff_t>(j),
                  chunk_.end());
    base_ = std::move(merged);
    chunk_.clear();
  }

  std::size_t chunk_capacity_;
  std::vector<std::pair<std::uint64_t, double>> chunk_;
  std::vector<std::pair<std::uint64_t, double>> base_;
};

}  // namespace

SparseMatrix count_cooccurrences(std::span<const TokenId> stream,
                                 std::size_t vocab_size, std::size_t window,
                                 WindowWeighting weighting) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");

  PairAccumulator acc(1u << 24);
  const std::size_t len = stream.size();
  for (std::size_t i = 0; i < len; ++i) {
    const TokenId wi = stream[i];
    if (wi == kSentinel) continue;
    const std::size_t hi = std::min(len, i + window + 1);
    for (std::size_t j = i + 1; j < hi; ++j) {
      const TokenId wj = stream[j];
      if (wj == kSentinel) continue;
      const double weight = weighting == WindowWeighting::kUniform
                                ? 1.0
                                : 1.0 / static_cast<double>(j - i);
      acc.add(pack(static_cast<std::uint32_t>(wi),
                   static_cast<std::uint32_t>(wj)),
              weight);
      acc.add(pack(static_cast<std::uint32_t>(wj),
                   static_cast<std::uint32_t>(wi)),
              weight);
    }
  }

  const auto pairs = acc.finish();

  SparseMatrix m;
  m.rows = vocab_size;
  m.cols = vocab_size;
  m.row_ptr.assign(vocab_size + 1, 0);
  m.col_idx.reserve(pairs.size());
  m.values.reserve(pairs.size());
  for (const auto& [key, value] : pairs) {
    const auto row = static_cast<std::size_t>(key >> 32);
    m.row_ptr[row + 1]++;
    m.col_idx.push_back(static_cast<std::uint32_t>(key & 0xFFFFFFFFu));
    m.values.push_back(value);
  }
  for (std::size_t r = 0; r < vocab_size; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
  return m;
}

}  // namespace puembed
