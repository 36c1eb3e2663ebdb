#pragma once

#include <span>

#include "puembed/corpus.hpp"
#include "puembed/sparse_matrix.hpp"

namespace puembed {

enum class WindowWeighting { kUniform, kHarmonic };

// Symmetric sliding window count: every ordered pair of non-sentinel
// positions at distance 1..window contributes one increment (1/distance for
// harmonic weighting). The window is clipped at stream boundaries.
SparseMatrix count_cooccurrences(
    std::span<const TokenId> stream, std::size_t vocab_size,
    std::size_t window,
    WindowWeighting weighting = WindowWeighting::kUniform);

}  // namespace puembed
