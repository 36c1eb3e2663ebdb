#pragma once

#include "puembed/sparse_matrix.hpp"

namespace puembed {

// Smoothed positive pointwise mutual information over the stored pattern of
// Q. Context marginals are raised to smooth_alpha before normalizing. With
// drop_clipped = false (the default) observed pairs whose PMI clips to zero
// stay in the pattern as explicit zeros, so they keep their confidence
// weight downstream.
SparseMatrix build_ppmi(const SparseMatrix& q, double smooth_alpha,
                        bool drop_clipped = false);

}  // namespace puembed
