#include "puembed/ppmi.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace puembed {

SparseMatrix build_ppmi(const SparseMatrix& q, double smooth_alpha,
                        bool drop_clipped) {
  if (q.nnz() == 0) throw std::invalid_argument("empty co-occurrence matrix");
  if (!(smooth_alpha > 0.0 && smooth_alpha <= 1.0)) {
    throw std::invalid_argument("smooth_alpha must be in (0, 1]");
  }

  std::vector<double> row_sum(q.rows, 0.0), col_sum(q.cols, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < q.rows; ++i) {
    for (std::uint64_t p = q.row_ptr[i]; p < q.row_ptr[i + 1]; ++p) {
      row_sum[i] += q.values[p];
      col_sum[q.col_idx[p]] += q.values[p];
      total += q.values[p];
    }
  }

  double smooth_norm = 0.0;
  for (std::size_t c = 0; c < q.cols; ++c) {
    if (col_sum[c] > 0.0) smooth_norm += std::pow(col_sum[c], smooth_alpha);
  }

  // PMI(w,c) = log(#(w,c) * Z / (#(w) * #(c)^alpha)), Z = sum_c #(c)^alpha.
  const double log_norm = std::log(smooth_norm);

  SparseMatrix a;
  a.rows = q.rows;
  a.cols = q.cols;
  a.row_ptr.assign(q.rows + 1, 0);
  a.col_idx.reserve(q.nnz());
  a.values.reserve(q.nnz());
  for (std::size_t i = 0; i < q.rows; ++i) {
    for (std::uint64_t p = q.row_ptr[i]; p < q.row_ptr[i + 1]; ++p) {
      const std::size_t c = q.col_idx[p];
      assert(row_sum[i] > 0.0 && col_sum[c] > 0.0);
      const double pmi = std::log(q.values[p]) + log_norm -
                         std::log(row_sum[i]) -
                         smooth_alpha * std::log(col_sum[c]);
      if (pmi <= 0.0 && drop_clipped) continue;
      a.col_idx.push_back(q.col_idx[p]);
      a.values.push_back(pmi > 0.0 ? pmi : 0.0);
      a.row_ptr[i + 1]++;
    }
  }
  for (std::size_t r = 0; r < q.rows; ++r) a.row_ptr[r + 1] += a.row_ptr[r];
  return a;
}

}  // namespace puembed
