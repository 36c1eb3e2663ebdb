#pragma once

#include "puembed/sparse_matrix.hpp"

namespace puembed {

// Confidence weights: observed pairs get a saturating function of their raw
// count, every unobserved pair gets the single small weight rho. rho = 0
// degenerates to an observed-only model.
struct WeightConfig {
  double x_max = 10.0;
  double weight_alpha = 0.75;
  double rho = 0.0625;  // 2^-4
  // Effective observed weights are (C_ij - rho); requiring
  // rho <= (1/x_max)^weight_alpha keeps them non-negative. Setting this
  // flag lifts that check (the subproblems can lose strict convexity
  // without regularization).
  bool allow_indefinite = false;

  // Throws std::invalid_argument on a bad combination.
  void validate() const;
};

// (q/x_max)^alpha for q <= x_max, else 1. q must be > 0.
double positive_weight(double q, const WeightConfig& cfg);

// Element-wise positive_weight over pattern(Q).
SparseMatrix weight_matrix(const SparseMatrix& q, const WeightConfig& cfg);

}  // namespace puembed
