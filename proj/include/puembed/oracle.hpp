#pragma once

#include <cstddef>
#include <vector>

#include "puembed/factorizer.hpp"
#include "puembed/sparse_matrix.hpp"

// Literal brute-force references used as ground truth in tests and the
// hidden `selftest` subcommand. Deliberately shares no code with the
// production paths.
namespace puembed::oracle {

struct DenseProblem {
  std::size_t m = 0, n = 0;
  std::vector<double> a;  // m x n row-major targets (0 on unobserved)
  std::vector<double> c;  // m x n row-major weights (rho on unobserved)
  double lambda = 0.0;

  double a_at(std::size_t i, std::size_t j) const { return a[i * n + j]; }
  double c_at(std::size_t i, std::size_t j) const { return c[i * n + j]; }
};

// Expands sparse targets/weights to dense, filling unobserved entries with
// target 0 and weight rho. Guards against m*n > 1e6.
DenseProblem make_dense(const SparseMatrix& a, const SparseMatrix& weights,
                        double lambda, double rho);

// Triple-loop objective over every (i, j). Biases excluded from the norms.
double dense_objective(const FactorModel& model, const DenseProblem& prob);
// Same sum accumulated in the opposite loop order.
double dense_objective_transposed(const FactorModel& model,
                                  const DenseProblem& prob);

// Exact minimizer of the 1-D quadratic restriction at one augmented
// element, from dense sums. word_side selects W'[row_or_col][t] vs
// H'[row_or_col][t]; bias columns use zero regularization.
double dense_element_minimizer(const DenseProblem& prob,
                               const FactorModel& model, bool word_side,
                               std::size_t row_or_col, std::size_t t);

// Smoothed PPMI from an explicit dense count table, scalar re-derivation.
std::vector<double> brute_ppmi(const std::vector<double>& counts,
                               std::size_t m, std::size_t n, double alpha);

// Runs the oracle cross-checks; returns 0 when everything agrees.
int run_selftest();

}  // namespace puembed::oracle
