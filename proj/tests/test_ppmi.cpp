#include <cmath>
#include <random>

#include "doctest.h"
#include "puembed/cooccurrence.hpp"
#include "puembed/oracle.hpp"
#include "puembed/ppmi.hpp"
#include "test_util.hpp"

using namespace puembed;

TEST_CASE("pairs at their independence rate get PPMI 0") {
  // Uniform 2x2 table: joint = product of marginals everywhere.
  SparseMatrix q;
  q.rows = q.cols = 2;
  q.row_ptr = {0, 2, 4};
  q.col_idx = {0, 1, 0, 1};
  q.values = {1, 1, 1, 1};
  const auto a = build_ppmi(q, 1.0);
  CHECK(a.nnz() == 4);  // explicit zeros stay in the pattern
  for (const double v : a.values) CHECK(v == 0.0);
}

TEST_CASE("alternating two-word corpus matches the scalar formula") {
  std::vector<TokenId> stream;
  for (int i = 0; i < 50; ++i) {
    stream.push_back(0);
    stream.push_back(1);
  }
  const auto q = count_cooccurrences(stream, 2, 1);
  const auto a = build_ppmi(q, 1.0);
  // Q(a,b) = Q(b,a) = 99, marginals 99, D = 198: PMI = log 2.
  CHECK(a.at(0, 1) == doctest::Approx(0.6931471805599453).epsilon(1e-12));
  CHECK(a.at(1, 0) == doctest::Approx(0.6931471805599453).epsilon(1e-12));
}

TEST_CASE("smoothing changes values only under asymmetric marginals") {
  SparseMatrix sym;
  sym.rows = sym.cols = 2;
  sym.row_ptr = {0, 2, 4};
  sym.col_idx = {0, 1, 0, 1};
  sym.values = {3, 7, 7, 3};  // symmetric under a<->b
  const auto s1 = build_ppmi(sym, 1.0);
  const auto s2 = build_ppmi(sym, 0.75);
  CHECK(s1.at(0, 1) == doctest::Approx(s2.at(0, 1)).epsilon(1e-12));

  SparseMatrix asym = sym;
  asym.values = {1, 9, 2, 8};  // column marginals 3 and 17
  const auto a1 = build_ppmi(asym, 1.0);
  const auto a2 = build_ppmi(asym, 0.75);
  bool any_diff = false;
  for (std::size_t p = 0; p < a1.nnz(); ++p) {
    if (std::abs(a1.values[p] - a2.values[p]) > 1e-12) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("matches the dense brute-force oracle with clipping") {
  std::mt19937_64 rng(314);
  for (const double alpha : {1.0, 0.75, 0.5}) {
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t m = 5 + rng() % 40;  // up to ~45 words
      const auto q = testutil::random_counts(rng, m, m, 0.3);
      std::vector<double> dense(m * m, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::uint64_t p = q.row_ptr[i]; p < q.row_ptr[i + 1]; ++p) {
          dense[i * m + q.col_idx[p]] = q.values[p];
        }
      }
      const auto expect = oracle::brute_ppmi(dense, m, m, alpha);
      const auto a = build_ppmi(q, alpha);
      // Pattern preserved exactly.
      CHECK(a.row_ptr == q.row_ptr);
      CHECK(a.col_idx == q.col_idx);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
          CHECK(a.at(i, j) == doctest::Approx(expect[i * m + j]).epsilon(1e-12));
          CHECK(a.at(i, j) >= 0.0);
        }
      }
    }
  }
}

TEST_CASE("smoothed context distribution normalizes and lifts rare contexts") {
  std::mt19937_64 rng(27);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 20;
    std::vector<double> counts(n);
    double total = 0.0;
    for (auto& c : counts) {
      c = 1.0 + static_cast<double>(rng() % 1000);
      total += c;
    }
    const double alpha = 0.75;
    double z = 0.0;
    for (const double c : counts) z += std::pow(c, alpha);
    double sum_alpha = 0.0;
    // Crossover count: p_alpha(c) > p(c) iff c^alpha / Z > c / D, i.e.
    // c < (D / Z)^(1/(1-alpha)).
    const double crossover = std::pow(total / z, 1.0 / (1.0 - alpha));
    for (const double c : counts) {
      const double p = c / total;
      const double p_alpha = std::pow(c, alpha) / z;
      sum_alpha += p_alpha;
      if (c < crossover - 1e-9) CHECK(p_alpha > p);
      if (c > crossover + 1e-9) CHECK(p_alpha < p);
    }
    CHECK(sum_alpha == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("drop_clipped removes non-positive entries from the pattern") {
  SparseMatrix q;
  q.rows = q.cols = 2;
  q.row_ptr = {0, 2, 4};
  q.col_idx = {0, 1, 0, 1};
  q.values = {10, 1, 1, 10};
  const auto kept = build_ppmi(q, 1.0, false);
  const auto dropped = build_ppmi(q, 1.0, true);
  CHECK(kept.nnz() == 4);
  CHECK(dropped.nnz() < kept.nnz());
  for (const double v : dropped.values) CHECK(v > 0.0);
}

TEST_CASE("input validation") {
  SparseMatrix empty;
  empty.rows = empty.cols = 2;
  empty.row_ptr = {0, 0, 0};
  CHECK_THROWS_AS(build_ppmi(empty, 1.0), std::invalid_argument);
  SparseMatrix q;
  q.rows = q.cols = 1;
  q.row_ptr = {0, 1};
  q.col_idx = {0};
  q.values = {2};
  CHECK_THROWS_AS(build_ppmi(q, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_ppmi(q, 1.5), std::invalid_argument);
}
