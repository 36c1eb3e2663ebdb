#include "puembed/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "puembed/ppmi.hpp"
#include "puembed/weighting.hpp"

namespace puembed::oracle {

DenseProblem make_dense(const SparseMatrix& a, const SparseMatrix& weights,
                        double lambda, double rho) {
  if (a.rows * a.cols > 1000000) {
    throw std::invalid_argument("oracle guard: dense problem exceeds 1e6 entries");
  }
  DenseProblem prob;
  prob.m = a.rows;
  prob.n = a.cols;
  prob.lambda = lambda;
  prob.a.assign(prob.m * prob.n, 0.0);
  prob.c.assign(prob.m * prob.n, rho);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::uint64_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      prob.a[i * prob.n + a.col_idx[p]] = a.values[p];
      prob.c[i * prob.n + a.col_idx[p]] = weights.values[p];
    }
  }
  return prob;
}

double dense_objective(const FactorModel& model, const DenseProblem& prob) {
  double loss = 0.0;
  for (std::size_t i = 0; i < prob.m; ++i) {
    for (std::size_t j = 0; j < prob.n; ++j) {
      double r = 0.0;
      for (std::size_t s = 0; s < model.aug_dim(); ++s) {
        r += model.w_aug(i, s) * model.h_aug(j, s);
      }
      const double d = prob.a_at(i, j) - r;
      loss += prob.c_at(i, j) * d * d;
    }
  }
  double reg = 0.0;
  for (std::size_t i = 0; i < prob.m; ++i) {
    for (std::size_t t = 0; t < model.dim(); ++t) {
      reg += model.w_aug(i, t) * model.w_aug(i, t);
    }
  }
  for (std::size_t j = 0; j < prob.n; ++j) {
    for (std::size_t t = 0; t < model.dim(); ++t) {
      reg += model.h_aug(j, t) * model.h_aug(j, t);
    }
  }
  return loss + prob.lambda * reg;
}

double dense_objective_transposed(const FactorModel& model,
                                  const DenseProblem& prob) {
  double loss = 0.0;
  for (std::size_t j = 0; j < prob.n; ++j) {
    for (std::size_t i = 0; i < prob.m; ++i) {
      double r = 0.0;
      for (std::size_t s = model.aug_dim(); s-- > 0;) {
        r += model.w_aug(i, s) * model.h_aug(j, s);
      }
      const double d = prob.a_at(i, j) - r;
      loss += prob.c_at(i, j) * d * d;
    }
  }
  double reg = 0.0;
  for (std::size_t t = 0; t < model.dim(); ++t) {
    for (std::size_t j = 0; j < prob.n; ++j) {
      reg += model.h_aug(j, t) * model.h_aug(j, t);
    }
    for (std::size_t i = 0; i < prob.m; ++i) {
      reg += model.w_aug(i, t) * model.w_aug(i, t);
    }
  }
  return loss + prob.lambda * reg;
}

double dense_element_minimizer(const DenseProblem& prob,
                               const FactorModel& model, bool word_side,
                               std::size_t row_or_col, std::size_t t) {
  // Minimizes sum_j C (A - r~ - x * opp)^2 + lambda_t x^2 over the single
  // scalar x, where r~ is the prediction with this element's contribution
  // removed. Bias columns carry no regularization.
  const double lambda_t = (t < model.dim()) ? prob.lambda : 0.0;
  const std::size_t count = word_side ? prob.n : prob.m;
  const double x_old = word_side ? model.w_aug(row_or_col, t)
                                 : model.h_aug(row_or_col, t);
  double num = 0.0, den = lambda_t;
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t i = row_or_col;
    double r = 0.0;
    for (std::size_t s = 0; s < model.aug_dim(); ++s) {
      r += word_side ? model.w_aug(i, s) * model.h_aug(j, s)
                     : model.w_aug(j, s) * model.h_aug(i, s);
    }
    const double opp = word_side ? model.h_aug(j, t) : model.w_aug(j, t);
    const double r_without = r - x_old * opp;
    const double aij = word_side ? prob.a_at(i, j) : prob.a_at(j, i);
    const double cij = word_side ? prob.c_at(i, j) : prob.c_at(j, i);
    num += cij * opp * (aij - r_without);
    den += cij * opp * opp;
  }
  if (!(den > 0.0)) return x_old;
  return num / den;
}

std::vector<double> brute_ppmi(const std::vector<double>& counts,
                               std::size_t m, std::size_t n, double alpha) {
  double total = 0.0;
  for (const double v : counts) total += v;
  std::vector<double> out(m * n, 0.0);
  double smooth_norm = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    double col = 0.0;
    for (std::size_t w = 0; w < m; ++w) col += counts[w * n + c];
    if (col > 0.0) smooth_norm += std::pow(col, alpha);
  }
  for (std::size_t w = 0; w < m; ++w) {
    double row = 0.0;
    for (std::size_t c = 0; c < n; ++c) row += counts[w * n + c];
    for (std::size_t c = 0; c < n; ++c) {
      const double joint = counts[w * n + c];
      if (joint <= 0.0) continue;
      double col = 0.0;
      for (std::size_t w2 = 0; w2 < m; ++w2) col += counts[w2 * n + c];
      const double p_wc = joint / total;
      const double p_w = row / total;
      const double p_c_alpha = std::pow(col, alpha) / smooth_norm;
      const double pmi = std::log(p_wc / (p_w * p_c_alpha));
      out[w * n + c] = pmi > 0.0 ? pmi : 0.0;
    }
  }
  return out;
}

namespace {

SparseMatrix random_counts(std::mt19937_64& rng, std::size_t m, std::size_t n,
                           double density) {
  SparseMatrix q;
  q.rows = m;
  q.cols = n;
  q.row_ptr.assign(m + 1, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> count(1, 30);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (unit(rng) < density) {
        q.col_idx.push_back(static_cast<std::uint32_t>(j));
        q.values.push_back(static_cast<double>(count(rng)));
        q.row_ptr[i + 1]++;
      }
    }
    // Every row/column marginal must stay positive for the PPMI transform.
    if (q.row_ptr[i + 1] == 0) {
      q.col_idx.push_back(static_cast<std::uint32_t>(i % n));
      q.values.push_back(1.0);
      q.row_ptr[i + 1]++;
    }
  }
  for (std::size_t r = 0; r < m; ++r) q.row_ptr[r + 1] += q.row_ptr[r];
  return q;
}

bool close(double a, double b, double rel) {
  return std::abs(a - b) <= rel * (1.0 + std::max(std::abs(a), std::abs(b)));
}

}  // namespace

int run_selftest() {
  std::mt19937_64 rng(20240817);
  int failures = 0;
  const auto check = [&](bool ok, const char* what) {
    std::printf("selftest %-40s %s\n", what, ok ? "ok" : "MISMATCH");
    if (!ok) ++failures;
  };

  // Objective: efficient Gram-based form vs literal dense form, both orders.
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t m = 6 + trial, n = 5 + trial;
    const auto q = random_counts(rng, m, n, 0.4);
    const auto a = build_ppmi(q, 0.75);
    TrainConfig cfg;
    cfg.dim = 3;
    cfg.lambda = 0.00048828125;
    cfg.seed = 100 + static_cast<std::uint64_t>(trial);
    cfg.weights.rho = 0.0625;
    const auto weights = weight_matrix(q, cfg.weights);
    const auto model = init_model(m, n, cfg);
    const auto prob = make_dense(a, weights, cfg.lambda, cfg.weights.rho);
    const double dense = dense_objective(model, prob);
    const double dense_t = dense_objective_transposed(model, prob);
    const double efficient = objective(model, a, weights, cfg);
    check(close(dense, dense_t, 1e-12), "dense objective loop-order");
    check(close(efficient, dense, 1e-10), "efficient vs dense objective");
  }

  // Column updates vs the dense 1-D minimizer.
  {
    const std::size_t m = 12, n = 10;
    const auto q = random_counts(rng, m, n, 0.5);
    const auto a = build_ppmi(q, 1.0);
    TrainConfig cfg;
    cfg.dim = 4;
    cfg.seed = 7;
    const auto weights = weight_matrix(q, cfg.weights);
    Trainer trainer(a, weights, cfg);
    const auto prob = make_dense(a, weights, cfg.lambda, cfg.weights.rho);
    bool ok = true;
    for (std::size_t t = 0; t < cfg.dim + 2 && ok; ++t) {
      if (t < cfg.dim || t == cfg.dim + 1) {
        FactorModel before = trainer.model();
        trainer.update_half(true, t);
        for (std::size_t i = 0; i < m; ++i) {
          const double expect = dense_element_minimizer(prob, before, true, i, t);
          if (std::abs(trainer.model().w_aug(i, t) - expect) > 1e-8) ok = false;
          before.w_aug(i, t) = trainer.model().w_aug(i, t);
        }
      }
      if (t < cfg.dim || t == cfg.dim) {
        FactorModel before = trainer.model();
        trainer.update_half(false, t);
        for (std::size_t j = 0; j < n; ++j) {
          const double expect = dense_element_minimizer(prob, before, false, j, t);
          if (std::abs(trainer.model().h_aug(j, t) - expect) > 1e-8) ok = false;
          before.h_aug(j, t) = trainer.model().h_aug(j, t);
        }
      }
    }
    check(ok, "column update vs dense minimizer");
  }

  // PPMI vs the dense scalar re-derivation.
  for (const double alpha : {1.0, 0.75}) {
    bool ok = true;
    for (int trial = 0; trial < 5; ++trial) {
      const std::size_t m = 8, n = 8;
      const auto q = random_counts(rng, m, n, 0.5);
      std::vector<double> dense_q(m * n, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::uint64_t p = q.row_ptr[i]; p < q.row_ptr[i + 1]; ++p) {
          dense_q[i * n + q.col_idx[p]] = q.values[p];
        }
      }
      const auto expect = brute_ppmi(dense_q, m, n, alpha);
      const auto got = build_ppmi(q, alpha);
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
          if (std::abs(got.at(i, j) - expect[i * n + j]) > 1e-12) ok = false;
        }
      }
    }
    check(ok, alpha == 1.0 ? "ppmi vs brute force (alpha=1)"
                           : "ppmi vs brute force (alpha=0.75)");
  }

  return failures == 0 ? 0 : 1;
}

}  // namespace puembed::oracle
