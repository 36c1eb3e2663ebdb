#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "puembed/sparse_matrix.hpp"
#include "puembed/weighting.hpp"

namespace puembed {

// Latent factors with bias augmentation. The augmented word matrix W' has
// columns [W | 1 | b] and the augmented context matrix H' has columns
// [H | b_hat | 1], so <w'_i, h'_j> = <w_i, h_j> + b_i + b_hat_j exactly.
// Storage is column-major: column updates touch contiguous memory.
class FactorModel {
 public:
  FactorModel() = default;
  FactorModel(std::size_t m, std::size_t n, std::size_t k);

  std::size_t word_count() const { return m_; }
  std::size_t context_count() const { return n_; }
  std::size_t dim() const { return k_; }
  std::size_t aug_dim() const { return k_ + 2; }

  double* w_col(std::size_t t) { return w_.data() + t * m_; }
  double* h_col(std::size_t t) { return h_.data() + t * n_; }
  const double* w_col(std::size_t t) const { return w_.data() + t * m_; }
  const double* h_col(std::size_t t) const { return h_.data() + t * n_; }

  // Augmented element access, s in [0, k+2).
  double w_aug(std::size_t i, std::size_t s) const { return w_[s * m_ + i]; }
  double h_aug(std::size_t j, std::size_t s) const { return h_[s * n_ + j]; }
  double& w_aug(std::size_t i, std::size_t s) { return w_[s * m_ + i]; }
  double& h_aug(std::size_t j, std::size_t s) { return h_[s * n_ + j]; }

  double bias_w(std::size_t i) const { return w_[(k_ + 1) * m_ + i]; }
  double bias_h(std::size_t j) const { return h_[k_ * n_ + j]; }
  double& bias_w(std::size_t i) { return w_[(k_ + 1) * m_ + i]; }
  double& bias_h(std::size_t j) { return h_[k_ * n_ + j]; }

  // <w'_i, h'_j>
  double predict(std::size_t i, std::size_t j) const;

  // Squared Frobenius norms of the latent blocks only (biases excluded).
  double latent_norm_sq() const;

  bool all_finite() const;

 private:
  std::size_t m_ = 0, n_ = 0, k_ = 0;
  std::vector<double> w_;  // m x (k+2), column-major
  std::vector<double> h_;  // n x (k+2), column-major
};

struct TrainConfig {
  std::size_t dim = 300;
  double lambda = 0.00048828125;  // 2^-11
  std::size_t epochs = 50;
  std::uint64_t seed = 1;
  double init_scale = -1.0;  // < 0 means 1/sqrt(dim)
  WeightConfig weights;
  int threads = 0;     // 0 = leave runtime default
  double tol = 0.0;    // > 0 enables relative-loss-change early stop
  std::size_t refresh_every = 10;  // full residual/Gram recompute cadence
};

struct EpochStats {
  std::size_t epoch;
  double loss;
  double seconds;
};

// W, H entries i.i.d. uniform in [-s, s]; biases zero.
FactorModel init_model(std::size_t m, std::size_t n, const TrainConfig& cfg);

// Full PU objective evaluated through the Gram identity: observed residual
// part in O(nnz), the all-pairs rho part through W'^T W' and H'^T H'.
// weights holds the raw observed confidences over pattern(A).
double objective(const FactorModel& model, const SparseMatrix& a,
                 const SparseMatrix& weights, const TrainConfig& cfg);

// Column-wise coordinate descent state: residuals on the observed pattern
// plus the two (k+2)^2 Gram matrices. Columns are swept t = 0..k+1; latent
// columns update W then H, t = k updates only the context bias column, and
// t = k+1 updates only the word bias column.
class Trainer {
 public:
  Trainer(const SparseMatrix& a, const SparseMatrix& weights,
          const TrainConfig& cfg);
  Trainer(const SparseMatrix& a, const SparseMatrix& weights,
          const TrainConfig& cfg, FactorModel initial);

  void update_column(std::size_t t);
  // One side of a column update: the W' elements of column t (word_side)
  // or the H' elements. update_column composes these; exposed so tests can
  // check each half against the dense minimizer.
  void update_half(bool word_side, std::size_t t);
  // One sweep over all k+2 columns.
  void run_epoch();
  // epochs sweeps, objective logged after each. Throws on non-finite loss,
  // naming the epoch.
  std::vector<EpochStats> run();

  double current_objective() const;
  // Re-derives residuals and Gram matrices from the factors.
  void refresh_state();

  const FactorModel& model() const { return model_; }
  FactorModel& model() { return model_; }
  const double* gram_w() const { return gw_.data(); }
  const double* gram_h() const { return gh_.data(); }

 private:
  void refresh_gram_column(bool word_side, std::size_t t);

  const SparseMatrix& a_;
  const SparseMatrix& c_;
  CscIndex csc_;
  TrainConfig cfg_;
  FactorModel model_;
  std::vector<double> residual_;  // A_ij - <w'_i, h'_j> on the pattern
  std::vector<double> gw_, gh_;   // (k+2)^2 row-major Gram matrices
  bool skip_logged_ = false;
};

// Convenience wrapper: derives confidence weights from Q, trains, returns
// the model (trace optional).
FactorModel train(const SparseMatrix& a, const SparseMatrix& q,
                  const TrainConfig& cfg,
                  std::vector<EpochStats>* trace = nullptr);

// Binary model container (magic PUFM): m, n, k then W, H, b, b_hat as
// little-endian f64 row-major.
void save_model(const FactorModel& model, const std::filesystem::path& path);
FactorModel load_model(const std::filesystem::path& path);

}  // namespace puembed
