#include "puembed/factorizer.hpp"

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <random>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace puembed {

namespace {

double next_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

FactorModel::FactorModel(std::size_t m, std::size_t n, std::size_t k)
    : m_(m), n_(n), k_(k), w_(m * (k + 2), 0.0), h_(n * (k + 2), 0.0) {
  // Constant-1 columns of the augmented views.
  std::fill_n(w_col(k_), m_, 1.0);
  std::fill_n(h_col(k_ + 1), n_, 1.0);
}

double FactorModel::predict(std::size_t i, std::size_t j) const {
  double r = 0.0;
  for (std::size_t s = 0; s < k_ + 2; ++s) r += w_aug(i, s) * h_aug(j, s);
  return r;
}

double FactorModel::latent_norm_sq() const {
  double sum = 0.0;
  for (std::size_t t = 0; t < k_; ++t) {
    const double* wc = w_col(t);
    for (std::size_t i = 0; i < m_; ++i) sum += wc[i] * wc[i];
    const double* hc = h_col(t);
    for (std::size_t j = 0; j < n_; ++j) sum += hc[j] * hc[j];
  }
  return sum;
}

bool FactorModel::all_finite() const {
  for (const double v : w_) {
    if (!std::isfinite(v)) return false;
  }
  for (const double v : h_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

FactorModel init_model(std::size_t m, std::size_t n, const TrainConfig& cfg) {
  if (m < 1 || n < 1) throw std::invalid_argument("empty factor dimensions");
  if (cfg.dim < 1) throw std::invalid_argument("dim must be >= 1");
  const double scale = cfg.init_scale < 0.0
                           ? 1.0 / std::sqrt(static_cast<double>(cfg.dim))
                           : cfg.init_scale;
  std::seed_seq seq{cfg.seed, static_cast<std::uint64_t>(0x494E'4954u)};  // "INIT"
  std::mt19937_64 rng(seq);

  FactorModel model(m, n, cfg.dim);
  for (std::size_t t = 0; t < cfg.dim; ++t) {
    double* wc = model.w_col(t);
    for (std::size_t i = 0; i < m; ++i) wc[i] = (2.0 * next_unit(rng) - 1.0) * scale;
  }
  for (std::size_t t = 0; t < cfg.dim; ++t) {
    double* hc = model.h_col(t);
    for (std::size_t j = 0; j < n; ++j) hc[j] = (2.0 * next_unit(rng) - 1.0) * scale;
  }
  return model;
}

double objective(const FactorModel& model, const SparseMatrix& a,
                 const SparseMatrix& weights, const TrainConfig& cfg) {
  if (model.word_count() != a.rows || model.context_count() != a.cols ||
      a.row_ptr != weights.row_ptr || a.col_idx != weights.col_idx) {
    throw std::invalid_argument("objective: inconsistent dimensions/patterns");
  }
  const double rho = cfg.weights.rho;
  const std::size_t k2 = model.aug_dim();

  double pos = 0.0, r2_observed = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::uint64_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
      const double r = model.predict(i, a.col_idx[p]);
      const double d = a.values[p] - r;
      pos += weights.values[p] * d * d;
      r2_observed += r * r;
    }
  }

  // tr(G_W G_H) = sum over all (i, j) of <w'_i, h'_j>^2.
  double trace = 0.0;
  for (std::size_t s = 0; s < k2; ++s) {
    for (std::size_t t = 0; t < k2; ++t) {
      double gw = 0.0, gh = 0.0;
      for (std::size_t i = 0; i < model.word_count(); ++i)
        gw += model.w_aug(i, s) * model.w_aug(i, t);
      for (std::size_t j = 0; j < model.context_count(); ++j)
        gh += model.h_aug(j, s) * model.h_aug(j, t);
      trace += gw * gh;
    }
  }

  return pos + rho * (trace - r2_observed) +
         cfg.lambda * model.latent_norm_sq();
}

Trainer::Trainer(const SparseMatrix& a, const SparseMatrix& weights,
                 const TrainConfig& cfg)
    : Trainer(a, weights, cfg, init_model(a.rows, a.cols, cfg)) {}

Trainer::Trainer(const SparseMatrix& a, const SparseMatrix& weights,
                 const TrainConfig& cfg, FactorModel initial)
    : a_(a), c_(weights), cfg_(cfg), model_(std::move(initial)) {
  if (a.row_ptr != weights.row_ptr || a.col_idx != weights.col_idx) {
    throw std::invalid_argument("trainer: pattern(A) != pattern(C)");
  }
  if (model_.word_count() != a.rows || model_.context_count() != a.cols) {
    throw std::invalid_argument("trainer: model/matrix dimension mismatch");
  }
  cfg_.weights.validate();
#ifdef _OPENMP
  if (cfg_.threads > 0) omp_set_num_threads(cfg_.threads);
#endif
  csc_ = build_csc_index(a);
  const std::size_t k2 = model_.aug_dim();
  gw_.assign(k2 * k2, 0.0);
  gh_.assign(k2 * k2, 0.0);
  residual_.assign(a.nnz(), 0.0);
  refresh_state();
}

void Trainer::refresh_state() {
  const std::size_t k2 = model_.aug_dim();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(a_.rows); ++i) {
    for (std::uint64_t p = a_.row_ptr[i]; p < a_.row_ptr[i + 1]; ++p) {
      residual_[p] = a_.values[p] - model_.predict(static_cast<std::size_t>(i),
                                                   a_.col_idx[p]);
    }
  }
  for (std::size_t s = 0; s < k2; ++s) {
    refresh_gram_column(true, s);
    refresh_gram_column(false, s);
  }
}

void Trainer::refresh_gram_column(bool word_side, std::size_t t) {
  const std::size_t k2 = model_.aug_dim();
  std::vector<double>& g = word_side ? gw_ : gh_;
  const std::size_t len = word_side ? model_.word_count() : model_.context_count();
  const double* tcol = word_side ? model_.w_col(t) : model_.h_col(t);
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t s = 0; s < static_cast<std::int64_t>(k2); ++s) {
    const double* scol = word_side ? model_.w_col(static_cast<std::size_t>(s))
                                   : model_.h_col(static_cast<std::size_t>(s));
    double sum = 0.0;
    for (std::size_t i = 0; i < len; ++i) sum += scol[i] * tcol[i];
    g[static_cast<std::size_t>(s) * k2 + t] = sum;
    g[t * k2 + static_cast<std::size_t>(s)] = sum;
  }
}

void Trainer::update_half(bool word_side, std::size_t t) {
  const std::size_t k = model_.dim();
  const std::size_t k2 = k + 2;
  const double rho = cfg_.weights.rho;
  const double lam = (t < k) ? cfg_.lambda : 0.0;

  // For the W side the fixed opposite factor is H' (Gram G_H) traversed by
  // CSR rows; for the H side it is W' (Gram G_W) traversed by columns.
  double* own_col = word_side ? model_.w_col(t) : model_.h_col(t);
  const double* opp_col = word_side ? model_.h_col(t) : model_.w_col(t);
  const std::vector<double>& opp_gram = word_side ? gh_ : gw_;
  const double gtt = opp_gram[t * k2 + t];
  const std::size_t count = word_side ? a_.rows : a_.cols;

  std::atomic<bool> nonfinite{false};
  std::atomic<bool> skipped{false};

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(count); ++idx) {
    const auto i = static_cast<std::size_t>(idx);
    const double x_old = own_col[i];

    double s_res = 0.0;  // sum (C - rho) * (A - r~) * opp
    double s_a = 0.0;    // sum A * opp
    double s_o2 = 0.0;   // sum (C - rho) * opp^2
    if (word_side) {
      for (std::uint64_t p = a_.row_ptr[i]; p < a_.row_ptr[i + 1]; ++p) {
        const double o = opp_col[a_.col_idx[p]];
        const double cw = c_.values[p] - rho;
        s_res += cw * (residual_[p] + x_old * o) * o;
        s_a += a_.values[p] * o;
        s_o2 += cw * o * o;
      }
    } else {
      for (std::uint64_t q = csc_.col_ptr[i]; q < csc_.col_ptr[i + 1]; ++q) {
        const double o = opp_col[csc_.row_idx[q]];
        const std::uint64_t p = csc_.csr_pos[q];
        const double cw = c_.values[p] - rho;
        s_res += cw * (residual_[p] + x_old * o) * o;
        s_a += a_.values[p] * o;
        s_o2 += cw * o * o;
      }
    }

    // Dense correction through the opposite Gram matrix: O(k) instead of
    // touching the full row/column of the m x n grid.
    double gram_dot = 0.0;
    for (std::size_t s = 0; s < k2; ++s) {
      const double own = word_side ? model_.w_aug(i, s) : model_.h_aug(i, s);
      gram_dot += own * opp_gram[s * k2 + t];
    }

    const double num = s_res + rho * s_a - rho * (gram_dot - x_old * gtt);
    const double den = lam + s_o2 + rho * gtt;
    if (!(den > 0.0)) {
      skipped.store(true, std::memory_order_relaxed);
      continue;
    }
    const double x_new = num / den;
    if (!std::isfinite(x_new)) {
      nonfinite.store(true, std::memory_order_relaxed);
      continue;
    }
    const double delta = x_new - x_old;
    if (delta == 0.0) continue;
    own_col[i] = x_new;
    if (word_side) {
      for (std::uint64_t p = a_.row_ptr[i]; p < a_.row_ptr[i + 1]; ++p) {
        residual_[p] -= delta * opp_col[a_.col_idx[p]];
      }
    } else {
      for (std::uint64_t q = csc_.col_ptr[i]; q < csc_.col_ptr[i + 1]; ++q) {
        residual_[csc_.csr_pos[q]] -= delta * opp_col[csc_.row_idx[q]];
      }
    }
  }

  if (nonfinite.load()) {
    throw std::runtime_error("non-finite factor update in column " +
                             std::to_string(t));
  }
  if (skipped.load() && !skip_logged_) {
    skip_logged_ = true;
    std::cerr << "puembed: skipped element update(s) with non-positive "
                 "denominator (lambda = 0, rho = 0, empty row)\n";
  }
  refresh_gram_column(word_side, t);
}

void Trainer::update_column(std::size_t t) {
  const std::size_t k = model_.dim();
  if (t > k + 1) throw std::out_of_range("column index out of range");
  if (t < k) {
    update_half(true, t);
    update_half(false, t);
  } else if (t == k) {
    // W' column k is the constant-1 column; only the context biases move.
    update_half(false, t);
  } else {
    // H' column k+1 is the constant-1 column; only the word biases move.
    update_half(true, t);
  }
}

void Trainer::run_epoch() {
  for (std::size_t t = 0; t < model_.dim() + 2; ++t) update_column(t);
}

double Trainer::current_objective() const {
  const std::size_t k2 = model_.aug_dim();
  const double rho = cfg_.weights.rho;
  double pos = 0.0, r2_observed = 0.0;
  for (std::size_t p = 0; p < a_.nnz(); ++p) {
    pos += c_.values[p] * residual_[p] * residual_[p];
    const double r = a_.values[p] - residual_[p];
    r2_observed += r * r;
  }
  double trace = 0.0;
  for (std::size_t s = 0; s < k2 * k2; ++s) trace += gw_[s] * gh_[s];
  return pos + rho * (trace - r2_observed) +
         cfg_.lambda * model_.latent_norm_sq();
}

std::vector<EpochStats> Trainer::run() {
  std::vector<EpochStats> trace;
  trace.reserve(cfg_.epochs);
  double prev_loss = 0.0;
  for (std::size_t epoch = 1; epoch <= cfg_.epochs; ++epoch) {
    const double start = now_seconds();
    if (cfg_.refresh_every > 0 && epoch > 1 &&
        (epoch - 1) % cfg_.refresh_every == 0) {
      refresh_state();
    }
    try {
      run_epoch();
    } catch (const std::runtime_error& e) {
      throw std::runtime_error("epoch " + std::to_string(epoch) + ": " +
                               e.what());
    }
    const double loss = current_objective();
    if (!std::isfinite(loss)) {
      throw std::runtime_error("non-finite loss at epoch " +
                               std::to_string(epoch));
    }
    trace.push_back({epoch, loss, now_seconds() - start});
    if (cfg_.tol > 0.0 && epoch > 1) {
      const double rel = std::abs(prev_loss - loss) / (1.0 + std::abs(loss));
      if (rel < cfg_.tol) break;
    }
    prev_loss = loss;
  }
  return trace;
}

FactorModel train(const SparseMatrix& a, const SparseMatrix& q,
                  const TrainConfig& cfg, std::vector<EpochStats>* trace) {
  if (a.row_ptr != q.row_ptr || a.col_idx != q.col_idx) {
    throw std::invalid_argument("train: pattern(A) != pattern(Q)");
  }
  const SparseMatrix weights = weight_matrix(q, cfg.weights);
  Trainer trainer(a, weights, cfg);
  auto stats = trainer.run();
  if (trace) *trace = std::move(stats);
  return std::move(trainer.model());
}

namespace {

constexpr std::array<char, 4> kModelMagic = {'P', 'U', 'F', 'M'};
constexpr std::uint32_t kModelVersion = 1;

}  // namespace

void save_model(const FactorModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.write(kModelMagic.data(), 4);
  out.write(reinterpret_cast<const char*>(&kModelVersion), 4);
  const std::uint64_t m = model.word_count(), n = model.context_count(),
                      k = model.dim();
  out.write(reinterpret_cast<const char*>(&m), 8);
  out.write(reinterpret_cast<const char*>(&n), 8);
  out.write(reinterpret_cast<const char*>(&k), 8);
  std::vector<double> buf;
  buf.reserve(std::max(m, n) * k);
  // W then H row-major, then the bias vectors.
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t t = 0; t < k; ++t) buf.push_back(model.w_aug(i, t));
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * 8));
  buf.clear();
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t t = 0; t < k; ++t) buf.push_back(model.h_aug(j, t));
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * 8));
  buf.clear();
  for (std::size_t i = 0; i < m; ++i) buf.push_back(model.bias_w(i));
  for (std::size_t j = 0; j < n; ++j) buf.push_back(model.bias_h(j));
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size() * 8));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

FactorModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != kModelMagic) {
    throw std::runtime_error(path.string() + ": bad model magic");
  }
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), 4);
  if (!in || version != kModelVersion) {
    throw std::runtime_error(path.string() + ": unsupported model version");
  }
  std::uint64_t m = 0, n = 0, k = 0;
  in.read(reinterpret_cast<char*>(&m), 8);
  in.read(reinterpret_cast<char*>(&n), 8);
  in.read(reinterpret_cast<char*>(&k), 8);
  if (!in) throw std::runtime_error(path.string() + ": truncated header");

  FactorModel model(m, n, k);
  std::vector<double> buf(std::max(m, n) * std::max<std::uint64_t>(k, 1));
  auto read_block = [&](std::size_t count) {
    in.read(reinterpret_cast<char*>(buf.data()),
            static_cast<std::streamsize>(count * 8));
    if (!in) throw std::runtime_error(path.string() + ": truncated payload");
  };
  read_block(m * k);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t t = 0; t < k; ++t) model.w_aug(i, t) = buf[i * k + t];
  read_block(n * k);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t t = 0; t < k; ++t) model.h_aug(j, t) = buf[j * k + t];
  read_block(m);
  for (std::size_t i = 0; i < m; ++i) model.bias_w(i) = buf[i];
  read_block(n);
  for (std::size_t j = 0; j < n; ++j) model.bias_h(j) = buf[j];
  return model;
}

}  // namespace puembed
