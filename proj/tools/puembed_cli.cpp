// Command-line front end: vocab -> cooc -> ppmi -> train -> combine -> eval,
// plus an end-to-end `pipeline` driver and a `grid` sweep over (rho, lambda).
#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "puembed/cooccurrence.hpp"
#include "puembed/corpus.hpp"
#include "puembed/embedding.hpp"
#include "puembed/evaluation.hpp"
#include "puembed/factorizer.hpp"
#include "puembed/oracle.hpp"
#include "puembed/ppmi.hpp"
#include "puembed/sparse_matrix.hpp"
#include "puembed/weighting.hpp"

namespace fs = std::filesystem;
using namespace puembed;

namespace {

struct Options {
  // corpus
  std::string corpus, vocab_path;
  std::uint64_t min_count = 5;
  double subsample_t = 0.0;  // 0 disables
  std::uint64_t max_tokens = 0;  // 0 = no limit
  std::uint64_t seed = 1;
  // cooccurrence
  std::string cooc_path;
  std::size_t window = 15;
  std::string window_weighting = "uniform";
  // ppmi
  std::string ppmi_path;
  double smooth_alpha = 0.75;
  bool drop_clipped = false;
  // weighting + training
  std::string model_path, loss_log;
  std::size_t dim = 300;
  double lambda = 0.00048828125;
  double rho = 0.0625;
  double x_max = 10.0;
  double weight_alpha = 0.75;
  bool allow_indefinite = false;
  std::size_t epochs = 50;
  int threads = 0;
  double tol = 0.0;
  // embedding + evaluation
  std::string emb_path;
  bool no_header = false;
  std::vector<std::string> similarity_files, analogy_files;
  std::string score = "cosine";
  std::string analogy_method = "mul";
  double epsilon = 0.001;
  std::string report_path;
  // pipeline / grid
  std::string outdir;
  bool force = false;
  std::vector<double> rho_list, lambda_list;
  std::string grid_csv, grid_dataset;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

WindowWeighting parse_weighting(const std::string& s) {
  if (s == "uniform") return WindowWeighting::kUniform;
  if (s == "harmonic") return WindowWeighting::kHarmonic;
  throw CLI::ValidationError("--window-weighting", "must be uniform or harmonic");
}

WeightConfig weight_config(const Options& opt) {
  WeightConfig w;
  w.x_max = opt.x_max;
  w.weight_alpha = opt.weight_alpha;
  w.rho = opt.rho;
  w.allow_indefinite = opt.allow_indefinite;
  w.validate();
  return w;
}

TrainConfig train_config(const Options& opt) {
  TrainConfig cfg;
  cfg.dim = opt.dim;
  cfg.lambda = opt.lambda;
  cfg.epochs = opt.epochs;
  cfg.seed = opt.seed;
  cfg.weights = weight_config(opt);
  cfg.threads = opt.threads;
  cfg.tol = opt.tol;
  return cfg;
}

std::vector<TokenId> load_stream(const Options& opt, const Vocabulary& vocab) {
  const auto tokens = tokenize(read_file(opt.corpus));
  auto stream = to_token_stream(tokens, vocab);
  if (opt.subsample_t > 0.0) {
    stream = subsample(stream, vocab, opt.subsample_t, opt.seed);
  }
  if (opt.max_tokens > 0) stream = truncate(stream, opt.max_tokens);
  return stream;
}

void write_loss_log(const std::vector<EpochStats>& trace, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << "epoch,loss,seconds\n";
  for (const auto& s : trace) {
    out << s.epoch << ',' << s.loss << ',' << s.seconds << '\n';
  }
}

// ---- single stages -------------------------------------------------------

int cmd_vocab(const Options& opt) {
  const auto tokens = tokenize(read_file(opt.corpus));
  const auto vocab = build_vocabulary(tokens, opt.min_count);
  save_vocabulary(vocab, opt.vocab_path);
  std::cerr << "vocab: " << vocab.size() << " words, " << vocab.total_tokens
            << " retained tokens\n";
  return 0;
}

int cmd_cooc(const Options& opt) {
  const auto vocab = load_vocabulary(opt.vocab_path);
  const auto stream = load_stream(opt, vocab);
  const auto q = count_cooccurrences(stream, vocab.size(), opt.window,
                                     parse_weighting(opt.window_weighting));
  save_matrix(q, opt.cooc_path, kCoocMagic);
  std::cerr << "cooc: " << q.rows << " x " << q.cols << ", nnz " << q.nnz()
            << '\n';
  return 0;
}

int cmd_ppmi(const Options& opt) {
  const auto q = load_matrix(opt.cooc_path, kCoocMagic);
  const auto a = build_ppmi(q, opt.smooth_alpha, opt.drop_clipped);
  save_matrix(a, opt.ppmi_path, kPpmiMagic);
  std::cerr << "ppmi: nnz " << a.nnz() << '\n';
  return 0;
}

int cmd_train(const Options& opt) {
  const auto a = load_matrix(opt.ppmi_path, kPpmiMagic);
  auto q = load_matrix(opt.cooc_path, kCoocMagic);
  if (opt.drop_clipped) {
    // Pattern(A) is a subset of pattern(Q); restrict Q to it.
    SparseMatrix sub = a;
    for (std::size_t i = 0; i < a.rows; ++i) {
      for (std::uint64_t p = a.row_ptr[i]; p < a.row_ptr[i + 1]; ++p) {
        sub.values[p] = q.at(i, a.col_idx[p]);
      }
    }
    q = std::move(sub);
  }
  std::vector<EpochStats> trace;
  const auto model = train(a, q, train_config(opt), &trace);
  save_model(model, opt.model_path);
  if (!opt.loss_log.empty()) write_loss_log(trace, opt.loss_log);
  if (!trace.empty()) {
    std::cerr << "train: " << trace.size() << " epochs, final loss "
              << trace.back().loss << '\n';
  }
  return 0;
}

int cmd_combine(const Options& opt) {
  const auto model = load_model(opt.model_path);
  const auto vocab = load_vocabulary(opt.vocab_path);
  const auto emb = combine(model, vocab);
  save_text(emb, opt.emb_path, !opt.no_header);
  return 0;
}

struct EvalRow {
  std::string dataset, metric;
  double score, coverage;
};

std::vector<EvalRow> run_eval(const EmbeddingSet& emb, const Options& opt) {
  std::vector<EvalRow> rows;
  const auto score_kind = [&] {
    if (opt.score == "cosine") return SimilarityScore::kCosine;
    if (opt.score == "dot") return SimilarityScore::kDot;
    throw CLI::ValidationError("--score", "must be cosine or dot");
  }();
  for (const auto& file : opt.similarity_files) {
    const auto ds = load_similarity(file);
    const auto res = eval_similarity(emb, ds, score_kind);
    rows.push_back({fs::path(file).stem().string(), "spearman", res.score,
                    res.coverage});
  }
  AnalogyOptions aopts;
  aopts.epsilon = opt.epsilon;
  if (opt.analogy_method == "add") {
    aopts.method = AnalogyMethod::k3CosAdd;
  } else if (opt.analogy_method == "mul") {
    aopts.method = AnalogyMethod::k3CosMul;
  } else {
    throw CLI::ValidationError("--method", "must be add or mul");
  }
  for (const auto& file : opt.analogy_files) {
    const auto ds = load_analogy(file);
    const auto res = eval_analogy(emb, ds, aopts);
    rows.push_back({fs::path(file).stem().string(),
                    opt.analogy_method == "add" ? "3cosadd" : "3cosmul",
                    res.accuracy, res.coverage});
  }
  return rows;
}

void print_eval(const std::vector<EvalRow>& rows, const Options& opt) {
  for (const auto& r : rows) {
    std::cout << r.dataset << "  " << r.metric << "  " << r.score
              << "  coverage " << r.coverage << '\n';
  }
  if (!opt.report_path.empty()) {
    std::ofstream out(opt.report_path);
    if (!out) throw std::runtime_error("cannot open " + opt.report_path);
    out << "dataset,metric,score,coverage\n";
    for (const auto& r : rows) {
      out << r.dataset << ',' << r.metric << ',' << r.score << ','
          << r.coverage << '\n';
    }
  }
}

int cmd_eval(const Options& opt) {
  const auto emb = load_text(opt.emb_path);
  print_eval(run_eval(emb, opt), opt);
  return 0;
}

// ---- pipeline ------------------------------------------------------------

std::string resolved_config_text(const Options& opt) {
  std::ostringstream ss;
  ss.precision(17);
  ss << "corpus = " << opt.corpus << '\n'
     << "min_count = " << opt.min_count << '\n'
     << "subsample_t = " << opt.subsample_t << '\n'
     << "max_tokens = " << opt.max_tokens << '\n'
     << "seed = " << opt.seed << '\n'
     << "window = " << opt.window << '\n'
     << "window_weighting = " << opt.window_weighting << '\n'
     << "smooth_alpha = " << opt.smooth_alpha << '\n'
     << "drop_clipped = " << opt.drop_clipped << '\n'
     << "dim = " << opt.dim << '\n'
     << "lambda = " << opt.lambda << '\n'
     << "rho = " << opt.rho << '\n'
     << "x_max = " << opt.x_max << '\n'
     << "weight_alpha = " << opt.weight_alpha << '\n'
     << "allow_indefinite = " << opt.allow_indefinite << '\n'
     << "epochs = " << opt.epochs << '\n'
     << "tol = " << opt.tol << '\n'
     << "score = " << opt.score << '\n'
     << "method = " << opt.analogy_method << '\n';
  return ss.str();
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

bool up_to_date(const fs::path& output, const std::vector<fs::path>& inputs) {
  if (!fs::exists(output)) return false;
  const auto out_time = fs::last_write_time(output);
  for (const auto& in : inputs) {
    if (!fs::exists(in) || fs::last_write_time(in) > out_time) return false;
  }
  return true;
}

int cmd_pipeline(Options opt) {
  if (opt.corpus.empty()) throw CLI::ValidationError("--corpus is required");
  weight_config(opt);  // validate before any work
  fs::create_directories(opt.outdir);
  const fs::path out(opt.outdir);
  opt.vocab_path = (out / "vocab.tsv").string();
  opt.cooc_path = (out / "cooc.puco").string();
  opt.ppmi_path = (out / "ppmi.pupm").string();
  opt.model_path = (out / "model.pufm").string();
  opt.emb_path = (out / "embeddings.txt").string();
  if (opt.loss_log.empty()) opt.loss_log = (out / "loss.csv").string();
  if (opt.report_path.empty() &&
      !(opt.similarity_files.empty() && opt.analogy_files.empty())) {
    opt.report_path = (out / "report.csv").string();
  }

  // Echo the resolved configuration; a changed config invalidates all stages.
  const std::string cfg_text = resolved_config_text(opt);
  const fs::path cfg_path = out / "config.txt";
  bool config_changed = true;
  if (fs::exists(cfg_path)) {
    config_changed = read_file(cfg_path) != cfg_text;
  }
  if (config_changed) {
    std::ofstream(cfg_path) << cfg_text;
  }
  std::cerr << "pipeline: config hash " << std::hex << fnv1a(cfg_text)
            << std::dec << '\n';
  const bool force = opt.force || config_changed;

  struct Stage {
    const char* name;
    fs::path output;
    std::vector<fs::path> inputs;
    std::function<int()> run;
  };
  const std::vector<Stage> stages{
      {"vocab", opt.vocab_path, {opt.corpus}, [&] { return cmd_vocab(opt); }},
      {"cooc", opt.cooc_path, {opt.corpus, opt.vocab_path},
       [&] { return cmd_cooc(opt); }},
      {"ppmi", opt.ppmi_path, {opt.cooc_path}, [&] { return cmd_ppmi(opt); }},
      {"train", opt.model_path, {opt.ppmi_path, opt.cooc_path},
       [&] { return cmd_train(opt); }},
      {"combine", opt.emb_path, {opt.model_path, opt.vocab_path},
       [&] { return cmd_combine(opt); }},
  };
  for (const auto& stage : stages) {
    if (!force && up_to_date(stage.output, stage.inputs)) {
      std::cerr << "pipeline: " << stage.name << " up to date, skipped\n";
      continue;
    }
    try {
      stage.run();
    } catch (const std::exception& e) {
      std::error_code ec;
      fs::remove(stage.output, ec);  // no partial artifacts
      throw std::runtime_error(std::string("stage ") + stage.name +
                               " failed: " + e.what());
    }
  }
  if (!opt.similarity_files.empty() || !opt.analogy_files.empty()) {
    try {
      cmd_eval(opt);
    } catch (const std::exception& e) {
      throw std::runtime_error(std::string("stage eval failed: ") + e.what());
    }
  }
  return 0;
}

int cmd_grid(Options opt) {
  if (opt.rho_list.empty() || opt.lambda_list.empty()) {
    throw CLI::ValidationError("--rho-list and --lambda-list are required");
  }
  if (opt.similarity_files.empty() && opt.analogy_files.empty()) {
    throw CLI::ValidationError("grid needs at least one evaluation dataset");
  }
  fs::create_directories(opt.outdir);
  const fs::path out(opt.outdir);
  if (opt.grid_csv.empty()) opt.grid_csv = (out / "grid.csv").string();

  // Shared artifacts: vocab / cooc / ppmi do not depend on (rho, lambda).
  Options base = opt;
  base.similarity_files.clear();
  base.analogy_files.clear();
  base.vocab_path = (out / "vocab.tsv").string();
  base.cooc_path = (out / "cooc.puco").string();
  base.ppmi_path = (out / "ppmi.pupm").string();
  if (!up_to_date(base.vocab_path, {opt.corpus}) || opt.force) cmd_vocab(base);
  if (!up_to_date(base.cooc_path, {opt.corpus, base.vocab_path}) || opt.force) {
    cmd_cooc(base);
  }
  if (!up_to_date(base.ppmi_path, {base.cooc_path}) || opt.force) {
    cmd_ppmi(base);
  }

  const auto a = load_matrix(base.ppmi_path, kPpmiMagic);
  const auto q = load_matrix(base.cooc_path, kCoocMagic);
  const auto vocab = load_vocabulary(base.vocab_path);

  std::ofstream csv(opt.grid_csv);
  if (!csv) throw std::runtime_error("cannot open " + opt.grid_csv);
  csv << "rho,lambda,dataset,metric,score,coverage\n";
  csv.flush();

  std::set<std::pair<double, double>> seen;
  for (const double rho : opt.rho_list) {
    for (const double lambda : opt.lambda_list) {
      if (!seen.insert({rho, lambda}).second) continue;  // dedup
      Options cell = opt;
      cell.rho = rho;
      cell.lambda = lambda;
      std::cerr << "grid: rho " << rho << " lambda " << lambda << '\n';
      const auto model = train(a, q, train_config(cell), nullptr);
      const auto emb = combine(model, vocab);
      for (const auto& row : run_eval(emb, cell)) {
        csv << rho << ',' << lambda << ',' << row.dataset << ','
            << row.metric << ',' << row.score << ',' << row.coverage << '\n';
        csv.flush();  // interruption loses at most one cell
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PPMI matrix factorization word embeddings with "
               "positive-unlabeled weighting"};
  app.require_subcommand(1);
  Options opt;

  auto add_config = [&](CLI::App* sub) {
    sub->set_config("--config")->configurable(false);
  };
  auto add_corpus_flags = [&](CLI::App* sub) {
    sub->add_option("--min-count", opt.min_count, "Minimum word frequency");
    sub->add_option("--subsample-t", opt.subsample_t,
                    "Frequency threshold t (0 disables subsampling)");
    sub->add_option("--max-tokens", opt.max_tokens,
                    "Truncate the stream (0 = no limit)");
    sub->add_option("--seed", opt.seed, "Master random seed");
  };
  auto add_weight_flags = [&](CLI::App* sub) {
    sub->add_option("--rho", opt.rho, "Weight of unobserved pairs");
    sub->add_option("--x-max", opt.x_max, "Weight saturation count");
    sub->add_option("--weight-alpha", opt.weight_alpha, "Weight exponent");
    sub->add_flag("--allow-indefinite", opt.allow_indefinite,
                  "Permit rho above the (1/x_max)^alpha bound");
  };
  auto add_train_flags = [&](CLI::App* sub) {
    sub->add_option("--dim", opt.dim, "Latent dimension k");
    sub->add_option("--lambda", opt.lambda, "L2 regularization");
    sub->add_option("--epochs", opt.epochs, "Training sweeps");
    sub->add_option("--threads", opt.threads, "Worker threads (0 = default)");
    sub->add_option("--tol", opt.tol, "Relative loss-change early stop");
    sub->add_option("--loss-log", opt.loss_log, "Per-epoch CSV trace");
    add_weight_flags(sub);
  };
  auto add_eval_flags = [&](CLI::App* sub) {
    sub->add_option("--similarity", opt.similarity_files,
                    "Word-similarity dataset file(s)");
    sub->add_option("--analogy", opt.analogy_files, "Analogy dataset file(s)");
    sub->add_option("--score", opt.score, "Similarity score: cosine|dot");
    sub->add_option("--method", opt.analogy_method, "Analogy method: add|mul");
    sub->add_option("--epsilon", opt.epsilon, "3CosMul denominator guard");
    sub->add_option("--report", opt.report_path, "CSV report path");
  };

  auto* vocab = app.add_subcommand("vocab", "Build the vocabulary");
  vocab->add_option("corpus", opt.corpus, "Plain-text corpus")->required();
  vocab->add_option("output", opt.vocab_path, "Vocabulary TSV")->required();
  vocab->add_option("--min-count", opt.min_count, "Minimum word frequency");

  auto* cooc = app.add_subcommand("cooc", "Count co-occurrences");
  cooc->add_option("corpus", opt.corpus)->required();
  cooc->add_option("vocab", opt.vocab_path)->required();
  cooc->add_option("output", opt.cooc_path)->required();
  cooc->add_option("--window", opt.window, "Symmetric window size");
  cooc->add_option("--window-weighting", opt.window_weighting,
                   "uniform|harmonic");
  add_corpus_flags(cooc);

  auto* ppmi = app.add_subcommand("ppmi", "Transform counts to smoothed PPMI");
  ppmi->add_option("cooc", opt.cooc_path)->required();
  ppmi->add_option("output", opt.ppmi_path)->required();
  ppmi->add_option("--smooth-alpha", opt.smooth_alpha,
                   "Context distribution smoothing exponent");
  ppmi->add_flag("--drop-clipped", opt.drop_clipped,
                 "Drop pairs whose PPMI clips to 0");

  auto* train_cmd = app.add_subcommand("train", "Factorize the PPMI matrix");
  train_cmd->add_option("ppmi", opt.ppmi_path)->required();
  train_cmd->add_option("cooc", opt.cooc_path)->required();
  train_cmd->add_option("output", opt.model_path)->required();
  train_cmd->add_option("--seed", opt.seed, "Master random seed");
  train_cmd->add_flag("--drop-clipped", opt.drop_clipped,
                      "Pattern was built with --drop-clipped");
  add_train_flags(train_cmd);

  auto* comb = app.add_subcommand("combine", "Emit text embeddings (w + h)");
  comb->add_option("model", opt.model_path)->required();
  comb->add_option("vocab", opt.vocab_path)->required();
  comb->add_option("output", opt.emb_path)->required();
  comb->add_flag("--no-header", opt.no_header, "Omit the `m k` header line");

  auto* ev = app.add_subcommand("eval", "Score embeddings on datasets");
  ev->add_option("embeddings", opt.emb_path)->required();
  add_eval_flags(ev);

  auto* pipe = app.add_subcommand("pipeline", "Run every stage end to end");
  pipe->add_option("--corpus", opt.corpus, "Plain-text corpus");
  pipe->add_option("--outdir", opt.outdir, "Artifact directory")->required();
  pipe->add_flag("--force", opt.force, "Recompute up-to-date stages");
  pipe->add_option("--window", opt.window, "Symmetric window size");
  pipe->add_option("--window-weighting", opt.window_weighting,
                   "uniform|harmonic");
  pipe->add_option("--smooth-alpha", opt.smooth_alpha,
                   "Context distribution smoothing exponent");
  pipe->add_flag("--drop-clipped", opt.drop_clipped,
                 "Drop pairs whose PPMI clips to 0");
  pipe->add_flag("--no-header", opt.no_header, "Omit embedding header");
  add_corpus_flags(pipe);
  add_train_flags(pipe);
  add_eval_flags(pipe);
  add_config(pipe);

  auto* grid = app.add_subcommand("grid", "Sweep (rho, lambda) and score");
  grid->add_option("--corpus", opt.corpus, "Plain-text corpus");
  grid->add_option("--outdir", opt.outdir, "Artifact directory")->required();
  grid->add_flag("--force", opt.force, "Recompute shared artifacts");
  grid->add_option("--rho-list", opt.rho_list, "Grid rho values")
      ->delimiter(',');
  grid->add_option("--lambda-list", opt.lambda_list, "Grid lambda values")
      ->delimiter(',');
  grid->add_option("--grid-csv", opt.grid_csv, "Result CSV path");
  grid->add_option("--window", opt.window, "Symmetric window size");
  grid->add_option("--smooth-alpha", opt.smooth_alpha, "Smoothing exponent");
  add_corpus_flags(grid);
  add_train_flags(grid);
  add_eval_flags(grid);
  add_config(grid);

  auto* self = app.add_subcommand("selftest", "Run the oracle cross-checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (vocab->parsed()) return cmd_vocab(opt);
    if (cooc->parsed()) return cmd_cooc(opt);
    if (ppmi->parsed()) return cmd_ppmi(opt);
    if (train_cmd->parsed()) return cmd_train(opt);
    if (comb->parsed()) return cmd_combine(opt);
    if (ev->parsed()) return cmd_eval(opt);
    if (pipe->parsed()) return cmd_pipeline(opt);
    if (grid->parsed()) return cmd_grid(opt);
    if (self->parsed()) return puembed::oracle::run_selftest();
  } catch (const std::exception& e) {
    std::cerr << "puembed: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
