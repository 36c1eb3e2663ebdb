#include "puembed/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace puembed {

namespace {

// Average (fractional) ranks, 1-based.
std::vector<double> ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> r(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
    i = j + 1;
  }
  return r;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  const auto n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
  mx /= n, my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw std::runtime_error("correlation undefined: zero rank variance");
  }
  return sxy / std::sqrt(sxx * syy);
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) out.push_back(tok);
  return out;
}

// Test sets ship mixed-case words; the trained vocabulary is lowercase.
std::string lower(std::string s) {
  for (auto& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

// Row-normalized copy of the embedding matrix; zero rows stay zero.
std::vector<double> unit_rows(const EmbeddingSet& emb) {
  std::vector<double> u(emb.vectors.size());
  for (std::size_t i = 0; i < emb.size(); ++i) {
    const auto v = emb.vector(i);
    double s = 0.0;
    for (const double x : v) s += x * x;
    const double inv = s > 0.0 ? 1.0 / std::sqrt(s) : 0.0;
    for (std::size_t t = 0; t < emb.dim; ++t) u[i * emb.dim + t] = v[t] * inv;
  }
  return u;
}

// Argmax over candidates not in {a, a_star, b}; ties to the lowest id.
std::size_t analogy_argmax(const std::vector<double>& unit, std::size_t dim,
                           std::size_t m, std::size_t ia, std::size_t ias,
                           std::size_t ib, AnalogyMethod method, double eps) {
  const double* va = unit.data() + ia * dim;
  const double* vas = unit.data() + ias * dim;
  const double* vb = unit.data() + ib * dim;
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_id = m;
  for (std::size_t x = 0; x < m; ++x) {
    if (x == ia || x == ias || x == ib) continue;
    const double* vx = unit.data() + x * dim;
    double ca = 0.0, cas = 0.0, cb = 0.0;
    for (std::size_t t = 0; t < dim; ++t) {
      ca += vx[t] * va[t];
      cas += vx[t] * vas[t];
      cb += vx[t] * vb[t];
    }
    double score;
    if (method == AnalogyMethod::k3CosAdd) {
      score = cas - ca + cb;
    } else {
      // Shift cosines to [0, 1] so the product/quotient stays positive.
      score = ((cas + 1.0) / 2.0) * ((cb + 1.0) / 2.0) /
              ((ca + 1.0) / 2.0 + eps);
    }
    if (score > best) {
      best = score;
      best_id = x;
    }
  }
  return best_id;
}

}  // namespace

double spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw std::invalid_argument("spearman: length mismatch");
  }
  if (xs.size() < 2) {
    throw std::runtime_error("spearman undefined for fewer than 2 points");
  }
  const auto rx = ranks(xs);
  const auto ry = ranks(ys);
  return pearson(rx, ry);
}

SimilarityResult eval_similarity(const EmbeddingSet& emb,
                                 const SimilarityDataset& ds,
                                 SimilarityScore score) {
  std::vector<double> predicted, gold;
  for (const auto& pair : ds) {
    const auto it1 = emb.index_of.find(pair.word1);
    const auto it2 = emb.index_of.find(pair.word2);
    if (it1 == emb.index_of.end() || it2 == emb.index_of.end()) continue;
    const double sim = score == SimilarityScore::kCosine
                           ? cosine(emb, it1->second, it2->second)
                           : dot(emb, it1->second, it2->second);
    predicted.push_back(sim);
    gold.push_back(pair.gold);
  }
  if (predicted.size() < 2) {
    throw std::runtime_error("similarity evaluation: fewer than 2 in-vocabulary pairs");
  }
  SimilarityResult res;
  res.kept = predicted.size();
  res.total = ds.size();
  res.coverage = static_cast<double>(res.kept) / static_cast<double>(res.total);
  res.score = spearman(predicted, gold);
  return res;
}

std::optional<std::size_t> solve_analogy(const EmbeddingSet& emb,
                                         const std::string& a,
                                         const std::string& a_star,
                                         const std::string& b,
                                         const AnalogyOptions& opts) {
  const auto ia = emb.index_of.find(a);
  const auto ias = emb.index_of.find(a_star);
  const auto ib = emb.index_of.find(b);
  if (ia == emb.index_of.end() || ias == emb.index_of.end() ||
      ib == emb.index_of.end()) {
    return std::nullopt;
  }
  const auto unit = unit_rows(emb);
  const auto id = analogy_argmax(unit, emb.dim, emb.size(), ia->second,
                                 ias->second, ib->second, opts.method,
                                 opts.epsilon);
  if (id >= emb.size()) return std::nullopt;
  return id;
}

AnalogyResult eval_analogy(const EmbeddingSet& emb, const AnalogyDataset& ds,
                           const AnalogyOptions& opts) {
  if (ds.questions.empty()) {
    throw std::runtime_error("analogy evaluation: empty dataset");
  }
  const auto unit = unit_rows(emb);

  struct Tally {
    std::size_t correct = 0, answered = 0, skipped = 0;
  };
  std::vector<Tally> per_section(std::max<std::size_t>(ds.sections.size(), 1));
  std::vector<std::int8_t> outcome(ds.questions.size());  // -1 skip, 0 wrong, 1 right

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16)
#endif
  for (std::int64_t qi = 0; qi < static_cast<std::int64_t>(ds.questions.size());
       ++qi) {
    const auto& q = ds.questions[static_cast<std::size_t>(qi)];
    const auto ia = emb.index_of.find(q.a);
    const auto ias = emb.index_of.find(q.a_star);
    const auto ib = emb.index_of.find(q.b);
    const auto ibs = emb.index_of.find(q.b_star);
    if (ia == emb.index_of.end() || ias == emb.index_of.end() ||
        ib == emb.index_of.end() || ibs == emb.index_of.end()) {
      outcome[static_cast<std::size_t>(qi)] = -1;
      continue;
    }
    const auto id = analogy_argmax(unit, emb.dim, emb.size(), ia->second,
                                   ias->second, ib->second, opts.method,
                                   opts.epsilon);
    outcome[static_cast<std::size_t>(qi)] = (id == ibs->second) ? 1 : 0;
  }

  for (std::size_t qi = 0; qi < ds.questions.size(); ++qi) {
    auto& tally = per_section[ds.questions[qi].section];
    if (outcome[qi] < 0) {
      ++tally.skipped;
    } else {
      ++tally.answered;
      if (outcome[qi] == 1) ++tally.correct;
    }
  }

  AnalogyResult res{};
  res.total = ds.questions.size();
  for (std::size_t s = 0; s < per_section.size(); ++s) {
    SectionScore sec;
    sec.name = s < ds.sections.size() ? ds.sections[s] : "default";
    sec.correct = per_section[s].correct;
    sec.answered = per_section[s].answered;
    sec.skipped = per_section[s].skipped;
    res.correct += sec.correct;
    res.answered += sec.answered;
    res.sections.push_back(std::move(sec));
  }
  if (res.answered == 0) {
    throw std::runtime_error("analogy evaluation: no answerable questions");
  }
  res.accuracy = static_cast<double>(res.correct) / static_cast<double>(res.answered);
  res.coverage = static_cast<double>(res.answered) / static_cast<double>(res.total);
  return res;
}

SimilarityDataset load_similarity(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  SimilarityDataset ds;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    for (auto& c : line) {
      if (c == '\t' || c == ',') c = ' ';
    }
    const auto fields = split_ws(line);
    if (fields.size() != 3) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected word1 word2 score");
    }
    double gold = 0.0;
    const auto res = std::from_chars(fields[2].data(),
                                     fields[2].data() + fields[2].size(), gold);
    if (res.ec != std::errc{}) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": bad score '" + fields[2] + "'");
    }
    ds.push_back({lower(fields[0]), lower(fields[1]), gold});
  }
  return ds;
}

AnalogyDataset load_analogy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  AnalogyDataset ds;
  std::string line;
  std::size_t lineno = 0;
  std::size_t section = 0;
  bool have_section = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == ':') {
      std::string name = line.substr(1);
      const auto start = name.find_first_not_of(" \t");
      name = start == std::string::npos ? "" : name.substr(start);
      section = ds.sections.size();
      ds.sections.push_back(name);
      have_section = true;
      continue;
    }
    auto fields = split_ws(line);
    if (fields.size() != 4) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected 4 tokens");
    }
    if (!have_section) {
      ds.sections.emplace_back("default");
      have_section = true;
    }
    ds.questions.push_back({lower(std::move(fields[0])),
                            lower(std::move(fields[1])),
                            lower(std::move(fields[2])),
                            lower(std::move(fields[3])), section});
  }
  return ds;
}

}  // namespace puembed
