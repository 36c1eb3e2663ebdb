#include "puembed/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace puembed {

namespace {

std::string render(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return {buf, res.ptr};
}

double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::runtime_error(where + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

double norm(std::span<const double> v) {
  double s = 0.0;
  for (const double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

EmbeddingSet combine(const FactorModel& model, const Vocabulary& vocab) {
  if (model.word_count() != model.context_count()) {
    throw std::invalid_argument("combine requires a shared vocabulary (m == n)");
  }
  if (model.word_count() != vocab.size()) {
    throw std::invalid_argument("combine: model/vocabulary size mismatch");
  }
  EmbeddingSet emb;
  emb.words = vocab.words;
  emb.index_of.reserve(vocab.size());
  for (std::size_t id = 0; id < vocab.size(); ++id) emb.index_of[emb.words[id]] = id;
  emb.dim = model.dim();
  emb.vectors.resize(vocab.size() * emb.dim);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    for (std::size_t t = 0; t < emb.dim; ++t) {
      emb.vectors[i * emb.dim + t] = model.w_aug(i, t) + model.h_aug(i, t);
    }
  }
  return emb;
}

void save_text(const EmbeddingSet& emb, const std::filesystem::path& path,
               bool header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  if (header) out << emb.size() << ' ' << emb.dim << '\n';
  for (std::size_t i = 0; i < emb.size(); ++i) {
    out << emb.words[i];
    const auto v = emb.vector(i);
    for (const double x : v) out << ' ' << render(x);
    out << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

EmbeddingSet load_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  EmbeddingSet emb;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest = line;
    while (!rest.empty()) {
      const auto sp = rest.find(' ');
      fields.push_back(rest.substr(0, sp));
      rest = sp == std::string_view::npos ? std::string_view{}
                                          : rest.substr(sp + 1);
    }
    const std::string where = path.string() + ":" + std::to_string(lineno);
    // Optional "m k" header: two numeric fields on the first line.
    if (first && fields.size() == 2 &&
        fields[0].find_first_not_of("0123456789") == std::string_view::npos &&
        fields[1].find_first_not_of("0123456789") == std::string_view::npos) {
      first = false;
      continue;
    }
    first = false;
    if (fields.size() < 2) {
      throw std::runtime_error(where + ": expected word and vector");
    }
    const std::size_t dim = fields.size() - 1;
    if (emb.dim == 0) {
      emb.dim = dim;
    } else if (dim != emb.dim) {
      throw std::runtime_error(where + ": dimension " + std::to_string(dim) +
                               " != " + std::to_string(emb.dim));
    }
    emb.index_of[std::string(fields[0])] = emb.words.size();
    emb.words.emplace_back(fields[0]);
    for (std::size_t t = 1; t < fields.size(); ++t) {
      emb.vectors.push_back(parse_double(fields[t], where));
    }
  }
  return emb;
}

double dot(const EmbeddingSet& emb, std::size_t a, std::size_t b) {
  const auto va = emb.vector(a), vb = emb.vector(b);
  double s = 0.0;
  for (std::size_t t = 0; t < emb.dim; ++t) s += va[t] * vb[t];
  return s;
}

double cosine(const EmbeddingSet& emb, std::size_t a, std::size_t b) {
  const double na = norm(emb.vector(a)), nb = norm(emb.vector(b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(emb, a, b) / (na * nb);
}

std::vector<std::size_t> nearest(
    const EmbeddingSet& emb, std::span<const double> query, std::size_t top_n,
    const std::unordered_set<std::size_t>& exclude) {
  const double qn = norm(query);
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(emb.size());
  for (std::size_t id = 0; id < emb.size(); ++id) {
    if (exclude.contains(id)) continue;
    const auto v = emb.vector(id);
    const double vn = norm(v);
    double sim = 0.0;
    if (qn != 0.0 && vn != 0.0) {
      double d = 0.0;
      for (std::size_t t = 0; t < emb.dim; ++t) d += v[t] * query[t];
      sim = d / (qn * vn);
    }
    scored.emplace_back(sim, id);
  }
  const std::size_t n = std::min(top_n, scored.size());
  std::partial_sort(scored.begin(),
                    scored.begin() + static_cast<std::ptrdiff_t>(n),
                    scored.end(), [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(scored[i].second);
  return out;
}

}  // namespace puembed
