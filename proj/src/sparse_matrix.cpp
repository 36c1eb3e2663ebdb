#include "puembed/sparse_matrix.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

namespace puembed {

namespace {

constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void write_vec(std::ofstream& out, const std::vector<T>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <typename T>
void read_pod(std::ifstream& in, T& v, const std::filesystem::path& path) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) {
    throw std::runtime_error(path.string() + ": truncated at offset " +
                             std::to_string(in.gcount()));
  }
}

template <typename T>
void read_vec(std::ifstream& in, std::vector<T>& v, std::size_t count,
              const std::filesystem::path& path) {
  v.resize(count);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(count * sizeof(T)));
  if (!in) {
    throw std::runtime_error(path.string() + ": truncated payload at offset " +
                             std::to_string(in.tellg()));
  }
}

}  // namespace

double SparseMatrix::at(std::size_t i, std::size_t j) const {
  const auto begin = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[i]);
  const auto end = col_idx.begin() + static_cast<std::ptrdiff_t>(row_ptr[i + 1]);
  const auto it = std::lower_bound(begin, end, static_cast<std::uint32_t>(j));
  if (it == end || *it != j) return 0.0;
  return values[static_cast<std::size_t>(it - col_idx.begin())];
}

CscIndex build_csc_index(const SparseMatrix& m) {
  CscIndex idx;
  idx.col_ptr.assign(m.cols + 1, 0);
  for (const auto c : m.col_idx) ++idx.col_ptr[c + 1];
  for (std::size_t c = 0; c < m.cols; ++c) idx.col_ptr[c + 1] += idx.col_ptr[c];

  idx.row_idx.resize(m.nnz());
  idx.csr_pos.resize(m.nnz());
  std::vector<std::uint64_t> cursor(idx.col_ptr.begin(), idx.col_ptr.end() - 1);
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::uint64_t p = m.row_ptr[i]; p < m.row_ptr[i + 1]; ++p) {
      const auto c = m.col_idx[p];
      const auto slot = cursor[c]++;
      idx.row_idx[slot] = static_cast<std::uint32_t>(i);
      idx.csr_pos[slot] = p;
    }
  }
  return idx;
}

void save_matrix(const SparseMatrix& m, const std::filesystem::path& path,
                 std::array<char, 4> magic) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out.write(magic.data(), 4);
  write_pod(out, kFormatVersion);
  write_pod(out, static_cast<std::uint64_t>(m.rows));
  write_pod(out, static_cast<std::uint64_t>(m.cols));
  write_pod(out, static_cast<std::uint64_t>(m.nnz()));
  write_vec(out, m.row_ptr);
  write_vec(out, m.col_idx);
  write_vec(out, m.values);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

SparseMatrix load_matrix(const std::filesystem::path& path,
                         std::array<char, 4> expected_magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != expected_magic) {
    throw std::runtime_error(path.string() +
                             ": bad magic bytes at offset 0, expected " +
                             std::string(expected_magic.data(), 4));
  }
  std::uint32_t version = 0;
  read_pod(in, version, path);
  if (version != kFormatVersion) {
    throw std::runtime_error(path.string() + ": unsupported format version " +
                             std::to_string(version));
  }
  std::uint64_t rows = 0, cols = 0, nnz = 0;
  read_pod(in, rows, path);
  read_pod(in, cols, path);
  read_pod(in, nnz, path);

  SparseMatrix m;
  m.rows = rows;
  m.cols = cols;
  read_vec(in, m.row_ptr, rows + 1, path);
  read_vec(in, m.col_idx, nnz, path);
  read_vec(in, m.values, nnz, path);
  if (m.row_ptr.back() != nnz) {
    throw std::runtime_error(path.string() + ": row offsets inconsistent with nnz");
  }
  return m;
}

}  // namespace puembed
