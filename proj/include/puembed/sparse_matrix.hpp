#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace puembed {

// Compressed sparse row matrix. Shared by the raw co-occurrence counts
// (strictly positive values), the PPMI transform (values >= 0, explicit
// zeros kept so the pattern matches the counts), and the per-entry
// confidence weights.
struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint64_t> row_ptr;  // rows + 1 offsets
  std::vector<std::uint32_t> col_idx;  // strictly increasing within a row
  std::vector<double> values;

  std::size_t nnz() const { return values.size(); }

  // Stored value at (i, j), 0 if the entry is structural zero.
  double at(std::size_t i, std::size_t j) const;

  bool operator==(const SparseMatrix&) const = default;
};

// Column-major traversal order for a SparseMatrix. csr_pos maps each
// column-order slot back into the CSR arrays so values and residuals live
// in one place.
struct CscIndex {
  std::vector<std::uint64_t> col_ptr;  // cols + 1
  std::vector<std::uint32_t> row_idx;
  std::vector<std::uint64_t> csr_pos;
};

CscIndex build_csc_index(const SparseMatrix& m);

inline constexpr std::array<char, 4> kCoocMagic = {'P', 'U', 'C', 'O'};
inline constexpr std::array<char, 4> kPpmiMagic = {'P', 'U', 'P', 'M'};

// Binary container: magic, version u32, m/n/nnz u64, row offsets u64[],
// column ids u32[], values f64[]; all little-endian.
void save_matrix(const SparseMatrix& m, const std::filesystem::path& path,
                 std::array<char, 4> magic);
SparseMatrix load_matrix(const std::filesystem::path& path,
                         std::array<char, 4> expected_magic);

}  // namespace puembed
