#pragma once

#include <cstddef>
#include <vector>

namespace g2p {

// Dense row-major matrix of doubles. Small and deliberately dumb; the
// graphs this library targets have a few thousand nodes at most.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double* row(std::size_t r) { return data.data() + r * cols; }

  bool operator==(const Matrix&) const = default;
};

// Compressed sparse rows. col/val hold the entries of row r in the
// half-open range [row_ptr[r], row_ptr[r+1]); columns ascend within a row.
struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_ptr;
  std::vector<std::size_t> col;
  std::vector<double> val;
};

// result = sparse * dense
Matrix multiply(const SparseMatrix& sparse, const Matrix& dense);

// result = sparse^T * x  (scatter pass over the CSR entries)
std::vector<double> transpose_multiply(const SparseMatrix& sparse,
                                       const std::vector<double>& x);

}  // namespace g2p
