#include "g2p/matrix.hpp"

#include <cassert>

namespace g2p {

Matrix multiply(const SparseMatrix& sparse, const Matrix& dense) {
  assert(sparse.cols == dense.rows);
  Matrix out(sparse.rows, dense.cols);
  for (std::size_t r = 0; r < sparse.rows; ++r) {
    double* out_row = out.row(r);
    for (std::size_t e = sparse.row_ptr[r]; e < sparse.row_ptr[r + 1]; ++e) {
      const double w = sparse.val[e];
      const double* in_row = dense.row(sparse.col[e]);
      for (std::size_t c = 0; c < dense.cols; ++c) {
        out_row[c] += w * in_row[c];
      }
    }
  }
  return out;
}

std::vector<double> transpose_multiply(const SparseMatrix& sparse,
                                       const std::vector<double>& x) {
  assert(sparse.rows == x.size());
  std::vector<double> out(sparse.cols, 0.0);
  for (std::size_t r = 0; r < sparse.rows; ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    for (std::size_t e = sparse.row_ptr[r]; e < sparse.row_ptr[r + 1]; ++e) {
      out[sparse.col[e]] += sparse.val[e] * xr;
    }
  }
  return out;
}

}  // namespace g2p
