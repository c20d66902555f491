#pragma once

#include <vector>

#include "gsdn/tensor.hpp"

namespace gsdn {

// Compressed sparse row matrix with sorted column indices per row.
struct Csr {
  int rows = 0;
  int cols = 0;
  std::vector<int> indptr;   // length rows+1
  std::vector<int> indices;  // column index per nonzero
  std::vector<double> values;

  struct Triplet {
    int r, c;
    double v;
  };

  static Csr from_triplets(int rows, int cols, std::vector<Triplet> triplets);

  int nnz() const { return static_cast<int>(values.size()); }

  // y = A x for a dense matrix x (columns are signals).
  Tensor multiply_dense(const Tensor& x) const;
  // Sparse-sparse product with explicit nonzero pattern (zeros pruned).
  Csr multiply(const Csr& b) const;
  Csr transposed() const;
  Tensor to_dense() const;
  // Scale every stored value.
  void scale(double s);
};

}  // namespace gsdn
