#include "gsdn/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gsdn {

Csr Csr::from_triplets(int rows, int cols, std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.r != b.r ? a.r < b.r : a.c < b.c;
  });
  Csr m;
  m.rows = rows;
  m.cols = cols;
  m.indptr.assign(static_cast<size_t>(rows) + 1, 0);
  for (size_t k = 0; k < triplets.size(); ++k) {
    const Triplet& t = triplets[k];
    if (t.r < 0 || t.r >= rows || t.c < 0 || t.c >= cols) throw std::invalid_argument("csr: index out of range");
    if (k > 0 && triplets[k - 1].r == t.r && triplets[k - 1].c == t.c) {
      m.values.back() += t.v;  // merge duplicates
      continue;
    }
    m.indices.push_back(t.c);
    m.values.push_back(t.v);
    m.indptr[t.r + 1] += 1;
  }
  for (int r = 0; r < rows; ++r) m.indptr[r + 1] += m.indptr[r];
  return m;
}

Tensor Csr::multiply_dense(const Tensor& x) const {
  if (x.rows() != cols) throw std::invalid_argument("csr multiply: shape mismatch");
  const int k = x.cols();
  Tensor y(rows, k);
  for (int i = 0; i < rows; ++i) {
    double* yi = y.data() + static_cast<size_t>(i) * k;
    for (int p = indptr[i]; p < indptr[i + 1]; ++p) {
      const double v = values[p];
      const double* xj = x.data() + static_cast<size_t>(indices[p]) * k;
      for (int c = 0; c < k; ++c) yi[c] += v * xj[c];
    }
  }
  return y;
}

Csr Csr::multiply(const Csr& b) const {
  if (cols != b.rows) throw std::invalid_argument("csr multiply: shape mismatch");
  Csr out;
  out.rows = rows;
  out.cols = b.cols;
  out.indptr.assign(static_cast<size_t>(rows) + 1, 0);
  std::vector<double> acc(b.cols, 0.0);
  std::vector<int> touched;
  touched.reserve(b.cols);
  for (int i = 0; i < rows; ++i) {
    for (int p = indptr[i]; p < indptr[i + 1]; ++p) {
      const int j = indices[p];
      const double v = values[p];
      for (int q = b.indptr[j]; q < b.indptr[j + 1]; ++q) {
        const int c = b.indices[q];
        if (acc[c] == 0.0) touched.push_back(c);
        acc[c] += v * b.values[q];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (int c : touched) {
      if (acc[c] != 0.0) {
        out.indices.push_back(c);
        out.values.push_back(acc[c]);
        out.indptr[i + 1] += 1;
      }
      acc[c] = 0.0;
    }
    touched.clear();
  }
  for (int r = 0; r < rows; ++r) out.indptr[r + 1] += out.indptr[r];
  return out;
}

Csr Csr::transposed() const {
  std::vector<Triplet> t;
  t.reserve(values.size());
  for (int i = 0; i < rows; ++i)
    for (int p = indptr[i]; p < indptr[i + 1]; ++p) t.push_back({indices[p], i, values[p]});
  return from_triplets(cols, rows, std::move(t));
}

Tensor Csr::to_dense() const {
  Tensor d(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int p = indptr[i]; p < indptr[i + 1]; ++p) d(i, indices[p]) += values[p];
  return d;
}

void Csr::scale(double s) {
  for (double& v : values) v *= s;
}

}  // namespace gsdn
