#include "gsdn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace gsdn {

std::string Tensor::shape_str() const {
  std::ostringstream ss;
  ss << "(";
  for (int i = 0; i < std::max(ndim_, 2); ++i) {
    if (i) ss << "x";
    ss << shape_[i];
  }
  ss << ")";
  return ss.str();
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows()) {
    throw std::invalid_argument("matmul: shape mismatch " + a.shape_str() + " * " + b.shape_str());
  }
  const int n = a.rows(), k = a.cols(), m = b.cols();
  Tensor y(n, m);
  // ikj order keeps the inner loop contiguous over b and y.
  for (int i = 0; i < n; ++i) {
    const double* ai = a.data() + static_cast<size_t>(i) * k;
    double* yi = y.data() + static_cast<size_t>(i) * m;
    for (int p = 0; p < k; ++p) {
      const double av = ai[p];
      if (av == 0.0) continue;
      const double* bp = b.data() + static_cast<size_t>(p) * m;
      for (int j = 0; j < m; ++j) yi[j] += av * bp[j];
    }
  }
  return y;
}

Tensor transpose(const Tensor& a) {
  Tensor y(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) y(j, i) = a(i, j);
  return y;
}

Tensor operator+(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("tensor add: shape mismatch");
  Tensor y = a;
  for (size_t i = 0; i < y.size(); ++i) y[i] += b[i];
  return y;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("tensor sub: shape mismatch");
  Tensor y = a;
  for (size_t i = 0; i < y.size(); ++i) y[i] -= b[i];
  return y;
}

Tensor operator*(double s, const Tensor& a) {
  Tensor y = a;
  for (size_t i = 0; i < y.size(); ++i) y[i] *= s;
  return y;
}

double dot(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double frob_norm(const Tensor& a) { return std::sqrt(dot(a, a)); }

double max_abs(const Tensor& a) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i]));
  return m;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

Tensor cholesky_solve(const Tensor& spd, const Tensor& b) {
  const int n = spd.rows();
  if (spd.cols() != n || b.rows() != n) throw std::invalid_argument("cholesky_solve: shape mismatch");
  // Lower-triangular factor, in place on a copy.
  Tensor l = spd;
  for (int j = 0; j < n; ++j) {
    double d = l(j, j);
    for (int p = 0; p < j; ++p) d -= l(j, p) * l(j, p);
    if (d <= 0.0 || !std::isfinite(d)) throw std::runtime_error("cholesky_solve: matrix not SPD");
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (int i = j + 1; i < n; ++i) {
      double s = l(i, j);
      for (int p = 0; p < j; ++p) s -= l(i, p) * l(j, p);
      l(i, j) = s / ljj;
    }
  }
  Tensor x = b;
  const int m = b.cols();
  // Forward then backward substitution, all right-hand sides at once.
  for (int i = 0; i < n; ++i) {
    for (int p = 0; p < i; ++p) {
      const double lip = l(i, p);
      for (int c = 0; c < m; ++c) x(i, c) -= lip * x(p, c);
    }
    for (int c = 0; c < m; ++c) x(i, c) /= l(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    for (int p = i + 1; p < n; ++p) {
      const double lpi = l(p, i);
      for (int c = 0; c < m; ++c) x(i, c) -= lpi * x(p, c);
    }
    for (int c = 0; c < m; ++c) x(i, c) /= l(i, i);
  }
  return x;
}

Tensor lu_solve(Tensor a, Tensor b) {
  const int n = a.rows();
  if (a.cols() != n || b.rows() != n) throw std::invalid_argument("lu_solve: shape mismatch");
  const int m = b.cols();
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::fabs(a(r, col)) > std::fabs(a(piv, col))) piv = r;
    if (a(piv, col) == 0.0) throw std::runtime_error("lu_solve: singular matrix");
    if (piv != col) {
      for (int c = 0; c < n; ++c) std::swap(a(col, c), a(piv, c));
      for (int c = 0; c < m; ++c) std::swap(b(col, c), b(piv, c));
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a(r, c) -= f * a(col, c);
      for (int c = 0; c < m; ++c) b(r, c) -= f * b(col, c);
    }
  }
  for (int col = n - 1; col >= 0; --col) {
    for (int c = 0; c < m; ++c) {
      double s = b(col, c);
      for (int p = col + 1; p < n; ++p) s -= a(col, p) * b(p, c);
      b(col, c) = s / a(col, col);
    }
  }
  return b;
}

}  // namespace gsdn
