#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace gsdn {

// Dense row-major tensor of doubles, up to 3 dimensions. Most of the code
// treats tensors as matrices (rows x cols); the third dimension is used for
// stacked coefficient blocks (e.g. per-edge K x K' weight matrices).
class Tensor {
 public:
  Tensor() = default;
  Tensor(int rows, int cols) : shape_{rows, cols, 1}, ndim_(2), data_(static_cast<size_t>(rows) * cols, 0.0) {}
  Tensor(int d0, int d1, int d2)
      : shape_{d0, d1, d2}, ndim_(3), data_(static_cast<size_t>(d0) * d1 * d2, 0.0) {}

  static Tensor scalar(double v) {
    Tensor t(1, 1);
    t.data_[0] = v;
    return t;
  }
  static Tensor vector(std::vector<double> v) {
    Tensor t;
    t.shape_ = {static_cast<int>(v.size()), 1, 1};
    t.ndim_ = 2;
    t.data_ = std::move(v);
    return t;
  }
  static Tensor zeros_like(const Tensor& o) {
    Tensor t = o;
    std::fill(t.data_.begin(), t.data_.end(), 0.0);
    return t;
  }

  int rows() const { return shape_[0]; }
  int cols() const { return shape_[1]; }
  int dim(int i) const { return shape_[i]; }
  int ndim() const { return ndim_; }
  size_t size() const { return data_.size(); }
  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * shape_[1] + c]; }
  double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * shape_[1] + c]; }
  double& at3(int i, int j, int k) {
    return data_[(static_cast<size_t>(i) * shape_[1] + j) * shape_[2] + k];
  }
  double at3(int i, int j, int k) const {
    return data_[(static_cast<size_t>(i) * shape_[1] + j) * shape_[2] + k];
  }
  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& raw() { return data_; }
  const std::vector<double>& raw() const { return data_; }

  std::string shape_str() const;

 private:
  std::array<int, 3> shape_{0, 0, 1};
  int ndim_ = 0;
  std::vector<double> data_;
};

// y = a * b for 2-D tensors.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(double s, const Tensor& a);

double dot(const Tensor& a, const Tensor& b);
double frob_norm(const Tensor& a);
double max_abs(const Tensor& a);
double max_abs_diff(const Tensor& a, const Tensor& b);

// Cholesky solve for symmetric positive definite systems; factors once and
// solves for every column of b. Throws if the matrix is not SPD.
Tensor cholesky_solve(const Tensor& spd, const Tensor& b);

// Gaussian elimination with partial pivoting (square systems).
Tensor lu_solve(Tensor a, Tensor b);

}  // namespace gsdn
