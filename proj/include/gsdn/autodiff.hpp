#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gsdn/sparse.hpp"
#include "gsdn/tensor.hpp"

namespace gsdn::ad {

// Trainable parameter living across epochs. Gradients accumulate additively;
// call zero_grad() (or Adam::zero_grad) between steps.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;

  Param() = default;
  Param(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)), grad(Tensor::zeros_like(value)) {}
  void zero_grad() { std::fill(grad.raw().begin(), grad.raw().end(), 0.0); }
};

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Dynamically built reverse-mode tape over dense tensors. The graph is
// rebuilt every forward pass; node creation order is a topological order, so
// backward() is a single reverse scan from the scalar root.
class Tape {
 public:
  Var constant(Tensor v);
  Var zeros(int rows, int cols) { return constant(Tensor(rows, cols)); }
  Var leaf(Param& p);

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  // a (N x M) plus row vector b (1 x M) broadcast over rows.
  Var add_rowvec(Var a, Var b);
  Var scale(Var a, double s);
  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var slice_cols(Var a, int c0, int c1);
  Var tanh(Var a);
  Var relu(Var a);
  Var sigmoid(Var a);
  Var soft_threshold(Var a, double alpha);
  Var soft_threshold(Var a, Var alpha);  // alpha: trainable 1x1 tensor
  Var sum(Var a);
  Var frobenius_sq(Var a);
  // Mean binary cross-entropy of predictions in (0,1) against a 0/1 target.
  Var binary_cross_entropy(Var pred, const Tensor& target);

  // y[r,:] = sum_e mask.val[e] * w[e] * x[c(e),:] over nonzeros e=(r,c) of
  // mask; w is one scalar per stored nonzero. Pass w = {} for plain mask * x.
  // The mask must outlive the tape.
  Var sparse_weighted_aggregate(const Csr& mask, Var w, Var x);
  Var sparse_aggregate(const Csr& mask, Var x) { return sparse_weighted_aggregate(mask, Var{}, x); }
  // y[r,:] += mask.val[e] * x[c(e),:] @ W_e where row e of w holds a K x K'
  // block (row-major); the per-edge-matrix form of the convolution.
  Var edge_matrix_aggregate(const Csr& mask, Var w, Var x, int out_channels);
  // y = m @ x with a fixed dense operator m.
  Var dense_mul(const Tensor& m, Var x);

  void backward(Var root);

  const Tensor& value(Var v) const;
  const Tensor& grad(Var v) const;
  bool requires_grad(Var v) const;
  int size() const { return static_cast<int>(nodes_.size()); }

  // Signed distances to the nearest nonlinearity kink (|x|-alpha for soft
  // threshold, x for relu), recorded per forward pass. The finite-difference
  // checker compares sign patterns between perturbed passes to detect
  // parameters whose perturbation crosses a kink.
  const std::vector<Tensor>& kink_margins() const { return kink_margins_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool grad_ready = false;
    std::vector<int> parents;
    std::function<void(Tape&)> backprop;
    Param* bound = nullptr;
    int self = -1;
  };

  Var push(Tensor value, std::vector<int> parents, std::function<void(Tape&)> backprop);
  Tensor& grad_buf(int id);
  void add_to_grad(int id, const Tensor& g);

  std::vector<Node> nodes_;
  std::vector<Tensor> kink_margins_;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard Adam with bias correction over a fixed parameter set.
class Adam {
 public:
  Adam(std::vector<Param*> params, AdamConfig cfg = {});
  void zero_grad();
  // Applies one update from the accumulated gradients. Throws on non-finite
  // gradients, naming the offending parameter.
  void step();
  long steps_taken() const { return step_; }

 private:
  std::vector<Param*> params_;
  AdamConfig cfg_;
  std::vector<Tensor> m_, v_;
  long step_ = 0;
};

}  // namespace gsdn::ad
