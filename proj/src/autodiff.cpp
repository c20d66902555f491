#include "gsdn/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace gsdn::ad {

namespace {
constexpr double kBceEps = 1e-12;
}

Var Tape::push(Tensor value, std::vector<int> parents, std::function<void(Tape&)> backprop) {
  Node n;
  n.value = std::move(value);
  n.parents = std::move(parents);
  n.backprop = std::move(backprop);
  n.self = static_cast<int>(nodes_.size());
  for (int p : n.parents) n.requires_grad |= nodes_[p].requires_grad;
  nodes_.push_back(std::move(n));
  return Var{nodes_.back().self};
}

Tensor& Tape::grad_buf(int id) {
  Node& n = nodes_[id];
  if (!n.grad_ready) {
    n.grad = Tensor::zeros_like(n.value);
    n.grad_ready = true;
  }
  return n.grad;
}

void Tape::add_to_grad(int id, const Tensor& g) {
  if (!nodes_[id].requires_grad) return;
  Tensor& buf = grad_buf(id);
  for (size_t i = 0; i < buf.size(); ++i) buf[i] += g[i];
}

Var Tape::constant(Tensor v) { return push(std::move(v), {}, nullptr); }

Var Tape::leaf(Param& p) {
  Var v = push(p.value, {}, nullptr);
  nodes_[v.id].requires_grad = true;
  nodes_[v.id].bound = &p;
  return v;
}

const Tensor& Tape::value(Var v) const { return nodes_.at(v.id).value; }

const Tensor& Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (!n.grad_ready) throw std::runtime_error("autodiff: gradient not computed for node");
  return n.grad;
}

bool Tape::requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

Var Tape::add(Var a, Var b) {
  if (!value(a).same_shape(value(b))) throw std::invalid_argument("autodiff add: shape mismatch");
  Var out = push(value(a) + value(b), {a.id, b.id}, nullptr);
  nodes_[out.id].backprop = [out, a, b](Tape& t) {
    const Tensor& g = t.nodes_[out.id].grad;
    t.add_to_grad(a.id, g);
    t.add_to_grad(b.id, g);
  };
  return out;
}

Var Tape::sub(Var a, Var b) {
  if (!value(a).same_shape(value(b))) throw std::invalid_argument("autodiff sub: shape mismatch");
  Var out = push(value(a) - value(b), {a.id, b.id}, nullptr);
  nodes_[out.id].backprop = [out, a, b](Tape& t) {
    const Tensor& g = t.nodes_[out.id].grad;
    t.add_to_grad(a.id, g);
    if (t.nodes_[b.id].requires_grad) {
      Tensor& gb = t.grad_buf(b.id);
      for (size_t i = 0; i < gb.size(); ++i) gb[i] -= g[i];
    }
  };
  return out;
}

Var Tape::add_rowvec(Var a, Var b) {
  const Tensor& av = value(a);
  const Tensor& bv = value(b);
  if (bv.rows() != 1 || bv.cols() != av.cols()) throw std::invalid_argument("autodiff add_rowvec: shape mismatch");
  Tensor y = av;
  for (int i = 0; i < y.rows(); ++i)
    for (int j = 0; j < y.cols(); ++j) y(i, j) += bv(0, j);
  Var out = push(std::move(y), {a.id, b.id}, nullptr);
  nodes_[out.id].backprop = [out, a, b](Tape& t) {
    const Tensor& g = t.nodes_[out.id].grad;
    t.add_to_grad(a.id, g);
    if (t.nodes_[b.id].requires_grad) {
      Tensor& gb = t.grad_buf(b.id);
      for (int i = 0; i < g.rows(); ++i)
        for (int j = 0; j < g.cols(); ++j) gb(0, j) += g(i, j);
    }
  };
  return out;
}

Var Tape::scale(Var a, double s) {
  Var out = push(s * value(a), {a.id}, nullptr);
  nodes_[out.id].backprop = [out, a, s](Tape& t) {
    const Tensor& g = t.nodes_[out.id].grad;
    if (t.nodes_[a.id].requires_grad) {
      Tensor& ga = t.grad_buf(a.id);
      for (size_t i = 0; i < ga.size(); ++i) ga[i] += s * g[i];
    }
  };
  return out;
}

Var Tape::matmul(Var a, Var b) {
  Var out = push(gsdn::matmul(value(a), value(b)), {a.id, b.id}, nullptr);
  nodes_[out.id].backprop = [out, a, b](Tape& t) {
    const Tensor& g = t.nodes_[out.id].grad;
    if (t.nodes_[a.id].requires_grad)
      t.add_to_grad(a.id, gsdn::matmul(g, gsdn::transpose(t.value(b))));
    if (t.nodes_[b.id].requires_grad)
      t.add_to_grad(b.id, gsdn::matmul(gsdn::transpose(t.value(a)), g));
  };
  return out;
}

Var Tape::transpose(Var a) {
  Var out = push(gsdn::transpose(value(a)), {a.id}, nullptr);
  nodes_[out.id].backprop = [out, a](Tape& t) {
    if (t.nodes_[a.id].requires_grad) t.add_to_grad(a.id, gsdn::transpose(t.nodes_[out.id].grad));
  };
  return out;
}

Var Tape::slice_cols(Var a, int c0, int c1) {
  const Tensor& av = value(a);
  if (c0 < 0 || c1 > av.cols() || c0 >= c1) throw std::invalid_argument("autodiff slice_cols: bad range");
  Tensor y(av.rows(), c1 - c0);
  for (int i = 0; i < av.rows(); ++i)
    for (int j = c0; j < c1; ++j) y(i, j - c0) = av(i, j);
  Var out = push(std::move(y), {a.id}, nullptr);
  nodes_[out.id].backprop = [out, a, c0](Tape& t) {
    if (!t.nodes_[a.id].requires_grad) return;
    const Tensor& g = t.nodes_[out.id].grad;
    Tensor& ga = t.grad_buf(a.id);
    for (int i = 0; i < g.rows(); ++i)
      for (int j = 0; j < g.cols(); ++j) ga(i, c0 + j) += g(i, j);
  };
  return out;
}

Var Tape::tanh(Var a) {
  Tensor y = value(a);
  for (size_t i = 0; i < y.size(); ++i) y[i] = std::tanh(y[i]);
  Var out = push(std::move(y), {a.id}, nullptr);
  nodes_[out.id].backprop = [out, a](Tape& t) {
    if (!t.nodes_[a.id].requires_grad) return;
    const Tensor& g = t.nodes_[out.id].grad;
    const Tensor& y = t.nodes_[out.id].value;
    Tensor& ga = t.grad_buf(a.id);
    for (size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * (1.0 - y[i] * y[i]);
  };
  return out;
}

Var Tape::relu(Var a) {
  const Tensor& av = value(a);
  kink_margins_.push_back(av);
  Tensor y = av;
  for (size_t i = 0; i < y.size(); ++i) y[i] = y[i] > 0.0 ? y[i] : 0.0;
  Var out = push(std::move(y), {a.id}, nullptr);
  nodes_[out.id].backprop = [out, a](Tape& t) {
    if (!t.nodes_[a.id].requires_grad) return;
    const Tensor& g = t.nodes_[out.id].grad;
    const Tensor& x = t.value(a);
    Tensor& ga = t.grad_buf(a.id);
    for (size_t i = 0; i < ga.size(); ++i)
      if (x[i] > 0.0) ga[i] += g[i];
  };
  return out;
}

Var Tape::sigmoid(Var a) {
  Tensor y = value(a);
  for (size_t i = 0; i < y.size(); ++i) y[i] = 1.0 / (1.0 + std::exp(-y[i]));
  Var out = push(std::move(y), {a.id}, nullptr);
  nodes_[out.id].backprop = [out, a](Tape& t) {
    if (!t.nodes_[a.id].requires_grad) return;
    const Tensor& g = t.nodes_[out.id].grad;
    const Tensor& y = t.nodes_[out.id].value;
    Tensor& ga = t.grad_buf(a.id);
    for (size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * y[i] * (1.0 - y[i]);
  };
  return out;
}

namespace {

Tensor soft_threshold_forward(const Tensor& x, double alpha) {
  Tensor y = x;
  for (size_t i = 0; i < y.size(); ++i) {
    const double v = y[i];
    y[i] = v > alpha ? v - alpha : (v < -alpha ? v + alpha : 0.0);
  }
  return y;
}

}  // namespace

Var Tape::soft_threshold(Var a, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("soft_threshold: alpha must be >= 0");
  const Tensor& av = value(a);
  Tensor margins = av;
  for (size_t i = 0; i < margins.size(); ++i) margins[i] = std::fabs(av[i]) - alpha;
  kink_margins_.push_back(std::move(margins));
  Var out = push(soft_threshold_forward(av, alpha), {a.id}, nullptr);
  nodes_[out.id].backprop = [out, a, alpha](Tape& t) {
    if (!t.nodes_[a.id].requires_grad) return;
    const Tensor& g = t.nodes_[out.id].grad;
    const Tensor& x = t.value(a);
    Tensor& ga = t.grad_buf(a.id);
    // Subgradient: 1 outside the dead zone, 0 on |x| <= alpha.
    for (size_t i = 0; i < ga.size(); ++i)
      if (std::fabs(x[i]) > alpha) ga[i] += g[i];
  };
  return out;
}

Var Tape::soft_threshold(Var a, Var alpha) {
  const Tensor& av = value(a);
  const Tensor& alv = value(alpha);
  if (alv.size() != 1) throw std::invalid_argument("soft_threshold: trainable alpha must be scalar");
  const double al = alv[0];
  Tensor margins = av;
  for (size_t i = 0; i < margins.size(); ++i) margins[i] = std::fabs(av[i]) - al;
  kink_margins_.push_back(std::move(margins));
  Var out = push(soft_threshold_forward(av, al), {a.id, alpha.id}, nullptr);
  nodes_[out.id].backprop = [out, a, alpha, al](Tape& t) {
    const Tensor& g = t.nodes_[out.id].grad;
    const Tensor& x = t.value(a);
    const bool need_a = t.nodes_[a.id].requires_grad;
    const bool need_al = t.nodes_[alpha.id].requires_grad;
    double galpha = 0.0;
    Tensor* ga = need_a ? &t.grad_buf(a.id) : nullptr;
    for (size_t i = 0; i < x.size(); ++i) {
      if (x[i] > al) {
        if (ga) (*ga)[i] += g[i];
        galpha -= g[i];
      } else if (x[i] < -al) {
        if (ga) (*ga)[i] += g[i];
        galpha += g[i];
      }
    }
    if (need_al) t.grad_buf(alpha.id)[0] += galpha;
  };
  return out;
}

Var Tape::sum(Var a) {
  double s = 0.0;
  const Tensor& av = value(a);
  for (size_t i = 0; i < av.size(); ++i) s += av[i];
  Var out = push(Tensor::scalar(s), {a.id}, nullptr);
  nodes_[out.id].backprop = [out, a](Tape& t) {
    if (!t.nodes_[a.id].requires_grad) return;
    const double g = t.nodes_[out.id].grad[0];
    Tensor& ga = t.grad_buf(a.id);
    for (size_t i = 0; i < ga.size(); ++i) ga[i] += g;
  };
  return out;
}

Var Tape::frobenius_sq(Var a) {
  const Tensor& av = value(a);
  Var out = push(Tensor::scalar(dot(av, av)), {a.id}, nullptr);
  nodes_[out.id].backprop = [out, a](Tape& t) {
    if (!t.nodes_[a.id].requires_grad) return;
    const double g = t.nodes_[out.id].grad[0];
    const Tensor& x = t.value(a);
    Tensor& ga = t.grad_buf(a.id);
    for (size_t i = 0; i < ga.size(); ++i) ga[i] += 2.0 * g * x[i];
  };
  return out;
}

Var Tape::binary_cross_entropy(Var pred, const Tensor& target) {
  const Tensor& pv = value(pred);
  if (!pv.same_shape(target)) throw std::invalid_argument("binary_cross_entropy: shape mismatch");
  double loss = 0.0;
  for (size_t i = 0; i < pv.size(); ++i) {
    const double p = std::min(std::max(pv[i], kBceEps), 1.0 - kBceEps);
    loss -= target[i] * std::log(p) + (1.0 - target[i]) * std::log(1.0 - p);
  }
  loss /= static_cast<double>(pv.size());
  Var out = push(Tensor::scalar(loss), {pred.id}, nullptr);
  Tensor tgt = target;
  nodes_[out.id].backprop = [out, pred, tgt = std::move(tgt)](Tape& t) {
    if (!t.nodes_[pred.id].requires_grad) return;
    const double g = t.nodes_[out.id].grad[0];
    const Tensor& p = t.value(pred);
    Tensor& gp = t.grad_buf(pred.id);
    const double inv_n = 1.0 / static_cast<double>(p.size());
    for (size_t i = 0; i < gp.size(); ++i) {
      const double pc = std::min(std::max(p[i], kBceEps), 1.0 - kBceEps);
      gp[i] += g * inv_n * (-(tgt[i] / pc) + (1.0 - tgt[i]) / (1.0 - pc));
    }
  };
  return out;
}

Var Tape::sparse_weighted_aggregate(const Csr& mask, Var w, Var x) {
  const Tensor& xv = value(x);
  if (xv.rows() != mask.cols) throw std::invalid_argument("sparse_weighted_aggregate: shape mismatch");
  if (w.valid() && static_cast<int>(value(w).size()) != mask.nnz())
    throw std::invalid_argument("sparse_weighted_aggregate: weight count must match mask nonzeros");
  const int k = xv.cols();
  Tensor y(mask.rows, k);
  const double* wv = w.valid() ? value(w).data() : nullptr;
  for (int r = 0; r < mask.rows; ++r) {
    double* yr = y.data() + static_cast<size_t>(r) * k;
    for (int e = mask.indptr[r]; e < mask.indptr[r + 1]; ++e) {
      const double coef = wv ? mask.values[e] * wv[e] : mask.values[e];
      const double* xc = xv.data() + static_cast<size_t>(mask.indices[e]) * k;
      for (int c = 0; c < k; ++c) yr[c] += coef * xc[c];
    }
  }
  std::vector<int> parents = w.valid() ? std::vector<int>{w.id, x.id} : std::vector<int>{x.id};
  Var out = push(std::move(y), std::move(parents), nullptr);
  const Csr* mp = &mask;
  nodes_[out.id].backprop = [out, w, x, mp](Tape& t) {
    const Tensor& g = t.nodes_[out.id].grad;
    const Tensor& xv = t.value(x);
    const int k = xv.cols();
    const bool need_w = w.valid() && t.nodes_[w.id].requires_grad;
    const bool need_x = t.nodes_[x.id].requires_grad;
    Tensor* gw = need_w ? &t.grad_buf(w.id) : nullptr;
    Tensor* gx = need_x ? &t.grad_buf(x.id) : nullptr;
    const double* wv = w.valid() ? t.value(w).data() : nullptr;
    for (int r = 0; r < mp->rows; ++r) {
      const double* gr = g.data() + static_cast<size_t>(r) * k;
      for (int e = mp->indptr[r]; e < mp->indptr[r + 1]; ++e) {
        const int c = mp->indices[e];
        const double a = mp->values[e];
        const double* xc = xv.data() + static_cast<size_t>(c) * k;
        if (gw) {
          double s = 0.0;
          for (int j = 0; j < k; ++j) s += gr[j] * xc[j];
          (*gw)[e] += a * s;
        }
        if (gx) {
          const double coef = wv ? a * wv[e] : a;
          double* gxc = gx->data() + static_cast<size_t>(c) * k;
          for (int j = 0; j < k; ++j) gxc[j] += coef * gr[j];
        }
      }
    }
  };
  return out;
}

Var Tape::edge_matrix_aggregate(const Csr& mask, Var w, Var x, int out_channels) {
  const Tensor& xv = value(x);
  const Tensor& wv = value(w);
  const int k = xv.cols();
  if (xv.rows() != mask.cols) throw std::invalid_argument("edge_matrix_aggregate: shape mismatch");
  if (wv.rows() != mask.nnz() || wv.cols() != k * out_channels)
    throw std::invalid_argument("edge_matrix_aggregate: per-edge block shape mismatch");
  Tensor y(mask.rows, out_channels);
  for (int r = 0; r < mask.rows; ++r) {
    double* yr = y.data() + static_cast<size_t>(r) * out_channels;
    for (int e = mask.indptr[r]; e < mask.indptr[r + 1]; ++e) {
      const double a = mask.values[e];
      const double* xc = xv.data() + static_cast<size_t>(mask.indices[e]) * k;
      const double* we = wv.data() + static_cast<size_t>(e) * k * out_channels;
      for (int ki = 0; ki < k; ++ki) {
        const double xa = a * xc[ki];
        const double* wrow = we + static_cast<size_t>(ki) * out_channels;
        for (int ko = 0; ko < out_channels; ++ko) yr[ko] += xa * wrow[ko];
      }
    }
  }
  Var out = push(std::move(y), {w.id, x.id}, nullptr);
  const Csr* mp = &mask;
  nodes_[out.id].backprop = [out, w, x, mp, out_channels](Tape& t) {
    const Tensor& g = t.nodes_[out.id].grad;
    const Tensor& xv = t.value(x);
    const Tensor& wv = t.value(w);
    const int k = xv.cols();
    const bool need_w = t.nodes_[w.id].requires_grad;
    const bool need_x = t.nodes_[x.id].requires_grad;
    Tensor* gw = need_w ? &t.grad_buf(w.id) : nullptr;
    Tensor* gx = need_x ? &t.grad_buf(x.id) : nullptr;
    for (int r = 0; r < mp->rows; ++r) {
      const double* gr = g.data() + static_cast<size_t>(r) * out_channels;
      for (int e = mp->indptr[r]; e < mp->indptr[r + 1]; ++e) {
        const int c = mp->indices[e];
        const double a = mp->values[e];
        const double* xc = xv.data() + static_cast<size_t>(c) * k;
        if (gw) {
          double* gwe = gw->data() + static_cast<size_t>(e) * k * out_channels;
          for (int ki = 0; ki < k; ++ki) {
            const double xa = a * xc[ki];
            for (int ko = 0; ko < out_channels; ++ko) gwe[ki * out_channels + ko] += xa * gr[ko];
          }
        }
        if (gx) {
          const double* we = wv.data() + static_cast<size_t>(e) * k * out_channels;
          double* gxc = gx->data() + static_cast<size_t>(c) * k;
          for (int ki = 0; ki < k; ++ki) {
            double s = 0.0;
            for (int ko = 0; ko < out_channels; ++ko) s += we[ki * out_channels + ko] * gr[ko];
            gxc[ki] += a * s;
          }
        }
      }
    }
  };
  return out;
}

Var Tape::dense_mul(const Tensor& m, Var x) {
  Var out = push(gsdn::matmul(m, value(x)), {x.id}, nullptr);
  Tensor mt = gsdn::transpose(m);
  nodes_[out.id].backprop = [out, x, mt = std::move(mt)](Tape& t) {
    if (!t.nodes_[x.id].requires_grad) return;
    t.add_to_grad(x.id, gsdn::matmul(mt, t.nodes_[out.id].grad));
  };
  return out;
}

void Tape::backward(Var root) {
  Node& r = nodes_.at(root.id);
  if (r.value.size() != 1) throw std::invalid_argument("backward: root must be scalar");
  grad_buf(root.id)[0] = 1.0;
  for (int id = root.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.grad_ready || !n.requires_grad) continue;
    if (n.backprop) n.backprop(*this);
    if (n.bound) {
      for (size_t i = 0; i < n.grad.size(); ++i) n.bound->grad[i] += n.grad[i];
    }
  }
}

Adam::Adam(std::vector<Param*> params, AdamConfig cfg) : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (Param* p : params_) {
    m_.push_back(Tensor::zeros_like(p->value));
    v_.push_back(Tensor::zeros_like(p->value));
  }
}

void Adam::zero_grad() {
  for (Param* p : params_) p->zero_grad();
}

void Adam::step() {
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (size_t k = 0; k < params_.size(); ++k) {
    Param& p = *params_[k];
    for (size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      if (!std::isfinite(g))
        throw std::runtime_error("adam: non-finite gradient in parameter '" + p.name + "' at step " +
                                 std::to_string(step_));
      m_[k][i] = cfg_.beta1 * m_[k][i] + (1.0 - cfg_.beta1) * g;
      v_[k][i] = cfg_.beta2 * v_[k][i] + (1.0 - cfg_.beta2) * g * g;
      const double mhat = m_[k][i] / bc1;
      const double vhat = v_[k][i] / bc2;
      p.value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

}  // namespace gsdn::ad
