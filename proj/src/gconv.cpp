#include "gsdn/gconv.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gsdn {

Tensor fixed_graph_convolution(const FilterCoeffs& h, const ShiftPowers& powers, const Tensor& x) {
  if (h.length() < 1) throw std::invalid_argument("fixed_graph_convolution: empty filter");
  if (powers.order < h.length()) throw std::invalid_argument("fixed_graph_convolution: powers.order below filter length");
  Tensor y(x.rows(), x.cols());
  for (int l = 1; l <= h.length(); ++l) {
    if (h.h[l - 1] == 0.0) continue;
    Tensor t = powers.power(l).multiply_dense(x);
    for (size_t i = 0; i < y.size(); ++i) y[i] += h.h[l - 1] * t[i];
  }
  return y;
}

Tensor multichannel_graph_convolution(const Tensor& coeffs, const ShiftPowers& powers, const Tensor& x) {
  if (coeffs.ndim() != 3) throw std::invalid_argument("multichannel_graph_convolution: coeffs must be L x K x K'");
  const int order = coeffs.dim(0), in_ch = coeffs.dim(1), out_ch = coeffs.dim(2);
  if (x.cols() != in_ch) throw std::invalid_argument("multichannel_graph_convolution: channel mismatch");
  if (powers.order < order) throw std::invalid_argument("multichannel_graph_convolution: powers.order below L");
  Tensor y(x.rows(), out_ch);
  Tensor mix(in_ch, out_ch);
  for (int l = 1; l <= order; ++l) {
    for (int k = 0; k < in_ch; ++k)
      for (int k2 = 0; k2 < out_ch; ++k2) mix(k, k2) = coeffs.at3(l - 1, k, k2);
    Tensor t = powers.power(l).multiply_dense(matmul(x, mix));
    for (size_t i = 0; i < y.size(); ++i) y[i] += t[i];
  }
  return y;
}

Tensor edge_set_convolution(const Csr& mask, const Tensor& blocks, const Tensor& x, int out_channels) {
  const int k = x.cols();
  if (blocks.rows() != mask.nnz() || blocks.cols() != k * out_channels)
    throw std::invalid_argument("edge_set_convolution: block shape mismatch");
  Tensor y(mask.rows, out_channels);
  for (int r = 0; r < mask.rows; ++r) {
    for (int e = mask.indptr[r]; e < mask.indptr[r + 1]; ++e) {
      const double a = mask.values[e];
      const int c = mask.indices[e];
      for (int ki = 0; ki < k; ++ki) {
        const double xa = a * x(c, ki);
        for (int ko = 0; ko < out_channels; ++ko) y(r, ko) += xa * blocks(e, ki * out_channels + ko);
      }
    }
  }
  return y;
}

namespace {

Tensor glorot(int rows, int cols, Rng& rng) {
  Tensor w(rows, cols);
  const double bound = std::sqrt(6.0 / (rows + cols));
  for (size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-bound, bound);
  return w;
}

}  // namespace

void KernelMlp::init(int in, int out, Rng& rng, const std::string& name, int hidden_width) {
  in_dim = in;
  out_dim = out;
  hidden = hidden_width;
  w1 = ad::Param(name + ".w1", glorot(in_dim, hidden, rng));
  b1 = ad::Param(name + ".b1", Tensor(1, hidden));
  w2 = ad::Param(name + ".w2", glorot(hidden, hidden, rng));
  b2 = ad::Param(name + ".b2", Tensor(1, hidden));
  w3 = ad::Param(name + ".w3", glorot(hidden, out_dim, rng));
  b3 = ad::Param(name + ".b3", Tensor(1, out_dim));
}

ad::Var KernelMlp::apply(ad::Tape& t, ad::Var inputs) const {
  auto& self = const_cast<KernelMlp&>(*this);
  ad::Var h1 = t.tanh(t.add_rowvec(t.matmul(inputs, t.leaf(self.w1)), t.leaf(self.b1)));
  ad::Var h2 = t.tanh(t.add_rowvec(t.matmul(h1, t.leaf(self.w2)), t.leaf(self.b2)));
  return t.add_rowvec(t.matmul(h2, t.leaf(self.w3)), t.leaf(self.b3));
}

Tensor KernelMlp::evaluate(const Tensor& inputs) const {
  ad::Tape t;
  return t.value(apply(t, t.constant(inputs)));
}

std::vector<ad::Param*> KernelMlp::params() { return {&w1, &b1, &w2, &b2, &w3, &b3}; }

EdgeGeometry edge_geometry(const ShiftPowers& powers, const VertexCoords& coords) {
  EdgeGeometry geom;
  const int p = coords.p;
  for (const Csr& mask : powers.masks) {
    Tensor diffs(mask.nnz(), p);
    for (int r = 0; r < mask.rows; ++r) {
      for (int e = mask.indptr[r]; e < mask.indptr[r + 1]; ++e) {
        const int c = mask.indices[e];
        for (int d = 0; d < p; ++d) diffs(e, d) = coords.coords(c, d) - coords.coords(r, d);
      }
    }
    geom.diffs.push_back(std::move(diffs));
  }
  return geom;
}

Tensor kernel_edge_weights(const KernelMlp& kernel, const VertexCoords& coords, const Csr& mask) {
  if (coords.p != kernel.in_dim) throw std::invalid_argument("kernel_edge_weights: coordinate dimension mismatch");
  Tensor diffs(mask.nnz(), coords.p);
  for (int r = 0; r < mask.rows; ++r)
    for (int e = mask.indptr[r]; e < mask.indptr[r + 1]; ++e)
      for (int d = 0; d < coords.p; ++d) diffs(e, d) = coords.coords(mask.indices[e], d) - coords.coords(r, d);
  return kernel.evaluate(diffs);
}

void EwsConv::init(EwsMode m, int l, int in, int out, int coord_dim, Rng& rng, const std::string& name) {
  mode = m;
  order = l;
  in_ch = in;
  out_ch = out;
  const int kernel_out = mode == EwsMode::full ? order * in_ch * out_ch : order;
  kernel.init(coord_dim, kernel_out, rng, name + ".kernel");
  mixing.clear();
  if (mode == EwsMode::factorized) {
    for (int i = 0; i < order; ++i)
      mixing.emplace_back(name + ".mix" + std::to_string(i + 1), glorot(in_ch, out_ch, rng));
  }
}

ad::Var EwsConv::apply(ad::Tape& t, const ShiftPowers& powers, const EdgeGeometry& geom, ad::Var x) const {
  if (powers.order < order) throw std::invalid_argument("ews_conv: powers.order below L");
  if (t.value(x).cols() != in_ch) throw std::invalid_argument("ews_conv: channel mismatch");
  auto& self = const_cast<EwsConv&>(*this);
  ad::Var y;
  for (int l = 1; l <= order; ++l) {
    const Csr& mask = powers.power(l);
    ad::Var w = kernel.apply(t, t.constant(geom.diffs[static_cast<size_t>(l) - 1]));
    ad::Var yl;
    if (mode == EwsMode::factorized) {
      ad::Var wl = order == 1 ? w : t.slice_cols(w, l - 1, l);
      ad::Var xh = t.matmul(x, t.leaf(self.mixing[static_cast<size_t>(l) - 1]));
      yl = t.sparse_weighted_aggregate(mask, wl, xh);
    } else {
      const int block = in_ch * out_ch;
      ad::Var wl = order == 1 ? w : t.slice_cols(w, (l - 1) * block, l * block);
      yl = t.edge_matrix_aggregate(mask, wl, x, out_ch);
    }
    y = y.valid() ? t.add(y, yl) : yl;
  }
  return y;
}

std::vector<ad::Param*> EwsConv::params() {
  std::vector<ad::Param*> out = kernel.params();
  for (ad::Param& p : mixing) out.push_back(&p);
  return out;
}

Permutation::Permutation(std::vector<int> p) : perm(std::move(p)) {
  std::vector<bool> seen(perm.size(), false);
  for (int v : perm) {
    if (v < 0 || v >= static_cast<int>(perm.size()) || seen[v])
      throw std::invalid_argument("permutation: not a bijection");
    seen[v] = true;
  }
}

Permutation Permutation::identity(int n) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  return Permutation(std::move(p));
}

Permutation Permutation::random(int n, Rng& rng) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  for (int i = n - 1; i > 0; --i) std::swap(p[i], p[rng.below(i + 1)]);
  return Permutation(std::move(p));
}

Permutation Permutation::inverse() const {
  std::vector<int> inv(perm.size());
  for (size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<int>(i);
  return Permutation(std::move(inv));
}

Graph permute_graph(const Permutation& j, const Graph& g) {
  if (j.size() != g.n) throw std::invalid_argument("permute_graph: size mismatch");
  std::vector<Edge> edges = g.edges;
  for (Edge& e : edges) {
    e.i = j.perm[e.i];
    e.j = j.perm[e.j];
  }
  Graph out = graph_from_edges(g.n, std::move(edges));
  out.norm_scale = g.norm_scale;
  return out;
}

Tensor permute_rows(const Permutation& j, const Tensor& x) {
  if (j.size() != x.rows()) throw std::invalid_argument("permute_rows: size mismatch");
  Tensor y(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i)
    for (int c = 0; c < x.cols(); ++c) y(j.perm[i], c) = x(i, c);
  return y;
}

}  // namespace gsdn
