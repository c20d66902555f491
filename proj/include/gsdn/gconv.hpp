#pragma once

#include <string>
#include <vector>

#include "gsdn/autodiff.hpp"
#include "gsdn/graph.hpp"
#include "gsdn/rng.hpp"
#include "gsdn/spectral.hpp"

namespace gsdn {

// Fixed (non-trainable) polynomial filter coefficients h_1..h_L.
struct FilterCoeffs {
  std::vector<double> h;
  int length() const { return static_cast<int>(h.size()); }
};

// y = sum_l h_l A^l x.
Tensor fixed_graph_convolution(const FilterCoeffs& h, const ShiftPowers& powers, const Tensor& x);

// y^(k') = sum_l sum_k H[l,k,k'] A^l x^(k); coeffs is L x K x K'.
Tensor multichannel_graph_convolution(const Tensor& coeffs, const ShiftPowers& powers, const Tensor& x);

// y = sum_e delta_e X H_e over the stored nonzeros of one shift power; blocks
// is nnz x (K*K'), row e holding the K x K' matrix for nonzero e row-major.
Tensor edge_set_convolution(const Csr& mask, const Tensor& blocks, const Tensor& x, int out_channels);

// Trainable kernel psi_w: coordinate difference (dim p) -> out_dim weights.
// Two tanh hidden layers of width 32, linear output, Glorot-uniform init with
// zero biases.
struct KernelMlp {
  int in_dim = 0, hidden = 32, out_dim = 0;
  ad::Param w1, b1, w2, b2, w3, b3;

  void init(int in_dim, int out_dim, Rng& rng, const std::string& name, int hidden_width = 32);
  ad::Var apply(ad::Tape& tape, ad::Var inputs) const;
  // Non-tape evaluation for inspection and oracles.
  Tensor evaluate(const Tensor& inputs) const;
  std::vector<ad::Param*> params();
};

// Kernel inputs p_j - p_i for every stored nonzero (i, j) of each shift
// power, in CSR order. Fixed once graph and coordinates are fixed.
struct EdgeGeometry {
  std::vector<Tensor> diffs;  // diffs[l-1]: nnz(A^l) x p
};

EdgeGeometry edge_geometry(const ShiftPowers& powers, const VertexCoords& coords);

// psi_w(p_j - p_i) for the nonzeros of one mask; rows follow CSR order.
Tensor kernel_edge_weights(const KernelMlp& kernel, const VertexCoords& coords, const Csr& mask);

enum class EwsMode { full, factorized };

// Edge-weight-sharing graph convolution. Full mode: one kernel output per
// (l, k, k') per edge. Factorized mode: one kernel output per l per edge plus
// a trainable K x K' mixing matrix per l, i.e. Y = sum_l (Psi_l o A^l) X H_l.
struct EwsConv {
  EwsMode mode = EwsMode::factorized;
  int order = 1, in_ch = 1, out_ch = 1;
  KernelMlp kernel;
  std::vector<ad::Param> mixing;  // factorized only, one K x K' per l

  void init(EwsMode mode, int order, int in_ch, int out_ch, int coord_dim, Rng& rng, const std::string& name);
  ad::Var apply(ad::Tape& tape, const ShiftPowers& powers, const EdgeGeometry& geom, ad::Var x) const;
  std::vector<ad::Param*> params();
};

struct Permutation {
  std::vector<int> perm;  // vertex i maps to perm[i]

  explicit Permutation(std::vector<int> p);
  int size() const { return static_cast<int>(perm.size()); }
  static Permutation identity(int n);
  static Permutation random(int n, Rng& rng);
  Permutation inverse() const;
};

Graph permute_graph(const Permutation& j, const Graph& g);
Tensor permute_rows(const Permutation& j, const Tensor& x);

}  // namespace gsdn
