#pragma once

#include <vector>

#include "gsdn/tensor.hpp"

namespace gsdn {

enum class SpectralSource { adjacency, laplacian };

// Full symmetric eigendecomposition. Eigenvalues sorted descending; column i
// of eigenvectors pairs with eigenvalues[i]. Sign convention: in each column
// the entry of largest magnitude is positive (first such entry on ties).
struct SpectralBasis {
  std::vector<double> eigenvalues;
  Tensor eigenvectors;  // N x N orthonormal
  SpectralSource source = SpectralSource::adjacency;
};

// Cyclic Jacobi sweeps; converged when the off-diagonal Frobenius norm drops
// below 1e-12 * ||A||_F, at most 100 sweeps. Throws on asymmetric input or
// non-convergence.
SpectralBasis eig_sym(const Tensor& matrix, SpectralSource source = SpectralSource::adjacency);

// Row i is the first p entries of row i of the eigenvector matrix.
struct VertexCoords {
  int p = 0;
  Tensor coords;  // N x p
};

VertexCoords vertex_coordinates(const SpectralBasis& basis, int p);

// Graph Fourier transform V^T x and its inverse V x.
Tensor gft(const SpectralBasis& basis, const Tensor& x);
Tensor igft(const SpectralBasis& basis, const Tensor& xhat);

// Coefficients h with sum_l h_l lambda^l = 1 for every distinct eigenvalue
// (distinctness tolerance 1e-9). Requires L >= #distinct and a spectrum with
// no eigenvalue within 1e-9 of zero; solved as a minimum-norm least-squares
// problem with residual checked against 1e-8.
std::vector<double> design_rank_preserving_filter(const std::vector<double>& eigenvalues, int filter_length);

}  // namespace gsdn
