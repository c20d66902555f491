#pragma once

// Test-only brute-force oracles. These deliberately avoid the library's CSR
// and convolution code paths so the two routes stay independent.

#include <cmath>
#include <vector>

#include "gsdn/graph.hpp"
#include "gsdn/rng.hpp"
#include "gsdn/tensor.hpp"

namespace oracles {

using Dense = std::vector<std::vector<double>>;

inline Dense dense_from_graph(const gsdn::Graph& g) {
  Dense a(g.n, std::vector<double>(g.n, 0.0));
  for (const gsdn::Edge& e : g.edges) {
    a[e.i][e.j] += e.w;
    if (e.i != e.j) a[e.j][e.i] += e.w;
  }
  return a;
}

inline Dense naive_matmul(const Dense& a, const Dense& b) {
  const size_t n = a.size(), m = b[0].size(), k = b.size();
  Dense y(n, std::vector<double>(m, 0.0));
  for (size_t i = 0; i < n; ++i)
    for (size_t p = 0; p < k; ++p)
      for (size_t j = 0; j < m; ++j) y[i][j] += a[i][p] * b[p][j];
  return y;
}

inline Dense naive_matpow(const Dense& a, int power) {
  Dense y = a;
  for (int l = 2; l <= power; ++l) y = naive_matmul(y, a);
  return y;
}

inline double max_abs_diff(const Dense& a, const gsdn::Tensor& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i)
    for (size_t j = 0; j < a[i].size(); ++j)
      m = std::max(m, std::fabs(a[i][j] - b(static_cast<int>(i), static_cast<int>(j))));
  return m;
}

// y^(k') = sum_l sum_k H[l,k,k'] (A^l x^(k)), expanded entry by entry.
inline gsdn::Tensor brute_force_multichannel(const Dense& adjacency, const gsdn::Tensor& coeffs,
                                             const gsdn::Tensor& x) {
  const int order = coeffs.dim(0), in_ch = coeffs.dim(1), out_ch = coeffs.dim(2);
  const int n = static_cast<int>(adjacency.size());
  gsdn::Tensor y(n, out_ch);
  for (int l = 1; l <= order; ++l) {
    const Dense al = naive_matpow(adjacency, l);
    for (int k = 0; k < in_ch; ++k) {
      for (int i = 0; i < n; ++i) {
        double conv = 0.0;
        for (int j = 0; j < n; ++j) conv += al[i][j] * x(j, k);
        for (int k2 = 0; k2 < out_ch; ++k2) y(i, k2) += coeffs.at3(l - 1, k, k2) * conv;
      }
    }
  }
  return y;
}

// Connected random graph with uniform weights, for property tests.
inline gsdn::Graph random_test_graph(int n, double edge_prob, uint64_t seed, bool weighted = true) {
  gsdn::Rng rng(seed);
  std::vector<gsdn::Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, weighted ? rng.uniform(0.1, 1.0) : 1.0});
  for (int i = 0; i < n; ++i)
    for (int j = i + 2; j < n; ++j)
      if (rng.uniform() < edge_prob) edges.push_back({i, j, weighted ? rng.uniform(0.1, 1.0) : 1.0});
  return gsdn::graph_from_edges(n, std::move(edges));
}

}  // namespace oracles
