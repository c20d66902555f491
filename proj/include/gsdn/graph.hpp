#pragma once

#include <string>
#include <vector>

#include "gsdn/sparse.hpp"
#include "gsdn/tensor.hpp"

namespace gsdn {

struct Edge {
  int i, j;  // i <= j, stored once per undirected pair
  double w;
};

// Undirected weighted graph used as the shift operator. The adjacency is
// symmetric CSR; norm_scale records the |lambda_max| divided out by
// normalize_adjacency (1 for an unnormalized graph).
struct Graph {
  int n = 0;
  std::vector<Edge> edges;  // sorted by (i, j)
  Csr adjacency;
  double norm_scale = 1.0;

  bool has_self_loops() const;
};

Graph graph_from_edges(int n, std::vector<Edge> edges);

// Edge-list TSV: optional first line "#N=<int>", then "i<TAB>j<TAB>w" rows.
Graph load_graph(const std::string& path);
void save_graph(const Graph& g, const std::string& path);

// Divides the adjacency by |lambda_max|, estimated by power iteration with an
// exact eigensolver fallback. Throws on an all-zero adjacency.
Graph normalize_adjacency(const Graph& g);

// M x N first-difference operator: row per non-self-loop edge (j, k), j < k,
// entries -sqrt(w) at j and +sqrt(w) at k. Self-loops are skipped (warning on
// stderr). Satisfies delta^T delta = D - A.
struct Incidence {
  Csr delta;
  Csr delta_t;
  int skipped_self_loops = 0;
};

Incidence incidence_matrix(const Graph& g);

// Graph Laplacian D - A as a dense matrix.
Tensor laplacian_dense(const Graph& g);

// Sparse powers A^1..A^L with explicit nonzero patterns. masks[l-1] is A^l;
// the edge set E^(l) is the CSR pattern itself.
struct ShiftPowers {
  int order = 0;
  std::vector<Csr> masks;

  const Csr& power(int l) const { return masks[static_cast<size_t>(l) - 1]; }
};

ShiftPowers shift_powers(const Graph& g, int order);

}  // namespace gsdn
