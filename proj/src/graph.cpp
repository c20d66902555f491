#include "gsdn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "gsdn/io.hpp"
#include "gsdn/spectral.hpp"

namespace gsdn {

bool Graph::has_self_loops() const {
  for (const Edge& e : edges)
    if (e.i == e.j) return true;
  return false;
}

Graph graph_from_edges(int n, std::vector<Edge> edges) {
  for (Edge& e : edges) {
    if (e.i > e.j) std::swap(e.i, e.j);
    if (e.i < 0 || e.j >= n) throw std::invalid_argument("graph: vertex index out of range");
    if (e.w < 0.0) throw std::invalid_argument("graph: negative edge weight");
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  for (size_t k = 1; k < edges.size(); ++k)
    if (edges[k].i == edges[k - 1].i && edges[k].j == edges[k - 1].j)
      throw std::invalid_argument("graph: duplicate undirected edge");
  std::vector<Csr::Triplet> trip;
  trip.reserve(edges.size() * 2);
  for (const Edge& e : edges) {
    trip.push_back({e.i, e.j, e.w});
    if (e.i != e.j) trip.push_back({e.j, e.i, e.w});
  }
  Graph g;
  g.n = n;
  g.edges = std::move(edges);
  g.adjacency = Csr::from_triplets(n, n, std::move(trip));
  return g;
}

Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_graph: cannot open " + path);
  std::string line;
  std::vector<Edge> edges;
  int declared_n = -1;
  int max_index = -1;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("#N=", 0) == 0) declared_n = std::stoi(line.substr(3));
      continue;
    }
    std::istringstream ss(line);
    long long i, j;
    double w;
    if (!(ss >> i >> j >> w)) {
      throw std::runtime_error("load_graph: parse error at line " + std::to_string(lineno));
    }
    if (i < 0 || j < 0) throw std::runtime_error("load_graph: negative vertex index at line " + std::to_string(lineno));
    if (w < 0.0) throw std::runtime_error("load_graph: negative weight at line " + std::to_string(lineno));
    edges.push_back({static_cast<int>(i), static_cast<int>(j), w});
    max_index = std::max(max_index, static_cast<int>(std::max(i, j)));
  }
  const int n = declared_n >= 0 ? declared_n : max_index + 1;
  if (n <= 0) throw std::runtime_error("load_graph: empty graph and no #N header");
  return graph_from_edges(n, std::move(edges));
}

void save_graph(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_graph: cannot open " + path);
  out << "#N=" << g.n << "\n";
  for (const Edge& e : g.edges) out << e.i << "\t" << e.j << "\t" << format_double(e.w) << "\n";
}

namespace {

// Spectral radius by power iteration; for symmetric matrices the norm ratio
// converges to |lambda_max| even when +rho/-rho pair up.
double spectral_radius_power(const Csr& a, bool* converged) {
  const int n = a.rows;
  Tensor x(n, 1);
  for (int i = 0; i < n; ++i) x(i, 0) = 1.0 + 1e-3 * std::sin(0.7 * i);
  double nx = frob_norm(x);
  for (int i = 0; i < n; ++i) x(i, 0) /= nx;
  double est = 0.0;
  double prev_diff = -1.0;
  for (int it = 0; it < 10000; ++it) {
    Tensor y = a.multiply_dense(x);
    const double ny = frob_norm(y);
    if (ny == 0.0) {
      *converged = true;
      return 0.0;
    }
    const double prev = est;
    est = ny;
    for (int i = 0; i < n; ++i) x(i, 0) = y(i, 0) / ny;
    if (it > 0) {
      const double diff = std::fabs(est - prev);
      if (diff == 0.0) {
        *converged = true;
        return est;
      }
      // Aitken-style remainder estimate: with geometric convergence the
      // outstanding error is ~ diff * q / (1 - q), q = diff_t / diff_{t-1}.
      if (prev_diff > 0.0 && diff < prev_diff) {
        const double q = diff / prev_diff;
        const double err = diff * q / (1.0 - q);
        if (err <= 1e-12 * est) {
          *converged = true;
          return est;
        }
      }
      prev_diff = diff;
    }
  }
  *converged = false;
  return est;
}

}  // namespace

Graph normalize_adjacency(const Graph& g) {
  bool any_nonzero = false;
  for (const Edge& e : g.edges) any_nonzero |= (e.w != 0.0);
  if (g.n == 0 || !any_nonzero) throw std::runtime_error("normalize_adjacency: cannot normalize null graph");
  bool converged = false;
  double rho = spectral_radius_power(g.adjacency, &converged);
  if (!converged || rho <= 0.0) {
    // Exact fallback at desk scale.
    SpectralBasis basis = eig_sym(g.adjacency.to_dense());
    rho = 0.0;
    for (double ev : basis.eigenvalues) rho = std::max(rho, std::fabs(ev));
  }
  if (rho <= 0.0) throw std::runtime_error("normalize_adjacency: cannot normalize null graph");
  Graph out = g;
  for (Edge& e : out.edges) e.w /= rho;
  out.adjacency.scale(1.0 / rho);
  out.norm_scale = g.norm_scale * rho;
  return out;
}

Incidence incidence_matrix(const Graph& g) {
  Incidence inc;
  std::vector<Csr::Triplet> trip;
  int row = 0;
  int skipped = 0;
  for (const Edge& e : g.edges) {  // edges already sorted by (i, j)
    if (e.i == e.j) {
      ++skipped;
      continue;
    }
    const double s = std::sqrt(e.w);
    trip.push_back({row, e.i, -s});
    trip.push_back({row, e.j, s});
    ++row;
  }
  if (skipped > 0)
    std::fprintf(stderr, "incidence_matrix: skipped %d self-loop(s) with no first-order difference\n", skipped);
  inc.delta = Csr::from_triplets(row, g.n, std::move(trip));
  inc.delta_t = inc.delta.transposed();
  inc.skipped_self_loops = skipped;
  return inc;
}

Tensor laplacian_dense(const Graph& g) {
  Tensor l = g.adjacency.to_dense();
  const int n = g.n;
  for (int i = 0; i < n; ++i) {
    double deg = 0.0;
    for (int j = 0; j < n; ++j) deg += l(i, j);
    for (int j = 0; j < n; ++j) l(i, j) = -l(i, j);
    l(i, i) += deg;
  }
  return l;
}

ShiftPowers shift_powers(const Graph& g, int order) {
  if (order < 1) throw std::invalid_argument("shift_powers: order must be >= 1");
  ShiftPowers sp;
  sp.order = order;
  sp.masks.push_back(g.adjacency);
  for (int l = 2; l <= order; ++l) sp.masks.push_back(sp.masks.back().multiply(g.adjacency));
  return sp;
}

}  // namespace gsdn
