#include "gsdn/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include "gsdn/rng.hpp"
#include "gsdn/spectral.hpp"

namespace gsdn {

namespace {

std::vector<int> components(int n, const Csr& adj) {
  std::vector<int> comp(n, -1);
  int c = 0;
  for (int start = 0; start < n; ++start) {
    if (comp[start] >= 0) continue;
    std::queue<int> q;
    q.push(start);
    comp[start] = c;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int e = adj.indptr[v]; e < adj.indptr[v + 1]; ++e) {
        const int u = adj.indices[e];
        if (comp[u] < 0) {
          comp[u] = c;
          q.push(u);
        }
      }
    }
    ++c;
  }
  return comp;
}

}  // namespace

Graph random_geometric_graph(int n, double radius, uint64_t seed) {
  if (n < 2) throw std::invalid_argument("random_geometric_graph: n must be >= 2");
  if (radius <= 0.0) throw std::invalid_argument("random_geometric_graph: radius must be > 0");
  Rng rng(Rng::derive(seed, 0x726767));
  std::vector<double> px(n), py(n);
  for (int i = 0; i < n; ++i) {
    px[i] = rng.uniform();
    py[i] = rng.uniform();
  }
  auto dist2 = [&](int i, int j) {
    const double dx = px[i] - px[j], dy = py[i] - py[j];
    return dx * dx + dy * dy;
  };
  std::vector<Edge> edges;
  const double r2 = radius * radius;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (dist2(i, j) < r2) edges.push_back({i, j, 1.0});

  Graph g = graph_from_edges(n, std::move(edges));

  // Attach every extra component to the largest one by the closest pair.
  std::vector<int> comp = components(n, g.adjacency);
  const int ncomp = 1 + *std::max_element(comp.begin(), comp.end());
  if (ncomp > 1) {
    std::vector<int> sizes(ncomp, 0);
    for (int c : comp) sizes[c] += 1;
    const int main_comp =
        static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    std::vector<Edge> repaired = g.edges;
    for (int c = 0; c < ncomp; ++c) {
      if (c == main_comp) continue;
      double best = std::numeric_limits<double>::infinity();
      int bi = -1, bj = -1;
      for (int i = 0; i < n; ++i) {
        if (comp[i] != c) continue;
        for (int j = 0; j < n; ++j) {
          if (comp[j] != main_comp) continue;
          const double d = dist2(i, j);
          if (d < best) {
            best = d;
            bi = i;
            bj = j;
          }
        }
      }
      repaired.push_back({std::min(bi, bj), std::max(bi, bj), 1.0});
    }
    g = graph_from_edges(n, std::move(repaired));
  }
  return normalize_adjacency(g);
}

std::vector<int> partition_graph(const Graph& g, int pieces, uint64_t seed) {
  const int n = g.n;
  if (pieces < 1 || pieces > n) throw std::invalid_argument("partition_graph: pieces must be in [1, n]");
  {
    std::vector<int> comp = components(n, g.adjacency);
    if (*std::max_element(comp.begin(), comp.end()) != 0)
      throw std::invalid_argument("partition_graph: graph must be connected");
  }

  for (int attempt = 0; attempt < 32; ++attempt) {
    Rng rng(Rng::derive(Rng::derive(seed, 0x706172), static_cast<uint64_t>(attempt)));
    std::vector<int> labels(n, -1);
    std::vector<std::queue<int>> frontier(pieces);
    for (int p = 0; p < pieces; ++p) {
      int v = rng.below(n);
      while (labels[v] >= 0) v = (v + 1) % n;
      labels[v] = p;
      frontier[static_cast<size_t>(p)].push(v);
    }
    int unlabeled = n - pieces;
    bool progress = true;
    while (unlabeled > 0 && progress) {
      progress = false;
      for (int p = 0; p < pieces && unlabeled > 0; ++p) {
        auto& q = frontier[static_cast<size_t>(p)];
        while (!q.empty()) {
          const int v = q.front();
          int grabbed = -1;
          const Csr& adj = g.adjacency;
          for (int e = adj.indptr[v]; e < adj.indptr[v + 1]; ++e) {
            if (labels[adj.indices[e]] < 0) {
              grabbed = adj.indices[e];
              break;
            }
          }
          if (grabbed >= 0) {
            labels[grabbed] = p;
            q.push(grabbed);
            --unlabeled;
            progress = true;
            break;
          }
          q.pop();  // frontier vertex exhausted
        }
      }
    }
    if (unlabeled > 0) continue;
    std::vector<int> sizes(pieces, 0);
    for (int l : labels) sizes[l] += 1;
    const int mx = *std::max_element(sizes.begin(), sizes.end());
    const int mn = *std::min_element(sizes.begin(), sizes.end());
    if (mx <= 3 * mn) return labels;
  }
  throw std::runtime_error("partition_graph: could not meet the size-imbalance bound");
}

namespace {

// Last columns of a descending eigendecomposition are the ascending-order
// leading Laplacian eigenvectors.
Tensor ascending_laplacian_basis(const Tensor& laplacian, int count) {
  SpectralBasis basis = eig_sym(laplacian, SpectralSource::laplacian);
  const int n = laplacian.rows();
  Tensor out(n, count);
  for (int k = 0; k < count; ++k)
    for (int i = 0; i < n; ++i) out(i, k) = basis.eigenvectors(i, n - 1 - k);
  return out;
}

void scale_columns_to_half_power(Tensor& x) {
  const int n = x.rows();
  for (int c = 0; c < x.cols(); ++c) {
    double ss = 0.0;
    for (int i = 0; i < n; ++i) ss += x(i, c) * x(i, c);
    if (ss == 0.0) throw std::runtime_error("generate_signals: degenerate all-zero column");
    const double f = std::sqrt(0.5 * n / ss);
    for (int i = 0; i < n; ++i) x(i, c) *= f;
  }
}

}  // namespace

SignalFactory::SignalFactory(const Graph& g, const SignalSpec& spec) : n_(g.n), kind_(spec.kind) {
  bandwidth_ = spec.bandwidth > 0 ? spec.bandwidth : (kind_ == SignalKind::piecewise_smooth ? 5 : 10);
  if (spec.pieces < 1) throw std::invalid_argument("generate_signals: pieces must be >= 1");
  switch (kind_) {
    case SignalKind::smooth: {
      if (bandwidth_ > n_) throw std::invalid_argument("generate_signals: bandwidth exceeds vertex count");
      smooth_basis_ = ascending_laplacian_basis(laplacian_dense(g), bandwidth_);
      break;
    }
    case SignalKind::piecewise_constant: {
      labels_ = partition_graph(g, spec.pieces, spec.seed);
      break;
    }
    case SignalKind::piecewise_smooth: {
      if (bandwidth_ > n_) throw std::invalid_argument("generate_signals: bandwidth exceeds vertex count");
      labels_ = partition_graph(g, spec.pieces, spec.seed);
      piece_bases_.resize(static_cast<size_t>(spec.pieces));
      for (int p = 0; p < spec.pieces; ++p) {
        PieceBasis& pb = piece_bases_[static_cast<size_t>(p)];
        for (int i = 0; i < n_; ++i)
          if (labels_[i] == p) pb.vertices.push_back(i);
        const int np = static_cast<int>(pb.vertices.size());
        std::vector<int> local(n_, -1);
        for (int i = 0; i < np; ++i) local[pb.vertices[i]] = i;
        // Induced-subgraph Laplacian.
        Tensor lap(np, np);
        const Csr& adj = g.adjacency;
        for (int i = 0; i < np; ++i) {
          const int v = pb.vertices[static_cast<size_t>(i)];
          double deg = 0.0;
          for (int e = adj.indptr[v]; e < adj.indptr[v + 1]; ++e) {
            const int li = local[adj.indices[e]];
            if (li < 0) continue;
            deg += adj.values[e];
            if (li != i) lap(i, li) -= adj.values[e];
            else deg -= adj.values[e];  // self-loop contributes no difference
          }
          lap(i, i) += deg;
        }
        pb.basis = ascending_laplacian_basis(lap, std::min(bandwidth_, np));
      }
      break;
    }
  }
}

Tensor SignalFactory::generate(uint64_t seed, int count) const {
  if (count < 1) throw std::invalid_argument("generate_signals: count must be >= 1");
  Rng rng(Rng::derive(seed, 0x736967));
  Tensor x(n_, count);
  switch (kind_) {
    case SignalKind::smooth: {
      for (int c = 0; c < count; ++c) {
        for (int b = 0; b < bandwidth_; ++b) {
          const double coef = rng.normal();
          for (int i = 0; i < n_; ++i) x(i, c) += coef * smooth_basis_(i, b);
        }
      }
      break;
    }
    case SignalKind::piecewise_constant: {
      const int pieces = 1 + *std::max_element(labels_.begin(), labels_.end());
      for (int c = 0; c < count; ++c) {
        std::vector<double> level(static_cast<size_t>(pieces));
        for (double& v : level) v = rng.uniform(-1.0, 1.0);
        for (int i = 0; i < n_; ++i) x(i, c) = level[static_cast<size_t>(labels_[i])];
      }
      break;
    }
    case SignalKind::piecewise_smooth: {
      for (int c = 0; c < count; ++c) {
        for (const PieceBasis& pb : piece_bases_) {
          for (int b = 0; b < pb.basis.cols(); ++b) {
            const double coef = rng.normal();
            for (size_t i = 0; i < pb.vertices.size(); ++i)
              x(pb.vertices[i], c) += coef * pb.basis(static_cast<int>(i), b);
          }
        }
      }
      break;
    }
  }
  scale_columns_to_half_power(x);
  return x;
}

Tensor generate_signals(const Graph& g, const SignalSpec& spec) {
  return SignalFactory(g, spec).generate(spec.seed, spec.count);
}

Tensor add_noise(const Tensor& x, const NoiseSpec& spec) {
  if (spec.sigma < 0.0 || spec.b < 0.0 || spec.flip_rate < 0.0 || spec.flip_rate > 1.0)
    throw std::invalid_argument("add_noise: invalid noise parameters");
  Rng rng(Rng::derive(spec.seed, 0x6E6F69));
  Tensor t = x;
  switch (spec.model) {
    case NoiseModel::gaussian:
      for (size_t i = 0; i < t.size(); ++i) t[i] += spec.sigma * rng.normal();
      break;
    case NoiseModel::mixture:
      for (size_t i = 0; i < t.size(); ++i) t[i] += spec.sigma * rng.normal() + rng.laplace(spec.b);
      break;
    case NoiseModel::bernoulli:
      for (size_t i = 0; i < t.size(); ++i) {
        if (t[i] != 0.0 && t[i] != 1.0)
          throw std::invalid_argument("add_noise: bernoulli noise requires binary signals");
        if (rng.uniform() < spec.flip_rate) t[i] = 1.0 - t[i];
      }
      break;
  }
  return t;
}

}  // namespace gsdn
