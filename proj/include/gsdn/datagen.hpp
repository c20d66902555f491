#pragma once

#include <cstdint>
#include <vector>

#include "gsdn/graph.hpp"
#include "gsdn/tensor.hpp"

namespace gsdn {

enum class SignalKind { smooth, piecewise_constant, piecewise_smooth };

struct SignalSpec {
  SignalKind kind = SignalKind::smooth;
  int bandwidth = 0;  // 0 resolves to the kind default: 10 for smooth, 5 per piece for piecewise-smooth
  int pieces = 5;
  int count = 1;  // K
  uint64_t seed = 0;
};

enum class NoiseModel { gaussian, mixture, bernoulli };

struct NoiseSpec {
  NoiseModel model = NoiseModel::gaussian;
  double sigma = 0.5;
  double b = 0.2;          // Laplace scale for the mixture model
  double flip_rate = 0.1;  // Bernoulli
  uint64_t seed = 0;
};

// n points uniform in the unit square, unit-weight edge below the distance
// threshold; disconnected components are attached to the main component by
// their nearest cross-component pair, then the adjacency is normalized.
Graph random_geometric_graph(int n, double radius, uint64_t seed);

// Seeded multi-source BFS growing round-robin one vertex at a time. Every
// piece is connected; retries with derived seeds until max/min size <= 3.
std::vector<int> partition_graph(const Graph& g, int pieces, uint64_t seed);

// Precomputes whatever the signal family needs (Laplacian basis, partition,
// per-piece bases) so repeated draws on one graph stay cheap.
class SignalFactory {
 public:
  SignalFactory(const Graph& g, const SignalSpec& spec);

  // Draws `count` columns from the family, each scaled to mean square 0.5.
  Tensor generate(uint64_t seed, int count) const;

  const std::vector<int>& labels() const { return labels_; }
  int resolved_bandwidth() const { return bandwidth_; }

 private:
  struct PieceBasis {
    std::vector<int> vertices;
    Tensor basis;  // |piece| x bandwidth, ascending Laplacian order
  };

  int n_ = 0;
  SignalKind kind_;
  int bandwidth_ = 0;
  Tensor smooth_basis_;  // N x bandwidth for the smooth family
  std::vector<int> labels_;
  std::vector<PieceBasis> piece_bases_;
};

// Clean signals, each column scaled so its mean squared value is 0.5.
Tensor generate_signals(const Graph& g, const SignalSpec& spec);

Tensor add_noise(const Tensor& x, const NoiseSpec& spec);

}  // namespace gsdn
