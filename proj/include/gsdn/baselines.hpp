#pragma once

#include <vector>

#include "gsdn/graph.hpp"
#include "gsdn/spectral.hpp"
#include "gsdn/unroll.hpp"

namespace gsdn {

// Solves (I + 2 alpha L) x = t exactly, the minimizer of
// 0.5||t - x||^2 + alpha x^T L x.
Tensor gld_denoise(const Tensor& t, const Graph& g, double alpha);

struct AdmmOptions {
  double rho = 1.0;
  int iterations = 500;
  double tol = 1e-8;
};

struct AdmmReport {
  int iterations_run = 0;
  bool converged = false;
  std::vector<double> objective;  // 0.5||t-x||^2 + alpha||Delta x||_1 per iteration
};

// ADMM on the graph-total-variation problem with splitting y = Delta x.
Tensor gtf_denoise(const Tensor& t, const Incidence& inc, double alpha, const AdmmOptions& opts = {},
                   AdmmReport* report = nullptr);

// Orthonormal dictionary makes basis pursuit denoising a spectral shrinkage:
// x = V soft_threshold(V^T t, alpha).
Tensor gft_denoise(const Tensor& t, const SpectralBasis& basis, double alpha);

// ISTA on min 0.5||t - V c||^2 + alpha||c||_1; cross-check for gft_denoise.
Tensor gft_denoise_ista(const Tensor& t, const SpectralBasis& basis, double alpha, double step = 1.0,
                        int iterations = 2000);

// Graph-agnostic MLP (N -> width -> width -> N per signal column) trained
// with the same unsupervised loss and optimizer as the unrolling networks.
class MlpDenoiser : public DenoiserModel {
 public:
  MlpDenoiser(int n_vertices, int width, uint64_t seed);
  ad::Var forward(ad::Tape& tape, const GraphContext& ctx, ad::Var noisy) override;
  std::vector<ad::Param*> params() override;

 private:
  ad::Param w1_, b1_, w2_, b2_, w3_, b3_;
};

TrainResult mlp_denoise(const Tensor& noisy, const GraphContext& ctx, const UnrollConfig& cfg, int width = 64,
                        const Tensor* clean = nullptr);

// Deterministic grid search; best alpha by NMSE against the clean signal
// (oracle tuning, as when reporting each method at its best).
const std::vector<double>& default_alpha_grid();

template <typename DenoiseFn>
double grid_search_alpha(const DenoiseFn& denoise, const Tensor& clean, const std::vector<double>& grid) {
  double best_alpha = grid.front();
  double best_err = std::numeric_limits<double>::infinity();
  for (double alpha : grid) {
    const Tensor xhat = denoise(alpha);
    const Tensor diff = xhat - clean;
    const double err = dot(diff, diff);
    if (err < best_err) {
      best_err = err;
      best_alpha = alpha;
    }
  }
  return best_alpha;
}

}  // namespace gsdn
