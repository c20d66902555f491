#include "gsdn/baselines.hpp"

#include <cmath>
#include <stdexcept>

namespace gsdn {

Tensor gld_denoise(const Tensor& t, const Graph& g, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("gld_denoise: alpha must be >= 0");
  if (t.rows() != g.n) throw std::invalid_argument("gld_denoise: signal rows must match vertex count");
  Tensor sys = laplacian_dense(g);
  for (size_t i = 0; i < sys.size(); ++i) sys[i] *= 2.0 * alpha;
  for (int i = 0; i < g.n; ++i) sys(i, i) += 1.0;
  return cholesky_solve(sys, t);
}

Tensor gtf_denoise(const Tensor& t, const Incidence& inc, double alpha, const AdmmOptions& opts,
                   AdmmReport* report) {
  if (alpha < 0.0) throw std::invalid_argument("gtf_denoise: alpha must be >= 0");
  if (opts.rho <= 0.0) throw std::invalid_argument("gtf_denoise: rho must be > 0");
  const int n = t.rows();
  const int k = t.cols();
  const int m = inc.delta.rows;
  if (inc.delta.cols != n) throw std::invalid_argument("gtf_denoise: incidence column mismatch");

  // Precompute (I + rho Delta^T Delta)^{-1}.
  Tensor sys = matmul(inc.delta_t.to_dense(), inc.delta.to_dense());
  for (size_t i = 0; i < sys.size(); ++i) sys[i] *= opts.rho;
  for (int i = 0; i < n; ++i) sys(i, i) += 1.0;
  Tensor eye(n, n);
  for (int i = 0; i < n; ++i) eye(i, i) = 1.0;
  const Tensor inv = cholesky_solve(sys, eye);

  Tensor x = t;
  Tensor y(m, k), u(m, k);
  bool converged = false;
  int it = 0;
  for (; it < opts.iterations && !converged; ++it) {
    // x-update: (I + rho D^T D) x = t + rho D^T (y - u)
    Tensor rhs = inc.delta_t.multiply_dense(y - u);
    for (size_t i = 0; i < rhs.size(); ++i) rhs[i] = t[i] + opts.rho * rhs[i];
    x = matmul(inv, rhs);
    const Tensor dx = inc.delta.multiply_dense(x);
    const Tensor y_old = y;
    y = soft_threshold(dx + u, alpha / opts.rho);
    const Tensor primal = dx - y;
    u = u + primal;

    if (report) {
      double tv = 0.0;
      for (size_t i = 0; i < dx.size(); ++i) tv += std::fabs(dx[i]);
      const Tensor diff = x - t;
      report->objective.push_back(0.5 * dot(diff, diff) + alpha * tv);
    }
    const Tensor dual = inc.delta_t.multiply_dense(y - y_old);
    converged = frob_norm(primal) < opts.tol && opts.rho * frob_norm(dual) < opts.tol;
  }
  if (report) {
    report->iterations_run = it;
    report->converged = converged;
    if (!converged)
      std::fprintf(stderr, "gtf_denoise: ADMM stopped at iteration cap %d without reaching tol %g\n",
                   opts.iterations, opts.tol);
  }
  return x;
}

Tensor gft_denoise(const Tensor& t, const SpectralBasis& basis, double alpha) {
  return igft(basis, soft_threshold(gft(basis, t), alpha));
}

Tensor gft_denoise_ista(const Tensor& t, const SpectralBasis& basis, double alpha, double step, int iterations) {
  Tensor c(t.rows(), t.cols());
  for (int it = 0; it < iterations; ++it) {
    // gradient of 0.5||t - V c||^2 is V^T (V c - t)
    Tensor resid = igft(basis, c) - t;
    Tensor grad = gft(basis, resid);
    for (size_t i = 0; i < c.size(); ++i) c[i] -= step * grad[i];
    c = soft_threshold(c, alpha * step);
  }
  return igft(basis, c);
}

MlpDenoiser::MlpDenoiser(int n_vertices, int width, uint64_t seed) {
  Rng rng(Rng::derive(seed, 0x6D6C70));
  auto glorot = [&rng](int rows, int cols) {
    Tensor w(rows, cols);
    const double bound = std::sqrt(6.0 / (rows + cols));
    for (size_t i = 0; i < w.size(); ++i) w[i] = rng.uniform(-bound, bound);
    return w;
  };
  w1_ = ad::Param("mlp.w1", glorot(n_vertices, width));
  b1_ = ad::Param("mlp.b1", Tensor(1, width));
  w2_ = ad::Param("mlp.w2", glorot(width, width));
  b2_ = ad::Param("mlp.b2", Tensor(1, width));
  w3_ = ad::Param("mlp.w3", glorot(width, n_vertices));
  b3_ = ad::Param("mlp.b3", Tensor(1, n_vertices));
}

ad::Var MlpDenoiser::forward(ad::Tape& t, const GraphContext&, ad::Var noisy) {
  // Columns are signals; the MLP maps each length-N column, so work on rows.
  ad::Var x = t.transpose(noisy);
  ad::Var h1 = t.relu(t.add_rowvec(t.matmul(x, t.leaf(w1_)), t.leaf(b1_)));
  ad::Var h2 = t.relu(t.add_rowvec(t.matmul(h1, t.leaf(w2_)), t.leaf(b2_)));
  ad::Var out = t.add_rowvec(t.matmul(h2, t.leaf(w3_)), t.leaf(b3_));
  return t.transpose(out);
}

std::vector<ad::Param*> MlpDenoiser::params() { return {&w1_, &b1_, &w2_, &b2_, &w3_, &b3_}; }

TrainResult mlp_denoise(const Tensor& noisy, const GraphContext& ctx, const UnrollConfig& cfg, int width,
                        const Tensor* clean) {
  MlpDenoiser model(noisy.rows(), width, cfg.seed);
  return train(model, noisy, ctx, cfg, clean);
}

const std::vector<double>& default_alpha_grid() {
  static const std::vector<double> grid = {1e-3, 3e-3, 1e-2, 3e-2, 1e-1, 3e-1, 1.0, 3.0};
  return grid;
}

}  // namespace gsdn
