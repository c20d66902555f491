#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gsdn/baselines.hpp"
#include "gsdn/datagen.hpp"
#include "gsdn/metrics.hpp"
#include "oracles.hpp"

using namespace gsdn;

namespace {

Tensor random_tensor(int r, int c, uint64_t seed) {
  Rng rng(seed);
  Tensor t(r, c);
  for (size_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
  return t;
}

}  // namespace

TEST_CASE("graph Laplacian denoising") {
  Graph g = normalize_adjacency(oracles::random_test_graph(15, 0.35, 1));
  Tensor t = random_tensor(15, 2, 2);
  SUBCASE("alpha = 0 returns the input") {
    CHECK(max_abs_diff(gld_denoise(t, g, 0.0), t) < 1e-12);
  }
  SUBCASE("large alpha projects onto the constant vector") {
    Tensor x = gld_denoise(t, g, 1e6);
    // Connected graph: the Laplacian nullspace is the constant vector, so the
    // limit is the per-column mean.
    for (int c = 0; c < 2; ++c) {
      double mean = 0.0;
      for (int i = 0; i < 15; ++i) mean += t(i, c) / 15;
      for (int i = 0; i < 15; ++i) CHECK(x(i, c) == doctest::Approx(mean).epsilon(1e-3));
    }
  }
  SUBCASE("stationarity residual is tiny") {
    const double alpha = 0.37;
    Tensor x = gld_denoise(t, g, alpha);
    Tensor lap = laplacian_dense(g);
    Tensor resid = x - t;
    Tensor lx = matmul(lap, x);
    for (size_t i = 0; i < resid.size(); ++i) resid[i] += 2.0 * alpha * lx[i];
    CHECK(max_abs(resid) < 1e-9);
  }
}

TEST_CASE("graph trend filtering via ADMM") {
  SUBCASE("alpha = 0 returns the input") {
    Graph g = normalize_adjacency(oracles::random_test_graph(12, 0.4, 3));
    Incidence inc = incidence_matrix(g);
    Tensor t = random_tensor(12, 1, 4);
    CHECK(max_abs_diff(gtf_denoise(t, inc, 0.0), t) < 1e-8);
  }
  SUBCASE("two nodes fuse to their mean under a large alpha") {
    Graph g = graph_from_edges(2, {{0, 1, 1.0}});
    Incidence inc = incidence_matrix(g);
    Tensor t(2, 1);
    t(0, 0) = 1.0;
    t(1, 0) = -1.0;
    // 1-D fused lasso: alpha >= |t0 - t1| * sqrt(w) / 2 collapses both to the mean.
    Tensor x = gtf_denoise(t, inc, 5.0);
    CHECK(x(0, 0) == doctest::Approx(0.0).epsilon(1e-6));
    CHECK(x(1, 0) == doctest::Approx(0.0).epsilon(1e-6));
  }
  SUBCASE("objective decreases monotonically beyond iteration 5") {
    for (int trial = 0; trial < 10; ++trial) {
      Graph g = normalize_adjacency(oracles::random_test_graph(20 + 8 * (trial % 10), 0.3, 50 + trial));
      Incidence inc = incidence_matrix(g);
      Tensor t = random_tensor(g.n, 1, 60 + trial);
      AdmmReport report;
      gtf_denoise(t, inc, 0.2, AdmmOptions{1.0, 200, 1e-10}, &report);
      for (size_t i = 6; i < report.objective.size(); ++i)
        REQUIRE(report.objective[i] <= report.objective[i - 1] + 1e-8);
    }
  }
}

TEST_CASE("GFT-domain denoising") {
  Graph g = normalize_adjacency(oracles::random_test_graph(30, 0.25, 7));
  SpectralBasis basis = eig_sym(g.adjacency.to_dense());
  Tensor t = random_tensor(30, 2, 8);
  SUBCASE("alpha = 0 reconstructs exactly") {
    CHECK(max_abs_diff(gft_denoise(t, basis, 0.0), t) < 1e-10);
  }
  SUBCASE("a single-atom signal shrinks its coefficient by alpha") {
    const double coef = 0.9, alpha = 0.2;
    Tensor x(30, 1);
    for (int i = 0; i < 30; ++i) x(i, 0) = coef * basis.eigenvectors(i, 4);
    Tensor denoised = gft_denoise(x, basis, alpha);
    Tensor expect(30, 1);
    for (int i = 0; i < 30; ++i) expect(i, 0) = (coef - alpha) * basis.eigenvectors(i, 4);
    CHECK(max_abs_diff(denoised, expect) < 1e-10);
  }
  SUBCASE("closed form matches ISTA") {
    const double alpha = 0.15;
    Tensor closed = gft_denoise(t, basis, alpha);
    Tensor ista = gft_denoise_ista(t, basis, alpha, 1.0, 2000);
    CHECK(max_abs_diff(closed, ista) < 1e-6);
  }
}

TEST_CASE("MLP baseline") {
  Graph g = random_geometric_graph(24, 0.35, 11);
  GraphContext ctx;
  ctx.graph = g;  // the MLP ignores the graph
  UnrollConfig cfg;
  cfg.seed = 12;
  SUBCASE("epochs = 0 returns the random-init output") {
    cfg.epochs = 0;
    TrainResult r = mlp_denoise(random_tensor(24, 2, 13), ctx, cfg, 8);
    CHECK(r.loss_history.empty());
    CHECK(r.denoised.rows() == 24);
  }
  SUBCASE("zero input trains toward zero output") {
    cfg.epochs = 300;
    Tensor zeros(24, 1);
    TrainResult r = mlp_denoise(zeros, ctx, cfg, 8);
    CHECK(r.loss_history.back() < 1e-3);
    CHECK(r.loss_history.back() < r.loss_history.front());
  }
}

TEST_CASE("grid search is deterministic and picks the best alpha") {
  Graph g = random_geometric_graph(40, 0.3, 21);
  SignalSpec spec;
  spec.kind = SignalKind::smooth;
  spec.seed = 22;
  Tensor clean = generate_signals(g, spec);
  NoiseSpec nz;
  nz.sigma = 0.5;
  nz.seed = 23;
  Tensor noisy = add_noise(clean, nz);

  auto denoise = [&](double a) { return gld_denoise(noisy, g, a); };
  const double best1 = grid_search_alpha(denoise, clean, default_alpha_grid());
  const double best2 = grid_search_alpha(denoise, clean, default_alpha_grid());
  CHECK(best1 == best2);
  const double err_best = nmse(gld_denoise(noisy, g, best1), clean);
  for (double a : default_alpha_grid()) CHECK(err_best <= nmse(gld_denoise(noisy, g, a), clean) + 1e-12);
}
