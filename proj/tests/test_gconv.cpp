#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gsdn/gconv.hpp"
#include "gsdn/unroll.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace gsdn;
using ad::Tape;
using ad::Var;

namespace {

Tensor random_tensor(int r, int c, uint64_t seed) {
  Rng rng(seed);
  Tensor t(r, c);
  for (size_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
  return t;
}

GraphContext context_for(const Graph& normalized, int order, int p) {
  return make_graph_context(normalized, order, p);
}

Tensor ews_forward(const EwsConv& conv, const GraphContext& ctx, const Tensor& x) {
  Tape t;
  return t.value(conv.apply(t, ctx.powers, ctx.geom, t.constant(x)));
}

}  // namespace

TEST_CASE("fixed graph convolution") {
  Graph g = normalize_adjacency(oracles::random_test_graph(7, 0.4, 1));
  ShiftPowers sp = shift_powers(g, 2);
  Tensor x = random_tensor(7, 1, 2);
  SUBCASE("single-tap filter is A x") {
    Tensor y = fixed_graph_convolution(FilterCoeffs{{1.0}}, sp, x);
    CHECK(max_abs_diff(y, g.adjacency.multiply_dense(x)) < 1e-15);
  }
  SUBCASE("zero filter gives zero") {
    Tensor y = fixed_graph_convolution(FilterCoeffs{{0.0, 0.0}}, sp, x);
    CHECK(max_abs(y) == 0.0);
  }
  SUBCASE("P3 with h=(1,1) matches the dense polynomial oracle") {
    Graph p3 = normalize_adjacency(graph_from_edges(3, {{0, 1, 1.0}, {1, 2, 1.0}}));
    ShiftPowers powers = shift_powers(p3, 2);
    Tensor e0(3, 1);
    e0(0, 0) = 1.0;
    Tensor y = fixed_graph_convolution(FilterCoeffs{{1.0, 1.0}}, powers, e0);
    const oracles::Dense a = oracles::dense_from_graph(p3);
    const oracles::Dense a2 = oracles::naive_matpow(a, 2);
    for (int i = 0; i < 3; ++i) CHECK(y(i, 0) == doctest::Approx(a[i][0] + a2[i][0]).epsilon(1e-12));
  }
}

TEST_CASE("multichannel graph convolution") {
  Graph g = normalize_adjacency(oracles::random_test_graph(6, 0.5, 5));
  ShiftPowers sp = shift_powers(g, 2);
  SUBCASE("K = K' = 1 degenerates to the fixed convolution") {
    Tensor coeffs(2, 1, 1);
    coeffs.at3(0, 0, 0) = 0.7;
    coeffs.at3(1, 0, 0) = -0.4;
    Tensor x = random_tensor(6, 1, 6);
    Tensor a = multichannel_graph_convolution(coeffs, sp, x);
    Tensor b = fixed_graph_convolution(FilterCoeffs{{0.7, -0.4}}, sp, x);
    CHECK(max_abs_diff(a, b) < 1e-12);
  }
  SUBCASE("L = 1 equals A X H") {
    const int in_ch = 2, out_ch = 3;
    Tensor coeffs(1, in_ch, out_ch);
    Rng rng(7);
    for (size_t i = 0; i < coeffs.size(); ++i) coeffs[i] = rng.normal();
    Tensor x = random_tensor(6, in_ch, 8);
    Tensor mix(in_ch, out_ch);
    for (int k = 0; k < in_ch; ++k)
      for (int k2 = 0; k2 < out_ch; ++k2) mix(k, k2) = coeffs.at3(0, k, k2);
    Tensor expect = g.adjacency.multiply_dense(matmul(x, mix));
    CHECK(max_abs_diff(multichannel_graph_convolution(coeffs, sp, x), expect) < 1e-12);
  }
  SUBCASE("random instance matches the brute-force double sum") {
    const int in_ch = 2, out_ch = 3;
    Tensor coeffs(2, in_ch, out_ch);
    Rng rng(9);
    for (size_t i = 0; i < coeffs.size(); ++i) coeffs[i] = rng.normal();
    Tensor x = random_tensor(6, in_ch, 10);
    Tensor expect = oracles::brute_force_multichannel(oracles::dense_from_graph(g), coeffs, x);
    CHECK(max_abs_diff(multichannel_graph_convolution(coeffs, sp, x), expect) < 1e-10);
  }
}

TEST_CASE("kernel edge weights") {
  Graph g = normalize_adjacency(oracles::random_test_graph(8, 0.4, 11));
  GraphContext ctx = context_for(g, 1, 4);
  SUBCASE("zero MLP gives zero weights") {
    KernelMlp mlp;
    Rng rng(12);
    mlp.init(4, 1, rng, "k");
    for (ad::Param* p : mlp.params()) std::fill(p->value.raw().begin(), p->value.raw().end(), 0.0);
    Tensor w = kernel_edge_weights(mlp, ctx.coords, g.adjacency);
    CHECK(max_abs(w) == 0.0);
  }
  SUBCASE("identical coordinates share one weight") {
    KernelMlp mlp;
    Rng rng(13);
    mlp.init(4, 1, rng, "k");
    for (size_t i = 0; i < mlp.b1.value.size(); ++i) mlp.b1.value[i] = 0.3 + 0.1 * i;
    Tensor zero_diff(2, 4);
    Tensor w = mlp.evaluate(zero_diff);
    CHECK(w(0, 0) == w(1, 0));
    CHECK(w(0, 0) != 0.0);
  }
  SUBCASE("direction matters: weight(i,j) != weight(j,i) in general") {
    KernelMlp mlp;
    Rng rng(14);
    mlp.init(4, 1, rng, "k");
    Tensor diff(2, 4);
    Rng drng(15);
    for (int d = 0; d < 4; ++d) {
      diff(0, d) = drng.normal();
      diff(1, d) = -diff(0, d);
    }
    Tensor w = mlp.evaluate(diff);
    CHECK(std::fabs(w(0, 0) - w(1, 0)) > 1e-8);
  }
}

TEST_CASE("ews_conv special cases") {
  Graph g = normalize_adjacency(oracles::random_test_graph(6, 0.5, 21));
  GraphContext ctx = context_for(g, 2, 4);
  SUBCASE("constant kernel reduces to the multichannel convolution") {
    const int in_ch = 2, out_ch = 2;
    EwsConv conv;
    Rng rng(22);
    conv.init(EwsMode::full, 2, in_ch, out_ch, 4, rng, "c");
    // Constant kernel: zero all layers, then set output biases.
    for (ad::Param* p : conv.kernel.params()) std::fill(p->value.raw().begin(), p->value.raw().end(), 0.0);
    Rng crng(23);
    for (size_t i = 0; i < conv.kernel.b3.value.size(); ++i) conv.kernel.b3.value[i] = crng.normal();
    Tensor coeffs(2, in_ch, out_ch);
    for (int l = 0; l < 2; ++l)
      for (int k = 0; k < in_ch; ++k)
        for (int k2 = 0; k2 < out_ch; ++k2)
          coeffs.at3(l, k, k2) = conv.kernel.b3.value[static_cast<size_t>((l * in_ch + k) * out_ch + k2)];
    Tensor x = random_tensor(6, in_ch, 24);
    CHECK(max_abs_diff(ews_forward(conv, ctx, x), multichannel_graph_convolution(coeffs, ctx.powers, x)) < 1e-12);
  }
  SUBCASE("zero input gives zero output") {
    EwsConv conv;
    Rng rng(25);
    conv.init(EwsMode::factorized, 2, 3, 2, 4, rng, "c");
    CHECK(max_abs(ews_forward(conv, ctx, Tensor(6, 3))) == 0.0);
  }
  SUBCASE("full mode matches the edge-set oracle") {
    const int in_ch = 2, out_ch = 3;
    EwsConv conv;
    Rng rng(26);
    conv.init(EwsMode::full, 2, in_ch, out_ch, 4, rng, "c");
    Tensor x = random_tensor(6, in_ch, 27);
    Tensor y = ews_forward(conv, ctx, x);
    // Oracle: sum_l sum_e delta_e X H^(e) with H^(e) sliced from the kernel output.
    Tensor expect(6, out_ch);
    for (int l = 1; l <= 2; ++l) {
      const Csr& mask = ctx.powers.power(l);
      Tensor weights = kernel_edge_weights(conv.kernel, ctx.coords, mask);
      const int block = in_ch * out_ch;
      Tensor blocks(mask.nnz(), block);
      for (int e = 0; e < mask.nnz(); ++e)
        for (int c = 0; c < block; ++c) blocks(e, c) = weights(e, (l - 1) * block + c);
      Tensor contrib = edge_set_convolution(mask, blocks, x, out_ch);
      for (size_t i = 0; i < expect.size(); ++i) expect[i] += contrib[i];
    }
    CHECK(max_abs_diff(y, expect) < 1e-10);
  }
}

TEST_CASE("degeneration chain at K = K' = 1") {
  Graph g = normalize_adjacency(oracles::random_test_graph(7, 0.5, 31));
  GraphContext ctx = context_for(g, 2, 4);
  EwsConv conv;
  Rng rng(32);
  conv.init(EwsMode::full, 2, 1, 1, 4, rng, "c");
  for (ad::Param* p : conv.kernel.params()) std::fill(p->value.raw().begin(), p->value.raw().end(), 0.0);
  conv.kernel.b3.value[0] = 0.8;
  conv.kernel.b3.value[1] = -0.3;
  Tensor x = random_tensor(7, 1, 33);

  Tensor via_ews = ews_forward(conv, ctx, x);
  Tensor coeffs(2, 1, 1);
  coeffs.at3(0, 0, 0) = 0.8;
  coeffs.at3(1, 0, 0) = -0.3;
  Tensor via_multi = multichannel_graph_convolution(coeffs, ctx.powers, x);
  Tensor via_fixed = fixed_graph_convolution(FilterCoeffs{{0.8, -0.3}}, ctx.powers, x);
  CHECK(max_abs_diff(via_ews, via_multi) < 1e-12);
  CHECK(max_abs_diff(via_multi, via_fixed) < 1e-12);
}

TEST_CASE("permutation machinery") {
  SUBCASE("identity and inverse") {
    Graph g = oracles::random_test_graph(9, 0.4, 41);
    Tensor x = random_tensor(9, 2, 42);
    Permutation id = Permutation::identity(9);
    CHECK(max_abs_diff(permute_rows(id, x), x) == 0.0);
    Rng rng(43);
    Permutation j = Permutation::random(9, rng);
    CHECK(max_abs_diff(permute_rows(j.inverse(), permute_rows(j, x)), x) == 0.0);
    Graph gj = permute_graph(j, g);
    Graph back = permute_graph(j.inverse(), gj);
    CHECK(max_abs_diff(back.adjacency.to_dense(), g.adjacency.to_dense()) == 0.0);
  }
  SUBCASE("non-bijective mappings are rejected") {
    CHECK_THROWS_AS(Permutation({0, 0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(Permutation({0, 3, 1}), std::invalid_argument);
  }
  SUBCASE("permuted graph is J A J^T") {
    Graph g = oracles::random_test_graph(6, 0.5, 44);
    Rng rng(45);
    Permutation j = Permutation::random(6, rng);
    Graph gj = permute_graph(j, g);
    Tensor a = g.adjacency.to_dense();
    Tensor aj = gj.adjacency.to_dense();
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) CHECK(aj(j.perm[r], j.perm[c]) == doctest::Approx(a(r, c)));
  }
}

TEST_CASE("permutation equivariance of the edge-weight-sharing convolution") {
  // Kernel parameters stay fixed; coordinates are transported by J.
  int worst_seed = -1;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 8 + trial % 23;
    Graph g = normalize_adjacency(oracles::random_test_graph(n, 0.35, 500 + trial));
    GraphContext ctx = context_for(g, 2, std::min(4, n));
    EwsConv conv;
    Rng rng(600 + trial);
    conv.init(trial % 2 == 0 ? EwsMode::factorized : EwsMode::full, 2, 2, 2, std::min(4, n), rng, "c");
    Tensor x = random_tensor(n, 2, 700 + trial);

    Rng prng(800 + trial);
    Permutation j = Permutation::random(n, prng);
    Graph gj = permute_graph(j, g);

    GraphContext ctxj;
    ctxj.graph = gj;
    ctxj.powers = shift_powers(gj, 2);
    ctxj.coords.p = ctx.coords.p;
    ctxj.coords.coords = permute_rows(j, ctx.coords.coords);  // transported, not recomputed
    ctxj.geom = edge_geometry(ctxj.powers, ctxj.coords);

    Tensor lhs = ews_forward(conv, ctxj, permute_rows(j, x));
    Tensor rhs = permute_rows(j, ews_forward(conv, ctx, x));
    const double dev = max_abs_diff(lhs, rhs);
    if (dev > worst) {
      worst = dev;
      worst_seed = trial;
    }
  }
  INFO("worst trial ", worst_seed);
  CHECK(worst < 1e-10);
}

TEST_CASE("constant-signal pair on the self-loop graph") {
  // A = I: the plain multichannel convolution cannot leave the constant
  // subspace, while per-edge weights can.
  const int n = 5, channels = 3;
  Graph g = graph_from_edges(n, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}, {3, 3, 1.0}, {4, 4, 1.0}});
  g = normalize_adjacency(g);
  ShiftPowers sp = shift_powers(g, 1);
  Tensor x(n, channels);
  Rng rng(91);
  for (int c = 0; c < channels; ++c) {
    const double v = rng.normal();
    for (int i = 0; i < n; ++i) x(i, c) = v;  // constant columns
  }

  Tensor coeffs(1, channels, channels);
  for (size_t i = 0; i < coeffs.size(); ++i) coeffs[i] = rng.normal();
  Tensor y = multichannel_graph_convolution(coeffs, sp, x);
  for (int c = 0; c < channels; ++c) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += y(i, c) / n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) var += (y(i, c) - mean) * (y(i, c) - mean) / n;
    CHECK(var < 1e-20);
  }

  // Independent per-edge weights (the edge-set form) break the degeneracy.
  Tensor blocks(sp.power(1).nnz(), channels * channels);
  for (size_t i = 0; i < blocks.size(); ++i) blocks[i] = rng.normal();
  Tensor z = edge_set_convolution(sp.power(1), blocks, x, channels);
  double best_var = 0.0;
  for (int c = 0; c < channels; ++c) {
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += z(i, c) / n;
    double var = 0.0;
    for (int i = 0; i < n; ++i) var += (z(i, c) - mean) * (z(i, c) - mean) / n;
    best_var = std::max(best_var, var);
  }
  CHECK(best_var > 1e-6);
}

TEST_CASE("kernel MLP and EWS-GC gradients match finite differences") {
  Graph g = normalize_adjacency(oracles::random_test_graph(10, 0.35, 95));
  GraphContext ctx = context_for(g, 2, 4);
  const Tensor x = random_tensor(10, 2, 96);

  SUBCASE("kernel MLP") {
    KernelMlp mlp;
    Rng rng(97);
    mlp.init(4, 3, rng, "k");
    const Tensor inputs = random_tensor(7, 4, 98);
    auto loss_fn = [&](std::vector<Tensor>* margins) {
      Tape t;
      Var out = t.frobenius_sq(mlp.apply(t, t.constant(inputs)));
      if (margins) *margins = t.kink_margins();
      return t.value(out)[0];
    };
    auto run_backward = [&]() {
      Tape t;
      t.backward(t.frobenius_sq(mlp.apply(t, t.constant(inputs))));
    };
    auto result = gradcheck::check(loss_fn, mlp.params(), run_backward, 1e-6);
    CHECK(result.max_rel_err < 1e-5);
  }

  for (EwsMode mode : {EwsMode::factorized, EwsMode::full}) {
    CAPTURE(static_cast<int>(mode));
    EwsConv conv;
    Rng rng(99);
    conv.init(mode, 2, 2, 2, 4, rng, "c");
    auto loss_fn = [&](std::vector<Tensor>* margins) {
      Tape t;
      Var out = t.frobenius_sq(conv.apply(t, ctx.powers, ctx.geom, t.constant(x)));
      if (margins) *margins = t.kink_margins();
      return t.value(out)[0];
    };
    auto run_backward = [&]() {
      Tape t;
      t.backward(t.frobenius_sq(conv.apply(t, ctx.powers, ctx.geom, t.constant(x))));
    };
    auto result = gradcheck::check(loss_fn, conv.params(), run_backward, 1e-6);
    CHECK(result.max_rel_err < 1e-5);
  }
}
