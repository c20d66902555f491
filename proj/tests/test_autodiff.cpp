#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gsdn/autodiff.hpp"
#include "gsdn/rng.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace gsdn;
using ad::Param;
using ad::Tape;
using ad::Var;

namespace {

Tensor random_tensor(int r, int c, uint64_t seed) {
  Rng rng(seed);
  Tensor t(r, c);
  for (size_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
  return t;
}

}  // namespace

TEST_CASE("frobenius_sq gradient is 2x") {
  Param x("x", random_tensor(3, 2, 1));
  Tape t;
  Var loss = t.frobenius_sq(t.leaf(x));
  t.backward(loss);
  for (size_t i = 0; i < x.value.size(); ++i) CHECK(x.grad[i] == doctest::Approx(2.0 * x.value[i]));
}

TEST_CASE("soft threshold dead zone") {
  Param x("x", Tensor::scalar(0.03));
  Tape t;
  Var y = t.soft_threshold(t.leaf(x), 0.05);
  CHECK(t.value(y)[0] == 0.0);
  Var loss = t.sum(y);
  t.backward(loss);
  CHECK(x.grad[0] == 0.0);
}

TEST_CASE("soft threshold shrinkage branches") {
  Tape t;
  Tensor v(1, 3);
  v[0] = 0.15;
  v[1] = -0.20;
  v[2] = 0.03;
  Var y = t.soft_threshold(t.constant(v), 0.05);
  CHECK(t.value(y)[0] == doctest::Approx(0.10));
  CHECK(t.value(y)[1] == doctest::Approx(-0.15));
  CHECK(t.value(y)[2] == 0.0);
}

TEST_CASE("soft threshold with alpha zero is the identity") {
  Tape t;
  Tensor v = random_tensor(4, 4, 3);
  Var y = t.soft_threshold(t.constant(v), 0.0);
  CHECK(max_abs_diff(t.value(y), v) == 0.0);
}

TEST_CASE("matmul gradient matches finite differences") {
  Param a("a", random_tensor(4, 5, 10));
  Param b("b", random_tensor(5, 3, 11));
  auto loss_fn = [&](std::vector<Tensor>* margins) {
    Tape t;
    Var out = t.frobenius_sq(t.matmul(t.leaf(a), t.leaf(b)));
    if (margins) *margins = t.kink_margins();
    return t.value(out)[0];
  };
  auto run_backward = [&]() {
    Tape t;
    Var out = t.frobenius_sq(t.matmul(t.leaf(a), t.leaf(b)));
    t.backward(out);
  };
  auto result = gradcheck::check(loss_fn, {&a, &b}, run_backward, 1e-6);
  CHECK(result.checked == 35);
  CHECK(result.max_rel_err < 1e-6);
}

TEST_CASE("backward on sum gives all-ones gradient") {
  Param x("x", random_tensor(3, 1, 4));
  Tape t;
  Var loss = t.sum(t.leaf(x));
  t.backward(loss);
  for (size_t i = 0; i < x.grad.size(); ++i) CHECK(x.grad[i] == 1.0);
}

TEST_CASE("fan-out accumulates: grad of ||a+a||_F^2 is 8a") {
  Param a("a", random_tensor(2, 3, 5));
  Tape t;
  Var leaf = t.leaf(a);
  Var loss = t.frobenius_sq(t.add(leaf, leaf));
  t.backward(loss);
  for (size_t i = 0; i < a.value.size(); ++i) CHECK(a.grad[i] == doctest::Approx(8.0 * a.value[i]));
}

TEST_CASE("backward rejects non-scalar roots") {
  Tape t;
  Var x = t.constant(random_tensor(2, 2, 6));
  CHECK_THROWS_AS(t.backward(x), std::invalid_argument);
}

TEST_CASE("shape errors name the primitive") {
  Tape t;
  Var a = t.constant(Tensor(2, 3));
  Var b = t.constant(Tensor(2, 3));
  CHECK_THROWS_WITH_AS(t.matmul(a, b), doctest::Contains("matmul"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(t.add(a, t.constant(Tensor(3, 2))), doctest::Contains("add"), std::invalid_argument);
}

TEST_CASE("composite ops match finite differences") {
  // Touches tanh, relu, sigmoid, transpose, slice, add_rowvec, scale, sub, bce.
  Param w("w", random_tensor(4, 6, 21));
  Param b("b", random_tensor(1, 6, 22));
  const Tensor input = random_tensor(5, 4, 23);
  Tensor target(3, 5);
  Rng trng(24);
  for (size_t i = 0; i < target.size(); ++i) target[i] = trng.uniform() < 0.5 ? 0.0 : 1.0;

  auto forward = [&](Tape& t) {
    Var h = t.add_rowvec(t.matmul(t.constant(input), t.leaf(w)), t.leaf(b));
    Var act = t.add(t.tanh(t.slice_cols(h, 0, 3)), t.relu(t.slice_cols(h, 3, 6)));
    Var widened = t.sub(t.scale(h, 0.7), t.scale(h, 0.2));
    Var logits = t.transpose(t.add(t.slice_cols(widened, 0, 3), t.scale(act, 0.5)));
    return t.binary_cross_entropy(t.sigmoid(logits), target);
  };
  auto loss_fn = [&](std::vector<Tensor>* margins) {
    Tape t;
    Var loss = forward(t);
    if (margins) *margins = t.kink_margins();
    return t.value(loss)[0];
  };
  auto run_backward = [&]() {
    Tape t;
    t.backward(forward(t));
  };
  auto result = gradcheck::check(loss_fn, {&w, &b}, run_backward, 1e-6);
  CHECK(result.max_rel_err < 1e-6);
}

TEST_CASE("sparse aggregate gradients match finite differences") {
  Graph g = oracles::random_test_graph(8, 0.4, 31);
  const Csr& mask = g.adjacency;
  Param w("w", random_tensor(mask.nnz(), 1, 32));
  Param x("x", random_tensor(8, 3, 33));
  auto loss_fn = [&](std::vector<Tensor>* margins) {
    Tape t;
    Var y = t.sparse_weighted_aggregate(mask, t.leaf(w), t.leaf(x));
    Var loss = t.frobenius_sq(y);
    if (margins) *margins = t.kink_margins();
    return t.value(loss)[0];
  };
  auto run_backward = [&]() {
    Tape t;
    Var y = t.sparse_weighted_aggregate(mask, t.leaf(w), t.leaf(x));
    t.backward(t.frobenius_sq(y));
  };
  auto result = gradcheck::check(loss_fn, {&w, &x}, run_backward, 1e-6);
  CHECK(result.skipped == 0);
  CHECK(result.max_rel_err < 1e-6);
}

TEST_CASE("edge matrix aggregate gradients match finite differences") {
  Graph g = oracles::random_test_graph(6, 0.5, 41);
  const Csr& mask = g.adjacency;
  const int in_ch = 2, out_ch = 3;
  Param w("w", random_tensor(mask.nnz(), in_ch * out_ch, 42));
  Param x("x", random_tensor(6, in_ch, 43));
  auto loss_fn = [&](std::vector<Tensor>* margins) {
    Tape t;
    Var y = t.edge_matrix_aggregate(mask, t.leaf(w), t.leaf(x), out_ch);
    Var loss = t.frobenius_sq(y);
    if (margins) *margins = t.kink_margins();
    return t.value(loss)[0];
  };
  auto run_backward = [&]() {
    Tape t;
    Var y = t.edge_matrix_aggregate(mask, t.leaf(w), t.leaf(x), out_ch);
    t.backward(t.frobenius_sq(y));
  };
  auto result = gradcheck::check(loss_fn, {&w, &x}, run_backward, 1e-6);
  CHECK(result.max_rel_err < 1e-6);
}

TEST_CASE("trainable-alpha soft threshold gradient") {
  Param x("x", random_tensor(5, 2, 51));
  Param alpha("alpha", Tensor::scalar(0.3));
  auto loss_fn = [&](std::vector<Tensor>* margins) {
    Tape t;
    Var y = t.soft_threshold(t.leaf(x), t.leaf(alpha));
    Var loss = t.frobenius_sq(y);
    if (margins) *margins = t.kink_margins();
    return t.value(loss)[0];
  };
  auto run_backward = [&]() {
    Tape t;
    Var y = t.soft_threshold(t.leaf(x), t.leaf(alpha));
    t.backward(t.frobenius_sq(y));
  };
  auto result = gradcheck::check(loss_fn, {&x, &alpha}, run_backward, 1e-6);
  CHECK(result.max_rel_err < 1e-5);
}

TEST_CASE("adam") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    Param w("w", random_tensor(3, 3, 61));
    const Tensor before = w.value;
    ad::Adam adam({&w});
    adam.zero_grad();
    adam.step();
    CHECK(max_abs_diff(w.value, before) == 0.0);
  }
  SUBCASE("constant gradient moves opposite its sign") {
    Param w("w", Tensor::scalar(0.0));
    ad::Adam adam({&w});
    for (int i = 0; i < 10; ++i) {
      adam.zero_grad();
      w.grad[0] = 2.5;
      adam.step();
    }
    CHECK(w.value[0] < 0.0);
  }
  SUBCASE("converges on a scalar quadratic") {
    // f(w) = (w - 3)^2, lr = 0.1, 500 steps.
    Param w("w", Tensor::scalar(0.0));
    ad::Adam adam({&w}, ad::AdamConfig{0.1, 0.9, 0.999, 1e-8});
    for (int i = 0; i < 500; ++i) {
      adam.zero_grad();
      w.grad[0] = 2.0 * (w.value[0] - 3.0);
      adam.step();
    }
    CHECK(std::fabs(w.value[0] - 3.0) < 1e-3);
  }
  SUBCASE("non-finite gradients abort with the parameter name") {
    Param w("theta", Tensor::scalar(0.0));
    ad::Adam adam({&w});
    w.grad[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_WITH_AS(adam.step(), doctest::Contains("theta"), std::runtime_error);
  }
}
