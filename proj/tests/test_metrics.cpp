#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gsdn/metrics.hpp"
#include "gsdn/rng.hpp"

using namespace gsdn;

TEST_CASE("exact agreement") {
  Tensor x(4, 2);
  Rng rng(1);
  for (size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
  EvalReport r = compute_metrics(x, x, MetricMode::real);
  CHECK(r.nmse == 0.0);
  CHECK(r.nmae == 0.0);

  Tensor b(4, 1);
  b(0, 0) = 1.0;
  b(2, 0) = 1.0;
  EvalReport rb = compute_metrics(b, b, MetricMode::binary);
  CHECK(rb.error_rate == 0.0);
  CHECK(rb.f1 == 1.0);
}

TEST_CASE("zero estimate gives NMSE = NMAE = 1") {
  Tensor x(5, 1);
  Rng rng(2);
  for (size_t i = 0; i < x.size(); ++i) x[i] = rng.normal();
  EvalReport r = compute_metrics(Tensor(5, 1), x, MetricMode::real);
  CHECK(r.nmse == doctest::Approx(1.0));
  CHECK(r.nmae == doctest::Approx(1.0));
}

TEST_CASE("hand-counted binary example") {
  // truth (1,0,0,1), estimate (1,1,0,1): ER=1/4, P=2/3, R=1, F1=0.8.
  Tensor truth(4, 1), est(4, 1);
  truth(0, 0) = 1.0;
  truth(3, 0) = 1.0;
  est(0, 0) = 1.0;
  est(1, 0) = 1.0;
  est(3, 0) = 1.0;
  EvalReport r = compute_metrics(est, truth, MetricMode::binary);
  CHECK(r.error_rate == doctest::Approx(0.25));
  CHECK(r.f1 == doctest::Approx(0.8));
  CHECK(!r.f1_undefined);
}

TEST_CASE("error cases and flags") {
  SUBCASE("zero reference in real mode") {
    CHECK_THROWS_WITH_AS(compute_metrics(Tensor(3, 1), Tensor(3, 1), MetricMode::real),
                         doctest::Contains("undefined normalization"), std::invalid_argument);
  }
  SUBCASE("no positives anywhere flags F1") {
    Tensor truth(3, 1), est(3, 1);
    EvalReport r = compute_metrics(est, truth, MetricMode::binary);
    CHECK(r.f1 == 0.0);
    CHECK(r.f1_undefined);
  }
  SUBCASE("shape mismatch") {
    CHECK_THROWS_AS(compute_metrics(Tensor(3, 1), Tensor(4, 1), MetricMode::real), std::invalid_argument);
  }
}

TEST_CASE("NMSE is invariant to joint scaling") {
  Rng rng(3);
  Tensor x(6, 2), y(6, 2);
  for (size_t i = 0; i < x.size(); ++i) {
    x[i] = rng.normal();
    y[i] = rng.normal();
  }
  const double base = compute_metrics(x, y, MetricMode::real).nmse;
  Tensor xs = 3.7 * x, ys = 3.7 * y;
  CHECK(compute_metrics(xs, ys, MetricMode::real).nmse == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("error rate plus accuracy is one") {
  Rng rng(4);
  Tensor truth(50, 3), est(50, 3);
  for (size_t i = 0; i < truth.size(); ++i) {
    truth[i] = rng.uniform() < 0.4 ? 1.0 : 0.0;
    est[i] = rng.uniform() < 0.5 ? 1.0 : 0.0;
  }
  EvalReport r = compute_metrics(est, truth, MetricMode::binary);
  double agree = 0.0;
  for (size_t i = 0; i < truth.size(); ++i) agree += (est[i] > 0.5) == (truth[i] > 0.5);
  CHECK(r.error_rate + agree / truth.size() == doctest::Approx(1.0));
}

TEST_CASE("multi-column aggregation is per-column then mean") {
  Tensor truth(2, 2), est(2, 2);
  truth(0, 0) = 1.0;
  truth(1, 0) = 1.0;  // column 0 norm^2 = 2
  truth(0, 1) = 10.0;
  truth(1, 1) = 0.0;  // column 1 norm^2 = 100
  est = truth;
  est(0, 0) = 0.0;  // column 0 error: nmse = 1/2
  est(0, 1) = 9.0;  // column 1 error: nmse = 1/100
  EvalReport r = compute_metrics(est, truth, MetricMode::real);
  CHECK(r.nmse == doctest::Approx(0.5 * (0.5 + 0.01)));
}
