#include "gsdn/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace gsdn {

double nmse(const Tensor& estimate, const Tensor& truth) {
  if (!estimate.same_shape(truth)) throw std::invalid_argument("nmse: shape mismatch");
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < truth.size(); ++i) {
    const double d = estimate[i] - truth[i];
    num += d * d;
    den += truth[i] * truth[i];
  }
  if (den == 0.0) throw std::invalid_argument("nmse: undefined normalization, zero reference signal");
  return num / den;
}

EvalReport compute_metrics(const Tensor& estimate, const Tensor& truth, MetricMode mode) {
  if (!estimate.same_shape(truth)) throw std::invalid_argument("compute_metrics: shape mismatch");
  const int n = truth.rows();
  const int k = truth.cols();
  EvalReport report;
  for (int c = 0; c < k; ++c) {
    if (mode == MetricMode::real) {
      double num2 = 0.0, den2 = 0.0, num1 = 0.0, den1 = 0.0;
      for (int i = 0; i < n; ++i) {
        const double d = estimate(i, c) - truth(i, c);
        num2 += d * d;
        den2 += truth(i, c) * truth(i, c);
        num1 += std::fabs(d);
        den1 += std::fabs(truth(i, c));
      }
      if (den2 == 0.0) throw std::invalid_argument("compute_metrics: undefined normalization, zero reference column");
      report.nmse += num2 / den2;
      report.nmae += num1 / den1;
    } else {
      int wrong = 0, tp = 0, fp = 0, fn = 0;
      for (int i = 0; i < n; ++i) {
        const double t = truth(i, c);
        if (t != 0.0 && t != 1.0)
          throw std::invalid_argument("compute_metrics: binary mode requires a 0/1 reference");
        const int pred = estimate(i, c) > 0.5 ? 1 : 0;
        const int label = t == 1.0 ? 1 : 0;
        wrong += pred != label;
        tp += pred == 1 && label == 1;
        fp += pred == 1 && label == 0;
        fn += pred == 0 && label == 1;
      }
      report.error_rate += static_cast<double>(wrong) / n;
      if (tp == 0) {
        // Precision or recall degenerates; F1 defined as 0, flagged.
        report.f1_undefined = true;
      } else {
        const double precision = static_cast<double>(tp) / (tp + fp);
        const double recall = static_cast<double>(tp) / (tp + fn);
        report.f1 += 2.0 * precision * recall / (precision + recall);
      }
    }
  }
  report.nmse /= k;
  report.nmae /= k;
  report.error_rate /= k;
  report.f1 /= k;
  return report;
}

}  // namespace gsdn
