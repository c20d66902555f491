#pragma once

#include <string>

#include "gsdn/tensor.hpp"

namespace gsdn {

enum class MetricMode { real, binary };

// Per-column metrics averaged over columns. Binary mode thresholds the
// estimate at 0.5 and scores the positive class for precision/recall.
struct EvalReport {
  double nmse = 0.0;
  double nmae = 0.0;
  double error_rate = 0.0;  // binary mode
  double f1 = 0.0;          // binary mode
  bool f1_undefined = false;  // no predicted or true positives in some column
};

EvalReport compute_metrics(const Tensor& estimate, const Tensor& truth, MetricMode mode);

double nmse(const Tensor& estimate, const Tensor& truth);

}  // namespace gsdn
