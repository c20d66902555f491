#pragma once

#include <string>

#include "gsdn/tensor.hpp"

namespace gsdn {

// All floats in output files carry 17 significant digits (round-trip exact).
std::string format_double(double v);

// Signals CSV: N rows x K comma-separated floats, no header.
Tensor load_signals_csv(const std::string& path);
void save_signals_csv(const Tensor& x, const std::string& path);

}  // namespace gsdn
