#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gsdn/datagen.hpp"
#include "gsdn/graph.hpp"
#include "gsdn/unroll.hpp"

namespace gsdn {

// Per-method knobs. A missing alpha on the classical denoisers means
// grid-searched against the clean signal.
struct MethodConfig {
  std::string name;  // baseline | gld | gtf | gft | mlp | gusc | gutf | hqs
  double alpha = -1.0;  // < 0: grid search (gld/gtf/gft); soft threshold for the rest
  int epochs = -1;      // < 0: UnrollConfig default
  int layers = 1;
  int d = 64, D = 64;
  int width = 64;  // mlp hidden width
  double lr = 1e-3;
  int conv_order = 1;
  int coord_dim = 16;
  bool trainable_alpha = false;
  double rho = 1.0;  // gtf
  int iterations = -1;  // gtf admm / hqs
  double mu1 = 1.0, mu2 = 1.0, mu3 = 1.0;  // hqs
};

struct ExperimentConfig {
  int n = 500;
  double radius = 0.1;
  std::string graph_file;  // when set, loaded instead of generated
  SignalSpec signal;
  NoiseSpec noise;
  std::vector<int> k_values = {1, 10, 100};
  int trials = 3;
  uint64_t seed = 0;
  int threads = 1;
  std::string out_dir = ".";
  std::vector<MethodConfig> methods;

  static ExperimentConfig from_json(const std::string& text);
  std::string to_json() const;
  std::string hash() const;  // stable hash of the canonical JSON
  void validate() const;
};

struct ResultRow {
  std::string method;
  std::string kind;
  std::string noise;
  int k = 0;
  int trial = 0;
  uint64_t seed = 0;
  double nmse = 0.0;
  double nmae = 0.0;
  double wall_ms = 0.0;
  std::string status = "ok";
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  int failures = 0;
};

// Runs the (K, trial, method) grid on one seeded graph; writes results.csv
// and summary.json under cfg.out_dir. Returns 0 on success, 2 on partial
// failures.
int run_experiment(const ExperimentConfig& cfg, ExperimentResult* out = nullptr);

// Trains one unrolling method and writes a per-epoch curve CSV
// (epoch, loss, nmse_to_noisy, nmse_to_clean), logged every 10 epochs.
int run_convergence(const ExperimentConfig& cfg, const std::string& out_csv, TrainResult* out = nullptr);

// One row per (sigma, method, trial) under Gaussian noise; verifies the
// baseline NMSE increases with sigma.
int run_noise_sweep(const ExperimentConfig& cfg, const std::vector<double>& sigmas, ExperimentResult* out = nullptr);

// Denoises one signal matrix with one method (used by the CLI `denoise`).
Tensor denoise_once(const Graph& normalized, const Tensor& noisy, const MethodConfig& method, uint64_t seed,
                    const Tensor* clean = nullptr);

std::string signal_kind_name(SignalKind kind);
std::string noise_model_name(NoiseModel model);

}  // namespace gsdn
