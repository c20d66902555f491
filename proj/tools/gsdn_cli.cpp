#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gsdn/baselines.hpp"
#include "gsdn/datagen.hpp"
#include "gsdn/graph.hpp"
#include "gsdn/harness.hpp"
#include "gsdn/io.hpp"
#include "gsdn/metrics.hpp"
#include "gsdn/spectral.hpp"
#include "gsdn/unroll.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

gsdn::ExperimentConfig load_config(const std::string& config_path, uint64_t seed, bool seed_set,
                                   const std::string& out_dir, int threads) {
  gsdn::ExperimentConfig cfg;
  if (!config_path.empty()) cfg = gsdn::ExperimentConfig::from_json(read_file(config_path));
  if (seed_set) cfg.seed = seed;
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (threads > 0) cfg.threads = threads;
  return cfg;
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::istringstream ss(csv);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph signal denoising toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  uint64_t seed = 0;
  int threads = 0;
  app.add_option("--config", config_path, "experiment config JSON");
  auto* seed_opt = app.add_option("--seed", seed, "override RNG seed");
  app.add_option("--out-dir", out_dir, "output directory");
  app.add_option("--threads", threads, "worker threads for the sweep grid");

  // gen: simulated graph + signals + noise + manifest
  auto* gen = app.add_subcommand("gen", "generate a simulated graph and signal set");
  int gen_n = 500, gen_k = 1, gen_pieces = 5, gen_bandwidth = 0;
  double gen_radius = 0.1, gen_sigma = 0.5, gen_b = 0.2, gen_flip = 0.1;
  std::string gen_kind = "smooth", gen_noise = "gaussian";
  gen->add_option("--n", gen_n, "vertex count");
  gen->add_option("--radius", gen_radius, "connection radius");
  gen->add_option("--kind", gen_kind, "smooth | piecewise-constant | piecewise-smooth");
  gen->add_option("--k", gen_k, "signal count");
  gen->add_option("--pieces", gen_pieces, "partition pieces");
  gen->add_option("--bandwidth", gen_bandwidth, "eigenvector count (0 = kind default)");
  gen->add_option("--noise", gen_noise, "gaussian | mixture | bernoulli");
  gen->add_option("--sigma", gen_sigma, "gaussian std");
  gen->add_option("--b", gen_b, "laplace scale (mixture)");
  gen->add_option("--flip-rate", gen_flip, "bernoulli flip rate");

  // eigen: eigenvalue dump
  auto* eig = app.add_subcommand("eigen", "dump eigenvalues of a graph to CSV");
  std::string eig_graph, eig_out = "eigenvalues.csv", eig_matrix = "adjacency";
  eig->add_option("--graph", eig_graph, "edge-list TSV")->required();
  eig->add_option("--out", eig_out, "output CSV");
  eig->add_option("--matrix", eig_matrix, "adjacency | laplacian");

  // denoise: single file in/out
  auto* den = app.add_subcommand("denoise", "denoise one signal CSV");
  std::string den_graph, den_in, den_out = "denoised.csv", den_method = "gld", den_clean;
  double den_alpha = -1.0;
  int den_epochs = -1;
  den->add_option("--graph", den_graph, "edge-list TSV")->required();
  den->add_option("--in", den_in, "noisy signals CSV")->required();
  den->add_option("--out", den_out, "output CSV");
  den->add_option("--method", den_method, "baseline|gld|gtf|gft|mlp|gusc|gutf|hqs");
  den->add_option("--alpha", den_alpha, "regularization / threshold (<0: grid search where supported)");
  den->add_option("--epochs", den_epochs, "training epochs for learned methods");
  den->add_option("--clean", den_clean, "clean signals CSV (enables grid search and NMSE report)");

  auto* bench = app.add_subcommand("bench", "run the benchmark grid from a config");
  auto* converge = app.add_subcommand("converge", "log a training convergence curve");
  std::string converge_out = "curve.csv";
  converge->add_option("--out", converge_out, "curve CSV path");
  auto* sweep = app.add_subcommand("sweep", "noise-level sweep");
  std::string sweep_sigmas = "0.1,0.3,0.5";
  sweep->add_option("--sigmas", sweep_sigmas, "comma-separated sigma list");

  CLI11_PARSE(app, argc, argv);
  const bool seed_set = seed_opt->count() > 0;

  try {
    if (gen->parsed()) {
      gsdn::ExperimentConfig cfg = load_config(config_path, seed, seed_set, out_dir, threads);
      const std::string dir = cfg.out_dir.empty() ? "." : cfg.out_dir;
      std::filesystem::create_directories(dir);
      gsdn::Graph g = gsdn::random_geometric_graph(gen_n, gen_radius, cfg.seed);
      gsdn::SignalSpec spec;
      spec.kind = gen_kind == "smooth" ? gsdn::SignalKind::smooth
                  : gen_kind == "piecewise-constant"
                      ? gsdn::SignalKind::piecewise_constant
                      : gsdn::SignalKind::piecewise_smooth;
      spec.bandwidth = gen_bandwidth;
      spec.pieces = gen_pieces;
      spec.count = gen_k;
      spec.seed = cfg.seed;
      const gsdn::Tensor clean = gsdn::generate_signals(g, spec);
      gsdn::NoiseSpec noise;
      noise.model = gen_noise == "gaussian" ? gsdn::NoiseModel::gaussian
                    : gen_noise == "mixture" ? gsdn::NoiseModel::mixture
                                             : gsdn::NoiseModel::bernoulli;
      noise.sigma = gen_sigma;
      noise.b = gen_b;
      noise.flip_rate = gen_flip;
      noise.seed = gsdn::Rng::derive(cfg.seed, 0x6E7A);
      const gsdn::Tensor noisy = gsdn::add_noise(clean, noise);
      gsdn::save_graph(g, dir + "/graph.tsv");
      gsdn::save_signals_csv(clean, dir + "/clean.csv");
      gsdn::save_signals_csv(noisy, dir + "/noisy.csv");
      nlohmann::json manifest;
      manifest["n"] = gen_n;
      manifest["radius"] = gen_radius;
      manifest["kind"] = gen_kind;
      manifest["bandwidth"] = gen_bandwidth;
      manifest["pieces"] = gen_pieces;
      manifest["k"] = gen_k;
      manifest["noise"] = {{"model", gen_noise}, {"sigma", gen_sigma}, {"b", gen_b}, {"flip_rate", gen_flip},
                           {"seed", noise.seed}};
      manifest["seed"] = cfg.seed;
      manifest["norm_scale"] = g.norm_scale;
      manifest["column_mean_square"] = 0.5;
      std::ofstream mf(dir + "/manifest.json");
      mf << manifest.dump(2);
      std::printf("wrote %s/{graph.tsv,clean.csv,noisy.csv,manifest.json}\n", dir.c_str());
      return 0;
    }

    if (eig->parsed()) {
      const gsdn::Graph g = gsdn::normalize_adjacency(gsdn::load_graph(eig_graph));
      const gsdn::Tensor m = eig_matrix == "laplacian" ? gsdn::laplacian_dense(g) : g.adjacency.to_dense();
      const gsdn::SpectralBasis basis = gsdn::eig_sym(
          m, eig_matrix == "laplacian" ? gsdn::SpectralSource::laplacian : gsdn::SpectralSource::adjacency);
      std::ofstream outf(eig_out);
      if (!outf) throw std::runtime_error("cannot open " + eig_out);
      for (double ev : basis.eigenvalues) outf << gsdn::format_double(ev) << "\n";
      std::printf("wrote %zu eigenvalues to %s\n", basis.eigenvalues.size(), eig_out.c_str());
      return 0;
    }

    if (den->parsed()) {
      const gsdn::Graph g = gsdn::normalize_adjacency(gsdn::load_graph(den_graph));
      const gsdn::Tensor noisy = gsdn::load_signals_csv(den_in);
      gsdn::Tensor clean;
      const bool has_clean = !den_clean.empty();
      if (has_clean) clean = gsdn::load_signals_csv(den_clean);
      gsdn::MethodConfig method;
      method.name = den_method;
      method.alpha = den_alpha;
      method.epochs = den_epochs;
      const gsdn::Tensor denoised =
          gsdn::denoise_once(g, noisy, method, seed_set ? seed : 0, has_clean ? &clean : nullptr);
      gsdn::save_signals_csv(denoised, den_out);
      if (has_clean)
        std::printf("nmse=%s\n", gsdn::format_double(gsdn::nmse(denoised, clean)).c_str());
      std::printf("wrote %s\n", den_out.c_str());
      return 0;
    }

    if (bench->parsed()) {
      gsdn::ExperimentConfig cfg = load_config(config_path, seed, seed_set, out_dir, threads);
      return gsdn::run_experiment(cfg);
    }

    if (converge->parsed()) {
      gsdn::ExperimentConfig cfg = load_config(config_path, seed, seed_set, out_dir, threads);
      std::filesystem::create_directories(cfg.out_dir);
      return gsdn::run_convergence(cfg, cfg.out_dir + "/" + converge_out);
    }

    if (sweep->parsed()) {
      gsdn::ExperimentConfig cfg = load_config(config_path, seed, seed_set, out_dir, threads);
      return gsdn::run_noise_sweep(cfg, parse_doubles(sweep_sigmas));
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
