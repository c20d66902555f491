#include "gsdn/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "gsdn/baselines.hpp"
#include "gsdn/io.hpp"
#include "gsdn/metrics.hpp"

namespace gsdn {

namespace {

SignalKind signal_kind_from(const std::string& s) {
  if (s == "smooth") return SignalKind::smooth;
  if (s == "piecewise-constant" || s == "pc") return SignalKind::piecewise_constant;
  if (s == "piecewise-smooth" || s == "ps") return SignalKind::piecewise_smooth;
  throw std::invalid_argument("config: unknown signal kind '" + s + "'");
}

NoiseModel noise_model_from(const std::string& s) {
  if (s == "gaussian") return NoiseModel::gaussian;
  if (s == "mixture") return NoiseModel::mixture;
  if (s == "bernoulli") return NoiseModel::bernoulli;
  throw std::invalid_argument("config: unknown noise model '" + s + "'");
}

const std::vector<std::string> kKnownMethods = {"baseline", "gld", "gtf", "gft", "mlp", "gusc", "gutf", "hqs"};

}  // namespace

std::string signal_kind_name(SignalKind kind) {
  switch (kind) {
    case SignalKind::smooth: return "smooth";
    case SignalKind::piecewise_constant: return "piecewise-constant";
    case SignalKind::piecewise_smooth: return "piecewise-smooth";
  }
  return "?";
}

std::string noise_model_name(NoiseModel model) {
  switch (model) {
    case NoiseModel::gaussian: return "gaussian";
    case NoiseModel::mixture: return "mixture";
    case NoiseModel::bernoulli: return "bernoulli";
  }
  return "?";
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ExperimentConfig cfg;
  cfg.n = j.value("n", cfg.n);
  cfg.radius = j.value("radius", cfg.radius);
  cfg.graph_file = j.value("graph_file", cfg.graph_file);
  if (j.contains("signal")) {
    const auto& s = j["signal"];
    cfg.signal.kind = signal_kind_from(s.value("kind", std::string("smooth")));
    cfg.signal.bandwidth = s.value("bandwidth", 0);
    cfg.signal.pieces = s.value("pieces", 5);
  }
  if (j.contains("noise")) {
    const auto& nz = j["noise"];
    cfg.noise.model = noise_model_from(nz.value("model", std::string("gaussian")));
    cfg.noise.sigma = nz.value("sigma", 0.5);
    cfg.noise.b = nz.value("b", 0.2);
    cfg.noise.flip_rate = nz.value("flip_rate", 0.1);
  }
  if (j.contains("k_values")) cfg.k_values = j["k_values"].get<std::vector<int>>();
  cfg.trials = j.value("trials", cfg.trials);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.threads = j.value("threads", cfg.threads);
  cfg.out_dir = j.value("out_dir", cfg.out_dir);
  if (j.contains("methods")) {
    for (const auto& m : j["methods"]) {
      MethodConfig mc;
      if (m.is_string()) {
        mc.name = m.get<std::string>();
      } else {
        mc.name = m.at("name").get<std::string>();
        mc.alpha = m.value("alpha", mc.alpha);
        mc.epochs = m.value("epochs", mc.epochs);
        mc.layers = m.value("layers", mc.layers);
        mc.d = m.value("d", mc.d);
        mc.D = m.value("D", mc.D);
        mc.width = m.value("width", mc.width);
        mc.lr = m.value("lr", mc.lr);
        mc.conv_order = m.value("order", mc.conv_order);
        mc.coord_dim = m.value("p", mc.coord_dim);
        mc.trainable_alpha = m.value("trainable_alpha", mc.trainable_alpha);
        mc.rho = m.value("rho", mc.rho);
        mc.iterations = m.value("iterations", mc.iterations);
        mc.mu1 = m.value("mu1", mc.mu1);
        mc.mu2 = m.value("mu2", mc.mu2);
        mc.mu3 = m.value("mu3", mc.mu3);
      }
      cfg.methods.push_back(std::move(mc));
    }
  }
  cfg.validate();
  return cfg;
}

std::string ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["n"] = n;
  j["radius"] = radius;
  if (!graph_file.empty()) j["graph_file"] = graph_file;
  j["signal"] = {{"kind", signal_kind_name(signal.kind)}, {"bandwidth", signal.bandwidth}, {"pieces", signal.pieces}};
  j["noise"] = {{"model", noise_model_name(noise.model)},
                {"sigma", noise.sigma},
                {"b", noise.b},
                {"flip_rate", noise.flip_rate}};
  j["k_values"] = k_values;
  j["trials"] = trials;
  j["seed"] = seed;
  j["threads"] = threads;
  j["out_dir"] = out_dir;
  nlohmann::json ms = nlohmann::json::array();
  for (const MethodConfig& m : methods) {
    ms.push_back({{"name", m.name},
                  {"alpha", m.alpha},
                  {"epochs", m.epochs},
                  {"layers", m.layers},
                  {"d", m.d},
                  {"D", m.D},
                  {"width", m.width},
                  {"lr", m.lr},
                  {"order", m.conv_order},
                  {"p", m.coord_dim},
                  {"trainable_alpha", m.trainable_alpha},
                  {"rho", m.rho},
                  {"iterations", m.iterations},
                  {"mu1", m.mu1},
                  {"mu2", m.mu2},
                  {"mu3", m.mu3}});
  }
  j["methods"] = std::move(ms);
  return j.dump(2);
}

std::string ExperimentConfig::hash() const {
  // FNV-1a over the canonical JSON.
  const std::string text = to_json();
  uint64_t h = 1469598103934665603ULL;
  for (char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void ExperimentConfig::validate() const {
  if (methods.empty()) throw std::invalid_argument("config: at least one method required");
  if (trials < 1) throw std::invalid_argument("config: trials must be >= 1");
  if (k_values.empty()) throw std::invalid_argument("config: k_values must not be empty");
  for (const MethodConfig& m : methods) {
    if (std::find(kKnownMethods.begin(), kKnownMethods.end(), m.name) == kKnownMethods.end())
      throw std::invalid_argument("config: unknown method '" + m.name + "'");
  }
}

namespace {

bool needs_context(const std::string& name) {
  return name == "gusc" || name == "gutf" || name == "mlp" || name == "gft";
}

UnrollConfig unroll_config_from(const MethodConfig& m, uint64_t seed, LossKind loss) {
  UnrollConfig cfg;
  cfg.layers = m.layers;
  cfg.d = m.d;
  cfg.D = m.D;
  cfg.alpha = m.alpha >= 0.0 ? m.alpha : 0.05;
  cfg.trainable_alpha = m.trainable_alpha;
  cfg.epochs = m.epochs >= 0 ? m.epochs : 5000;
  cfg.loss = loss;
  cfg.seed = seed;
  cfg.lr = m.lr;
  cfg.conv_order = m.conv_order;
  cfg.coord_dim = m.coord_dim;
  return cfg;
}

struct TrialData {
  Tensor clean;
  Tensor noisy;
  uint64_t seed = 0;
};

}  // namespace

Tensor denoise_once_with_context(const GraphContext& ctx, const Tensor& noisy, const MethodConfig& method,
                                 uint64_t seed, const Tensor* clean, LossKind loss) {
  const Graph& g = ctx.graph;
  if (method.name == "baseline") return noisy;
  if (method.name == "gld") {
    if (method.alpha >= 0.0) return gld_denoise(noisy, g, method.alpha);
    if (!clean) throw std::invalid_argument("gld: grid search needs a clean signal; pass alpha instead");
    const double best = grid_search_alpha([&](double a) { return gld_denoise(noisy, g, a); }, *clean,
                                          default_alpha_grid());
    return gld_denoise(noisy, g, best);
  }
  if (method.name == "gtf") {
    AdmmOptions opts;
    opts.rho = method.rho;
    if (method.iterations > 0) opts.iterations = method.iterations;
    if (method.alpha >= 0.0) return gtf_denoise(noisy, ctx.incidence, method.alpha, opts);
    if (!clean) throw std::invalid_argument("gtf: grid search needs a clean signal; pass alpha instead");
    const double best = grid_search_alpha(
        [&](double a) { return gtf_denoise(noisy, ctx.incidence, a, opts); }, *clean, default_alpha_grid());
    return gtf_denoise(noisy, ctx.incidence, best, opts);
  }
  if (method.name == "gft") {
    if (method.alpha >= 0.0) return gft_denoise(noisy, ctx.basis, method.alpha);
    if (!clean) throw std::invalid_argument("gft: grid search needs a clean signal; pass alpha instead");
    const double best =
        grid_search_alpha([&](double a) { return gft_denoise(noisy, ctx.basis, a); }, *clean, default_alpha_grid());
    return gft_denoise(noisy, ctx.basis, best);
  }
  if (method.name == "hqs") {
    HqsConfig hq;
    hq.mu1 = method.mu1;
    hq.mu2 = method.mu2;
    hq.mu3 = method.mu3;
    if (method.iterations > 0) hq.iterations = method.iterations;
    // Default instance: trend filtering (P = incidence, l1 on y).
    hq.p = OperatorKind::incidence;
    hq.prox_u = ProxKind::l1;
    hq.alpha_u = method.alpha >= 0.0 ? method.alpha : 0.05;
    return hqs_solve(noisy, g, hq).x;
  }
  if (method.name == "mlp") {
    UnrollConfig cfg = unroll_config_from(method, seed, loss);
    return mlp_denoise(noisy, ctx, cfg, method.width, clean).denoised;
  }
  if (method.name == "gusc") {
    UnrollConfig cfg = unroll_config_from(method, seed, loss);
    GuscModel model(noisy.cols(), ctx, cfg);
    return train(model, noisy, ctx, cfg, clean).denoised;
  }
  if (method.name == "gutf") {
    UnrollConfig cfg = unroll_config_from(method, seed, loss);
    GutfModel model(noisy.cols(), ctx, cfg);
    return train(model, noisy, ctx, cfg, clean).denoised;
  }
  throw std::invalid_argument("denoise: unknown method '" + method.name + "'");
}

Tensor denoise_once(const Graph& normalized, const Tensor& noisy, const MethodConfig& method, uint64_t seed,
                    const Tensor* clean) {
  GraphContext ctx;
  ctx.graph = normalized;
  ctx.incidence = incidence_matrix(normalized);
  if (needs_context(method.name)) {
    ctx = make_graph_context(normalized, method.conv_order, std::min(method.coord_dim, normalized.n));
  }
  return denoise_once_with_context(ctx, noisy, method, seed, clean,
                                   LossKind::frobenius);
}

namespace {

Graph experiment_graph(const ExperimentConfig& cfg) {
  if (!cfg.graph_file.empty()) return normalize_adjacency(load_graph(cfg.graph_file));
  return random_geometric_graph(cfg.n, cfg.radius, cfg.seed);
}

struct Task {
  int k = 0;
  int trial = 0;
  size_t method_index = 0;
  size_t data_index = 0;
};

ExperimentResult run_grid(const ExperimentConfig& cfg, const GraphContext& ctx,
                          const std::vector<std::pair<int, int>>& kt_pairs, const std::vector<TrialData>& data,
                          LossKind loss) {
  std::vector<Task> tasks;
  for (size_t d = 0; d < kt_pairs.size(); ++d)
    for (size_t m = 0; m < cfg.methods.size(); ++m)
      tasks.push_back({kt_pairs[d].first, kt_pairs[d].second, m, d});

  ExperimentResult result;
  result.rows.resize(tasks.size());
  std::mutex failures_mutex;
  std::atomic<size_t> next{0};

  auto worker = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      const MethodConfig& method = cfg.methods[task.method_index];
      const TrialData& td = data[task.data_index];
      ResultRow row;
      row.method = method.name;
      row.kind = signal_kind_name(cfg.signal.kind);
      row.noise = noise_model_name(cfg.noise.model);
      row.k = task.k;
      row.trial = task.trial;
      row.seed = td.seed;
      const auto start = std::chrono::steady_clock::now();
      try {
        const Tensor denoised = denoise_once_with_context(ctx, td.noisy, method, td.seed, &td.clean, loss);
        const EvalReport report = compute_metrics(denoised, td.clean, MetricMode::real);
        row.nmse = report.nmse;
        row.nmae = report.nmae;
      } catch (const std::exception& e) {
        row.nmse = std::numeric_limits<double>::quiet_NaN();
        row.nmae = std::numeric_limits<double>::quiet_NaN();
        row.status = std::string("error: ") + e.what();
        std::lock_guard<std::mutex> lock(failures_mutex);
        result.failures += 1;
      }
      row.wall_ms =
          std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(std::chrono::steady_clock::now() - start)
              .count();
      result.rows[i] = std::move(row);
    }
  };

  const int nthreads = std::max(1, cfg.threads);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  return result;
}

void write_rows_csv(const std::string& path, const ExperimentConfig& cfg, const std::vector<ResultRow>& rows,
                    const std::string& extra_col = "") {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "# config_hash=" << cfg.hash() << " seed=" << cfg.seed << "\n";
  out << "method,kind,noise,k,trial,seed,nmse,nmae,wall_ms,status" << (extra_col.empty() ? "" : ",") << extra_col
      << "\n";
  for (const ResultRow& row : rows) {
    out << row.method << "," << row.kind << "," << row.noise << "," << row.k << "," << row.trial << "," << row.seed
        << "," << format_double(row.nmse) << "," << format_double(row.nmae) << "," << format_double(row.wall_ms)
        << "," << row.status << "\n";
  }
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, ExperimentResult* out) {
  cfg.validate();
  std::filesystem::create_directories(cfg.out_dir);
  const Graph graph = experiment_graph(cfg);
  const LossKind loss = cfg.noise.model == NoiseModel::bernoulli ? LossKind::binary_cross_entropy : LossKind::frobenius;

  bool wants_context = false;
  int conv_order = 1, coord_dim = 16;
  for (const MethodConfig& m : cfg.methods) {
    if (needs_context(m.name)) {
      wants_context = true;
      conv_order = std::max(conv_order, m.conv_order);
      coord_dim = std::max(coord_dim, m.coord_dim);
    }
  }
  GraphContext ctx;
  if (wants_context) {
    ctx = make_graph_context(graph, conv_order, std::min(coord_dim, graph.n));
  } else {
    ctx.graph = graph;
    ctx.incidence = incidence_matrix(graph);
    ctx.powers = shift_powers(graph, 1);
  }

  SignalSpec proto = cfg.signal;
  proto.seed = cfg.seed;
  const SignalFactory factory(graph, proto);

  std::vector<std::pair<int, int>> kt_pairs;
  std::vector<TrialData> data;
  for (int k : cfg.k_values) {
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const uint64_t trial_seed = cfg.seed ^ static_cast<uint64_t>(trial);
      TrialData td;
      td.seed = trial_seed;
      td.clean = factory.generate(Rng::derive(trial_seed, static_cast<uint64_t>(k)), k);
      NoiseSpec nz = cfg.noise;
      nz.seed = Rng::derive(trial_seed, 0x6E7A00 + static_cast<uint64_t>(k));
      td.noisy = add_noise(td.clean, nz);
      kt_pairs.emplace_back(k, trial);
      data.push_back(std::move(td));
    }
  }

  ExperimentResult result = run_grid(cfg, ctx, kt_pairs, data, loss);

  write_rows_csv(cfg.out_dir + "/results.csv", cfg, result.rows);

  // Summary: mean nmse/nmae per (method, k) over trials.
  nlohmann::json summary;
  summary["config_hash"] = cfg.hash();
  summary["seed"] = cfg.seed;
  summary["config"] = nlohmann::json::parse(cfg.to_json());
  nlohmann::json means = nlohmann::json::array();
  for (const MethodConfig& m : cfg.methods) {
    for (int k : cfg.k_values) {
      double snmse = 0.0, snmae = 0.0, s2 = 0.0;
      int count = 0;
      for (const ResultRow& row : result.rows) {
        if (row.method != m.name || row.k != k || row.status != "ok") continue;
        snmse += row.nmse;
        snmae += row.nmae;
        s2 += row.nmse * row.nmse;
        ++count;
      }
      if (count == 0) continue;
      const double mean = snmse / count;
      const double var = count > 1 ? std::max(0.0, (s2 - count * mean * mean) / (count - 1)) : 0.0;
      means.push_back({{"method", m.name},
                       {"k", k},
                       {"trials", count},
                       {"nmse_mean", mean},
                       {"nmse_std", std::sqrt(var)},
                       {"nmae_mean", snmae / count}});
    }
  }
  summary["means"] = std::move(means);
  summary["failures"] = result.failures;
  std::ofstream sj(cfg.out_dir + "/summary.json");
  sj << summary.dump(2);

  if (out) *out = result;
  return result.failures == 0 ? 0 : 2;
}

int run_convergence(const ExperimentConfig& cfg, const std::string& out_csv, TrainResult* out) {
  cfg.validate();
  if (cfg.methods.size() != 1 || (cfg.methods[0].name != "gusc" && cfg.methods[0].name != "gutf"))
    throw std::invalid_argument("converge: exactly one unrolling method (gusc or gutf) required");
  const MethodConfig& method = cfg.methods[0];
  const Graph graph = experiment_graph(cfg);
  const GraphContext ctx = make_graph_context(graph, method.conv_order, std::min(method.coord_dim, graph.n));

  SignalSpec proto = cfg.signal;
  proto.seed = cfg.seed;
  const SignalFactory factory(graph, proto);
  const int k = cfg.k_values.front();
  const Tensor clean = factory.generate(Rng::derive(cfg.seed, static_cast<uint64_t>(k)), k);
  NoiseSpec nz = cfg.noise;
  nz.seed = Rng::derive(cfg.seed, 0x6E7A00 + static_cast<uint64_t>(k));
  const Tensor noisy = add_noise(clean, nz);

  const LossKind loss = cfg.noise.model == NoiseModel::bernoulli ? LossKind::binary_cross_entropy : LossKind::frobenius;
  UnrollConfig ucfg = unroll_config_from(method, cfg.seed, loss);
  TrainResult result;
  if (method.name == "gusc") {
    GuscModel model(noisy.cols(), ctx, ucfg);
    result = train(model, noisy, ctx, ucfg, &clean);
  } else {
    GutfModel model(noisy.cols(), ctx, ucfg);
    result = train(model, noisy, ctx, ucfg, &clean);
  }

  std::ofstream outfile(out_csv);
  if (!outfile) throw std::runtime_error("converge: cannot open " + out_csv);
  outfile << "# config_hash=" << cfg.hash() << " seed=" << cfg.seed << "\n";
  outfile << "epoch,loss,nmse_to_noisy,nmse_to_clean\n";
  for (const EpochLog& log : result.curve) {
    outfile << log.epoch << "," << format_double(log.loss) << "," << format_double(log.nmse_to_noisy) << ","
            << format_double(log.nmse_to_clean) << "\n";
  }
  if (out) *out = result;
  return 0;
}

int run_noise_sweep(const ExperimentConfig& cfg, const std::vector<double>& sigmas, ExperimentResult* out) {
  cfg.validate();
  if (cfg.noise.model != NoiseModel::gaussian)
    throw std::invalid_argument("sweep: gaussian noise model required");
  if (sigmas.empty()) throw std::invalid_argument("sweep: at least one sigma required");
  std::filesystem::create_directories(cfg.out_dir);

  ExperimentResult all;
  std::vector<double> baseline_means;
  bool has_baseline = false;
  for (const MethodConfig& m : cfg.methods) has_baseline |= m.name == "baseline";

  for (double sigma : sigmas) {
    ExperimentConfig step = cfg;
    step.noise.sigma = sigma;
    step.out_dir = cfg.out_dir + "/sigma_" + format_double(sigma);
    ExperimentResult res;
    run_experiment(step, &res);
    double bsum = 0.0;
    int bcount = 0;
    for (ResultRow& row : res.rows) {
      row.noise = "gaussian(sigma=" + format_double(sigma) + ")";
      if (row.method == "baseline" && row.status == "ok") {
        bsum += row.nmse;
        ++bcount;
      }
      all.rows.push_back(row);
    }
    all.failures += res.failures;
    if (has_baseline && bcount > 0) baseline_means.push_back(bsum / bcount);
  }

  write_rows_csv(cfg.out_dir + "/sweep.csv", cfg, all.rows);

  // Baseline NMSE must grow with the noise level.
  for (size_t i = 1; i < baseline_means.size(); ++i) {
    if (!(baseline_means[i] > baseline_means[i - 1])) {
      std::fprintf(stderr, "sweep: baseline NMSE not strictly increasing in sigma\n");
      all.failures += 1;
    }
  }
  if (out) *out = all;
  return all.failures == 0 ? 0 : 2;
}

}  // namespace gsdn
