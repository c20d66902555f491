#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gsdn/baselines.hpp"
#include "gsdn/datagen.hpp"
#include "gsdn/graph.hpp"
#include "gsdn/harness.hpp"
#include "gsdn/metrics.hpp"
#include "gsdn/spectral.hpp"
#include "gsdn/unroll.hpp"

namespace py = pybind11;

namespace {

gsdn::Tensor tensor_from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() == 1) {
    gsdn::Tensor t(static_cast<int>(a.shape(0)), 1);
    std::copy(a.data(), a.data() + a.size(), t.data());
    return t;
  }
  if (a.ndim() == 2) {
    gsdn::Tensor t(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
    std::copy(a.data(), a.data() + a.size(), t.data());
    return t;
  }
  throw std::invalid_argument("expected a 1-D or 2-D float array");
}

py::array_t<double> array_from_tensor(const gsdn::Tensor& t) {
  py::array_t<double> a({t.rows(), t.cols()});
  std::copy(t.data(), t.data() + t.size(), a.mutable_data());
  return a;
}

gsdn::SignalKind kind_from(const std::string& s) {
  if (s == "smooth") return gsdn::SignalKind::smooth;
  if (s == "piecewise-constant") return gsdn::SignalKind::piecewise_constant;
  if (s == "piecewise-smooth") return gsdn::SignalKind::piecewise_smooth;
  throw std::invalid_argument("unknown signal kind: " + s);
}

gsdn::NoiseModel model_from(const std::string& s) {
  if (s == "gaussian") return gsdn::NoiseModel::gaussian;
  if (s == "mixture") return gsdn::NoiseModel::mixture;
  if (s == "bernoulli") return gsdn::NoiseModel::bernoulli;
  throw std::invalid_argument("unknown noise model: " + s);
}

struct PyTrainOutput {
  py::array_t<double> denoised;
  std::vector<double> loss_history;
};

}  // namespace

PYBIND11_MODULE(gsdn, m) {
  m.doc() = "Graph signal denoising: unrolling networks, classical denoisers, simulated benchmarks";

  py::class_<gsdn::Graph>(m, "Graph")
      .def_property_readonly("n", [](const gsdn::Graph& g) { return g.n; })
      .def_property_readonly("num_edges", [](const gsdn::Graph& g) { return g.edges.size(); })
      .def_property_readonly("norm_scale", [](const gsdn::Graph& g) { return g.norm_scale; })
      .def("adjacency", [](const gsdn::Graph& g) { return array_from_tensor(g.adjacency.to_dense()); })
      .def("laplacian", [](const gsdn::Graph& g) { return array_from_tensor(gsdn::laplacian_dense(g)); });

  m.def("load_graph", &gsdn::load_graph, py::arg("path"));
  m.def("save_graph", &gsdn::save_graph, py::arg("graph"), py::arg("path"));
  m.def("normalize_adjacency", &gsdn::normalize_adjacency, py::arg("graph"));
  m.def(
      "graph_from_edges",
      [](int n, const std::vector<std::tuple<int, int, double>>& edges) {
        std::vector<gsdn::Edge> es;
        es.reserve(edges.size());
        for (const auto& [i, j, w] : edges) es.push_back({i, j, w});
        return gsdn::graph_from_edges(n, std::move(es));
      },
      py::arg("n"), py::arg("edges"));
  m.def("random_geometric_graph", &gsdn::random_geometric_graph, py::arg("n"), py::arg("radius"), py::arg("seed"));
  m.def("partition_graph", &gsdn::partition_graph, py::arg("graph"), py::arg("pieces"), py::arg("seed"));

  m.def(
      "incidence_matrix",
      [](const gsdn::Graph& g) { return array_from_tensor(gsdn::incidence_matrix(g).delta.to_dense()); },
      py::arg("graph"));

  m.def(
      "eig_sym",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
        const gsdn::SpectralBasis basis = gsdn::eig_sym(tensor_from_array(a));
        return py::make_tuple(basis.eigenvalues, array_from_tensor(basis.eigenvectors));
      },
      py::arg("matrix"), "eigenvalues (descending) and orthonormal eigenvectors of a symmetric matrix");

  m.def(
      "gft",
      [](const gsdn::Graph& g, const py::array_t<double, py::array::c_style | py::array::forcecast>& x) {
        const gsdn::SpectralBasis basis = gsdn::eig_sym(g.adjacency.to_dense());
        return array_from_tensor(gsdn::gft(basis, tensor_from_array(x)));
      },
      py::arg("graph"), py::arg("x"));

  m.def(
      "generate_signals",
      [](const gsdn::Graph& g, const std::string& kind, int count, uint64_t seed, int bandwidth, int pieces) {
        gsdn::SignalSpec spec;
        spec.kind = kind_from(kind);
        spec.count = count;
        spec.seed = seed;
        spec.bandwidth = bandwidth;
        spec.pieces = pieces;
        return array_from_tensor(gsdn::generate_signals(g, spec));
      },
      py::arg("graph"), py::arg("kind"), py::arg("count") = 1, py::arg("seed") = 0, py::arg("bandwidth") = 0,
      py::arg("pieces") = 5);

  m.def(
      "add_noise",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x, const std::string& model,
         double sigma, double b, double flip_rate, uint64_t seed) {
        gsdn::NoiseSpec spec;
        spec.model = model_from(model);
        spec.sigma = sigma;
        spec.b = b;
        spec.flip_rate = flip_rate;
        spec.seed = seed;
        return array_from_tensor(gsdn::add_noise(tensor_from_array(x), spec));
      },
      py::arg("x"), py::arg("model") = "gaussian", py::arg("sigma") = 0.5, py::arg("b") = 0.2,
      py::arg("flip_rate") = 0.1, py::arg("seed") = 0);

  m.def(
      "soft_threshold",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& x, double alpha) {
        return array_from_tensor(gsdn::soft_threshold(tensor_from_array(x), alpha));
      },
      py::arg("x"), py::arg("alpha"));

  m.def(
      "gld_denoise",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& t, const gsdn::Graph& g,
         double alpha) { return array_from_tensor(gsdn::gld_denoise(tensor_from_array(t), g, alpha)); },
      py::arg("t"), py::arg("graph"), py::arg("alpha"));

  m.def(
      "gtf_denoise",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& t, const gsdn::Graph& g, double alpha,
         double rho, int iterations) {
        gsdn::AdmmOptions opts;
        opts.rho = rho;
        opts.iterations = iterations;
        return array_from_tensor(gsdn::gtf_denoise(tensor_from_array(t), gsdn::incidence_matrix(g), alpha, opts));
      },
      py::arg("t"), py::arg("graph"), py::arg("alpha"), py::arg("rho") = 1.0, py::arg("iterations") = 500);

  m.def(
      "gft_denoise",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& t, const gsdn::Graph& g,
         double alpha) {
        const gsdn::SpectralBasis basis = gsdn::eig_sym(g.adjacency.to_dense());
        return array_from_tensor(gsdn::gft_denoise(tensor_from_array(t), basis, alpha));
      },
      py::arg("t"), py::arg("graph"), py::arg("alpha"));

  m.def(
      "hqs_solve",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& t, const gsdn::Graph& g, double alpha,
         double mu1, double mu2, double mu3, int iterations) {
        gsdn::HqsConfig cfg;
        cfg.p = gsdn::OperatorKind::incidence;
        cfg.prox_u = gsdn::ProxKind::l1;
        cfg.alpha_u = alpha;
        cfg.mu1 = mu1;
        cfg.mu2 = mu2;
        cfg.mu3 = mu3;
        cfg.iterations = iterations;
        return array_from_tensor(gsdn::hqs_solve(tensor_from_array(t), g, cfg).x);
      },
      py::arg("t"), py::arg("graph"), py::arg("alpha") = 0.05, py::arg("mu1") = 1.0, py::arg("mu2") = 1.0,
      py::arg("mu3") = 1.0, py::arg("iterations") = 50, "half-quadratic splitting on the trend-filtering instance");

  auto train_fn = [](const std::string& method,
                     const py::array_t<double, py::array::c_style | py::array::forcecast>& noisy,
                     const gsdn::Graph& g, int epochs, int layers, double alpha, int d, int D, double lr,
                     uint64_t seed, int order, int coord_dim) {
    gsdn::UnrollConfig cfg;
    cfg.epochs = epochs;
    cfg.layers = layers;
    cfg.alpha = alpha;
    cfg.d = d;
    cfg.D = D;
    cfg.lr = lr;
    cfg.seed = seed;
    cfg.conv_order = order;
    cfg.coord_dim = coord_dim;
    const gsdn::GraphContext ctx = gsdn::make_graph_context(g, cfg.conv_order, std::min(cfg.coord_dim, g.n));
    const gsdn::Tensor t = tensor_from_array(noisy);
    gsdn::TrainResult result;
    if (method == "gusc") {
      gsdn::GuscModel model(t.cols(), ctx, cfg);
      result = gsdn::train(model, t, ctx, cfg);
    } else if (method == "gutf") {
      gsdn::GutfModel model(t.cols(), ctx, cfg);
      result = gsdn::train(model, t, ctx, cfg);
    } else {
      throw std::invalid_argument("method must be gusc or gutf");
    }
    return py::make_tuple(array_from_tensor(result.denoised), result.loss_history);
  };
  m.def("train_unrolling", train_fn, py::arg("method"), py::arg("noisy"), py::arg("graph"), py::arg("epochs") = 200,
        py::arg("layers") = 1, py::arg("alpha") = 0.05, py::arg("d") = 64, py::arg("D") = 64, py::arg("lr") = 1e-3,
        py::arg("seed") = 0, py::arg("order") = 1, py::arg("p") = 16,
        "unsupervised training of GUSC/GUTF; returns (denoised, loss_history)");

  m.def(
      "nmse",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& b) {
        return gsdn::nmse(tensor_from_array(a), tensor_from_array(b));
      },
      py::arg("estimate"), py::arg("truth"));

  m.def(
      "compute_metrics",
      [](const py::array_t<double, py::array::c_style | py::array::forcecast>& est,
         const py::array_t<double, py::array::c_style | py::array::forcecast>& truth, const std::string& mode) {
        const gsdn::EvalReport r = gsdn::compute_metrics(tensor_from_array(est), tensor_from_array(truth),
                                                         mode == "binary" ? gsdn::MetricMode::binary
                                                                          : gsdn::MetricMode::real);
        py::dict out;
        out["nmse"] = r.nmse;
        out["nmae"] = r.nmae;
        out["error_rate"] = r.error_rate;
        out["f1"] = r.f1;
        out["f1_undefined"] = r.f1_undefined;
        return out;
      },
      py::arg("estimate"), py::arg("truth"), py::arg("mode") = "real");
}
