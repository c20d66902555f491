#include "gsdn/unroll.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace gsdn {

Tensor soft_threshold(const Tensor& x, double alpha) {
  if (alpha < 0.0) throw std::invalid_argument("soft_threshold: alpha must be >= 0");
  Tensor y = x;
  for (size_t i = 0; i < y.size(); ++i) {
    const double v = y[i];
    y[i] = v > alpha ? v - alpha : (v < -alpha ? v + alpha : 0.0);
  }
  return y;
}

void UnrollConfig::validate() const {
  if (layers < 1) throw std::invalid_argument("unroll config: layers must be >= 1");
  if (alpha < 0.0) throw std::invalid_argument("unroll config: alpha must be >= 0");
  if (d < 1 || D < 1) throw std::invalid_argument("unroll config: widths must be >= 1");
  if (epochs < 0) throw std::invalid_argument("unroll config: epochs must be >= 0");
  if (conv_order < 1) throw std::invalid_argument("unroll config: conv order must be >= 1");
}

GraphContext make_graph_context(const Graph& normalized, int conv_order, int coord_dim) {
  GraphContext ctx;
  ctx.graph = normalized;
  ctx.powers = shift_powers(normalized, conv_order);
  ctx.incidence = incidence_matrix(normalized);
  ctx.basis = eig_sym(normalized.adjacency.to_dense(), SpectralSource::adjacency);
  ctx.coords = vertex_coordinates(ctx.basis, std::min(coord_dim, normalized.n));
  ctx.geom = edge_geometry(ctx.powers, ctx.coords);
  return ctx;
}

// ---------------------------------------------------------------------------
// HQS

namespace {

Tensor operator_dense(OperatorKind kind, const Graph& g, const Incidence& inc) {
  switch (kind) {
    case OperatorKind::identity: {
      Tensor eye(g.n, g.n);
      for (int i = 0; i < g.n; ++i) eye(i, i) = 1.0;
      return eye;
    }
    case OperatorKind::incidence:
      return inc.delta.to_dense();
    case OperatorKind::laplacian_sqrt: {
      SpectralBasis lb = eig_sym(laplacian_dense(g), SpectralSource::laplacian);
      const int n = g.n;
      Tensor half(n, n);
      for (int k = 0; k < n; ++k) {
        const double s = std::sqrt(std::max(lb.eigenvalues[k], 0.0));
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) half(i, j) += s * lb.eigenvectors(i, k) * lb.eigenvectors(j, k);
      }
      return half;
    }
  }
  throw std::logic_error("operator_dense: unknown kind");
}

Tensor dense_inverse(const Tensor& m, const char* what) {
  const int n = m.rows();
  Tensor eye(n, n);
  for (int i = 0; i < n; ++i) eye(i, i) = 1.0;
  try {
    return cholesky_solve(m, eye);
  } catch (const std::exception&) {
    throw std::runtime_error(std::string("HQS system singular: ") + what);
  }
}

double l1_norm(const Tensor& t) {
  double s = 0.0;
  for (size_t i = 0; i < t.size(); ++i) s += std::fabs(t[i]);
  return s;
}

double sq_norm(const Tensor& t) { return dot(t, t); }

}  // namespace

HqsResult hqs_solve(const Tensor& t, const Graph& g, const HqsConfig& cfg) {
  if (cfg.iterations < 1) throw std::invalid_argument("hqs_solve: iterations must be >= 1");
  if (cfg.mu1 <= 0.0) throw std::invalid_argument("hqs_solve: mu1 must be > 0");
  if (cfg.prox_u == ProxKind::l1 && cfg.mu2 <= 0.0)
    throw std::invalid_argument("hqs_solve: mu2 must be > 0 with an l1 prox on y");
  if (cfg.prox_r == ProxKind::l1 && cfg.mu3 <= 0.0)
    throw std::invalid_argument("hqs_solve: mu3 must be > 0 with an l1 prox on z");
  if (t.rows() != g.n) throw std::invalid_argument("hqs_solve: signal rows must match vertex count");

  const int n = g.n;
  const int k = t.cols();
  Incidence inc = incidence_matrix(g);
  const Tensor p_mat = operator_dense(cfg.p, g, inc);
  const Tensor q_mat = operator_dense(cfg.q, g, inc);
  const Tensor p_t = transpose(p_mat);
  const Tensor q_t = transpose(q_mat);

  // h *_v as a dense operator; identity when no filter is configured.
  Tensor h_op(n, n);
  if (cfg.h.has_value()) {
    ShiftPowers powers = shift_powers(g, cfg.h->length());
    for (int l = 1; l <= cfg.h->length(); ++l) {
      const Tensor al = powers.power(l).to_dense();
      for (size_t i = 0; i < h_op.size(); ++i) h_op[i] += cfg.h->h[static_cast<size_t>(l) - 1] * al[i];
    }
  } else {
    for (int i = 0; i < n; ++i) h_op(i, i) = 1.0;
  }

  // Precomputed inverses for the two quadratic solves.
  Tensor p_sys = matmul(p_t, p_mat);
  for (size_t i = 0; i < p_sys.size(); ++i) p_sys[i] *= cfg.mu2;
  for (int i = 0; i < n; ++i) p_sys(i, i) += 1.0 + cfg.mu1;
  const Tensor p_tilde = dense_inverse(p_sys, "x-update system");

  Tensor q_sys = matmul(h_op, h_op);  // adjacency symmetric => operator self-adjoint
  for (size_t i = 0; i < q_sys.size(); ++i) q_sys[i] *= cfg.mu1;
  Tensor qtq = matmul(q_t, q_mat);
  for (size_t i = 0; i < q_sys.size(); ++i) q_sys[i] += cfg.mu3 * qtq[i];
  const Tensor q_tilde = dense_inverse(q_sys, "s-update system");

  Tensor x(n, k), s(n, k);
  Tensor y(p_mat.rows(), k), z(q_mat.rows(), k);

  HqsResult result;
  auto u_of = [&](const Tensor& v) { return cfg.prox_u == ProxKind::l1 ? cfg.alpha_u * l1_norm(v) : 0.0; };
  auto r_of = [&](const Tensor& v) { return cfg.prox_r == ProxKind::l1 ? cfg.alpha_r * l1_norm(v) : 0.0; };

  for (int it = 0; it < cfg.iterations; ++it) {
    // x-update
    Tensor rhs = matmul(h_op, s);
    for (size_t i = 0; i < rhs.size(); ++i) rhs[i] *= cfg.mu1;
    for (size_t i = 0; i < rhs.size(); ++i) rhs[i] += t[i];
    Tensor py = matmul(p_t, y);
    for (size_t i = 0; i < rhs.size(); ++i) rhs[i] += cfg.mu2 * py[i];
    x = matmul(p_tilde, rhs);
    // s-update
    Tensor rhs2 = matmul(h_op, x);
    for (size_t i = 0; i < rhs2.size(); ++i) rhs2[i] *= cfg.mu1;
    Tensor qz = matmul(q_t, z);
    for (size_t i = 0; i < rhs2.size(); ++i) rhs2[i] += cfg.mu3 * qz[i];
    s = matmul(q_tilde, rhs2);
    // y-update
    Tensor px = matmul(p_mat, x);
    y = cfg.prox_u == ProxKind::l1 ? soft_threshold(px, cfg.alpha_u / cfg.mu2) : px;
    // z-update
    Tensor qs = matmul(q_mat, s);
    z = cfg.prox_r == ProxKind::l1 ? soft_threshold(qs, cfg.alpha_r / cfg.mu3) : qs;

    const Tensor hs = matmul(h_op, s);
    double penalty = 0.5 * sq_norm(t - x) + u_of(y) + r_of(z) + 0.5 * cfg.mu1 * sq_norm(x - hs) +
                     0.5 * cfg.mu2 * sq_norm(y - px) + 0.5 * cfg.mu3 * sq_norm(z - qs);
    result.penalty.push_back(penalty);
    const Tensor& estimate = cfg.h.has_value() ? hs : x;
    result.objective.push_back(0.5 * sq_norm(t - estimate) + u_of(matmul(p_mat, estimate)) + r_of(qs));
  }

  result.x = cfg.h.has_value() ? matmul(h_op, s) : x;
  return result;
}

// ---------------------------------------------------------------------------
// Models

namespace {

ad::Var ews_or_skip(ad::Tape& tape, const EwsConv& conv, const GraphContext& ctx, ad::Var input) {
  // Invalid input denotes the all-zero initial state; the convolution of an
  // exact zero contributes neither value nor gradient.
  if (!input.valid()) return ad::Var{};
  return conv.apply(tape, ctx.powers, ctx.geom, input);
}

ad::Var add_terms(ad::Tape& tape, std::initializer_list<ad::Var> terms) {
  ad::Var acc;
  for (ad::Var v : terms) {
    if (!v.valid()) continue;
    acc = acc.valid() ? tape.add(acc, v) : v;
  }
  return acc;
}

double nmse_of(const Tensor& estimate, const Tensor& reference) {
  const double denom = dot(reference, reference);
  if (denom == 0.0) throw std::invalid_argument("nmse: zero reference");
  Tensor diff = estimate - reference;
  return dot(diff, diff) / denom;
}

}  // namespace

GuscModel::GuscModel(int channels, const GraphContext& ctx, const UnrollConfig& config) : cfg(config) {
  cfg.validate();
  Rng rng(Rng::derive(cfg.seed, 0x675363));  // independent stream per model kind
  const int p = ctx.coords.p;
  layers.resize(static_cast<size_t>(cfg.layers));
  for (int b = 0; b < cfg.layers; ++b) {
    const std::string tag = "gusc.layer" + std::to_string(b + 1);
    Layer& l = layers[static_cast<size_t>(b)];
    l.a.init(cfg.mode, cfg.conv_order, cfg.D, cfg.d, p, rng, tag + ".A");
    l.b.init(cfg.mode, cfg.conv_order, channels, cfg.d, p, rng, tag + ".B");
    l.d.init(cfg.mode, cfg.conv_order, cfg.d, cfg.D, p, rng, tag + ".D");
    l.e.init(cfg.mode, cfg.conv_order, cfg.D, cfg.D, p, rng, tag + ".E");
  }
  head.init(cfg.mode, cfg.conv_order, cfg.D, channels, p, rng, "gusc.H");
  if (cfg.trainable_alpha) alpha_param = ad::Param("gusc.alpha", Tensor::scalar(cfg.alpha));
}

ad::Var GuscModel::forward(ad::Tape& tape, const GraphContext& ctx, ad::Var noisy) {
  ad::Var s_prev, z_prev;  // zero-initialized states
  ad::Var alpha = cfg.trainable_alpha ? tape.leaf(alpha_param) : ad::Var{};
  for (Layer& l : layers) {
    ad::Var x = add_terms(tape, {ews_or_skip(tape, l.a, ctx, s_prev), ews_or_skip(tape, l.b, ctx, noisy)});
    ad::Var s = add_terms(tape, {ews_or_skip(tape, l.d, ctx, x), ews_or_skip(tape, l.e, ctx, z_prev)});
    ad::Var z = cfg.trainable_alpha ? tape.soft_threshold(s, alpha) : tape.soft_threshold(s, cfg.alpha);
    s_prev = s;
    z_prev = z;
  }
  return ews_or_skip(tape, head, ctx, s_prev);
}

std::vector<ad::Param*> GuscModel::params() {
  std::vector<ad::Param*> out;
  for (Layer& l : layers)
    for (EwsConv* c : {&l.a, &l.b, &l.d, &l.e})
      for (ad::Param* p : c->params()) out.push_back(p);
  for (ad::Param* p : head.params()) out.push_back(p);
  if (cfg.trainable_alpha) out.push_back(&alpha_param);
  return out;
}

GutfModel::GutfModel(int channels, const GraphContext& ctx, const UnrollConfig& config) : cfg(config) {
  cfg.validate();
  Rng rng(Rng::derive(cfg.seed, 0x677466));
  const int p = ctx.coords.p;
  layers.resize(static_cast<size_t>(cfg.layers));
  for (int b = 0; b < cfg.layers; ++b) {
    const std::string tag = "gutf.layer" + std::to_string(b + 1);
    Layer& l = layers[static_cast<size_t>(b)];
    l.b.init(cfg.mode, cfg.conv_order, channels, channels, p, rng, tag + ".B");
    l.c.init(cfg.mode, cfg.conv_order, channels, channels, p, rng, tag + ".C");
  }
  if (cfg.trainable_alpha) alpha_param = ad::Param("gutf.alpha", Tensor::scalar(cfg.alpha));
}

ad::Var GutfModel::forward(ad::Tape& tape, const GraphContext& ctx, ad::Var noisy) {
  ad::Var x_prev;  // zero init
  ad::Var alpha = cfg.trainable_alpha ? tape.leaf(alpha_param) : ad::Var{};
  for (Layer& l : layers) {
    ad::Var y;
    if (x_prev.valid()) {
      ad::Var dx = tape.sparse_aggregate(ctx.incidence.delta, x_prev);
      y = cfg.trainable_alpha ? tape.soft_threshold(dx, alpha) : tape.soft_threshold(dx, cfg.alpha);
    }
    ad::Var back;
    if (y.valid()) back = ews_or_skip(tape, l.c, ctx, tape.sparse_aggregate(ctx.incidence.delta_t, y));
    ad::Var x = add_terms(tape, {ews_or_skip(tape, l.b, ctx, noisy), back});
    x_prev = x;
  }
  return x_prev;
}

std::vector<ad::Param*> GutfModel::params() {
  std::vector<ad::Param*> out;
  for (Layer& l : layers)
    for (EwsConv* c : {&l.b, &l.c})
      for (ad::Param* p : c->params()) out.push_back(p);
  if (cfg.trainable_alpha) out.push_back(&alpha_param);
  return out;
}

namespace {

ad::Var apply_operator(ad::Tape& tape, const LayerOperator& op, ad::Var v, bool transposed) {
  switch (op.kind) {
    case OperatorKind::identity:
      return v;
    case OperatorKind::incidence:
      return tape.sparse_aggregate(transposed ? op.incidence->delta_t : op.incidence->delta, v);
    case OperatorKind::laplacian_sqrt:
      return tape.dense_mul(op.dense, v);  // symmetric operator
  }
  throw std::logic_error("apply_operator: unknown kind");
}

ad::Var apply_prox(ad::Tape& tape, ProxKind prox, ad::Var v, double alpha) {
  return prox == ProxKind::l1 ? tape.soft_threshold(v, alpha) : v;
}

}  // namespace

GeneralState general_unroll_layer(ad::Tape& tape, const GeneralLayerParams& params, const GraphContext& ctx,
                                  const GeneralState& prev, ad::Var noisy, const LayerOperator& p_op,
                                  const LayerOperator& q_op, ProxKind prox_u, ProxKind prox_r, double alpha) {
  GeneralState next;
  ad::Var cy;
  if (prev.y.valid()) cy = ews_or_skip(tape, params.c, ctx, apply_operator(tape, p_op, prev.y, true));
  next.x = add_terms(tape, {ews_or_skip(tape, params.a, ctx, prev.s), ews_or_skip(tape, params.b, ctx, noisy), cy});
  ad::Var ez;
  if (prev.z.valid()) ez = ews_or_skip(tape, params.e, ctx, apply_operator(tape, q_op, prev.z, true));
  next.s = add_terms(tape, {ews_or_skip(tape, params.d, ctx, next.x), ez});
  if (next.x.valid()) next.y = apply_prox(tape, prox_u, apply_operator(tape, p_op, next.x, false), alpha);
  if (next.s.valid()) next.z = apply_prox(tape, prox_r, apply_operator(tape, q_op, next.s, false), alpha);
  return next;
}

// ---------------------------------------------------------------------------
// Training

TrainResult train(DenoiserModel& model, const Tensor& noisy, const GraphContext& ctx, const UnrollConfig& cfg,
                  const Tensor* clean) {
  cfg.validate();
  ad::Adam adam(model.params(), ad::AdamConfig{cfg.lr, 0.9, 0.999, 1e-8});
  TrainResult result;

  auto record = [&](int epoch, double loss, const Tensor& output) {
    EpochLog log;
    log.epoch = epoch;
    log.loss = loss;
    log.nmse_to_noisy = nmse_of(output, noisy);
    log.nmse_to_clean = clean ? nmse_of(output, *clean) : std::numeric_limits<double>::quiet_NaN();
    result.curve.push_back(log);
  };

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    ad::Tape tape;
    ad::Var input = tape.constant(noisy);
    ad::Var out = model.forward(tape, ctx, input);
    ad::Var loss;
    ad::Var prediction = out;
    if (cfg.loss == LossKind::frobenius) {
      loss = tape.frobenius_sq(tape.sub(out, input));
    } else {
      prediction = tape.sigmoid(out);
      loss = tape.binary_cross_entropy(prediction, noisy);
    }
    const double loss_value = tape.value(loss)[0];
    if (!std::isfinite(loss_value))
      throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch));
    result.loss_history.push_back(loss_value);
    result.nmse_to_noisy_history.push_back(nmse_of(tape.value(prediction), noisy));
    if (epoch % 10 == 0 || epoch == cfg.epochs) record(epoch, loss_value, tape.value(prediction));

    adam.zero_grad();
    tape.backward(loss);
    adam.step();
  }

  // Output of the trained network.
  ad::Tape tape;
  ad::Var out = model.forward(tape, ctx, tape.constant(noisy));
  if (cfg.loss == LossKind::binary_cross_entropy) out = tape.sigmoid(out);
  result.denoised = tape.value(out);
  return result;
}

}  // namespace gsdn
