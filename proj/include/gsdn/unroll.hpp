#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "gsdn/autodiff.hpp"
#include "gsdn/gconv.hpp"
#include "gsdn/graph.hpp"
#include "gsdn/spectral.hpp"

namespace gsdn {

// Entrywise shrinkage: x-a for x>a, 0 for |x|<=a, x+a for x<-a.
Tensor soft_threshold(const Tensor& x, double alpha);

enum class LossKind { frobenius, binary_cross_entropy };

struct UnrollConfig {
  int layers = 1;  // B
  int d = 64;
  int D = 64;
  double alpha = 0.05;
  bool trainable_alpha = false;
  int epochs = 5000;
  LossKind loss = LossKind::frobenius;
  uint64_t seed = 0;
  double lr = 1e-3;
  int conv_order = 1;  // L inside each EWS convolution
  int coord_dim = 16;  // p (clamped to N)
  EwsMode mode = EwsMode::factorized;

  void validate() const;
};

// Fixed per-graph quantities every unrolling model consumes. Build once per
// (graph, conv order, coordinate dimension); immutable afterwards.
struct GraphContext {
  Graph graph;  // normalized
  ShiftPowers powers;
  Incidence incidence;
  SpectralBasis basis;  // of the normalized adjacency
  VertexCoords coords;
  EdgeGeometry geom;
};

GraphContext make_graph_context(const Graph& normalized, int conv_order, int coord_dim);

// ---------------------------------------------------------------------------
// Classical half-quadratic splitting reference solver.

enum class OperatorKind { identity, incidence, laplacian_sqrt };
enum class ProxKind { none, l1 };

struct HqsConfig {
  double mu1 = 1.0, mu2 = 1.0, mu3 = 1.0;
  int iterations = 50;
  std::optional<FilterCoeffs> h;  // empty: h *_v is the identity (x = s)
  OperatorKind p = OperatorKind::identity;
  OperatorKind q = OperatorKind::identity;
  ProxKind prox_u = ProxKind::none;
  ProxKind prox_r = ProxKind::none;
  double alpha_u = 0.05;
  double alpha_r = 0.05;
};

struct HqsResult {
  Tensor x;                       // denoised estimate
  std::vector<double> penalty;    // penalty value after each iteration (logged, not asserted)
  std::vector<double> objective;  // 0.5||t-x||^2 + u(Px) + r(Qs) after each iteration
};

HqsResult hqs_solve(const Tensor& t, const Graph& g, const HqsConfig& cfg);

// ---------------------------------------------------------------------------
// Unrolling layers and models.

// Interface shared by the trainable denoisers (GUSC, GUTF, MLP baseline).
class DenoiserModel {
 public:
  virtual ~DenoiserModel() = default;
  // Returns the model output (logits under the cross-entropy loss).
  virtual ad::Var forward(ad::Tape& tape, const GraphContext& ctx, ad::Var noisy) = 0;
  virtual std::vector<ad::Param*> params() = 0;
};

// Graph unrolling sparse coding. Per layer: X = A*S + B*T; S = D*X + E*Z;
// Z = soft_threshold(S); output is H*S after the last layer.
class GuscModel : public DenoiserModel {
 public:
  struct Layer {
    EwsConv a, b, d, e;
  };

  GuscModel(int channels, const GraphContext& ctx, const UnrollConfig& cfg);
  ad::Var forward(ad::Tape& tape, const GraphContext& ctx, ad::Var noisy) override;
  std::vector<ad::Param*> params() override;

  std::vector<Layer> layers;
  EwsConv head;
  UnrollConfig cfg;
  ad::Param alpha_param;  // used when cfg.trainable_alpha
};

// Graph unrolling trend filtering. Per layer: Y = soft_threshold(Delta X);
// X = B*T + C*(Delta^T Y); channel width stays at the signal count.
class GutfModel : public DenoiserModel {
 public:
  struct Layer {
    EwsConv b, c;
  };

  GutfModel(int channels, const GraphContext& ctx, const UnrollConfig& cfg);
  ad::Var forward(ad::Tape& tape, const GraphContext& ctx, ad::Var noisy) override;
  std::vector<ad::Param*> params() override;

  std::vector<Layer> layers;
  UnrollConfig cfg;
  ad::Param alpha_param;
};

// One step of the general multi-channel unrolling layer:
//   X <- A*S + B*T + C*(P^T Y); S <- D*X + E*(Q^T Z);
//   Y <- prox_u(P X); Z <- prox_r(Q S).
// Invalid state vars stand for the all-zero init and their terms are skipped
// (a zero input contributes neither value nor gradient).
struct GeneralLayerParams {
  EwsConv a, b, c, d, e;
};

struct GeneralState {
  ad::Var x, s, y, z;
};

struct LayerOperator {
  OperatorKind kind = OperatorKind::identity;
  const Incidence* incidence = nullptr;  // for OperatorKind::incidence
  Tensor dense;                          // for OperatorKind::laplacian_sqrt (symmetric)
};

GeneralState general_unroll_layer(ad::Tape& tape, const GeneralLayerParams& params, const GraphContext& ctx,
                                  const GeneralState& prev, ad::Var noisy, const LayerOperator& p_op,
                                  const LayerOperator& q_op, ProxKind prox_u, ProxKind prox_r, double alpha);

// ---------------------------------------------------------------------------
// Unsupervised training: the noisy input supervises the network.

struct EpochLog {
  int epoch;
  double loss;
  double nmse_to_noisy;
  double nmse_to_clean;  // NaN when no clean signal supplied
};

struct TrainResult {
  Tensor denoised;
  std::vector<double> loss_history;          // one entry per epoch
  std::vector<double> nmse_to_noisy_history; // one entry per epoch
  std::vector<EpochLog> curve;               // every 10 epochs plus the final epoch
};

TrainResult train(DenoiserModel& model, const Tensor& noisy, const GraphContext& ctx, const UnrollConfig& cfg,
                  const Tensor* clean = nullptr);

}  // namespace gsdn
