#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "avgraph/graph.hpp"

namespace avgraph::gat {

enum class Activation { ELU, ReLU, Identity };
enum class HeadMode { Concat, Average };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& s);

struct HeadParams {
  Eigen::MatrixXd W;  // out_dim x in_dim
  Eigen::VectorXd a;  // 2 * out_dim
};

struct GatLayer {
  std::vector<HeadParams> heads;
  double leaky_slope = 0.2;
  Activation activation = Activation::ELU;
  bool include_self = true;     // mandatory self-edge in every neighborhood
  bool use_edge_bias = false;   // per-kind additive logit bias
  Eigen::Vector4d edge_bias = Eigen::Vector4d::Zero();  // indexed by EdgeKind

  int in_dim() const { return heads.empty() ? 0 : static_cast<int>(heads[0].W.cols()); }
  int out_dim() const { return heads.empty() ? 0 : static_cast<int>(heads[0].W.rows()); }
};

struct ReadoutHead {
  Eigen::VectorXd w_threat;
  double b_threat = 0.0;
  Eigen::VectorXd w_intent;  // reserved output head, serialized but unused by y1-y3
  double b_intent = 0.0;
  Eigen::MatrixXd W_mission;  // 3 x dim
  Eigen::Vector3d b_mission = Eigen::Vector3d::Zero();
};

// Seeded uniform +-1/sqrt(in_dim) initialization.
GatLayer seeded_layer(int in_dim, int out_dim, int heads, std::uint64_t seed);
ReadoutHead seeded_readout(int dim, std::uint64_t seed);

// Softmax of LeakyReLU(a^T [W h_i || W h_j]) over the given neighbors,
// max-subtracted. Throws on empty neighbors or dimension mismatch.
Eigen::VectorXd attention_row(const GatLayer& layer, const Eigen::VectorXd& h_i,
                              const std::vector<Eigen::VectorXd>& neighbors);

// Single-head propagation (head 0): h'_i = act(sum_j alpha_ij W h_j) over the
// incoming Attention/TemporalCausal neighborhood plus the self-edge. Head-0
// attention is written back onto Attention edges.
Eigen::MatrixXd forward(const GatLayer& layer, graph::HeteroTemporalGraph& g,
                        const Eigen::MatrixXd& features);

// Concat activates per head and concatenates; Average applies the activation
// to the mean of per-head pre-activations (equals forward when heads share
// parameters). Head-averaged attention is written back onto Attention edges.
Eigen::MatrixXd multi_head_forward(const GatLayer& layer, graph::HeteroTemporalGraph& g,
                                   const Eigen::MatrixXd& features, HeadMode mode);

struct ReadoutResult {
  double y1 = 0.0;  // threat score
  graph::MissionType y2 = graph::MissionType::Unknown;
  double y3 = 0.0;  // max mission softmax probability
  Eigen::Vector3d mission_probs = Eigen::Vector3d::Zero();
  Eigen::VectorXd pooled;
};

// pool_indices: node positions to mean-pool; empty falls back to all nodes.
ReadoutResult readout(const Eigen::MatrixXd& features,
                      const std::vector<int>& pool_indices, const ReadoutHead& head);

struct Gradients {
  std::vector<HeadParams> heads;  // dW, da per head
  Eigen::Vector4d edge_bias = Eigen::Vector4d::Zero();
  Eigen::VectorXd w_threat;
  double b_threat = 0.0;
  double loss = 0.0;
  double y1 = 0.0;
};

// Analytic gradients of (y1 - target)^2 through readout and propagation.
Gradients backprop(const GatLayer& layer, const ReadoutHead& head,
                   const graph::HeteroTemporalGraph& g, const Eigen::MatrixXd& features,
                   const std::vector<int>& pool_indices, double target,
                   HeadMode mode = HeadMode::Average);

// Max relative error between analytic gradients and central finite
// differences (step 1e-5). Throws on non-finite gradients.
double grad_check(const GatLayer& layer, const ReadoutHead& head,
                  const graph::HeteroTemporalGraph& g, const Eigen::MatrixXd& features,
                  const std::vector<int>& pool_indices, double target,
                  HeadMode mode = HeadMode::Average);

// Plain gradient descent update; train_step uses exactly this rule.
void gd_update(std::span<double> params, std::span<const double> grads, double lr);

struct TrainResult {
  double loss_before = 0.0;
  double y1_before = 0.0;
};

// One gradient-descent step on {W, a, edge bias, w_threat, b_threat}.
// Throws when the loss exceeds 1e6 (divergence guard). lr = 0 is a no-op.
TrainResult train_step(GatLayer& layer, ReadoutHead& head,
                       const graph::HeteroTemporalGraph& g,
                       const Eigen::MatrixXd& features,
                       const std::vector<int>& pool_indices, double target, double lr,
                       HeadMode mode = HeadMode::Average);

std::string params_json(const GatLayer& layer, const ReadoutHead& head);
void params_from_json(const std::string& text, GatLayer& layer, ReadoutHead& head);

}  // namespace avgraph::gat
