#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "sact/losses.hpp"
#include "sact/rng.hpp"
#include "sact/sampling.hpp"
#include "sact/types.hpp"

namespace sact {

struct ModelConfig {
  int input_dim = 0;
  int hidden = 100;
  int layers = 3;
  int num_classes = 0;  // action classes; the classifier head adds background

  int augmented_classes() const { return num_classes + 1; }
  void validate() const;
};

// One stacked-LSTM layer. Gate rows are packed [input; forget; cell; output],
// each block `hidden` rows tall. Biases are stored as single-column matrices
// so every parameter block has a uniform type.
struct LstmLayer {
  Eigen::MatrixXd w_in;   // 4H x D
  Eigen::MatrixXd w_rec;  // 4H x H
  Eigen::MatrixXd bias;   // 4H x 1
};

struct ParamBlockRef {
  std::string name;
  Eigen::MatrixXd* mat;
};
struct ConstParamBlockRef {
  std::string name;
  const Eigen::MatrixXd* mat;
};

// Every trainable tensor of the network. Also reused as the gradient
// container; blocks() enumerates tensors in a stable order shared by the
// optimizer, the checkpoint format and the gradient checker.
struct ModelParams {
  ModelConfig cfg;
  std::vector<LstmLayer> lstm;
  Eigen::MatrixXd w_cls, b_cls;  // (C+1) x H, (C+1) x 1
  Eigen::MatrixXd w_act, b_act;  // 2 x H, 2 x 1
  Eigen::MatrixXd w_proj;        // H x H

  static ModelParams zeros(const ModelConfig& cfg);

  // Input weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], recurrent
  // weights orthogonal per gate block, forget-gate bias 1, projection matrix
  // identity plus N(0, 0.01) noise.
  static ModelParams init(const ModelConfig& cfg, Rng& rng);

  std::vector<ParamBlockRef> blocks();
  std::vector<ConstParamBlockRef> blocks() const;
};

using Gradients = ModelParams;

// Recurrent state for online inference; advancing one frame touches nothing
// but this state. Column dimension is 1 (single stream).
struct StreamState {
  std::vector<Eigen::MatrixXd> h, c;  // per layer, H x 1
  long frames_seen = 0;

  static StreamState initial(const ModelConfig& cfg);
  void reset();
};

// Per-frame, per-layer activations cached for backpropagation through time.
struct LayerCache {
  Eigen::MatrixXd i, f, g, o, c, h;  // H x B each
};

struct ForwardPass {
  int len = 0;
  int batch = 0;
  std::vector<Eigen::MatrixXd> input;          // per frame: D x B
  std::vector<std::vector<LayerCache>> layer;  // [frame][layer]
  std::vector<Eigen::MatrixXd> cls_probs;      // per frame: (C+1) x B
  std::vector<Eigen::MatrixXd> act_probs;      // per frame: 2 x B

  const Eigen::MatrixXd& hidden_top(int t) const {
    return layer[static_cast<std::size_t>(t)].back().h;
  }
};

// Runs a batch of equal-length clips (each L x input_dim). Outputs at frame t
// depend only on frames 1..t.
ForwardPass forward_batch(const ModelParams& params,
                          const std::vector<const Eigen::MatrixXd*>& clips);

// Single-clip convenience views: hidden is the top-layer track (L x H),
// probs L x (C+1) with rows summing to 1, actionness the per-frame action
// probability of the 2-way head.
struct ClipForward {
  Eigen::MatrixXd hidden;
  Eigen::MatrixXd probs;
  Eigen::VectorXd actionness;
  ForwardPass pass;
};

ClipForward forward_clip(const ModelParams& params, const Eigen::MatrixXd& frames);

struct StepOutput {
  Eigen::VectorXd probs;
  double actionness = 0.0;
  Eigen::VectorXd hidden;
};

// One online step. Shares the forward kernel with forward_batch, so stepping
// t times from a fresh state reproduces forward_clip on the t-prefix exactly.
StepOutput stream_step(const ModelParams& params, StreamState& state,
                       const Eigen::Ref<const Eigen::VectorXd>& frame);

// Analytic gradients of the composite loss (classification + alpha *
// regression + beta * actionness, averaged per clip then over the batch) with
// respect to every parameter block, including the projection matrix.
std::pair<Gradients, LossBreakdown> backward_batch(const ModelParams& params,
                                                   const ForwardPass& pass,
                                                   const std::vector<const Clip*>& clips,
                                                   const LossSpec& spec);

std::pair<Gradients, LossBreakdown> backward_clip(const ModelParams& params, const Clip& clip,
                                                  const LossSpec& spec);

// Composite loss of one clip via the forward path only (no gradients).
LossBreakdown clip_loss(const ModelParams& params, const Clip& clip, const LossSpec& spec);

// Central-difference verification of backward_clip. Perturbs every coordinate
// of every block by +-epsilon and returns the maximum relative error
// |analytic - numeric| / max(|analytic|, |numeric|, 1e-8).
double grad_check(const ModelParams& params, const Clip& clip, const LossSpec& spec,
                  double epsilon);

}  // namespace sact
