#pragma once

#include "sact/model.hpp"

namespace sact {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double grad_clip = 5.0;  // global gradient norm; <= 0 disables clipping
};

struct AdamState {
  Gradients m, v;
  long step = 0;

  static AdamState initial(const ModelConfig& cfg) {
    return {ModelParams::zeros(cfg), ModelParams::zeros(cfg), 0};
  }
};

// Scales all blocks so the global L2 norm does not exceed max_norm; returns
// the norm before clipping.
double clip_gradient_norm(Gradients& grads, double max_norm);

// Bias-corrected Adam update after global-norm clipping. Throws on
// non-finite gradients, naming the offending parameter block.
void optimizer_step(ModelParams& params, Gradients& grads, AdamState& state,
                    const AdamConfig& cfg);

}  // namespace sact
