#include "sact/optimizer.hpp"

#include <cmath>

namespace sact {

double clip_gradient_norm(Gradients& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& ref : grads.blocks()) sq += ref.mat->squaredNorm();
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double scale = max_norm / norm;
    for (auto& ref : grads.blocks()) *ref.mat *= scale;
  }
  return norm;
}

void optimizer_step(ModelParams& params, Gradients& grads, AdamState& state,
                    const AdamConfig& cfg) {
  for (const auto& ref : grads.blocks()) {
    if (!ref.mat->allFinite()) {
      throw Error("non-finite gradient in block " + ref.name);
    }
  }
  clip_gradient_norm(grads, cfg.grad_clip);

  ++state.step;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

  auto p = params.blocks();
  auto g = grads.blocks();
  auto m = state.m.blocks();
  auto v = state.v.blocks();
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto& mm = *m[i].mat;
    auto& vv = *v[i].mat;
    const auto& gg = *g[i].mat;
    mm = cfg.beta1 * mm + (1.0 - cfg.beta1) * gg;
    vv = (cfg.beta2 * vv.array() + (1.0 - cfg.beta2) * gg.array().square()).matrix();
    p[i].mat->array() -=
        cfg.lr * (mm.array() / bc1) / ((vv.array() / bc2).sqrt() + cfg.epsilon);
  }
}

}  // namespace sact
