#include "sact/model.hpp"

#include <cmath>

namespace sact {

namespace {

using Eigen::MatrixXd;

MatrixXd sigmoid(const MatrixXd& x) {
  return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

MatrixXd softmax_cols(const MatrixXd& logits) {
  MatrixXd shifted = logits;
  for (Eigen::Index col = 0; col < shifted.cols(); ++col) {
    shifted.col(col).array() -= shifted.col(col).maxCoeff();
  }
  MatrixXd e = shifted.array().exp();
  for (Eigen::Index col = 0; col < e.cols(); ++col) {
    e.col(col) /= e.col(col).sum();
  }
  return e;
}

// Shared by batched training and single-stream inference so both produce
// bit-identical results for the same prefix.
void lstm_cell(const LstmLayer& layer, int hidden, const MatrixXd& x, const MatrixXd& h_prev,
               const MatrixXd& c_prev, LayerCache& out) {
  MatrixXd z = layer.w_in * x + layer.w_rec * h_prev;
  z.colwise() += layer.bias.col(0);
  out.i = sigmoid(z.topRows(hidden));
  out.f = sigmoid(z.middleRows(hidden, hidden));
  out.g = z.middleRows(2 * hidden, hidden).array().tanh();
  out.o = sigmoid(z.bottomRows(hidden));
  out.c = (out.f.array() * c_prev.array() + out.i.array() * out.g.array()).matrix();
  out.h = (out.o.array() * out.c.array().tanh()).matrix();
}

MatrixXd orthogonal(int n, Rng& rng) {
  MatrixXd g(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) g(r, c) = rng.normal();
  }
  Eigen::HouseholderQR<MatrixXd> qr(g);
  MatrixXd q = qr.householderQ();
  const MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int c = 0; c < n; ++c) {
    if (r(c, c) < 0) q.col(c) = -q.col(c);
  }
  return q;
}

void fill_uniform(MatrixXd& m, double bound, Rng& rng) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = rng.uniform(-bound, bound);
  }
}

}  // namespace

void ModelConfig::validate() const {
  if (input_dim < 1) throw Error("model config: input_dim must be >= 1");
  if (hidden < 1) throw Error("model config: hidden must be >= 1");
  if (layers < 1) throw Error("model config: layers must be >= 1");
  if (num_classes < 1) throw Error("model config: num_classes must be >= 1");
}

ModelParams ModelParams::zeros(const ModelConfig& cfg) {
  cfg.validate();
  ModelParams p;
  p.cfg = cfg;
  const int h = cfg.hidden;
  for (int l = 0; l < cfg.layers; ++l) {
    const int in = l == 0 ? cfg.input_dim : h;
    p.lstm.push_back({MatrixXd::Zero(4 * h, in), MatrixXd::Zero(4 * h, h),
                      MatrixXd::Zero(4 * h, 1)});
  }
  p.w_cls = MatrixXd::Zero(cfg.augmented_classes(), h);
  p.b_cls = MatrixXd::Zero(cfg.augmented_classes(), 1);
  p.w_act = MatrixXd::Zero(2, h);
  p.b_act = MatrixXd::Zero(2, 1);
  p.w_proj = MatrixXd::Zero(h, h);
  return p;
}

ModelParams ModelParams::init(const ModelConfig& cfg, Rng& rng) {
  ModelParams p = zeros(cfg);
  const int h = cfg.hidden;
  for (int l = 0; l < cfg.layers; ++l) {
    auto& layer = p.lstm[static_cast<std::size_t>(l)];
    fill_uniform(layer.w_in, 1.0 / std::sqrt(static_cast<double>(layer.w_in.cols())), rng);
    for (int gate = 0; gate < 4; ++gate) {
      layer.w_rec.middleRows(gate * h, h) = orthogonal(h, rng);
    }
    layer.bias.middleRows(h, h).setOnes();  // forget gate bias
  }
  fill_uniform(p.w_cls, 1.0 / std::sqrt(static_cast<double>(h)), rng);
  fill_uniform(p.w_act, 1.0 / std::sqrt(static_cast<double>(h)), rng);
  p.w_proj = MatrixXd::Identity(h, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < h; ++c) p.w_proj(r, c) += 0.01 * rng.normal();
  }
  return p;
}

std::vector<ParamBlockRef> ModelParams::blocks() {
  std::vector<ParamBlockRef> out;
  for (std::size_t l = 0; l < lstm.size(); ++l) {
    const std::string prefix = "lstm" + std::to_string(l);
    out.push_back({prefix + ".w_in", &lstm[l].w_in});
    out.push_back({prefix + ".w_rec", &lstm[l].w_rec});
    out.push_back({prefix + ".bias", &lstm[l].bias});
  }
  out.push_back({"cls.w", &w_cls});
  out.push_back({"cls.b", &b_cls});
  out.push_back({"act.w", &w_act});
  out.push_back({"act.b", &b_act});
  out.push_back({"proj.w", &w_proj});
  return out;
}

std::vector<ConstParamBlockRef> ModelParams::blocks() const {
  std::vector<ConstParamBlockRef> out;
  for (const auto& ref : const_cast<ModelParams*>(this)->blocks()) {
    out.push_back({ref.name, ref.mat});
  }
  return out;
}

StreamState StreamState::initial(const ModelConfig& cfg) {
  StreamState s;
  for (int l = 0; l < cfg.layers; ++l) {
    s.h.push_back(MatrixXd::Zero(cfg.hidden, 1));
    s.c.push_back(MatrixXd::Zero(cfg.hidden, 1));
  }
  return s;
}

void StreamState::reset() {
  for (auto& m : h) m.setZero();
  for (auto& m : c) m.setZero();
  frames_seen = 0;
}

ForwardPass forward_batch(const ModelParams& params,
                          const std::vector<const Eigen::MatrixXd*>& clips) {
  const auto& cfg = params.cfg;
  if (clips.empty()) throw Error("empty batch");
  const auto len = clips.front()->rows();
  if (len < 1) throw Error("empty clip");
  for (const auto* clip : clips) {
    if (clip->cols() != cfg.input_dim) {
      throw Error("frame dimension " + std::to_string(clip->cols()) +
                  " does not match model input dimension " + std::to_string(cfg.input_dim));
    }
    if (clip->rows() != len) throw Error("clips in a batch must share their length");
  }

  const int B = static_cast<int>(clips.size());
  ForwardPass pass;
  pass.len = static_cast<int>(len);
  pass.batch = B;
  pass.input.resize(static_cast<std::size_t>(len));
  pass.layer.resize(static_cast<std::size_t>(len));
  pass.cls_probs.resize(static_cast<std::size_t>(len));
  pass.act_probs.resize(static_cast<std::size_t>(len));

  for (Eigen::Index t = 0; t < len; ++t) {
    MatrixXd x(cfg.input_dim, B);
    for (int b = 0; b < B; ++b) x.col(b) = clips[static_cast<std::size_t>(b)]->row(t);
    pass.input[static_cast<std::size_t>(t)] = std::move(x);

    auto& frame_caches = pass.layer[static_cast<std::size_t>(t)];
    frame_caches.resize(static_cast<std::size_t>(cfg.layers));
    const MatrixXd* below = &pass.input[static_cast<std::size_t>(t)];
    for (int l = 0; l < cfg.layers; ++l) {
      const MatrixXd zero = MatrixXd::Zero(cfg.hidden, B);
      const MatrixXd& h_prev =
          t > 0 ? pass.layer[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(l)].h
                : zero;
      const MatrixXd& c_prev =
          t > 0 ? pass.layer[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(l)].c
                : zero;
      lstm_cell(params.lstm[static_cast<std::size_t>(l)], cfg.hidden, *below, h_prev, c_prev,
                frame_caches[static_cast<std::size_t>(l)]);
      below = &frame_caches[static_cast<std::size_t>(l)].h;
    }

    const MatrixXd& h_top = *below;
    MatrixXd cls_logits = params.w_cls * h_top;
    cls_logits.colwise() += params.b_cls.col(0);
    pass.cls_probs[static_cast<std::size_t>(t)] = softmax_cols(cls_logits);
    MatrixXd act_logits = params.w_act * h_top;
    act_logits.colwise() += params.b_act.col(0);
    pass.act_probs[static_cast<std::size_t>(t)] = softmax_cols(act_logits);
  }
  return pass;
}

ClipForward forward_clip(const ModelParams& params, const Eigen::MatrixXd& frames) {
  ClipForward out;
  out.pass = forward_batch(params, {&frames});
  const int len = out.pass.len;
  out.hidden.resize(len, params.cfg.hidden);
  out.probs.resize(len, params.cfg.augmented_classes());
  out.actionness.resize(len);
  for (int t = 0; t < len; ++t) {
    out.hidden.row(t) = out.pass.hidden_top(t).col(0);
    out.probs.row(t) = out.pass.cls_probs[static_cast<std::size_t>(t)].col(0);
    out.actionness(t) = out.pass.act_probs[static_cast<std::size_t>(t)](1, 0);
  }
  return out;
}

StepOutput stream_step(const ModelParams& params, StreamState& state,
                       const Eigen::Ref<const Eigen::VectorXd>& frame) {
  const auto& cfg = params.cfg;
  if (frame.size() != cfg.input_dim) {
    throw Error("frame dimension " + std::to_string(frame.size()) +
                " does not match model input dimension " + std::to_string(cfg.input_dim));
  }
  if (static_cast<int>(state.h.size()) != cfg.layers) {
    throw Error("stream state layer count does not match the model");
  }

  MatrixXd below = frame;
  LayerCache cache;
  for (int l = 0; l < cfg.layers; ++l) {
    lstm_cell(params.lstm[static_cast<std::size_t>(l)], cfg.hidden, below,
              state.h[static_cast<std::size_t>(l)], state.c[static_cast<std::size_t>(l)],
              cache);
    state.h[static_cast<std::size_t>(l)] = cache.h;
    state.c[static_cast<std::size_t>(l)] = cache.c;
    below = cache.h;
  }
  ++state.frames_seen;

  MatrixXd cls_logits = params.w_cls * below;
  cls_logits.colwise() += params.b_cls.col(0);
  MatrixXd act_logits = params.w_act * below;
  act_logits.colwise() += params.b_act.col(0);

  StepOutput out;
  out.probs = softmax_cols(cls_logits).col(0);
  out.actionness = softmax_cols(act_logits)(1, 0);
  out.hidden = below.col(0);
  return out;
}

std::pair<Gradients, LossBreakdown> backward_batch(const ModelParams& params,
                                                   const ForwardPass& pass,
                                                   const std::vector<const Clip*>& clips,
                                                   const LossSpec& spec) {
  const auto& cfg = params.cfg;
  const int L = pass.len;
  const int B = pass.batch;
  if (static_cast<int>(clips.size()) != B) throw Error("clip count does not match the pass");
  for (const auto* clip : clips) {
    if (clip->len() != L) throw Error("clip length does not match the pass");
  }

  Gradients grads = ModelParams::zeros(cfg);
  LossBreakdown mean;

  // Loss values per clip via the forward-only path, averaged over the batch.
  for (int b = 0; b < B; ++b) {
    MatrixXd probs(L, cfg.augmented_classes());
    MatrixXd hidden(L, cfg.hidden);
    Eigen::VectorXd q(L);
    for (int t = 0; t < L; ++t) {
      probs.row(t) = pass.cls_probs[static_cast<std::size_t>(t)].col(b);
      hidden.row(t) = pass.hidden_top(t).col(b);
      q(t) = pass.act_probs[static_cast<std::size_t>(t)](1, b);
    }
    const LossBreakdown one =
        loss_total(probs, q, hidden, *clips[static_cast<std::size_t>(b)], params.w_proj, spec);
    mean.total += one.total / B;
    mean.classification += one.classification / B;
    mean.regression += one.regression / B;
    mean.actionness += one.actionness / B;
  }

  // Head gradients per frame; dh_top collects everything flowing into the
  // top-layer hidden states.
  std::vector<MatrixXd> dh_top(static_cast<std::size_t>(L), MatrixXd::Zero(cfg.hidden, B));
  const double cls_coeff = 1.0 / (static_cast<double>(B) * static_cast<double>(L));
  for (int t = 0; t < L; ++t) {
    MatrixXd dcls = pass.cls_probs[static_cast<std::size_t>(t)];
    for (int b = 0; b < B; ++b) {
      const int y = clips[static_cast<std::size_t>(b)]->labels[static_cast<std::size_t>(t)];
      if (y < 0 || y >= cfg.augmented_classes()) {
        throw Error("label " + std::to_string(y) + " outside [0, " +
                    std::to_string(cfg.num_classes) + "]");
      }
      dcls(y, b) -= 1.0;
    }
    dcls *= cls_coeff;
    grads.w_cls.noalias() += dcls * pass.hidden_top(t).transpose();
    grads.b_cls += dcls.rowwise().sum();
    dh_top[static_cast<std::size_t>(t)].noalias() += params.w_cls.transpose() * dcls;

    if (spec.beta > 0.0) {
      MatrixXd dact = pass.act_probs[static_cast<std::size_t>(t)];
      for (int b = 0; b < B; ++b) {
        const int a =
            clips[static_cast<std::size_t>(b)]->actionness[static_cast<std::size_t>(t)];
        dact(a != 0 ? 1 : 0, b) -= 1.0;
      }
      dact *= spec.beta * cls_coeff;
      grads.w_act.noalias() += dact * pass.hidden_top(t).transpose();
      grads.b_act += dact.rowwise().sum();
      dh_top[static_cast<std::size_t>(t)].noalias() += params.w_act.transpose() * dact;
    }
  }

  if (spec.alpha > 0.0) {
    for (int b = 0; b < B; ++b) {
      const auto& clip = *clips[static_cast<std::size_t>(b)];
      const auto covered = resolve_teacher_reps(clip, spec);
      long frames = 0;
      for (const auto& [span, rep] : covered) frames += span.hi - span.lo + 1;
      if (frames == 0) continue;
      const double coeff = 2.0 * spec.alpha / (static_cast<double>(B) * frames);
      for (const auto& [span, rep] : covered) {
        for (int t = span.lo; t <= span.hi; ++t) {
          const Eigen::VectorXd h = pass.hidden_top(t).col(b);
          const Eigen::VectorXd r = params.w_proj * h - *rep;
          grads.w_proj.noalias() += coeff * r * h.transpose();
          dh_top[static_cast<std::size_t>(t)].col(b).noalias() +=
              coeff * (params.w_proj.transpose() * r);
        }
      }
    }
  }

  // Backpropagation through time: walk frames backwards; within a frame walk
  // layers top-down so the input gradient of layer l feeds layer l-1 at the
  // same frame.
  std::vector<MatrixXd> carry_h(static_cast<std::size_t>(cfg.layers),
                                MatrixXd::Zero(cfg.hidden, B));
  std::vector<MatrixXd> carry_c(static_cast<std::size_t>(cfg.layers),
                                MatrixXd::Zero(cfg.hidden, B));
  const MatrixXd zero = MatrixXd::Zero(cfg.hidden, B);
  MatrixXd dx_above;
  for (int t = L - 1; t >= 0; --t) {
    for (int l = cfg.layers - 1; l >= 0; --l) {
      const auto& cc = pass.layer[static_cast<std::size_t>(t)][static_cast<std::size_t>(l)];
      const MatrixXd& h_prev =
          t > 0 ? pass.layer[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(l)].h
                : zero;
      const MatrixXd& c_prev =
          t > 0 ? pass.layer[static_cast<std::size_t>(t - 1)][static_cast<std::size_t>(l)].c
                : zero;

      MatrixXd dh = carry_h[static_cast<std::size_t>(l)];
      dh += l == cfg.layers - 1 ? dh_top[static_cast<std::size_t>(t)] : dx_above;

      const Eigen::ArrayXXd tanh_c = cc.c.array().tanh();
      const Eigen::ArrayXXd dc =
          carry_c[static_cast<std::size_t>(l)].array() +
          dh.array() * cc.o.array() * (1.0 - tanh_c.square());

      MatrixXd dz(4 * cfg.hidden, B);
      dz.topRows(cfg.hidden) =
          (dc * cc.g.array() * cc.i.array() * (1.0 - cc.i.array())).matrix();
      dz.middleRows(cfg.hidden, cfg.hidden) =
          (dc * c_prev.array() * cc.f.array() * (1.0 - cc.f.array())).matrix();
      dz.middleRows(2 * cfg.hidden, cfg.hidden) =
          (dc * cc.i.array() * (1.0 - cc.g.array().square())).matrix();
      dz.bottomRows(cfg.hidden) =
          (dh.array() * tanh_c * cc.o.array() * (1.0 - cc.o.array())).matrix();

      const MatrixXd& x =
          l == 0 ? pass.input[static_cast<std::size_t>(t)]
                 : pass.layer[static_cast<std::size_t>(t)][static_cast<std::size_t>(l - 1)].h;
      auto& layer_grads = grads.lstm[static_cast<std::size_t>(l)];
      layer_grads.w_in.noalias() += dz * x.transpose();
      if (t > 0) layer_grads.w_rec.noalias() += dz * h_prev.transpose();
      layer_grads.bias += dz.rowwise().sum();

      carry_h[static_cast<std::size_t>(l)].noalias() =
          params.lstm[static_cast<std::size_t>(l)].w_rec.transpose() * dz;
      carry_c[static_cast<std::size_t>(l)] = (dc * cc.f.array()).matrix();
      dx_above.noalias() = params.lstm[static_cast<std::size_t>(l)].w_in.transpose() * dz;
    }
  }

  return {std::move(grads), mean};
}

std::pair<Gradients, LossBreakdown> backward_clip(const ModelParams& params, const Clip& clip,
                                                  const LossSpec& spec) {
  const ForwardPass pass = forward_batch(params, {&clip.frames});
  return backward_batch(params, pass, {&clip}, spec);
}

LossBreakdown clip_loss(const ModelParams& params, const Clip& clip, const LossSpec& spec) {
  const ClipForward fwd = forward_clip(params, clip.frames);
  return loss_total(fwd.probs, fwd.actionness, fwd.hidden, clip, params.w_proj, spec);
}

double grad_check(const ModelParams& params, const Clip& clip, const LossSpec& spec,
                  double epsilon) {
  if (!(epsilon > 0.0)) throw Error("grad_check requires a positive epsilon");

  const auto [analytic, loss] = backward_clip(params, clip, spec);
  (void)loss;

  ModelParams probe = params;
  auto probe_blocks = probe.blocks();
  const auto analytic_blocks = analytic.blocks();

  // Fourth-order central stencil: truncation O(eps^4) keeps saturated-tanh
  // coordinates accurate while eps stays large enough to beat cancellation
  // noise on near-zero gradients.
  double max_rel = 0.0;
  for (std::size_t blk = 0; blk < probe_blocks.size(); ++blk) {
    Eigen::MatrixXd& m = *probe_blocks[blk].mat;
    const Eigen::MatrixXd& g = *analytic_blocks[blk].mat;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double saved = m(r, c);
        auto at = [&](double offset) {
          m(r, c) = saved + offset;
          return clip_loss(probe, clip, spec).total;
        };
        const double numeric =
            (at(-2.0 * epsilon) - 8.0 * at(-epsilon) + 8.0 * at(epsilon) -
             at(2.0 * epsilon)) /
            (12.0 * epsilon);
        m(r, c) = saved;
        const double denom = std::max({std::abs(g(r, c)), std::abs(numeric), 1e-8});
        max_rel = std::max(max_rel, std::abs(g(r, c) - numeric) / denom);
      }
    }
  }
  return max_rel;
}

}  // namespace sact
