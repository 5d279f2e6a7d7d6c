#include <benchmark/benchmark.h>

#include "sact/model.hpp"
#include "sact/optimizer.hpp"
#include "sact/rng.hpp"
#include "sact/synth.hpp"

namespace {

using namespace sact;

ModelConfig bench_config() {
  ModelConfig cfg;
  cfg.input_dim = 12;
  cfg.hidden = 100;
  cfg.layers = 3;
  cfg.num_classes = 5;
  return cfg;
}

Eigen::MatrixXd bench_frames(int len, int dim) {
  Rng rng(7);
  Eigen::MatrixXd frames(len, dim);
  for (int t = 0; t < len; ++t) {
    for (int d = 0; d < dim; ++d) frames(t, d) = rng.normal();
  }
  return frames;
}

void BM_StreamStep(benchmark::State& state) {
  const auto cfg = bench_config();
  Rng rng(1);
  const ModelParams params = ModelParams::init(cfg, rng);
  const Eigen::VectorXd frame = Eigen::VectorXd::Constant(cfg.input_dim, 0.1);
  StreamState stream = StreamState::initial(cfg);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stream_step(params, stream, frame));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_StreamStep);

void BM_ForwardClip(benchmark::State& state) {
  const auto cfg = bench_config();
  Rng rng(2);
  const ModelParams params = ModelParams::init(cfg, rng);
  const auto frames = bench_frames(static_cast<int>(state.range(0)), cfg.input_dim);
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_clip(params, frames));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ForwardClip)->Arg(50)->Arg(200);

void BM_TrainStepBatch(benchmark::State& state) {
  const auto cfg = bench_config();
  Rng rng(3);
  ModelParams params = ModelParams::init(cfg, rng);
  AdamState opt_state = AdamState::initial(cfg);

  const int batch = static_cast<int>(state.range(0));
  const int len = 50;
  std::vector<Clip> clips(static_cast<std::size_t>(batch));
  std::vector<const Eigen::MatrixXd*> frames;
  std::vector<const Clip*> batch_ptrs;
  for (auto& clip : clips) {
    clip.frames = bench_frames(len, cfg.input_dim);
    clip.labels.assign(len, 1);
    clip.actionness.assign(len, 1);
    frames.push_back(&clip.frames);
    batch_ptrs.push_back(&clip);
  }
  LossSpec spec;
  spec.alpha = 0.0;
  spec.beta = 1.0;
  for (auto _ : state) {
    const ForwardPass pass = forward_batch(params, frames);
    auto [grads, loss] = backward_batch(params, pass, batch_ptrs, spec);
    optimizer_step(params, grads, opt_state, {});
    benchmark::DoNotOptimize(loss);
  }
  state.SetItemsProcessed(state.iterations() * batch * len);
}
BENCHMARK(BM_TrainStepBatch)->Arg(1)->Arg(8)->Arg(16);

void BM_SynthGenerate(benchmark::State& state) {
  SynthConfig cfg;
  cfg.train_sequences = 4;
  cfg.test_sequences = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(synth_generate(cfg, 11));
  }
}
BENCHMARK(BM_SynthGenerate);

}  // namespace

BENCHMARK_MAIN();
