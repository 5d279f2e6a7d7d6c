#include "sact/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "sact/dataset_io.hpp"
#include "sact/optimizer.hpp"
#include "sact/sampling.hpp"

namespace sact {

namespace {

constexpr std::uint64_t kInitStream = 0x57a4;
constexpr std::uint64_t kEpochStream = 0xe90c;

std::vector<std::vector<int>> derive_tracks(const std::vector<UntrimmedSequence>& seqs,
                                            int num_classes) {
  std::vector<std::vector<int>> tracks;
  tracks.reserve(seqs.size());
  for (const auto& seq : seqs) tracks.push_back(derive_frame_labels(seq, num_classes));
  return tracks;
}

}  // namespace

LoadedDataset load_dataset(const std::string& manifest_path) {
  LoadedDataset ds;
  ds.manifest = load_manifest(manifest_path);
  for (const auto& sp : ds.manifest.train) {
    ds.train.push_back(load_sequence(sp.skeleton, sp.labels, ds.manifest));
  }
  for (const auto& sp : ds.manifest.test) {
    ds.test.push_back(load_sequence(sp.skeleton, sp.labels, ds.manifest));
  }
  ds.train_labels = derive_tracks(ds.train, ds.manifest.num_classes);
  ds.test_labels = derive_tracks(ds.test, ds.manifest.num_classes);
  return ds;
}

LoadedDataset dataset_from_memory(const DatasetManifest& manifest,
                                  std::vector<UntrimmedSequence> train,
                                  std::vector<UntrimmedSequence> test) {
  LoadedDataset ds;
  ds.manifest = manifest;
  ds.train = std::move(train);
  ds.test = std::move(test);
  ds.train_labels = derive_tracks(ds.train, manifest.num_classes);
  ds.test_labels = derive_tracks(ds.test, manifest.num_classes);
  return ds;
}

ModelConfig model_config_for(const LoadedDataset& ds, const RunConfig& cfg) {
  ModelConfig mc;
  mc.input_dim = ds.manifest.frame_dim();
  mc.hidden = cfg.hidden;
  mc.layers = cfg.layers;
  mc.num_classes = ds.manifest.num_classes;
  return mc;
}

EvalOptions eval_options_for(const LoadedDataset& ds, const RunConfig& cfg) {
  EvalOptions opts;
  opts.M = cfg.eval_m;
  opts.rule = parse_instance_rule(cfg.instance_rule);
  opts.stitch = cfg.eval_mode == "stitch";
  opts.window_len = cfg.clip_len;
  opts.window_stride = cfg.stitch_stride > 0 ? cfg.stitch_stride : cfg.clip_len;
  opts.normalize = cfg.normalize;
  opts.dims = ds.manifest.dims;
  return opts;
}

std::string config_snapshot(const LoadedDataset& ds, const RunConfig& cfg) {
  KeyValueConfig kv = cfg.to_config();
  kv.set("model.dims", std::to_string(ds.manifest.dims));
  return kv.serialize();
}

std::string train_log_header() { return "epoch,loss_c,loss_r,loss_n,total\n"; }

std::string train_log_row(const EpochLog& row) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d,%.9f,%.9f,%.9f,%.9f\n", row.epoch,
                row.mean.classification, row.mean.regression, row.mean.actionness,
                row.mean.total);
  return buf;
}

TrainResult train_student(const LoadedDataset& ds, const RunConfig& cfg,
                          const TeacherRepStore* teacher_reps, std::ostream* progress) {
  cfg.validate();
  if (cfg.alpha > 0.0 && teacher_reps == nullptr) {
    throw Error("regression weight alpha > 0 requires teacher representations");
  }
  if (ds.train.empty()) throw Error("training split is empty");

  const SamplerMode mode = parse_sampler_mode(cfg.sampler_mode);
  SamplerConfig sampler;
  sampler.clip_len = cfg.clip_len;
  sampler.context_window = cfg.context_window;
  sampler.sw_stride = cfg.sw_stride;
  sampler.normalize = cfg.normalize;

  long total_instances = 0;
  for (const auto& seq : ds.train) total_instances += static_cast<long>(seq.instances.size());
  if (total_instances == 0 && mode != SamplerMode::kSlidingWindow) {
    throw Error("action-centric sampling needs at least one training instance");
  }

  LossSpec spec;
  spec.alpha = cfg.alpha;
  spec.beta = cfg.beta;
  spec.teacher_reps = teacher_reps;

  const ModelConfig mc = model_config_for(ds, cfg);
  Rng init_rng(mix_seed(cfg.seed, kInitStream));
  ModelParams params = ModelParams::init(mc, init_rng);
  AdamState opt_state = AdamState::initial(mc);
  AdamConfig opt;
  opt.lr = cfg.lr;
  opt.grad_clip = cfg.grad_clip;

  TrainResult result;
  double best_loss = 0.0;
  if (progress != nullptr) *progress << train_log_header() << std::flush;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(mix_seed(cfg.seed, kEpochStream + static_cast<std::uint64_t>(epoch)));
    const SamplerMode epoch_mode = epoch_schedule(mode, epoch);

    std::vector<Clip> clips;
    if (epoch_mode == SamplerMode::kActionCentric) {
      std::vector<std::pair<int, int>> pending;  // (sequence, instance)
      for (std::size_t s = 0; s < ds.train.size(); ++s) {
        for (std::size_t i = 0; i < ds.train[s].instances.size(); ++i) {
          pending.emplace_back(static_cast<int>(s), static_cast<int>(i));
        }
      }
      rng.shuffle(pending);
      for (const auto& [s, i] : pending) {
        clips.push_back(action_centric_sample(ds.train[static_cast<std::size_t>(s)],
                                              ds.train_labels[static_cast<std::size_t>(s)], i,
                                              sampler, ds.manifest.dims, rng, s));
      }
    } else {
      std::vector<std::pair<int, int>> pending;  // (sequence, start)
      for (std::size_t s = 0; s < ds.train.size(); ++s) {
        for (const int start : sliding_window_starts(ds.train[s].num_frames(),
                                                     sampler.clip_len, sampler.sw_stride)) {
          pending.emplace_back(static_cast<int>(s), start);
        }
      }
      rng.shuffle(pending);
      for (const auto& [s, start] : pending) {
        clips.push_back(extract_clip(ds.train[static_cast<std::size_t>(s)],
                                     ds.train_labels[static_cast<std::size_t>(s)], start,
                                     sampler.clip_len, sampler.normalize, ds.manifest.dims,
                                     s));
      }
    }

    LossBreakdown epoch_mean;
    long seen = 0;
    for (std::size_t first = 0; first < clips.size();
         first += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t last =
          std::min(clips.size(), first + static_cast<std::size_t>(cfg.batch_size));
      std::vector<const Eigen::MatrixXd*> frames;
      std::vector<const Clip*> batch;
      for (std::size_t i = first; i < last; ++i) {
        frames.push_back(&clips[i].frames);
        batch.push_back(&clips[i]);
      }
      const ForwardPass pass = forward_batch(params, frames);
      auto [grads, loss] = backward_batch(params, pass, batch, spec);
      optimizer_step(params, grads, opt_state, opt);

      const auto n = static_cast<double>(last - first);
      epoch_mean.total += loss.total * n;
      epoch_mean.classification += loss.classification * n;
      epoch_mean.regression += loss.regression * n;
      epoch_mean.actionness += loss.actionness * n;
      seen += static_cast<long>(last - first);
    }
    epoch_mean.total /= static_cast<double>(seen);
    epoch_mean.classification /= static_cast<double>(seen);
    epoch_mean.regression /= static_cast<double>(seen);
    epoch_mean.actionness /= static_cast<double>(seen);

    result.log.push_back({epoch, epoch_mean});
    if (progress != nullptr) *progress << train_log_row(result.log.back()) << std::flush;
    if (epoch == 0 || epoch_mean.total < best_loss) {
      best_loss = epoch_mean.total;
      result.best_params = params;
      result.best_epoch = epoch;
    }
  }
  result.final_params = std::move(params);
  return result;
}

TeacherResult run_teacher_pipeline(const LoadedDataset& ds, const RunConfig& cfg) {
  cfg.validate();
  TeacherResult out;
  const auto trimmed =
      make_trimmed_instances(ds.train, cfg.normalize, ds.manifest.dims);
  AdamConfig opt;
  opt.lr = cfg.lr;
  opt.grad_clip = cfg.grad_clip;
  out.params = train_teacher(trimmed, model_config_for(ds, cfg), opt, cfg.teacher_epochs,
                             cfg.seed, &out.epoch_loss);
  const std::string bytes =
      serialize_checkpoint(params_to_checkpoint(out.params, config_snapshot(ds, cfg)));
  out.reps = extract_full_reps(out.params, trimmed, fnv1a_hash(bytes));
  return out;
}

MetricsReport evaluate_params(const ModelParams& params, const LoadedDataset& ds,
                              const RunConfig& cfg) {
  if (params.cfg.num_classes != ds.manifest.num_classes) {
    throw Error("checkpoint has " + std::to_string(params.cfg.num_classes) +
                " classes but the manifest declares " +
                std::to_string(ds.manifest.num_classes));
  }
  if (params.cfg.input_dim != ds.manifest.frame_dim()) {
    throw Error("checkpoint input dimension " + std::to_string(params.cfg.input_dim) +
                " does not match manifest frame dimension " +
                std::to_string(ds.manifest.frame_dim()));
  }
  return evaluate(params, ds.test, eval_options_for(ds, cfg));
}

ExperimentResult run_experiment(const LoadedDataset& ds, const RunConfig& cfg) {
  ExperimentResult out;
  const TeacherRepStore* reps = nullptr;
  TeacherResult teacher;
  if (cfg.alpha > 0.0) {
    teacher = run_teacher_pipeline(ds, cfg);
    reps = &teacher.reps;
  }
  out.train = train_student(ds, cfg, reps);
  out.report = evaluate_params(out.train.final_params, ds, cfg);
  return out;
}

std::string sweep_header(int M) {
  std::string out = "value";
  char buf[32];
  for (int k = 1; k <= M - 1; ++k) {
    std::snprintf(buf, sizeof(buf), ",%g", static_cast<double>(k) / M);
    out += buf;
  }
  out += ",avg_acc_w_bg,avg_acc_wo_bg\n";
  return out;
}

std::string sweep_row(int value, const MetricsReport& report) {
  std::string out = std::to_string(value);
  char buf[32];
  for (const double acc : report.anticipation) {
    std::snprintf(buf, sizeof(buf), ",%.6f", acc);
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), ",%.6f,%.6f\n", report.avg_acc_with_bg,
                report.avg_acc_without_bg);
  out += buf;
  return out;
}

}  // namespace sact
