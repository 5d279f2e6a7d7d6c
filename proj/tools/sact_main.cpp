// Command-line front end: dataset synthesis, teacher and student training,
// evaluation, online streaming and sweep reports. Every command is a pure
// function of (config, seed, input files); progress text goes to stderr so
// stdout and all written files stay byte-reproducible.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "sact/checkpoint.hpp"
#include "sact/dataset_io.hpp"
#include "sact/eval.hpp"
#include "sact/pipeline.hpp"
#include "sact/synth.hpp"

namespace fs = std::filesystem;
using namespace sact;

namespace {

// Config file first, then explicit flags on top (flag wins).
struct RunFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> hidden, layers, clip_len, context_window, sw_stride, epochs, batch_size,
      teacher_epochs, eval_m, stitch_stride;
  std::optional<double> alpha, beta, lr, grad_clip;
  std::optional<std::string> sampler_mode, instance_rule, eval_mode;
  std::optional<bool> normalize;

  void register_options(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key-value config file (flags override it)");
    cmd->add_option("--seed", seed, "master seed; all randomness derives from it");
    cmd->add_option("--hidden", hidden, "LSTM hidden size per layer");
    cmd->add_option("--layers", layers, "number of stacked LSTM layers");
    cmd->add_option("--clip-len", clip_len, "training clip length in frames");
    cmd->add_option("--context-window", context_window, "context frames around an instance");
    cmd->add_option("--sampler-mode", sampler_mode, "ac, sw or ac_sw");
    cmd->add_option("--sw-stride", sw_stride, "sliding-window stride (sw mode)");
    cmd->add_option("--alpha", alpha, "full-representation regression weight");
    cmd->add_option("--beta", beta, "temporal actionness weight");
    cmd->add_option("--lr", lr, "Adam learning rate");
    cmd->add_option("--grad-clip", grad_clip, "global gradient norm clip");
    cmd->add_option("--epochs", epochs, "training epochs");
    cmd->add_option("--batch-size", batch_size, "clips per optimizer step");
    cmd->add_option("--teacher-epochs", teacher_epochs, "teacher training epochs");
    cmd->add_option("--eval-m", eval_m, "observation-ratio denominator M");
    cmd->add_option("--instance-rule", instance_rule, "last_frame or interval_mean");
    cmd->add_option("--eval-mode", eval_mode, "stream or stitch");
    cmd->add_option("--stitch-stride", stitch_stride, "window stride for stitched eval");
    cmd->add_option("--normalize", normalize, "per-clip translation normalization (0/1)");
  }

  RunConfig resolve() const {
    KeyValueConfig kv;
    if (!config_path.empty()) kv = KeyValueConfig::parse_file(config_path);
    auto put = [&kv](const char* key, const auto& opt) {
      if (opt.has_value()) {
        using T = std::decay_t<decltype(*opt)>;
        if constexpr (std::is_same_v<T, std::string>) {
          kv.set(key, *opt);
        } else if constexpr (std::is_same_v<T, bool>) {
          kv.set(key, *opt ? "1" : "0");
        } else {
          kv.set(key, std::to_string(*opt));
        }
      }
    };
    put("seed", seed);
    put("hidden", hidden);
    put("layers", layers);
    put("clip_len", clip_len);
    put("context_window", context_window);
    put("sampler_mode", sampler_mode);
    put("sw_stride", sw_stride);
    put("alpha", alpha);
    put("beta", beta);
    put("lr", lr);
    put("grad_clip", grad_clip);
    put("epochs", epochs);
    put("batch_size", batch_size);
    put("teacher_epochs", teacher_epochs);
    put("eval_m", eval_m);
    put("instance_rule", instance_rule);
    put("eval_mode", eval_mode);
    put("stitch_stride", stitch_stride);
    put("normalize", normalize);
    return RunConfig::from_config(kv);
  }
};

void require_exists(const std::string& path, const char* what) {
  if (!fs::exists(path)) {
    throw Error(std::string(what) + " not found: " + path);
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

TeacherRepStore load_reps_for_training(const LoadedDataset& ds, const RunConfig& cfg,
                                       const std::string& teacher_path,
                                       const std::string& reps_path) {
  if (!reps_path.empty()) {
    return repstore_from_checkpoint(load_checkpoint(reps_path));
  }
  const Checkpoint ckpt = load_checkpoint(teacher_path);
  const ModelParams teacher = params_from_checkpoint(ckpt);
  if (teacher.cfg.hidden != cfg.hidden) {
    throw Error("teacher hidden size " + std::to_string(teacher.cfg.hidden) +
                " does not match configured hidden size " + std::to_string(cfg.hidden));
  }
  const auto trimmed = make_trimmed_instances(ds.train, cfg.normalize, ds.manifest.dims);
  return extract_full_reps(teacher, trimmed, fnv1a_hash(serialize_checkpoint(ckpt)));
}

int cmd_synth(const SynthConfig& synth, std::uint64_t seed, const std::string& out_dir) {
  const SynthDataset ds = synth_generate(synth, seed);
  write_dataset(ds, out_dir);
  std::cout << dataset_stats(ds.train, ds.test);
  std::cout << "manifest: " << (fs::path(out_dir) / "manifest.txt").string() << "\n";
  return 0;
}

int cmd_train_teacher(const RunFlags& flags, const std::string& manifest_path,
                      const std::string& out_path, const std::string& reps_out) {
  const RunConfig cfg = flags.resolve();
  require_exists(manifest_path, "manifest");
  const LoadedDataset ds = load_dataset(manifest_path);
  const TeacherResult result = run_teacher_pipeline(ds, cfg);

  std::cout << "epoch,loss\n";
  for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
    std::printf("%zu,%.9f\n", e, result.epoch_loss[e]);
  }
  save_checkpoint(params_to_checkpoint(result.params, config_snapshot(ds, cfg)), out_path);
  if (!reps_out.empty()) {
    save_checkpoint(repstore_to_checkpoint(result.reps), reps_out);
  }
  std::cerr << "teacher checkpoint: " << out_path << "\n";
  return 0;
}

int cmd_train(const RunFlags& flags, const std::string& manifest_path,
              const std::string& teacher_path, const std::string& reps_path,
              const std::string& out_dir) {
  const RunConfig cfg = flags.resolve();
  require_exists(manifest_path, "manifest");
  // fail fast before any data loading when the teacher inputs are missing
  if (cfg.alpha > 0.0) {
    if (teacher_path.empty() && reps_path.empty()) {
      throw Error("alpha > 0 requires --teacher or --reps");
    }
    if (!teacher_path.empty()) require_exists(teacher_path, "teacher checkpoint");
    if (!reps_path.empty()) require_exists(reps_path, "representation store");
  }
  fs::create_directories(out_dir);

  const LoadedDataset ds = load_dataset(manifest_path);
  TeacherRepStore reps;
  const TeacherRepStore* reps_ptr = nullptr;
  if (cfg.alpha > 0.0) {
    reps = load_reps_for_training(ds, cfg, teacher_path, reps_path);
    reps_ptr = &reps;
  }

  std::ostringstream log;
  const TrainResult result = train_student(ds, cfg, reps_ptr, &log);
  std::cout << log.str();

  const std::string snapshot = config_snapshot(ds, cfg);
  write_text((fs::path(out_dir) / "train_log.csv").string(), log.str());
  save_checkpoint(params_to_checkpoint(result.final_params, snapshot),
                  (fs::path(out_dir) / "final.ckpt").string());
  save_checkpoint(params_to_checkpoint(result.best_params, snapshot),
                  (fs::path(out_dir) / "best.ckpt").string());
  std::cerr << "best epoch " << result.best_epoch << ", checkpoints in " << out_dir << "\n";
  return 0;
}

int cmd_eval(const RunFlags& flags, const std::string& ckpt_path,
             const std::string& manifest_path, const std::string& report_path,
             const std::string& dump_dir) {
  require_exists(ckpt_path, "checkpoint");
  require_exists(manifest_path, "manifest");
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const ModelParams params = params_from_checkpoint(ckpt);

  // evaluation defaults come from the checkpoint's config snapshot; explicit
  // flags and --config still override
  RunFlags merged = flags;
  if (merged.config_path.empty()) {
    const KeyValueConfig snap =
        KeyValueConfig::parse_string(ckpt.config_text, "checkpoint config");
    const RunConfig from_ckpt = RunConfig::from_config(snap);
    auto fill = [](auto& opt, const auto& value) {
      if (!opt.has_value()) opt = value;
    };
    fill(merged.eval_m, from_ckpt.eval_m);
    fill(merged.instance_rule, from_ckpt.instance_rule);
    fill(merged.eval_mode, from_ckpt.eval_mode);
    fill(merged.stitch_stride, from_ckpt.stitch_stride);
    fill(merged.clip_len, from_ckpt.clip_len);
    fill(merged.normalize, from_ckpt.normalize);
  }
  const RunConfig cfg = merged.resolve();

  const LoadedDataset ds = load_dataset(manifest_path);
  const MetricsReport report = evaluate_params(params, ds, cfg);
  const std::string csv = report_to_csv(report);
  if (report_path.empty()) {
    std::cout << csv;
  } else {
    write_text(report_path, csv);
  }

  if (!dump_dir.empty()) {
    fs::create_directories(dump_dir);
    const EvalOptions opts = eval_options_for(ds, cfg);
    for (std::size_t s = 0; s < ds.test.size(); ++s) {
      const auto& seq = ds.test[s];
      const PredictionStream stream =
          opts.stitch ? run_stitched(params, seq.frames, opts.window_len, opts.window_stride,
                                     opts.normalize, opts.dims)
                      : run_streaming(params, seq.frames, opts.normalize, opts.dims);
      std::string dump = frame_dump_header();
      for (int t = 0; t < seq.num_frames(); ++t) {
        const int arg = argmax_row(stream.probs.row(t));
        dump += frame_dump_row(t + 1, ds.test_labels[s][static_cast<std::size_t>(t)], arg,
                               stream.probs(t, arg), stream.actionness(t));
      }
      const auto stem = fs::path(ds.manifest.test[s].skeleton).stem().string();
      write_text((fs::path(dump_dir) / (stem + ".pred.csv")).string(), dump);
    }
  }
  return 0;
}

// Reads one frame per line and emits one prediction row per frame as soon as
// the frame arrives; never reads ahead of the current frame.
int cmd_stream(const std::string& ckpt_path, const std::string& skeleton_path) {
  require_exists(ckpt_path, "checkpoint");
  const Checkpoint ckpt = load_checkpoint(ckpt_path);
  const ModelParams params = params_from_checkpoint(ckpt);
  const KeyValueConfig snap =
      KeyValueConfig::parse_string(ckpt.config_text, "checkpoint config");
  const bool normalize = snap.get_bool("normalize", true);
  const int dims = snap.get_int("model.dims", 3);

  std::ifstream file;
  std::istream* in = &std::cin;
  if (skeleton_path != "-") {
    require_exists(skeleton_path, "skeleton file");
    file.open(skeleton_path);
    in = &file;
  }

  StreamState state = StreamState::initial(params.cfg);
  Eigen::VectorXd reference = Eigen::VectorXd::Zero(params.cfg.input_dim);
  std::cout << stream_header() << std::flush;
  std::string line;
  int frame_no = 0;
  while (std::getline(*in, line)) {
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    ++frame_no;
    Eigen::VectorXd frame(params.cfg.input_dim);
    std::istringstream ss(line);
    for (int d = 0; d < params.cfg.input_dim; ++d) {
      if (!(ss >> frame(d))) {
        throw Error("frame " + std::to_string(frame_no) + ": expected " +
                    std::to_string(params.cfg.input_dim) + " values");
      }
    }
    double trailing;
    if (ss >> trailing) {
      throw Error("frame " + std::to_string(frame_no) + ": expected " +
                  std::to_string(params.cfg.input_dim) + " values");
    }
    if (normalize) {
      if (frame_no == 1) {
        for (Eigen::Index k = 0; k < frame.size(); ++k) reference(k) = frame(k % dims);
      }
      frame -= reference;
    }
    const StepOutput out = stream_step(params, state, frame);
    int arg = 0;
    for (int c = 1; c < out.probs.size(); ++c) {
      if (out.probs(c) > out.probs(arg)) arg = c;
    }
    std::cout << stream_row(frame_no, arg, out.probs(arg), out.actionness) << std::flush;
  }
  return 0;
}

int cmd_sweep(const RunFlags& flags, const std::string& manifest_path,
              const std::string& axis, const std::string& values_csv,
              const std::string& out_path) {
  if (axis != "clip_len" && axis != "context_window") {
    throw Error("sweep axis must be clip_len or context_window");
  }
  std::vector<int> values;
  {
    std::stringstream ss(values_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) values.push_back(std::stoi(tok));
    }
  }
  if (values.empty()) throw Error("sweep needs at least one value");
  require_exists(manifest_path, "manifest");

  const RunConfig base = flags.resolve();
  const LoadedDataset ds = load_dataset(manifest_path);

  std::ofstream out;
  if (!out_path.empty()) {
    out.open(out_path);
    if (!out) throw Error("cannot write " + out_path);
  }
  auto emit = [&out, &out_path](const std::string& text) {
    std::cout << text << std::flush;
    if (!out_path.empty()) {
      out << text;
      out.flush();  // keep partial results when a later run aborts
    }
  };

  emit(sweep_header(base.eval_m));
  for (std::size_t i = 0; i < values.size(); ++i) {
    RunConfig cfg = base;
    cfg.seed = mix_seed(base.seed, i);
    if (axis == "clip_len") {
      cfg.clip_len = values[i];
    } else {
      cfg.context_window = values[i];
    }
    std::cerr << "sweep " << axis << "=" << values[i] << " (seed " << cfg.seed << ")\n";
    const ExperimentResult ex = run_experiment(ds, cfg);
    emit(sweep_row(values[i], ex.report));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frame-wise action anticipation on skeleton streams"};
  app.require_subcommand(1);

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset");
  SynthConfig synth;
  std::uint64_t synth_seed = 1;
  std::string synth_out = "synth_data";
  synth_cmd->add_option("--classes", synth.num_classes, "action classes");
  synth_cmd->add_option("--joints", synth.joints, "joints per person");
  synth_cmd->add_option("--dims", synth.dims, "coordinates per joint");
  synth_cmd->add_option("--persons", synth.persons, "person slots per frame");
  synth_cmd->add_option("--train-seqs", synth.train_sequences, "training sequences");
  synth_cmd->add_option("--test-seqs", synth.test_sequences, "test sequences");
  synth_cmd->add_option("--frames", synth.frames_per_sequence, "frames per sequence");
  synth_cmd->add_option("--instances", synth.instances_per_sequence,
                        "action instances per sequence");
  synth_cmd->add_option("--min-len", synth.min_instance_len, "minimum instance length");
  synth_cmd->add_option("--max-len", synth.max_instance_len, "maximum instance length");
  synth_cmd->add_option("--amplitude", synth.amplitude, "action signal amplitude");
  synth_cmd->add_option("--noise", synth.noise_sigma, "coordinate noise sigma");
  synth_cmd->add_option("--seed", synth_seed, "generator seed");
  synth_cmd->add_option("--out", synth_out, "output directory");

  // train-teacher
  auto* teacher_cmd =
      app.add_subcommand("train-teacher", "train the full-representation teacher");
  RunFlags teacher_flags;
  teacher_flags.register_options(teacher_cmd);
  std::string teacher_manifest;
  std::string teacher_out = "teacher.ckpt";
  std::string teacher_reps_out;
  teacher_cmd->add_option("--manifest", teacher_manifest, "dataset manifest")->required();
  teacher_cmd->add_option("--out", teacher_out, "teacher checkpoint path");
  teacher_cmd->add_option("--reps-out", teacher_reps_out,
                          "also write the representation store here");

  // train
  auto* train_cmd = app.add_subcommand("train", "train the anticipation model");
  RunFlags train_flags;
  train_flags.register_options(train_cmd);
  std::string train_manifest, train_teacher_path, train_reps_path;
  std::string train_out = "run";
  train_cmd->add_option("--manifest", train_manifest, "dataset manifest")->required();
  train_cmd->add_option("--teacher", train_teacher_path,
                        "teacher checkpoint (required when alpha > 0)");
  train_cmd->add_option("--reps", train_reps_path,
                        "precomputed representation store (alternative to --teacher)");
  train_cmd->add_option("--out-dir", train_out, "output directory");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  RunFlags eval_flags;
  eval_flags.register_options(eval_cmd);
  std::string eval_ckpt, eval_manifest, eval_report, eval_dump;
  eval_cmd->add_option("--checkpoint", eval_ckpt, "model checkpoint")->required();
  eval_cmd->add_option("--manifest", eval_manifest, "dataset manifest")->required();
  eval_cmd->add_option("--report", eval_report, "report CSV path (default: stdout)");
  eval_cmd->add_option("--dump-dir", eval_dump, "write per-frame prediction CSVs here");

  // stream
  auto* stream_cmd = app.add_subcommand("stream", "online per-frame predictions");
  std::string stream_ckpt, stream_skel;
  stream_cmd->add_option("--checkpoint", stream_ckpt, "model checkpoint")->required();
  stream_cmd->add_option("--skeleton", stream_skel, "skeleton file ('-' for stdin)")
      ->required();

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "train+eval across hyperparameter values");
  RunFlags sweep_flags;
  sweep_flags.register_options(sweep_cmd);
  std::string sweep_manifest, sweep_values, sweep_out;
  std::string sweep_axis = "clip_len";
  sweep_cmd->add_option("--manifest", sweep_manifest, "dataset manifest")->required();
  sweep_cmd->add_option("--axis", sweep_axis, "clip_len or context_window");
  sweep_cmd->add_option("--values", sweep_values, "comma-separated values")->required();
  sweep_cmd->add_option("--out", sweep_out, "table CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) return cmd_synth(synth, synth_seed, synth_out);
    if (teacher_cmd->parsed()) {
      return cmd_train_teacher(teacher_flags, teacher_manifest, teacher_out,
                               teacher_reps_out);
    }
    if (train_cmd->parsed()) {
      return cmd_train(train_flags, train_manifest, train_teacher_path, train_reps_path,
                       train_out);
    }
    if (eval_cmd->parsed()) {
      return cmd_eval(eval_flags, eval_ckpt, eval_manifest, eval_report, eval_dump);
    }
    if (stream_cmd->parsed()) return cmd_stream(stream_ckpt, stream_skel);
    if (sweep_cmd->parsed()) {
      return cmd_sweep(sweep_flags, sweep_manifest, sweep_axis, sweep_values, sweep_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
