#include "sact/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "sact/sampling.hpp"

namespace sact {

namespace {

std::string format_csv(const char* fmt, auto... args) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), fmt, args...);
  return buf;
}

}  // namespace

InstanceRule parse_instance_rule(const std::string& name) {
  if (name == "last_frame") return InstanceRule::kLastFrame;
  if (name == "interval_mean") return InstanceRule::kIntervalMean;
  throw Error("unknown instance rule \"" + name +
              "\" (expected last_frame or interval_mean)");
}

int observation_frame(const ActionInstance& inst, int k, int M) {
  if (M < 2) throw Error("observation ratio denominator must be >= 2");
  if (k < 1 || k > M - 1) {
    throw Error("observation ratio index " + std::to_string(k) + " outside [1, " +
                std::to_string(M - 1) + "]");
  }
  const long span = inst.span();
  return inst.start + static_cast<int>(span * k / M);
}

int argmax_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  int best = 0;
  for (int c = 1; c < row.size(); ++c) {
    if (row(c) > row(best)) best = c;
  }
  return best;
}

std::vector<double> anticipation_accuracy(const std::vector<PredictionStream>& streams,
                                          const std::vector<const UntrimmedSequence*>& seqs,
                                          int M, InstanceRule rule) {
  if (streams.size() != seqs.size()) {
    throw Error("stream count does not match sequence count");
  }
  std::vector<long> correct(static_cast<std::size_t>(M - 1), 0);
  long total = 0;
  for (std::size_t s = 0; s < seqs.size(); ++s) {
    const auto& seq = *seqs[s];
    const auto& stream = streams[s];
    if (stream.probs.rows() != seq.num_frames()) {
      throw Error("stream length " + std::to_string(stream.probs.rows()) +
                  " does not match sequence length " + std::to_string(seq.num_frames()));
    }
    for (const auto& inst : seq.instances) {
      ++total;
      for (int k = 1; k <= M - 1; ++k) {
        const int frame = observation_frame(inst, k, M);
        int predicted;
        if (rule == InstanceRule::kLastFrame) {
          predicted = argmax_row(stream.probs.row(frame - 1));
        } else {
          const Eigen::RowVectorXd mean =
              stream.probs.middleRows(inst.start - 1, frame - inst.start + 1).colwise().mean();
          predicted = argmax_row(mean);
        }
        if (predicted == inst.class_id) ++correct[static_cast<std::size_t>(k - 1)];
      }
    }
  }
  std::vector<double> acc(static_cast<std::size_t>(M - 1),
                          std::numeric_limits<double>::quiet_NaN());
  if (total > 0) {
    for (std::size_t k = 0; k < acc.size(); ++k) {
      acc[k] = static_cast<double>(correct[k]) / static_cast<double>(total);
    }
  }
  return acc;
}

double frame_accuracy(const std::vector<PredictionStream>& streams,
                      const std::vector<const std::vector<int>*>& label_tracks,
                      bool include_background, std::vector<PerClassAccuracy>* per_class) {
  if (streams.size() != label_tracks.size()) {
    throw Error("stream count does not match label track count");
  }
  std::vector<PerClassAccuracy> tally;
  auto slot = [&tally](int cls) -> PerClassAccuracy& {
    for (auto& t : tally) {
      if (t.class_id == cls) return t;
    }
    tally.push_back({cls, 0, 0});
    return tally.back();
  };

  for (std::size_t s = 0; s < streams.size(); ++s) {
    const auto& labels = *label_tracks[s];
    const auto& probs = streams[s].probs;
    if (probs.rows() != static_cast<Eigen::Index>(labels.size())) {
      throw Error("stream length does not match label track length");
    }
    for (Eigen::Index t = 0; t < probs.rows(); ++t) {
      const int y = labels[static_cast<std::size_t>(t)];
      auto& acc = slot(y);
      ++acc.frames;
      if (argmax_row(probs.row(t)) == y) ++acc.correct;
    }
  }

  std::sort(tally.begin(), tally.end(),
            [](const PerClassAccuracy& a, const PerClassAccuracy& b) {
              return a.class_id < b.class_id;
            });
  if (per_class != nullptr) *per_class = tally;

  double sum = 0.0;
  int classes = 0;
  for (const auto& t : tally) {
    if (t.class_id == 0 && !include_background) continue;
    if (t.frames == 0) continue;
    sum += t.accuracy();
    ++classes;
  }
  return classes == 0 ? std::numeric_limits<double>::quiet_NaN()
                      : sum / static_cast<double>(classes);
}

PredictionStream stitch_predictions(const std::vector<Eigen::MatrixXd>& window_probs,
                                    const std::vector<Eigen::VectorXd>& window_actionness,
                                    const std::vector<int>& starts, int num_frames) {
  if (window_probs.size() != starts.size() || window_actionness.size() != starts.size()) {
    throw Error("window count does not match start count");
  }
  if (window_probs.empty()) throw Error("no windows to stitch");

  PredictionStream out;
  out.probs.resize(num_frames, window_probs.front().cols());
  out.actionness.resize(num_frames);
  std::vector<bool> written(static_cast<std::size_t>(num_frames), false);
  for (std::size_t w = 0; w < starts.size(); ++w) {
    const int start = starts[w];
    const auto& probs = window_probs[w];
    for (Eigen::Index t = 0; t < probs.rows(); ++t) {
      const int frame = start + static_cast<int>(t);
      if (frame < 1 || frame > num_frames) throw Error("window outside the sequence");
      if (written[static_cast<std::size_t>(frame - 1)]) continue;  // first writer wins
      out.probs.row(frame - 1) = probs.row(t);
      out.actionness(frame - 1) = window_actionness[w](t);
      written[static_cast<std::size_t>(frame - 1)] = true;
    }
  }
  for (int f = 0; f < num_frames; ++f) {
    if (!written[static_cast<std::size_t>(f)]) {
      throw Error("frame " + std::to_string(f + 1) + " not covered by any window");
    }
  }
  return out;
}

PredictionStream run_streaming(const ModelParams& params, const Eigen::MatrixXd& frames,
                               bool normalize, int dims) {
  const int T = static_cast<int>(frames.rows());
  PredictionStream out;
  out.probs.resize(T, params.cfg.augmented_classes());
  out.actionness.resize(T);
  StreamState state = StreamState::initial(params.cfg);
  Eigen::VectorXd reference = Eigen::VectorXd::Zero(frames.cols());
  for (int t = 0; t < T; ++t) {
    Eigen::VectorXd frame = frames.row(t);
    if (normalize) {
      if (t == 0) {
        for (Eigen::Index k = 0; k < frame.size(); ++k) reference(k) = frame(k % dims);
      }
      frame -= reference;
    }
    const StepOutput step = stream_step(params, state, frame);
    out.probs.row(t) = step.probs;
    out.actionness(t) = step.actionness;
  }
  return out;
}

PredictionStream run_stitched(const ModelParams& params, const Eigen::MatrixXd& frames,
                              int window_len, int stride, bool normalize, int dims) {
  const int T = static_cast<int>(frames.rows());
  const auto starts = sliding_window_starts(T, window_len, stride);
  std::vector<Eigen::MatrixXd> probs;
  std::vector<Eigen::VectorXd> actionness;
  for (const int start : starts) {
    Eigen::MatrixXd window = frames.middleRows(start - 1, window_len);
    if (normalize) normalize_clip_frames(window, dims);
    const ClipForward fwd = forward_clip(params, window);
    probs.push_back(fwd.probs);
    actionness.push_back(fwd.actionness);
  }
  return stitch_predictions(probs, actionness, starts, T);
}

MetricsReport evaluate_streams(const std::vector<PredictionStream>& streams,
                               const std::vector<const UntrimmedSequence*>& seqs,
                               int num_classes, const EvalOptions& opts) {
  MetricsReport report;
  report.M = opts.M;
  report.anticipation = anticipation_accuracy(streams, seqs, opts.M, opts.rule);
  for (const auto* seq : seqs) report.instance_count += static_cast<long>(seq->instances.size());

  std::vector<std::vector<int>> tracks;
  tracks.reserve(seqs.size());
  for (const auto* seq : seqs) tracks.push_back(derive_frame_labels(*seq, num_classes));
  std::vector<const std::vector<int>*> track_ptrs;
  for (const auto& t : tracks) track_ptrs.push_back(&t);

  report.avg_acc_with_bg = frame_accuracy(streams, track_ptrs, true, &report.per_class);
  report.avg_acc_without_bg = frame_accuracy(streams, track_ptrs, false);
  return report;
}

MetricsReport evaluate(const ModelParams& params,
                       const std::vector<UntrimmedSequence>& sequences,
                       const EvalOptions& opts) {
  std::vector<PredictionStream> streams;
  std::vector<const UntrimmedSequence*> ptrs;
  for (const auto& seq : sequences) {
    streams.push_back(opts.stitch
                          ? run_stitched(params, seq.frames, opts.window_len,
                                         opts.window_stride, opts.normalize, opts.dims)
                          : run_streaming(params, seq.frames, opts.normalize, opts.dims));
    ptrs.push_back(&seq);
  }
  return evaluate_streams(streams, ptrs, params.cfg.num_classes, opts);
}

std::string report_to_csv(const MetricsReport& report) {
  std::string out = "gamma,accuracy,n_instances\n";
  for (std::size_t k = 0; k < report.anticipation.size(); ++k) {
    out += format_csv("%g,%.6f,%ld\n", static_cast<double>(k + 1) / report.M,
                      report.anticipation[k], report.instance_count);
  }
  out += format_csv("avg_acc_w_bg,%.6f,\n", report.avg_acc_with_bg);
  out += format_csv("avg_acc_wo_bg,%.6f,\n", report.avg_acc_without_bg);
  for (const auto& cls : report.per_class) {
    out += format_csv("class_%d,%.6f,%ld\n", cls.class_id, cls.accuracy(), cls.frames);
  }
  return out;
}

std::string frame_dump_header() { return "frame,true_label,argmax,p_max,q\n"; }

std::string frame_dump_row(int frame, int true_label, int argmax, double p_max, double q) {
  return format_csv("%d,%d,%d,%.6f,%.6f\n", frame, true_label, argmax, p_max, q);
}

std::string stream_header() { return "frame,argmax,p_max,q\n"; }

std::string stream_row(int frame, int argmax, double p_max, double q) {
  return format_csv("%d,%d,%.6f,%.6f\n", frame, argmax, p_max, q);
}

}  // namespace sact
