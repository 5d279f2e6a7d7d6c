#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sact/model.hpp"
#include "sact/types.hpp"

namespace sact {

// Per-frame class probabilities and actionness for a fully observed
// sequence, produced causally (frame t depends only on frames 1..t).
struct PredictionStream {
  Eigen::MatrixXd probs;       // T x (C+1)
  Eigen::VectorXd actionness;  // T
};

// How an instance-level prediction is read off the stream at an observation
// frame: the probability row of the last observed frame, or the mean row over
// the observed part of the instance.
enum class InstanceRule { kLastFrame, kIntervalMean };

InstanceRule parse_instance_rule(const std::string& name);  // last_frame | interval_mean

// Last observed frame at observation ratio k/M: start + floor(span * k / M).
// Requires 1 <= k <= M-1.
int observation_frame(const ActionInstance& inst, int k, int M);

// Fraction of instances whose argmax class at ratio k/M equals the annotated
// class, for k = 1..M-1. The argmax runs over all classes including
// background; a background argmax counts as incorrect. NaN entries when the
// test set has no instances.
std::vector<double> anticipation_accuracy(const std::vector<PredictionStream>& streams,
                                          const std::vector<const UntrimmedSequence*>& seqs,
                                          int M, InstanceRule rule);

struct PerClassAccuracy {
  int class_id = 0;
  long frames = 0;
  long correct = 0;

  double accuracy() const {
    return frames == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(frames);
  }
};

// Unweighted mean of per-class frame accuracies, frames pooled over all
// sequences. Background (class 0) participates only when include_background;
// classes with no frames are excluded from the mean. per_class, when given,
// receives the pooled tallies for every class including background.
double frame_accuracy(const std::vector<PredictionStream>& streams,
                      const std::vector<const std::vector<int>*>& label_tracks,
                      bool include_background,
                      std::vector<PerClassAccuracy>* per_class = nullptr);

// Concatenates window predictions into one stream; where windows overlap, the
// earlier window wins. Throws if any frame of [1, T] is uncovered.
PredictionStream stitch_predictions(const std::vector<Eigen::MatrixXd>& window_probs,
                                    const std::vector<Eigen::VectorXd>& window_actionness,
                                    const std::vector<int>& starts, int num_frames);

struct EvalOptions {
  int M = 10;
  InstanceRule rule = InstanceRule::kLastFrame;
  bool stitch = false;   // default is stateful streaming
  int window_len = 50;   // stitching only
  int window_stride = 50;
  bool normalize = true;
  int dims = 3;
};

struct MetricsReport {
  int M = 10;
  std::vector<double> anticipation;  // index k-1 holds ratio k/M
  long instance_count = 0;
  double avg_acc_with_bg = 0.0;
  double avg_acc_without_bg = 0.0;
  std::vector<PerClassAccuracy> per_class;
};

PredictionStream run_streaming(const ModelParams& params, const Eigen::MatrixXd& frames,
                               bool normalize, int dims);

PredictionStream run_stitched(const ModelParams& params, const Eigen::MatrixXd& frames,
                              int window_len, int stride, bool normalize, int dims);

MetricsReport evaluate_streams(const std::vector<PredictionStream>& streams,
                               const std::vector<const UntrimmedSequence*>& seqs,
                               int num_classes, const EvalOptions& opts);

MetricsReport evaluate(const ModelParams& params,
                       const std::vector<UntrimmedSequence>& sequences,
                       const EvalOptions& opts);

// CSV rendering: one "gamma,accuracy,n_instances" row per ratio, then summary
// rows for the two frame accuracies, then one row per class.
std::string report_to_csv(const MetricsReport& report);

// Per-frame rows shared by the evaluation dump and the stream command so the
// two emit identical predictions for identical inputs.
std::string frame_dump_header();
std::string frame_dump_row(int frame, int true_label, int argmax, double p_max, double q);
std::string stream_header();
std::string stream_row(int frame, int argmax, double p_max, double q);

int argmax_row(const Eigen::Ref<const Eigen::RowVectorXd>& row);

}  // namespace sact
