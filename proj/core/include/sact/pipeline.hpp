#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sact/checkpoint.hpp"
#include "sact/config.hpp"
#include "sact/eval.hpp"
#include "sact/model.hpp"
#include "sact/teacher.hpp"

namespace sact {

struct LoadedDataset {
  DatasetManifest manifest;
  std::vector<UntrimmedSequence> train;
  std::vector<UntrimmedSequence> test;
  std::vector<std::vector<int>> train_labels;
  std::vector<std::vector<int>> test_labels;
};

LoadedDataset load_dataset(const std::string& manifest_path);
LoadedDataset dataset_from_memory(const DatasetManifest& manifest,
                                  std::vector<UntrimmedSequence> train,
                                  std::vector<UntrimmedSequence> test);

ModelConfig model_config_for(const LoadedDataset& ds, const RunConfig& cfg);
EvalOptions eval_options_for(const LoadedDataset& ds, const RunConfig& cfg);

// Run config plus dataset geometry (model.dims) for checkpoint snapshots, so
// a checkpoint alone is enough to stream new data.
std::string config_snapshot(const LoadedDataset& ds, const RunConfig& cfg);

struct EpochLog {
  int epoch = 0;
  LossBreakdown mean;
};

std::string train_log_header();
std::string train_log_row(const EpochLog& row);

struct TrainResult {
  ModelParams final_params;
  ModelParams best_params;  // lowest mean total loss
  int best_epoch = 0;
  std::vector<EpochLog> log;
};

// Trains the frame-wise model on the train split. teacher_reps must be
// non-null when cfg.alpha > 0; this is checked up front. Per-epoch log rows
// are streamed to `progress` as they complete when it is non-null.
TrainResult train_student(const LoadedDataset& ds, const RunConfig& cfg,
                          const TeacherRepStore* teacher_reps,
                          std::ostream* progress = nullptr);

// Trains the teacher on the trimmed train instances and extracts the
// full-representation store. The store's hash covers the serialized teacher.
struct TeacherResult {
  ModelParams params;
  TeacherRepStore reps;
  std::vector<double> epoch_loss;
};

TeacherResult run_teacher_pipeline(const LoadedDataset& ds, const RunConfig& cfg);

MetricsReport evaluate_params(const ModelParams& params, const LoadedDataset& ds,
                              const RunConfig& cfg);

// One self-contained train(+teacher)+eval run; used by the sweep command.
struct ExperimentResult {
  TrainResult train;
  MetricsReport report;
};

ExperimentResult run_experiment(const LoadedDataset& ds, const RunConfig& cfg);

// Sweep table rows: value, one column per observation ratio, then the two
// frame accuracies.
std::string sweep_header(int M);
std::string sweep_row(int value, const MetricsReport& report);

}  // namespace sact
