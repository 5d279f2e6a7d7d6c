#pragma once

#include <cstdint>
#include <vector>

#include "sact/losses.hpp"
#include "sact/model.hpp"
#include "sact/optimizer.hpp"

namespace sact {

// An action instance cut to exactly its annotated interval, every frame
// labeled with the instance class.
struct TrimmedInstance {
  Eigen::MatrixXd frames;
  int class_id = 0;
  int sequence_index = 0;
  int instance_index = 0;
};

std::vector<TrimmedInstance> make_trimmed_instances(
    const std::vector<UntrimmedSequence>& sequences, bool normalize, int dims);

// Trains a network with the same architecture as the student on trimmed
// instances using the frame-wise classification loss alone. Deterministic
// given the seed. Per-epoch mean losses are appended to epoch_loss when given.
ModelParams train_teacher(const std::vector<TrimmedInstance>& instances,
                          const ModelConfig& cfg, const AdamConfig& opt, int epochs,
                          std::uint64_t seed, std::vector<double>* epoch_loss = nullptr);

// Runs the teacher over each trimmed instance and stores the top-layer hidden
// vector at the final frame.
TeacherRepStore extract_full_reps(const ModelParams& teacher,
                                  const std::vector<TrimmedInstance>& instances,
                                  std::uint64_t teacher_hash);

}  // namespace sact
