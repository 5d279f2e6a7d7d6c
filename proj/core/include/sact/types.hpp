#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace sact {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One annotated action occurrence inside an untrimmed sequence. Frame indices
// are 1-based and inclusive on both ends, matching the on-disk label format.
// span() is the anticipation horizon (end - start), not the frame count.
struct ActionInstance {
  int start = 0;
  int end = 0;
  int class_id = 0;

  int span() const { return end - start; }
  int frame_count() const { return end - start + 1; }

  bool operator==(const ActionInstance&) const = default;
};

// A long skeleton recording with its non-overlapping action annotations.
// frames row t-1 holds frame t (J*D*P coordinates, absent persons zero-filled).
struct UntrimmedSequence {
  Eigen::MatrixXd frames;
  std::vector<ActionInstance> instances;  // sorted by start

  int num_frames() const { return static_cast<int>(frames.rows()); }

  // Throws Error if any invariant is violated: non-finite coordinates,
  // instance bounds outside [1, T], start >= end, class ids outside [1, C],
  // or overlapping/unsorted instances.
  void validate(int num_classes) const;
};

// Per-frame labels over the augmented class set {0 = background, 1..C}.
// Throws on overlapping instances, naming the offending pair.
std::vector<int> derive_frame_labels(const UntrimmedSequence& seq, int num_classes);

struct SequencePaths {
  std::string skeleton;
  std::string labels;
};

struct DatasetManifest {
  int num_classes = 0;
  int joints = 0;
  int dims = 3;
  int persons = 1;
  std::vector<SequencePaths> train;
  std::vector<SequencePaths> test;

  int frame_dim() const { return joints * dims * persons; }
};

}  // namespace sact
