#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "sact/sampling.hpp"
#include "sact/types.hpp"

namespace sact {

// Probabilities are floored at this value before any logarithm so that loss
// evaluation never produces NaN or infinity for inputs in [0, 1].
inline constexpr double kProbFloor = 1e-12;

// Full-action-representation targets: for every training instance, the
// teacher network's top-layer hidden vector at the instance's final frame.
// Keyed by (sequence index, instance index) within the training split.
// Immutable once built; safe for concurrent reads.
class TeacherRepStore {
 public:
  void insert(int sequence_index, int instance_index, Eigen::VectorXd rep);

  // Throws Error naming the instance when absent.
  const Eigen::VectorXd& at(int sequence_index, int instance_index) const;
  const Eigen::VectorXd* find(int sequence_index, int instance_index) const;

  std::size_t size() const { return reps_.size(); }
  int hidden_size() const;
  const std::map<std::pair<int, int>, Eigen::VectorXd>& entries() const { return reps_; }

  // Hash of the serialized teacher checkpoint the vectors came from.
  std::uint64_t teacher_hash = 0;

 private:
  std::map<std::pair<int, int>, Eigen::VectorXd> reps_;
};

struct LossSpec {
  double alpha = 1.0;  // full-representation regression weight
  double beta = 1.0;   // temporal actionness weight
  const TeacherRepStore* teacher_reps = nullptr;  // required when alpha > 0
};

struct LossBreakdown {
  double total = 0.0;
  double classification = 0.0;
  double regression = 0.0;
  double actionness = 0.0;
};

// Mean frame-wise cross entropy: -(1/L) sum_t log p_t(y_t).
// probs is L x (C+1), one probability row per frame; labels in {0..C}.
double loss_classification(const Eigen::MatrixXd& probs, const std::vector<int>& labels);

// Mean squared projection residual over covered frames: for frame t covered
// by an instance with teacher target h_e, the residual is ||W h_t - h_e||^2.
// The mean runs over all covered frames, which equals the covered-frame-count
// weighted average of per-instance means. Frames outside any instance
// contribute nothing; no covered frames gives 0.
double loss_full_rep(const Eigen::MatrixXd& hidden,
                     const std::vector<std::pair<CoveredSpan, const Eigen::VectorXd*>>& covered,
                     const Eigen::MatrixXd& w_proj);

// Binary cross entropy of the per-frame actionness probability q_t against
// the class-agnostic labels in {0,1}.
double loss_actionness(const Eigen::VectorXd& actionness, const std::vector<int>& labels);

// Resolves the clip's covered spans against the teacher store (errors name
// the missing instance). Returns an empty list when alpha == 0.
std::vector<std::pair<CoveredSpan, const Eigen::VectorXd*>> resolve_teacher_reps(
    const Clip& clip, const LossSpec& spec);

// Composite clip loss: classification + alpha * regression + beta *
// actionness. Terms with zero weight are skipped and reported as exactly 0,
// so alpha == beta == 0 reduces exactly to the classification loss.
LossBreakdown loss_total(const Eigen::MatrixXd& probs, const Eigen::VectorXd& actionness,
                         const Eigen::MatrixXd& hidden, const Clip& clip,
                         const Eigen::MatrixXd& w_proj, const LossSpec& spec);

}  // namespace sact
