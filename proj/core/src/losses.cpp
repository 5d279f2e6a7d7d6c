#include "sact/losses.hpp"

#include <cmath>

namespace sact {

void TeacherRepStore::insert(int sequence_index, int instance_index, Eigen::VectorXd rep) {
  reps_[{sequence_index, instance_index}] = std::move(rep);
}

const Eigen::VectorXd& TeacherRepStore::at(int sequence_index, int instance_index) const {
  const auto it = reps_.find({sequence_index, instance_index});
  if (it == reps_.end()) {
    throw Error("no teacher representation for instance " + std::to_string(sequence_index) +
                ":" + std::to_string(instance_index));
  }
  return it->second;
}

const Eigen::VectorXd* TeacherRepStore::find(int sequence_index, int instance_index) const {
  const auto it = reps_.find({sequence_index, instance_index});
  return it == reps_.end() ? nullptr : &it->second;
}

int TeacherRepStore::hidden_size() const {
  return reps_.empty() ? 0 : static_cast<int>(reps_.begin()->second.size());
}

double loss_classification(const Eigen::MatrixXd& probs, const std::vector<int>& labels) {
  const auto len = probs.rows();
  if (static_cast<std::size_t>(len) != labels.size()) {
    throw Error("probability rows and label count differ");
  }
  if (len == 0) throw Error("empty clip in classification loss");
  double sum = 0.0;
  for (Eigen::Index t = 0; t < len; ++t) {
    const int y = labels[static_cast<std::size_t>(t)];
    if (y < 0 || y >= probs.cols()) {
      throw Error("label " + std::to_string(y) + " outside [0, " +
                  std::to_string(probs.cols() - 1) + "]");
    }
    sum -= std::log(std::max(probs(t, y), kProbFloor));
  }
  return sum / static_cast<double>(len);
}

double loss_full_rep(const Eigen::MatrixXd& hidden,
                     const std::vector<std::pair<CoveredSpan, const Eigen::VectorXd*>>& covered,
                     const Eigen::MatrixXd& w_proj) {
  double sum = 0.0;
  long frames = 0;
  for (const auto& [span, rep] : covered) {
    if (rep == nullptr) throw Error("missing teacher representation");
    for (int t = span.lo; t <= span.hi; ++t) {
      if (t < 0 || t >= hidden.rows()) {
        throw Error("covered span outside clip");
      }
      sum += (w_proj * hidden.row(t).transpose() - *rep).squaredNorm();
      ++frames;
    }
  }
  return frames == 0 ? 0.0 : sum / static_cast<double>(frames);
}

double loss_actionness(const Eigen::VectorXd& actionness, const std::vector<int>& labels) {
  const auto len = actionness.size();
  if (static_cast<std::size_t>(len) != labels.size()) {
    throw Error("actionness length and label count differ");
  }
  if (len == 0) throw Error("empty clip in actionness loss");
  double sum = 0.0;
  for (Eigen::Index t = 0; t < len; ++t) {
    const double q = actionness(t);
    if (labels[static_cast<std::size_t>(t)] != 0) {
      sum -= std::log(std::max(q, kProbFloor));
    } else {
      sum -= std::log(std::max(1.0 - q, kProbFloor));
    }
  }
  return sum / static_cast<double>(len);
}

std::vector<std::pair<CoveredSpan, const Eigen::VectorXd*>> resolve_teacher_reps(
    const Clip& clip, const LossSpec& spec) {
  std::vector<std::pair<CoveredSpan, const Eigen::VectorXd*>> out;
  if (spec.alpha == 0.0) return out;
  if (spec.teacher_reps == nullptr) {
    throw Error("regression weight is nonzero but no teacher representations were supplied");
  }
  out.reserve(clip.covered.size());
  for (const auto& span : clip.covered) {
    out.emplace_back(span, &spec.teacher_reps->at(clip.sequence_index, span.instance_index));
  }
  return out;
}

LossBreakdown loss_total(const Eigen::MatrixXd& probs, const Eigen::VectorXd& actionness,
                         const Eigen::MatrixXd& hidden, const Clip& clip,
                         const Eigen::MatrixXd& w_proj, const LossSpec& spec) {
  if (spec.alpha < 0.0 || spec.beta < 0.0) {
    throw Error("loss weights must be nonnegative");
  }
  LossBreakdown out;
  out.classification = loss_classification(probs, clip.labels);
  if (spec.alpha > 0.0) {
    out.regression = loss_full_rep(hidden, resolve_teacher_reps(clip, spec), w_proj);
  }
  if (spec.beta > 0.0) {
    out.actionness = loss_actionness(actionness, clip.actionness);
  }
  out.total = out.classification + spec.alpha * out.regression + spec.beta * out.actionness;
  return out;
}

}  // namespace sact
