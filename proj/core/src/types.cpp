#include "sact/types.hpp"

namespace sact {

namespace {

std::string instance_str(const ActionInstance& a) {
  return "(" + std::to_string(a.start) + "," + std::to_string(a.end) + "," +
         std::to_string(a.class_id) + ")";
}

}  // namespace

void UntrimmedSequence::validate(int num_classes) const {
  if (!frames.allFinite()) {
    throw Error("sequence contains non-finite coordinates");
  }
  const int total = num_frames();
  const ActionInstance* prev = nullptr;
  for (const auto& inst : instances) {
    if (inst.start < 1 || inst.end > total) {
      throw Error("instance " + instance_str(inst) + " outside sequence of " +
                  std::to_string(total) + " frames");
    }
    if (inst.start >= inst.end) {
      throw Error("instance " + instance_str(inst) + " has non-positive span");
    }
    if (inst.class_id < 1 || inst.class_id > num_classes) {
      throw Error("instance " + instance_str(inst) + " class outside [1, " +
                  std::to_string(num_classes) + "]");
    }
    if (prev != nullptr && prev->end >= inst.start) {
      throw Error("instances " + instance_str(*prev) + " and " + instance_str(inst) +
                  " overlap at frame " + std::to_string(inst.start));
    }
    prev = &inst;
  }
}

std::vector<int> derive_frame_labels(const UntrimmedSequence& seq, int num_classes) {
  seq.validate(num_classes);
  std::vector<int> labels(static_cast<std::size_t>(seq.num_frames()), 0);
  for (const auto& inst : seq.instances) {
    for (int t = inst.start; t <= inst.end; ++t) {
      labels[static_cast<std::size_t>(t - 1)] = inst.class_id;
    }
  }
  return labels;
}

}  // namespace sact
