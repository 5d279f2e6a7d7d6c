#include "sact/teacher.hpp"

#include <numeric>

namespace sact {

std::vector<TrimmedInstance> make_trimmed_instances(
    const std::vector<UntrimmedSequence>& sequences, bool normalize, int dims) {
  std::vector<TrimmedInstance> out;
  for (std::size_t s = 0; s < sequences.size(); ++s) {
    const auto& seq = sequences[s];
    for (std::size_t i = 0; i < seq.instances.size(); ++i) {
      const auto& inst = seq.instances[i];
      if (inst.end > seq.num_frames()) {
        throw Error("instance exceeds sequence bounds");
      }
      TrimmedInstance trimmed;
      trimmed.frames = seq.frames.middleRows(inst.start - 1, inst.frame_count());
      if (normalize) normalize_clip_frames(trimmed.frames, dims);
      trimmed.class_id = inst.class_id;
      trimmed.sequence_index = static_cast<int>(s);
      trimmed.instance_index = static_cast<int>(i);
      out.push_back(std::move(trimmed));
    }
  }
  return out;
}

ModelParams train_teacher(const std::vector<TrimmedInstance>& instances,
                          const ModelConfig& cfg, const AdamConfig& opt, int epochs,
                          std::uint64_t seed, std::vector<double>* epoch_loss) {
  if (instances.empty()) throw Error("no instances to train the teacher on");

  Rng init_rng(mix_seed(seed, 0x7eac));
  ModelParams params = ModelParams::init(cfg, init_rng);
  AdamState state = AdamState::initial(cfg);

  // Instances have varying lengths, so each one is its own optimizer step.
  for (int epoch = 0; epoch < epochs; ++epoch) {
    Rng rng(mix_seed(seed, 0x7eac00 + static_cast<std::uint64_t>(epoch)));
    std::vector<std::size_t> order(instances.size());
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);

    double sum = 0.0;
    for (const std::size_t idx : order) {
      const auto& inst = instances[idx];
      Clip clip;
      clip.frames = inst.frames;
      clip.labels.assign(static_cast<std::size_t>(inst.frames.rows()), inst.class_id);
      clip.actionness.assign(static_cast<std::size_t>(inst.frames.rows()), 1);
      LossSpec spec;
      spec.alpha = 0.0;
      spec.beta = 0.0;
      auto [grads, loss] = backward_clip(params, clip, spec);
      optimizer_step(params, grads, state, opt);
      sum += loss.total;
    }
    if (epoch_loss != nullptr) {
      epoch_loss->push_back(sum / static_cast<double>(instances.size()));
    }
  }
  return params;
}

TeacherRepStore extract_full_reps(const ModelParams& teacher,
                                  const std::vector<TrimmedInstance>& instances,
                                  std::uint64_t teacher_hash) {
  TeacherRepStore store;
  store.teacher_hash = teacher_hash;
  for (const auto& inst : instances) {
    const ClipForward fwd = forward_clip(teacher, inst.frames);
    store.insert(inst.sequence_index, inst.instance_index,
                 fwd.hidden.row(fwd.hidden.rows() - 1).transpose());
  }
  return store;
}

}  // namespace sact
