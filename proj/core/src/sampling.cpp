#include "sact/sampling.hpp"

#include <algorithm>

namespace sact {

SamplerMode parse_sampler_mode(const std::string& name) {
  if (name == "ac") return SamplerMode::kActionCentric;
  if (name == "sw") return SamplerMode::kSlidingWindow;
  if (name == "ac_sw") return SamplerMode::kHybrid;
  throw Error("unknown sampler mode \"" + name + "\" (expected ac, sw or ac_sw)");
}

std::string sampler_mode_name(SamplerMode mode) {
  switch (mode) {
    case SamplerMode::kActionCentric: return "ac";
    case SamplerMode::kSlidingWindow: return "sw";
    case SamplerMode::kHybrid: return "ac_sw";
  }
  throw Error("invalid sampler mode");
}

SamplerMode epoch_schedule(SamplerMode mode, int epoch) {
  if (mode != SamplerMode::kHybrid) return mode;
  return epoch % 2 == 0 ? SamplerMode::kActionCentric : SamplerMode::kSlidingWindow;
}

void normalize_clip_frames(Eigen::MatrixXd& frames, int dims) {
  if (frames.rows() == 0) return;
  const Eigen::VectorXd reference = frames.row(0).head(dims);
  for (Eigen::Index col = 0; col < frames.cols(); ++col) {
    frames.col(col).array() -= reference(col % dims);
  }
}

Clip extract_clip(const UntrimmedSequence& seq, const std::vector<int>& labels, int start,
                  int len, bool normalize, int dims, int sequence_index) {
  const int total = seq.num_frames();
  if (len < 1) throw Error("clip length must be >= 1");
  if (start < 1 || start + len - 1 > total) {
    throw Error("clip [" + std::to_string(start) + "," + std::to_string(start + len - 1) +
                "] outside sequence of " + std::to_string(total) + " frames");
  }

  Clip clip;
  clip.start = start;
  clip.sequence_index = sequence_index;
  clip.frames = seq.frames.middleRows(start - 1, len);
  if (normalize) normalize_clip_frames(clip.frames, dims);

  clip.labels.resize(static_cast<std::size_t>(len));
  clip.actionness.resize(static_cast<std::size_t>(len));
  for (int t = 0; t < len; ++t) {
    const int y = labels[static_cast<std::size_t>(start - 1 + t)];
    clip.labels[static_cast<std::size_t>(t)] = y;
    clip.actionness[static_cast<std::size_t>(t)] = y != 0 ? 1 : 0;
  }

  const int clip_end = start + len - 1;
  for (std::size_t i = 0; i < seq.instances.size(); ++i) {
    const auto& inst = seq.instances[i];
    if (inst.end < start || inst.start > clip_end) continue;
    CoveredSpan span;
    span.instance_index = static_cast<int>(i);
    span.lo = std::max(inst.start, start) - start;
    span.hi = std::min(inst.end, clip_end) - start;
    clip.covered.push_back(span);
  }
  return clip;
}

int action_centric_start(int num_frames, const ActionInstance& inst, int clip_len,
                         int context_window, Rng& rng) {
  if (clip_len < 1) throw Error("clip length must be >= 1");
  if (context_window < 0) throw Error("context window must be >= 0");
  if (clip_len > num_frames) {
    throw Error("clip length " + std::to_string(clip_len) + " exceeds sequence length " +
                std::to_string(num_frames));
  }
  const int lo = std::max(1, inst.start - context_window);
  const int hi = std::min(num_frames, inst.end + context_window);
  const int last_start = hi - clip_len + 1;
  if (last_start >= lo) {
    return static_cast<int>(rng.uniform_int(lo, last_start));
  }
  // interval shorter than the clip: center on the instance midpoint
  const int mid = (inst.start + inst.end) / 2;
  int start = mid - clip_len / 2;
  start = std::max(1, std::min(start, num_frames - clip_len + 1));
  return start;
}

Clip action_centric_sample(const UntrimmedSequence& seq, const std::vector<int>& labels,
                           int instance_index, const SamplerConfig& cfg, int dims,
                           Rng& rng, int sequence_index) {
  const auto& inst = seq.instances.at(static_cast<std::size_t>(instance_index));
  const int start =
      action_centric_start(seq.num_frames(), inst, cfg.clip_len, cfg.context_window, rng);
  return extract_clip(seq, labels, start, cfg.clip_len, cfg.normalize, dims, sequence_index);
}

std::vector<int> sliding_window_starts(int num_frames, int clip_len, int stride) {
  if (clip_len > num_frames) {
    throw Error("clip length " + std::to_string(clip_len) + " exceeds sequence length " +
                std::to_string(num_frames));
  }
  if (stride < 1) throw Error("stride must be >= 1");
  std::vector<int> starts;
  const int last = num_frames - clip_len + 1;
  for (int s = 1; s <= last; s += stride) starts.push_back(s);
  if (starts.back() + clip_len - 1 < num_frames) starts.push_back(last);
  return starts;
}

std::vector<Clip> sliding_window_sample(const UntrimmedSequence& seq,
                                        const std::vector<int>& labels,
                                        const SamplerConfig& cfg, int dims,
                                        int sequence_index) {
  std::vector<Clip> clips;
  for (int start : sliding_window_starts(seq.num_frames(), cfg.clip_len, cfg.sw_stride)) {
    clips.push_back(
        extract_clip(seq, labels, start, cfg.clip_len, cfg.normalize, dims, sequence_index));
  }
  return clips;
}

}  // namespace sact
