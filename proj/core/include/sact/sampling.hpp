#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "sact/rng.hpp"
#include "sact/types.hpp"

namespace sact {

// Portion of an action instance falling inside a clip; lo/hi are 0-based
// frame offsets within the clip, inclusive.
struct CoveredSpan {
  int instance_index = 0;
  int lo = 0;
  int hi = 0;
};

// Fixed-length training window. frames are already normalized when the
// sampler is configured to do so.
struct Clip {
  Eigen::MatrixXd frames;       // L x frame_dim
  std::vector<int> labels;      // augmented class ids, 0 = background
  std::vector<int> actionness;  // 1 iff labels[t] != 0
  std::vector<CoveredSpan> covered;
  int sequence_index = -1;  // provenance, used to look up teacher targets
  int start = 0;            // 1-based start frame in the source sequence

  int len() const { return static_cast<int>(labels.size()); }
};

enum class SamplerMode { kActionCentric, kSlidingWindow, kHybrid };

SamplerMode parse_sampler_mode(const std::string& name);  // ac | sw | ac_sw
std::string sampler_mode_name(SamplerMode mode);

struct SamplerConfig {
  int clip_len = 50;
  int context_window = 25;
  SamplerMode mode = SamplerMode::kActionCentric;
  int sw_stride = 50;
  bool normalize = true;
};

// The hybrid schedule alternates: action-centric on even epochs, sliding
// window on odd. Pure modes return themselves.
SamplerMode epoch_schedule(SamplerMode mode, int epoch);

// Translation normalization: subtracts the first frame's first-joint
// coordinates from every joint of every person of every frame. dims is the
// number of spatial coordinates per joint.
void normalize_clip_frames(Eigen::MatrixXd& frames, int dims);

// Cuts [start, start+len-1] (1-based) out of the sequence and derives labels,
// actionness and covered spans from the label track.
Clip extract_clip(const UntrimmedSequence& seq, const std::vector<int>& labels, int start,
                  int len, bool normalize, int dims, int sequence_index);

// Draws the clip start uniformly from the admissible positions of the
// action-centric interval [start-w, end+w] (clamped to the sequence). When
// the interval is shorter than the clip, the clip is centered on the instance
// midpoint and clamped to stay inside [1, T].
int action_centric_start(int num_frames, const ActionInstance& inst, int clip_len,
                         int context_window, Rng& rng);

Clip action_centric_sample(const UntrimmedSequence& seq, const std::vector<int>& labels,
                           int instance_index, const SamplerConfig& cfg, int dims,
                           Rng& rng, int sequence_index);

// Window starts 1, 1+stride, ...; a final window anchored at T-L+1 is
// appended when the strided ones do not already reach the last frame.
std::vector<int> sliding_window_starts(int num_frames, int clip_len, int stride);

std::vector<Clip> sliding_window_sample(const UntrimmedSequence& seq,
                                        const std::vector<int>& labels,
                                        const SamplerConfig& cfg, int dims,
                                        int sequence_index);

}  // namespace sact
