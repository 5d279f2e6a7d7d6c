#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sact/types.hpp"

namespace sact {

// Generator for desk-scale datasets. Each class is a distinct deterministic
// joint-trajectory pattern (per-joint sinusoid frequencies and phases keyed by
// the class) superimposed with i.i.d. Gaussian noise; background frames are
// noise around a rest pose. Output is a pure function of (config, seed).
struct SynthConfig {
  int num_classes = 5;
  int joints = 4;
  int dims = 3;
  int persons = 1;
  int train_sequences = 20;
  int test_sequences = 5;
  int frames_per_sequence = 600;
  int instances_per_sequence = 4;
  int min_instance_len = 60;   // frame counts, inclusive
  int max_instance_len = 140;
  double amplitude = 1.0;
  double noise_sigma = 0.05;
};

struct SynthDataset {
  std::vector<UntrimmedSequence> train;
  std::vector<UntrimmedSequence> test;
  DatasetManifest manifest;  // paths empty until written to disk
};

SynthDataset synth_generate(const SynthConfig& cfg, std::uint64_t seed);

// Writes seq_###.skel/.lbl plus manifest.txt under out_dir and returns the
// manifest with resolved paths.
DatasetManifest write_dataset(const SynthDataset& ds, const std::string& out_dir);

// Human-readable instance statistics (count, length histogram, per-class
// totals) for the synth command.
std::string dataset_stats(const std::vector<UntrimmedSequence>& train,
                          const std::vector<UntrimmedSequence>& test);

}  // namespace sact
