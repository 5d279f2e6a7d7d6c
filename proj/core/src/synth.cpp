#include "sact/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>

#include "sact/dataset_io.hpp"
#include "sact/rng.hpp"

namespace sact {

namespace {

constexpr std::uint64_t kPatternStream = 0x5ac7;
constexpr std::uint64_t kSequenceStream = 0xda7a;

struct ClassPattern {
  // per (joint, dim): frequency in cycles/frame and phase
  std::vector<double> freq;
  std::vector<double> phase;
};

// The pattern parameters are drawn once per class from a seed-derived stream,
// so every instance of a class follows the same trajectory family across all
// sequences of a dataset.
std::vector<ClassPattern> make_patterns(const SynthConfig& cfg, std::uint64_t seed) {
  std::vector<ClassPattern> patterns;
  patterns.reserve(static_cast<std::size_t>(cfg.num_classes));
  const int jd = cfg.joints * cfg.dims;
  for (int c = 1; c <= cfg.num_classes; ++c) {
    Rng rng(mix_seed(seed, kPatternStream + static_cast<std::uint64_t>(c)));
    ClassPattern p;
    p.freq.resize(static_cast<std::size_t>(jd));
    p.phase.resize(static_cast<std::size_t>(jd));
    for (int k = 0; k < jd; ++k) {
      p.freq[static_cast<std::size_t>(k)] = rng.uniform(0.02, 0.12);
      p.phase[static_cast<std::size_t>(k)] = rng.uniform(0.0, 2.0 * M_PI);
    }
    patterns.push_back(std::move(p));
  }
  return patterns;
}

double rest_coord(int joint, int dim) {
  return 0.35 * joint + 0.1 * dim;
}

UntrimmedSequence make_sequence(const SynthConfig& cfg,
                                const std::vector<ClassPattern>& patterns, Rng& rng) {
  const int T = cfg.frames_per_sequence;
  const int k = cfg.instances_per_sequence;

  // Lengths first, then distribute the slack into k+1 gaps; one frame of
  // background between consecutive instances is mandatory.
  std::vector<int> lengths(static_cast<std::size_t>(k));
  for (auto& len : lengths) {
    len = static_cast<int>(rng.uniform_int(cfg.min_instance_len, cfg.max_instance_len));
  }
  long needed = k > 0 ? k - 1 : 0;
  for (int len : lengths) needed += len;
  if (needed > T) {
    throw Error("cannot place " + std::to_string(k) + " instances totalling " +
                std::to_string(needed) + " frames in a " + std::to_string(T) +
                "-frame sequence");
  }
  const long slack = T - needed;
  std::vector<long> cuts(static_cast<std::size_t>(k));
  for (auto& c : cuts) c = rng.uniform_int(0, slack);
  std::sort(cuts.begin(), cuts.end());
  std::vector<long> gaps(static_cast<std::size_t>(k) + 1);
  long prev = 0;
  for (int i = 0; i < k; ++i) {
    gaps[static_cast<std::size_t>(i)] = cuts[static_cast<std::size_t>(i)] - prev;
    prev = cuts[static_cast<std::size_t>(i)];
  }
  gaps[static_cast<std::size_t>(k)] = slack - prev;

  UntrimmedSequence seq;
  int cursor = 1;
  for (int i = 0; i < k; ++i) {
    cursor += static_cast<int>(gaps[static_cast<std::size_t>(i)]);
    if (i > 0) cursor += 1;  // mandatory separator
    ActionInstance inst;
    inst.start = cursor;
    inst.end = cursor + lengths[static_cast<std::size_t>(i)] - 1;
    inst.class_id = static_cast<int>(rng.uniform_int(1, cfg.num_classes));
    seq.instances.push_back(inst);
    cursor = inst.end + 1;
  }

  const int dim = cfg.joints * cfg.dims * cfg.persons;
  const int jd = cfg.joints * cfg.dims;
  seq.frames = Eigen::MatrixXd::Zero(T, dim);

  std::vector<int> label(static_cast<std::size_t>(T) + 1, 0);
  std::vector<int> local(static_cast<std::size_t>(T) + 1, 0);
  for (const auto& inst : seq.instances) {
    for (int t = inst.start; t <= inst.end; ++t) {
      label[static_cast<std::size_t>(t)] = inst.class_id;
      local[static_cast<std::size_t>(t)] = t - inst.start;
    }
  }

  // Only person 0 is animated; remaining person slots stay zero-filled.
  for (int t = 1; t <= T; ++t) {
    const int cls = label[static_cast<std::size_t>(t)];
    for (int kidx = 0; kidx < jd; ++kidx) {
      const int joint = kidx / cfg.dims;
      const int d = kidx % cfg.dims;
      double v = rest_coord(joint, d);
      if (cls > 0) {
        const auto& p = patterns[static_cast<std::size_t>(cls - 1)];
        v += cfg.amplitude *
             std::sin(2.0 * M_PI * p.freq[static_cast<std::size_t>(kidx)] *
                          local[static_cast<std::size_t>(t)] +
                      p.phase[static_cast<std::size_t>(kidx)]);
      }
      v += cfg.noise_sigma * rng.normal();
      seq.frames(t - 1, kidx) = v;
    }
  }
  return seq;
}

}  // namespace

SynthDataset synth_generate(const SynthConfig& cfg, std::uint64_t seed) {
  if (cfg.num_classes < 1 || cfg.joints < 1 || cfg.dims < 1 || cfg.persons < 1) {
    throw Error("synth config: classes/joints/dims/persons must be >= 1");
  }
  if (cfg.min_instance_len < 2 || cfg.max_instance_len < cfg.min_instance_len) {
    throw Error("synth config: instance length range invalid (min >= 2 required)");
  }

  const auto patterns = make_patterns(cfg, seed);
  SynthDataset ds;
  const int total = cfg.train_sequences + cfg.test_sequences;
  for (int i = 0; i < total; ++i) {
    Rng rng(mix_seed(seed, kSequenceStream + static_cast<std::uint64_t>(i)));
    auto seq = make_sequence(cfg, patterns, rng);
    seq.validate(cfg.num_classes);
    (i < cfg.train_sequences ? ds.train : ds.test).push_back(std::move(seq));
  }
  ds.manifest.num_classes = cfg.num_classes;
  ds.manifest.joints = cfg.joints;
  ds.manifest.dims = cfg.dims;
  ds.manifest.persons = cfg.persons;
  return ds;
}

DatasetManifest write_dataset(const SynthDataset& ds, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir)) {
    throw Error("cannot create output directory " + out_dir);
  }

  DatasetManifest manifest = ds.manifest;
  char name[64];
  int index = 0;
  auto write_split = [&](const std::vector<UntrimmedSequence>& seqs,
                         std::vector<SequencePaths>& out) {
    for (const auto& seq : seqs) {
      std::snprintf(name, sizeof(name), "seq_%03d", index++);
      SequencePaths sp;
      sp.skeleton = (fs::path(out_dir) / (std::string(name) + ".skel")).string();
      sp.labels = (fs::path(out_dir) / (std::string(name) + ".lbl")).string();
      save_sequence(seq, sp.skeleton, sp.labels);
      out.push_back(sp);
    }
  };
  write_split(ds.train, manifest.train);
  write_split(ds.test, manifest.test);
  save_manifest(manifest, (fs::path(out_dir) / "manifest.txt").string());
  return manifest;
}

std::string dataset_stats(const std::vector<UntrimmedSequence>& train,
                          const std::vector<UntrimmedSequence>& test) {
  long count = 0;
  long len_sum = 0;
  int len_min = 0;
  int len_max = 0;
  std::map<int, long> hist;  // bucketed by 20 frames
  std::map<int, long> per_class;
  auto tally = [&](const std::vector<UntrimmedSequence>& seqs) {
    for (const auto& seq : seqs) {
      for (const auto& inst : seq.instances) {
        const int len = inst.frame_count();
        if (count == 0 || len < len_min) len_min = len;
        if (count == 0 || len > len_max) len_max = len;
        ++count;
        len_sum += len;
        ++hist[len / 20 * 20];
        ++per_class[inst.class_id];
      }
    }
  };
  tally(train);
  tally(test);

  std::ostringstream out;
  out << "sequences: " << train.size() << " train, " << test.size() << " test\n";
  out << "instances: " << count;
  if (count > 0) {
    out << " (len min " << len_min << ", mean "
        << static_cast<double>(len_sum) / static_cast<double>(count) << ", max "
        << len_max << ")";
  }
  out << "\ninstance length histogram:\n";
  for (const auto& [bucket, n] : hist) {
    out << "  [" << bucket << "," << bucket + 19 << "]: " << n << '\n';
  }
  out << "instances per class:\n";
  for (const auto& [cls, n] : per_class) {
    out << "  class " << cls << ": " << n << '\n';
  }
  return out.str();
}

}  // namespace sact
