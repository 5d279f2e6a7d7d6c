#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sact/losses.hpp"
#include "sact/model.hpp"

namespace sact {

// Versioned binary container: the magic "SACTCKP1", a table of named arrays
// (row-major 64-bit little-endian floats), and a text snapshot of the config
// that produced it. Used for model checkpoints and teacher representation
// stores alike.
struct NamedArray {
  std::string name;
  std::int64_t rows = 0;
  std::int64_t cols = 0;
  std::vector<double> data;  // row-major
};

struct Checkpoint {
  std::vector<NamedArray> arrays;
  std::string config_text;

  const NamedArray& find(const std::string& name) const;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(const std::string& bytes, const std::string& origin);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

// Model <-> container. The config snapshot must carry model.input_dim,
// model.hidden, model.layers and model.num_classes; params_to_checkpoint
// appends them to the supplied snapshot text.
Checkpoint params_to_checkpoint(const ModelParams& params, const std::string& config_text);
ModelParams params_from_checkpoint(const Checkpoint& ckpt);

// Representation store <-> container; arrays are named rep/<seq>/<inst>.
Checkpoint repstore_to_checkpoint(const TeacherRepStore& store);
TeacherRepStore repstore_from_checkpoint(const Checkpoint& ckpt);

std::uint64_t fnv1a_hash(const std::string& bytes);

}  // namespace sact
