#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sact/types.hpp"

namespace sact {

// Flat "key value" text config: one entry per line, '#' comments. Entries
// keep their insertion order so serialized snapshots are diffable and
// deterministic.
class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_string(const std::string& text, const std::string& origin);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;  // throws when absent
  std::string get_string(const std::string& key, const std::string& fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;

  const std::vector<std::string>& keys() const { return order_; }
  std::string serialize() const;

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> order_;
};

// Everything a training or evaluation run needs. All randomness flows from
// the single seed; there is no wall-clock seeding.
struct RunConfig {
  std::uint64_t seed = 1;
  // model
  int hidden = 100;
  int layers = 3;
  // sampler
  int clip_len = 50;
  int context_window = 25;
  std::string sampler_mode = "ac";  // ac | sw | ac_sw
  int sw_stride = 50;
  bool normalize = true;
  // loss
  double alpha = 1.0;
  double beta = 1.0;
  // optimizer
  double lr = 1e-3;
  double grad_clip = 5.0;
  int epochs = 30;
  int batch_size = 8;
  // teacher
  int teacher_epochs = 15;
  // evaluation
  int eval_m = 10;
  std::string instance_rule = "last_frame";  // last_frame | interval_mean
  std::string eval_mode = "stream";          // stream | stitch
  int stitch_stride = 0;                     // 0 means clip_len

  static RunConfig from_config(const KeyValueConfig& kv);  // rejects unknown keys
  KeyValueConfig to_config() const;
  void validate() const;
};

}  // namespace sact
