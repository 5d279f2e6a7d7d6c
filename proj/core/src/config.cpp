#include "sact/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sact/eval.hpp"
#include "sact/sampling.hpp"

namespace sact {

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text,
                                            const std::string& origin) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    std::string key, value;
    ss >> key >> value;
    if (value.empty()) {
      throw Error(origin + " line " + std::to_string(line_no) + ": expected \"key value\"");
    }
    std::string extra;
    if (ss >> extra && !extra.empty() && extra[0] != '#') {
      throw Error(origin + " line " + std::to_string(line_no) + ": unexpected token \"" +
                  extra + "\"");
    }
    cfg.set(key, value);
  }
  return cfg;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  if (values_.find(key) == values_.end()) order_.push_back(key);
  values_[key] = value;
}

bool KeyValueConfig::has(const std::string& key) const {
  return values_.find(key) != values_.end();
}

std::string KeyValueConfig::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw Error("missing config key \"" + key + "\"");
  return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

namespace {

int to_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const int v = std::stoi(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error("config key \"" + key + "\": \"" + value + "\" is not an integer");
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw Error("config key \"" + key + "\": \"" + value + "\" is not a number");
  }
}

}  // namespace

int KeyValueConfig::get_int(const std::string& key) const {
  return to_int(key, get_string(key));
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

double KeyValueConfig::get_double(const std::string& key) const {
  return to_double(key, get_string(key));
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw Error("config key \"" + key + "\": \"" + v + "\" is not a boolean (0/1/true/false)");
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  try {
    std::size_t pos = 0;
    const std::uint64_t out = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return out;
  } catch (const std::exception&) {
    throw Error("config key \"" + key + "\": \"" + v + "\" is not an unsigned integer");
  }
}

std::string KeyValueConfig::serialize() const {
  std::string out;
  for (const auto& key : order_) {
    out += key;
    out += ' ';
    out += values_.at(key);
    out += '\n';
  }
  return out;
}

namespace {

std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const std::vector<std::string>& run_config_keys() {
  static const std::vector<std::string> keys = {
      "seed",       "hidden",        "layers",       "clip_len",      "context_window",
      "sampler_mode", "sw_stride",   "normalize",    "alpha",         "beta",
      "lr",         "grad_clip",     "epochs",       "batch_size",    "teacher_epochs",
      "eval_m",     "instance_rule", "eval_mode",    "stitch_stride"};
  return keys;
}

}  // namespace

RunConfig RunConfig::from_config(const KeyValueConfig& kv) {
  const auto& known = run_config_keys();
  for (const auto& key : kv.keys()) {
    if (key.rfind("model.", 0) == 0) continue;  // checkpoint snapshot extras
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error("unknown config key \"" + key + "\"");
    }
  }
  RunConfig cfg;
  cfg.seed = kv.get_u64("seed", cfg.seed);
  cfg.hidden = kv.get_int("hidden", cfg.hidden);
  cfg.layers = kv.get_int("layers", cfg.layers);
  cfg.clip_len = kv.get_int("clip_len", cfg.clip_len);
  cfg.context_window = kv.get_int("context_window", cfg.context_window);
  cfg.sampler_mode = kv.get_string("sampler_mode", cfg.sampler_mode);
  cfg.sw_stride = kv.get_int("sw_stride", cfg.sw_stride);
  cfg.normalize = kv.get_bool("normalize", cfg.normalize);
  cfg.alpha = kv.get_double("alpha", cfg.alpha);
  cfg.beta = kv.get_double("beta", cfg.beta);
  cfg.lr = kv.get_double("lr", cfg.lr);
  cfg.grad_clip = kv.get_double("grad_clip", cfg.grad_clip);
  cfg.epochs = kv.get_int("epochs", cfg.epochs);
  cfg.batch_size = kv.get_int("batch_size", cfg.batch_size);
  cfg.teacher_epochs = kv.get_int("teacher_epochs", cfg.teacher_epochs);
  cfg.eval_m = kv.get_int("eval_m", cfg.eval_m);
  cfg.instance_rule = kv.get_string("instance_rule", cfg.instance_rule);
  cfg.eval_mode = kv.get_string("eval_mode", cfg.eval_mode);
  cfg.stitch_stride = kv.get_int("stitch_stride", cfg.stitch_stride);
  cfg.validate();
  return cfg;
}

KeyValueConfig RunConfig::to_config() const {
  KeyValueConfig kv;
  kv.set("seed", std::to_string(seed));
  kv.set("hidden", std::to_string(hidden));
  kv.set("layers", std::to_string(layers));
  kv.set("clip_len", std::to_string(clip_len));
  kv.set("context_window", std::to_string(context_window));
  kv.set("sampler_mode", sampler_mode);
  kv.set("sw_stride", std::to_string(sw_stride));
  kv.set("normalize", normalize ? "1" : "0");
  kv.set("alpha", format_double(alpha));
  kv.set("beta", format_double(beta));
  kv.set("lr", format_double(lr));
  kv.set("grad_clip", format_double(grad_clip));
  kv.set("epochs", std::to_string(epochs));
  kv.set("batch_size", std::to_string(batch_size));
  kv.set("teacher_epochs", std::to_string(teacher_epochs));
  kv.set("eval_m", std::to_string(eval_m));
  kv.set("instance_rule", instance_rule);
  kv.set("eval_mode", eval_mode);
  kv.set("stitch_stride", std::to_string(stitch_stride));
  return kv;
}

void RunConfig::validate() const {
  if (hidden < 1 || layers < 1) throw Error("hidden and layers must be >= 1");
  if (clip_len < 1) throw Error("clip_len must be >= 1");
  if (context_window < 0) throw Error("context_window must be >= 0");
  if (sw_stride < 1) throw Error("sw_stride must be >= 1");
  if (alpha < 0.0 || beta < 0.0) throw Error("alpha and beta must be >= 0");
  if (lr <= 0.0) throw Error("lr must be > 0");
  if (epochs < 1) throw Error("epochs must be >= 1");
  if (batch_size < 1) throw Error("batch_size must be >= 1");
  if (teacher_epochs < 1) throw Error("teacher_epochs must be >= 1");
  if (eval_m < 2) throw Error("eval_m must be >= 2");
  if (stitch_stride < 0) throw Error("stitch_stride must be >= 0");
  parse_sampler_mode(sampler_mode);  // validates the names
  parse_instance_rule(instance_rule);
  if (eval_mode != "stream" && eval_mode != "stitch") {
    throw Error("eval_mode must be stream or stitch");
  }
}

}  // namespace sact
