#include "sact/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "sact/config.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint serialization assumes a little-endian host");

namespace sact {

namespace {

constexpr char kMagic[8] = {'S', 'A', 'C', 'T', 'C', 'K', 'P', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(v));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.append(reinterpret_cast<const char*>(&v), sizeof(v));
}

struct Reader {
  const std::string& bytes;
  const std::string& origin;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > bytes.size()) {
      throw Error(origin + ": truncated checkpoint");
    }
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, bytes.data() + pos, 4);
    pos += 4;
    return v;
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v;
    std::memcpy(&v, bytes.data() + pos, 2);
    pos += 2;
    return v;
  }
  std::string raw(std::size_t n) {
    need(n);
    std::string s = bytes.substr(pos, n);
    pos += n;
    return s;
  }
};

}  // namespace

const NamedArray& Checkpoint::find(const std::string& name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return a;
  }
  throw Error("checkpoint has no array named " + name);
}

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  std::string out(kMagic, sizeof(kMagic));
  put_u32(out, static_cast<std::uint32_t>(ckpt.arrays.size()));
  for (const auto& a : ckpt.arrays) {
    if (a.name.size() > 0xffff) throw Error("array name too long");
    if (static_cast<std::int64_t>(a.data.size()) != a.rows * a.cols) {
      throw Error("array " + a.name + " shape does not match its data");
    }
    put_u16(out, static_cast<std::uint16_t>(a.name.size()));
    out += a.name;
    put_u32(out, static_cast<std::uint32_t>(a.rows));
    put_u32(out, static_cast<std::uint32_t>(a.cols));
    out.append(reinterpret_cast<const char*>(a.data.data()), a.data.size() * sizeof(double));
  }
  put_u32(out, static_cast<std::uint32_t>(ckpt.config_text.size()));
  out += ckpt.config_text;
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes, const std::string& origin) {
  if (bytes.size() < sizeof(kMagic) ||
      std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(origin + ": not a checkpoint file (bad magic)");
  }
  Reader r{bytes, origin, sizeof(kMagic)};
  Checkpoint ckpt;
  const std::uint32_t count = r.u32();
  ckpt.arrays.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    NamedArray a;
    a.name = r.raw(r.u16());
    a.rows = r.u32();
    a.cols = r.u32();
    const std::size_t n = static_cast<std::size_t>(a.rows) * static_cast<std::size_t>(a.cols);
    const std::string raw = r.raw(n * sizeof(double));
    a.data.resize(n);
    std::memcpy(a.data.data(), raw.data(), raw.size());
    ckpt.arrays.push_back(std::move(a));
  }
  ckpt.config_text = r.raw(r.u32());
  if (r.pos != bytes.size()) {
    throw Error(origin + ": trailing bytes after checkpoint payload");
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint " + path);
  const std::string bytes = serialize_checkpoint(ckpt);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_checkpoint(buf.str(), path);
}

Checkpoint params_to_checkpoint(const ModelParams& params, const std::string& config_text) {
  Checkpoint ckpt;
  for (const auto& ref : params.blocks()) {
    NamedArray a;
    a.name = ref.name;
    a.rows = ref.mat->rows();
    a.cols = ref.mat->cols();
    a.data.reserve(static_cast<std::size_t>(a.rows * a.cols));
    for (Eigen::Index r = 0; r < ref.mat->rows(); ++r) {
      for (Eigen::Index c = 0; c < ref.mat->cols(); ++c) a.data.push_back((*ref.mat)(r, c));
    }
    ckpt.arrays.push_back(std::move(a));
  }
  KeyValueConfig snapshot = KeyValueConfig::parse_string(config_text, "config snapshot");
  snapshot.set("model.input_dim", std::to_string(params.cfg.input_dim));
  snapshot.set("model.hidden", std::to_string(params.cfg.hidden));
  snapshot.set("model.layers", std::to_string(params.cfg.layers));
  snapshot.set("model.num_classes", std::to_string(params.cfg.num_classes));
  ckpt.config_text = snapshot.serialize();
  return ckpt;
}

ModelParams params_from_checkpoint(const Checkpoint& ckpt) {
  const KeyValueConfig snapshot =
      KeyValueConfig::parse_string(ckpt.config_text, "config snapshot");
  ModelConfig cfg;
  cfg.input_dim = snapshot.get_int("model.input_dim");
  cfg.hidden = snapshot.get_int("model.hidden");
  cfg.layers = snapshot.get_int("model.layers");
  cfg.num_classes = snapshot.get_int("model.num_classes");

  ModelParams params = ModelParams::zeros(cfg);
  for (auto& ref : params.blocks()) {
    const NamedArray& a = ckpt.find(ref.name);
    if (a.rows != ref.mat->rows() || a.cols != ref.mat->cols()) {
      throw Error("array " + ref.name + " has shape " + std::to_string(a.rows) + "x" +
                  std::to_string(a.cols) + ", expected " + std::to_string(ref.mat->rows()) +
                  "x" + std::to_string(ref.mat->cols()));
    }
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < ref.mat->rows(); ++r) {
      for (Eigen::Index c = 0; c < ref.mat->cols(); ++c) (*ref.mat)(r, c) = a.data[k++];
    }
  }
  return params;
}

Checkpoint repstore_to_checkpoint(const TeacherRepStore& store) {
  Checkpoint ckpt;
  for (const auto& [key, rep] : store.entries()) {
    NamedArray a;
    a.name = "rep/" + std::to_string(key.first) + "/" + std::to_string(key.second);
    a.rows = rep.size();
    a.cols = 1;
    a.data.assign(rep.data(), rep.data() + rep.size());
    ckpt.arrays.push_back(std::move(a));
  }
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(store.teacher_hash));
  KeyValueConfig meta;
  meta.set("store.kind", "teacher_reps");
  meta.set("store.teacher_hash", hash);
  ckpt.config_text = meta.serialize();
  return ckpt;
}

TeacherRepStore repstore_from_checkpoint(const Checkpoint& ckpt) {
  const KeyValueConfig meta = KeyValueConfig::parse_string(ckpt.config_text, "rep store");
  if (meta.get_string("store.kind", "") != "teacher_reps") {
    throw Error("checkpoint does not contain a teacher representation store");
  }
  TeacherRepStore store;
  store.teacher_hash =
      std::stoull(meta.get_string("store.teacher_hash"), nullptr, 16);
  for (const auto& a : ckpt.arrays) {
    int seq = 0;
    int inst = 0;
    if (std::sscanf(a.name.c_str(), "rep/%d/%d", &seq, &inst) != 2 || a.cols != 1) {
      throw Error("unexpected array " + a.name + " in representation store");
    }
    Eigen::VectorXd rep(a.rows);
    for (Eigen::Index i = 0; i < rep.size(); ++i) rep(i) = a.data[static_cast<std::size_t>(i)];
    store.insert(seq, inst, std::move(rep));
  }
  return store;
}

std::uint64_t fnv1a_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace sact
