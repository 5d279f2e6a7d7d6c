#include "sact/dataset_io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sact {

namespace {

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

std::vector<double> parse_frame_line(const std::string& line, int expected,
                                     const std::string& path, int line_no) {
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(expected));
  const char* p = line.c_str();
  char* end = nullptr;
  while (true) {
    const double v = std::strtod(p, &end);
    if (end == p) break;
    values.push_back(v);
    p = end;
  }
  // anything left besides whitespace means a malformed token
  while (*p == ' ' || *p == '\t' || *p == '\r') ++p;
  if (*p != '\0' || static_cast<int>(values.size()) != expected) {
    throw Error(path + " line " + std::to_string(line_no) + ": expected " +
                std::to_string(expected) + " values, got " +
                std::to_string(values.size()) +
                (*p != '\0' ? " (trailing garbage)" : ""));
  }
  return values;
}

}  // namespace

UntrimmedSequence load_sequence(const std::string& skeleton_path,
                                const std::string& label_path,
                                const DatasetManifest& manifest) {
  std::ifstream skel(skeleton_path);
  if (!skel) throw Error("cannot open skeleton file " + skeleton_path);

  const int dim = manifest.frame_dim();
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(skel, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    rows.push_back(parse_frame_line(line, dim, skeleton_path, line_no));
  }

  UntrimmedSequence seq;
  seq.frames.resize(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < dim; ++c) {
      seq.frames(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<std::size_t>(c)];
    }
  }

  std::ifstream lbl(label_path);
  if (!lbl) throw Error("cannot open label file " + label_path);
  line_no = 0;
  while (std::getline(lbl, line)) {
    ++line_no;
    if (is_blank(line)) continue;
    ActionInstance inst;
    char extra = '\0';
    const int n = std::sscanf(line.c_str(), "%d,%d,%d %c", &inst.class_id, &inst.start,
                              &inst.end, &extra);
    if (n != 3) {
      throw Error(label_path + " line " + std::to_string(line_no) +
                  ": expected \"class_id,start,end\"");
    }
    if (inst.end > seq.num_frames() || inst.start < 1) {
      throw Error(label_path + " line " + std::to_string(line_no) + ": frame range [" +
                  std::to_string(inst.start) + "," + std::to_string(inst.end) +
                  "] outside sequence of " + std::to_string(seq.num_frames()) +
                  " frames");
    }
    seq.instances.push_back(inst);
  }

  std::sort(seq.instances.begin(), seq.instances.end(),
            [](const ActionInstance& a, const ActionInstance& b) { return a.start < b.start; });
  seq.validate(manifest.num_classes);
  return seq;
}

void save_sequence(const UntrimmedSequence& seq, const std::string& skeleton_path,
                   const std::string& label_path) {
  std::ofstream skel(skeleton_path);
  if (!skel) throw Error("cannot write skeleton file " + skeleton_path);
  char buf[32];
  for (Eigen::Index r = 0; r < seq.frames.rows(); ++r) {
    for (Eigen::Index c = 0; c < seq.frames.cols(); ++c) {
      // %.17g round-trips doubles exactly
      std::snprintf(buf, sizeof(buf), "%.17g", seq.frames(r, c));
      if (c > 0) skel << ' ';
      skel << buf;
    }
    skel << '\n';
  }

  std::ofstream lbl(label_path);
  if (!lbl) throw Error("cannot write label file " + label_path);
  for (const auto& inst : seq.instances) {
    lbl << inst.class_id << ',' << inst.start << ',' << inst.end << '\n';
  }
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path);
  const auto base = std::filesystem::path(path).parent_path();

  DatasetManifest m;
  bool have_classes = false;
  bool have_joints = false;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (is_blank(line) || line[line.find_first_not_of(" \t")] == '#') continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    const auto where = path + " line " + std::to_string(line_no);
    if (key == "classes") {
      ss >> m.num_classes;
      have_classes = true;
    } else if (key == "joints") {
      ss >> m.joints;
      have_joints = true;
    } else if (key == "dims") {
      ss >> m.dims;
    } else if (key == "persons") {
      ss >> m.persons;
    } else if (key == "train" || key == "test") {
      SequencePaths sp;
      ss >> sp.skeleton >> sp.labels;
      if (sp.skeleton.empty() || sp.labels.empty()) {
        throw Error(where + ": expected two file names after \"" + key + "\"");
      }
      sp.skeleton = (base / sp.skeleton).string();
      sp.labels = (base / sp.labels).string();
      (key == "train" ? m.train : m.test).push_back(sp);
    } else {
      throw Error(where + ": unknown manifest key \"" + key + "\"");
    }
    if (ss.fail()) throw Error(where + ": malformed value for \"" + key + "\"");
  }
  if (!have_classes || !have_joints) {
    throw Error(path + ": manifest must declare classes and joints");
  }
  if (m.num_classes < 1) throw Error(path + ": classes must be >= 1");
  if (m.joints < 1 || m.dims < 1 || m.persons < 1) {
    throw Error(path + ": joints/dims/persons must be >= 1");
  }
  return m;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest " + path);
  out << "classes " << manifest.num_classes << '\n'
      << "joints " << manifest.joints << '\n'
      << "dims " << manifest.dims << '\n'
      << "persons " << manifest.persons << '\n';
  auto emit = [&out](const char* key, const std::vector<SequencePaths>& list) {
    for (const auto& sp : list) {
      out << key << ' ' << std::filesystem::path(sp.skeleton).filename().string() << ' '
          << std::filesystem::path(sp.labels).filename().string() << '\n';
    }
  };
  emit("train", manifest.train);
  emit("test", manifest.test);
}

}  // namespace sact
