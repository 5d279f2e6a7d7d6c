#pragma once

#include <string>

#include "sact/types.hpp"

namespace sact {

// Skeleton files are plain text, one frame per line, whitespace-separated
// decimal floats, exactly joints*dims*persons values per line. Label files
// are text lines "class_id,start,end" with 1-based inclusive frame indices.
UntrimmedSequence load_sequence(const std::string& skeleton_path,
                                const std::string& label_path,
                                const DatasetManifest& manifest);

void save_sequence(const UntrimmedSequence& seq, const std::string& skeleton_path,
                   const std::string& label_path);

// Manifest is a key-value text file, one "key value..." entry per line:
//   classes N / joints N / dims N / persons N
//   train <skeleton file> <label file>   (repeated)
//   test  <skeleton file> <label file>   (repeated)
// Relative paths are resolved against the manifest's directory on load.
DatasetManifest load_manifest(const std::string& path);

void save_manifest(const DatasetManifest& manifest, const std::string& path);

}  // namespace sact
