// SPDX-License-Identifier: Apache-2.0
//
// Captioned-trajectory datasets.
//
// On disk:
//   <root>/manifest.json            name, episode_count, action_count,
//                                   feature_dim, mode, seed
//   <root>/episodes/ep<NNNN>.jsonl  one step per line:
//                                   {"step","visual"|"image","caption","action"}
// Reals are written with 9 significant digits.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mmrl/dataset/validation.hpp"

namespace mmrl::dataset {

enum class DatasetMode { kFeatures, kImages };

std::string to_string(DatasetMode mode);

/// PNG path relative to the dataset root.
struct ImageRef {
  std::string path;
  bool operator==(const ImageRef&) const = default;
};

using VisualInput = std::variant<std::vector<double>, ImageRef>;

struct StepRecord {
  std::size_t step_index = 0;
  VisualInput visual;
  std::string caption;
  int action = 0;

  bool operator==(const StepRecord&) const = default;
};

struct EpisodeRecord {
  std::size_t episode_id = 0;
  std::vector<StepRecord> steps;

  bool operator==(const EpisodeRecord&) const = default;
};

struct DatasetManifest {
  std::string name;
  std::size_t episode_count = 0;
  int action_count = 0;
  std::size_t feature_dim = 0;
  DatasetMode mode = DatasetMode::kFeatures;
  std::optional<std::uint64_t> seed;

  bool operator==(const DatasetManifest&) const = default;
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<EpisodeRecord> episodes;  // ascending episode_id

  bool operator==(const Dataset&) const = default;
};

/// Loads and validates; throws ValidationError listing every violation.
Dataset load_dataset(const std::filesystem::path& root);

/// Throws ValidationError on invariant violations and RuntimeFailure when
/// the tree cannot be written. Output bytes depend only on the data.
void write_dataset(const Dataset& data, const std::filesystem::path& root);

/// Accepts a dataset directory or a caption-corpus JSONL file. The report
/// is empty exactly when the corresponding loader would succeed.
ValidationReport validate_schema(const std::filesystem::path& path);

/// In-memory invariant check used before writing.
ValidationReport validate_dataset(const Dataset& data);

std::string episode_file_name(std::size_t episode_id);

}  // namespace mmrl::dataset
