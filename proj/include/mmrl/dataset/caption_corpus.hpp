// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mmrl/dataset/validation.hpp"

namespace mmrl::dataset {

/// One JSONL line of a caption corpus: {"id", "candidate", "references"}.
/// The id is kept in its JSON text form (integer or string).
struct CaptionRecord {
  std::string id;
  std::string candidate;
  std::vector<std::string> references;

  bool operator==(const CaptionRecord&) const = default;
};

/// Throws ValidationError naming file, line and field on the first bad line.
std::vector<CaptionRecord> read_caption_corpus(const std::filesystem::path& path);

void write_caption_corpus(const std::filesystem::path& path, const std::vector<CaptionRecord>& records);

/// Appends every schema violation in the corpus file to report.
void validate_caption_corpus(const std::filesystem::path& path, ValidationReport& report);

}  // namespace mmrl::dataset
