// SPDX-License-Identifier: Apache-2.0
#include "mmrl/fusion/vocabulary.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "mmrl/common/errors.hpp"
#include "mmrl/common/io.hpp"
#include "mmrl/textmetrics/metrics.hpp"

namespace mmrl::fusion {

Vocabulary::Vocabulary() {
  add("<pad>");
  add("<unk>");
}

void Vocabulary::add(std::string token) {
  ids_.emplace(token, static_cast<int>(tokens_.size()));
  tokens_.push_back(std::move(token));
}

Vocabulary Vocabulary::build(std::span<const std::string> captions, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& caption : captions) {
    for (auto& token : textmetrics::tokenize_for_metrics(caption)) ++counts[std::move(token)];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [token, count] : counts) {
    if (count >= min_count) kept.emplace_back(token, count);
  }
  // counts is already lexicographic, so a stable sort on frequency keeps ties ordered
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary vocab;
  vocab.min_count_ = min_count;
  for (auto& [token, count] : kept) vocab.add(std::move(token));
  return vocab;
}

int Vocabulary::id(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const { return ids_.count(std::string(token)) != 0; }

std::string Vocabulary::to_text() const {
  std::string out = "min_count\t" + std::to_string(min_count_) + "\n";
  for (std::size_t i = 0; i < tokens_.size(); ++i) out += tokens_[i] + "\t" + std::to_string(i) + "\n";
  return out;
}

Vocabulary Vocabulary::from_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line.rfind("min_count\t", 0) != 0) {
    throw ValidationError("vocabulary: missing min_count header");
  }
  Vocabulary vocab;
  vocab.min_count_ = std::stoull(line.substr(10));
  vocab.tokens_.clear();
  vocab.ids_.clear();
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ValidationError("vocabulary: malformed line \"" + line + "\"");
    if (std::stoull(line.substr(tab + 1)) != expected) throw ValidationError("vocabulary: ids must be contiguous");
    vocab.add(line.substr(0, tab));
    ++expected;
  }
  if (vocab.size() < 2 || vocab.tokens_[0] != "<pad>" || vocab.tokens_[1] != "<unk>") {
    throw ValidationError("vocabulary: ids 0 and 1 must be <pad> and <unk>");
  }
  return vocab;
}

void Vocabulary::save(const std::filesystem::path& path) const { write_file(path, to_text()); }

Vocabulary Vocabulary::load(const std::filesystem::path& path) { return from_text(read_file(path)); }

std::vector<int> encode_caption(const Vocabulary& vocab, std::string_view caption, std::size_t length) {
  std::vector<int> ids(length, Vocabulary::kPad);
  const auto tokens = textmetrics::tokenize_for_metrics(caption);
  for (std::size_t i = 0; i < std::min(length, tokens.size()); ++i) ids[i] = vocab.id(tokens[i]);
  return ids;
}

}  // namespace mmrl::fusion
