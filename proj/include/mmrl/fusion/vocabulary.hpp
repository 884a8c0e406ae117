// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mmrl::fusion {

/// Token-to-id map. Id 0 is PAD and id 1 is UNK; remaining ids follow
/// descending corpus frequency with lexicographic tie-breaks.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocabulary();

  /// Tokenizes with the caption-metric tokenizer and keeps tokens seen at
  /// least min_count times.
  static Vocabulary build(std::span<const std::string> captions, std::size_t min_count);

  /// Id for a token; UNK when absent.
  int id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }
  std::size_t min_count() const { return min_count_; }

  /// "min_count<TAB>n" header, then one "token<TAB>id" line per id.
  std::string to_text() const;
  static Vocabulary from_text(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& other) const {
    return min_count_ == other.min_count_ && tokens_ == other.tokens_;
  }

 private:
  void add(std::string token);

  std::size_t min_count_ = 1;
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

/// Tokenize, map to ids (UNK fallback), truncate or right-pad with PAD to
/// exactly `length` ids.
std::vector<int> encode_caption(const Vocabulary& vocab, std::string_view caption, std::size_t length);

}  // namespace mmrl::fusion
