// SPDX-License-Identifier: Apache-2.0
//
// Caption-quality metrics: corpus BLEU, ROUGE-N, ROUGE-L and METEOR over
// lowercase token sequences. All scores are in [0, 1].
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mmrl::textmetrics {

using TokenSequence = std::vector<std::string>;

/// Lowercases, turns every character other than a letter, digit or
/// apostrophe into a separator, and splits on separator runs. Bytes >= 0x80
/// count as letters so UTF-8 words stay intact.
TokenSequence tokenize_for_metrics(std::string_view text);

struct CaptionPair {
  TokenSequence candidate;
  std::vector<TokenSequence> references;
};

struct BleuOptions {
  int max_n = 4;
  /// Replace a zero aggregated precision with 1 / (2 * candidate n-gram count).
  bool smoothing = false;
};

/// Corpus-level BLEU: clipped n-gram counts summed over the corpus, geometric
/// mean of p_1..p_max_n, brevity penalty against the closest-length
/// reference of each pair (ties go to the shorter reference).
double bleu_corpus(std::span<const CaptionPair> pairs, const BleuOptions& options = {});

/// ROUGE-N F1 against the best-scoring reference.
double rouge_n(const TokenSequence& candidate, std::span<const TokenSequence> references, int n);

/// ROUGE-L F1 (longest common subsequence) against the best reference.
double rouge_l(const TokenSequence& candidate, std::span<const TokenSequence> references);

/// Exact-match METEOR: greedy left-to-right unigram alignment,
/// F_mean = 10PR/(R+9P), fragmentation penalty 0.5 * (chunks/m)^3.
double meteor(const TokenSequence& candidate, std::span<const TokenSequence> references);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

}  // namespace mmrl::textmetrics
