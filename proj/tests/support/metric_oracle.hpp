// SPDX-License-Identifier: Apache-2.0
//
// Brute-force reimplementations of the caption metrics, written from the
// definitions without sharing code with the library: n-grams are counted by
// linear scans, LCS by enumerating subsequences, METEOR alignment by pairing
// the j-th occurrence of a word in the candidate with its j-th occurrence in
// the reference.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mmrl::testing {

using Words = std::vector<std::string>;

struct OraclePair {
  Words candidate;
  std::vector<Words> references;
};

double oracle_bleu(const std::vector<OraclePair>& corpus, int max_n, bool smoothing = false);
double oracle_rouge_n(const Words& candidate, const std::vector<Words>& references, int n);
double oracle_rouge_l(const Words& candidate, const std::vector<Words>& references);
double oracle_meteor(const Words& candidate, const std::vector<Words>& references);

/// Random corpus: `pairs` pairs over a vocabulary of `vocab` words, sentence
/// lengths in [min_len, max_len], 1-3 references per pair.
std::vector<OraclePair> random_corpus(std::uint64_t seed, std::size_t pairs, std::size_t vocab, std::size_t min_len,
                                      std::size_t max_len);

}  // namespace mmrl::testing
