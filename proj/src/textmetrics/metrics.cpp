// SPDX-License-Identifier: Apache-2.0
#include "mmrl/textmetrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <map>

#include "mmrl/common/errors.hpp"

namespace mmrl::textmetrics {
namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

bool is_token_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '\'' || c >= 0x80;
}

NgramCounts count_ngrams(const TokenSequence& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

std::size_t clipped_overlap(const NgramCounts& candidate, const NgramCounts& reference) {
  std::size_t overlap = 0;
  for (const auto& [gram, count] : candidate) {
    auto it = reference.find(gram);
    if (it != reference.end()) overlap += std::min(count, it->second);
  }
  return overlap;
}

double f1(double overlap, double candidate_total, double reference_total) {
  if (overlap <= 0.0 || candidate_total <= 0.0 || reference_total <= 0.0) return 0.0;
  const double p = overlap / candidate_total;
  const double r = overlap / reference_total;
  return 2.0 * p * r / (p + r);
}

double meteor_single(const TokenSequence& candidate, const TokenSequence& reference) {
  std::vector<bool> used(reference.size(), false);
  // (candidate index, reference index) in candidate order
  std::vector<std::pair<std::size_t, std::size_t>> alignment;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    for (std::size_t j = 0; j < reference.size(); ++j) {
      if (!used[j] && reference[j] == candidate[i]) {
        used[j] = true;
        alignment.emplace_back(i, j);
        break;
      }
    }
  }
  const std::size_t m = alignment.size();
  if (m == 0) return 0.0;

  std::size_t chunks = 1;
  for (std::size_t k = 1; k < m; ++k) {
    const bool contiguous = alignment[k].first == alignment[k - 1].first + 1 &&
                            alignment[k].second == alignment[k - 1].second + 1;
    if (!contiguous) ++chunks;
  }
  const double p = static_cast<double>(m) / static_cast<double>(candidate.size());
  const double r = static_cast<double>(m) / static_cast<double>(reference.size());
  const double f_mean = 10.0 * p * r / (r + 9.0 * p);
  const double frag = static_cast<double>(chunks) / static_cast<double>(m);
  const double penalty = 0.5 * frag * frag * frag;
  return f_mean * (1.0 - penalty);
}

}  // namespace

TokenSequence tokenize_for_metrics(std::string_view text) {
  TokenSequence tokens;
  std::string current;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (is_token_char(c)) {
      current.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

double bleu_corpus(std::span<const CaptionPair> pairs, const BleuOptions& options) {
  if (pairs.empty()) throw ValidationError("bleu_corpus: empty pair list");
  if (options.max_n < 1) throw ValidationError("bleu_corpus: max_n must be >= 1");

  const auto max_n = static_cast<std::size_t>(options.max_n);
  std::vector<double> matched(max_n, 0.0);
  std::vector<double> total(max_n, 0.0);
  double candidate_length = 0.0;
  double reference_length = 0.0;

  for (const auto& pair : pairs) {
    if (pair.references.empty()) throw ValidationError("bleu_corpus: candidate without references");
    const auto c = pair.candidate.size();
    candidate_length += static_cast<double>(c);

    std::size_t best_ref = pair.references.front().size();
    for (const auto& ref : pair.references) {
      const auto d = [c](std::size_t len) { return len > c ? len - c : c - len; };
      if (d(ref.size()) < d(best_ref) || (d(ref.size()) == d(best_ref) && ref.size() < best_ref)) {
        best_ref = ref.size();
      }
    }
    reference_length += static_cast<double>(best_ref);

    for (std::size_t n = 1; n <= max_n; ++n) {
      const NgramCounts cand = count_ngrams(pair.candidate, n);
      NgramCounts max_ref;
      for (const auto& ref : pair.references) {
        for (const auto& [gram, count] : count_ngrams(ref, n)) {
          auto& slot = max_ref[gram];
          slot = std::max(slot, count);
        }
      }
      matched[n - 1] += static_cast<double>(clipped_overlap(cand, max_ref));
      if (c >= n) total[n - 1] += static_cast<double>(c - n + 1);
    }
  }

  if (candidate_length == 0.0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < max_n; ++n) {
    if (total[n] == 0.0) return 0.0;
    double precision = matched[n] / total[n];
    if (precision == 0.0) {
      if (!options.smoothing) return 0.0;
      precision = 1.0 / (2.0 * total[n]);
    }
    log_sum += std::log(precision);
  }
  const double brevity = std::min(1.0, std::exp(1.0 - reference_length / candidate_length));
  return brevity * std::exp(log_sum / static_cast<double>(max_n));
}

double rouge_n(const TokenSequence& candidate, std::span<const TokenSequence> references, int n) {
  if (n < 1) throw ValidationError("rouge_n: n must be >= 1");
  const auto order = static_cast<std::size_t>(n);
  const NgramCounts cand = count_ngrams(candidate, order);
  const double cand_total = candidate.size() >= order ? static_cast<double>(candidate.size() - order + 1) : 0.0;
  double best = 0.0;
  for (const auto& ref : references) {
    const double ref_total = ref.size() >= order ? static_cast<double>(ref.size() - order + 1) : 0.0;
    const auto overlap = clipped_overlap(cand, count_ngrams(ref, order));
    best = std::max(best, f1(static_cast<double>(overlap), cand_total, ref_total));
  }
  return best;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(const TokenSequence& candidate, std::span<const TokenSequence> references) {
  double best = 0.0;
  for (const auto& ref : references) {
    const auto lcs = lcs_length(candidate, ref);
    best = std::max(best, f1(static_cast<double>(lcs), static_cast<double>(candidate.size()),
                             static_cast<double>(ref.size())));
  }
  return best;
}

double meteor(const TokenSequence& candidate, std::span<const TokenSequence> references) {
  double best = 0.0;
  for (const auto& ref : references) best = std::max(best, meteor_single(candidate, ref));
  return best;
}

}  // namespace mmrl::textmetrics
