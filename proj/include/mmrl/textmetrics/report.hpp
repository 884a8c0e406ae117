// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "mmrl/dataset/caption_corpus.hpp"
#include "mmrl/textmetrics/metrics.hpp"

namespace mmrl::textmetrics {

struct MetricReport {
  double bleu = 0.0;
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rougeL = 0.0;
  double meteor = 0.0;
  std::size_t pair_count = 0;

  /// (display name, value) in table order: BLEU, ROUGE-1, ROUGE-2, ROUGE-L, METEOR.
  std::vector<std::pair<std::string, double>> rows() const;
};

struct EvalOptions {
  BleuOptions bleu;
  /// Multiply scores by 100 when rendering. Internal values stay in [0, 1].
  bool percent_scale = false;
};

/// Corpus BLEU plus per-pair means of ROUGE-1/2/L and METEOR.
MetricReport evaluate_pairs(const std::vector<CaptionPair>& pairs, const EvalOptions& options = {});

std::vector<CaptionPair> tokenize_corpus(const std::vector<dataset::CaptionRecord>& records);

/// Reads a caption-corpus JSONL file and scores it. Throws ValidationError on
/// an empty or malformed corpus, or a pair without references.
MetricReport evaluate_caption_file(const std::filesystem::path& corpus, const EvalOptions& options = {});

/// Aligned text table, one row per metric.
std::string render_table(const MetricReport& report, const EvalOptions& options = {});

/// CSV with header "metric,value".
std::string render_csv(const MetricReport& report, const EvalOptions& options = {});

}  // namespace mmrl::textmetrics
