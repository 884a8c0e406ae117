// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mmrl/harness/experiment.hpp"
#include "mmrl/textmetrics/report.hpp"

namespace mmrl::harness {

/// Side-by-side caption metrics for two corpora.
struct CaptionComparison {
  textmetrics::MetricReport before;
  textmetrics::MetricReport after;
};

CaptionComparison compare_caption_files(const std::filesystem::path& before, const std::filesystem::path& after,
                                        const textmetrics::EvalOptions& options);
std::string render_caption_comparison(const CaptionComparison& cmp, const textmetrics::EvalOptions& options);
/// Header "metric,before,after".
std::string caption_comparison_csv(const CaptionComparison& cmp, const textmetrics::EvalOptions& options);

/// One framework row of the comparison table. Completion rate is a fraction.
struct FrameworkRow {
  std::string framework;
  std::optional<double> completion_rate;
  std::optional<double> cum_reward;
  std::optional<double> bleu;
  std::optional<double> meteor;
  std::optional<double> rouge_l;
};

FrameworkRow framework_row(const RunResult& run);

/// External rows from CSV with header
/// "framework,completion_rate,cum_reward[,bleu,meteor,rouge_l]". Empty
/// cells are absent values; completion accepts "85%" or "0.85".
std::vector<FrameworkRow> read_external_rows(const std::filesystem::path& path);

/// Rows sorted by completion rate, descending (absent last, ties keep input
/// order).
std::vector<FrameworkRow> sort_rows(std::vector<FrameworkRow> rows);
/// Aligned text table; absent cells render as an em dash.
std::string render_comparison(const std::vector<FrameworkRow>& rows);
std::string comparison_csv(const std::vector<FrameworkRow>& rows);

/// Reward-curve input: a name and per-episode cumulative rewards.
struct CurveSeries {
  std::string name;
  std::vector<double> rewards;
};

/// Trailing moving average; the first window-1 points average what exists.
std::vector<double> moving_average(const std::vector<double>& values, std::size_t window);

/// Reads the cum_reward column of a rewards.csv; the series is named after
/// the file stem. Throws ValidationError on a malformed file.
CurveSeries read_reward_series(const std::filesystem::path& path);

/// 640x400 SVG line chart, one smoothed polyline and legend entry per series.
std::string render_curve_svg(const std::vector<CurveSeries>& series, std::size_t window);

}  // namespace mmrl::harness
