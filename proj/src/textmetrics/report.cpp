// SPDX-License-Identifier: Apache-2.0
#include "mmrl/textmetrics/report.hpp"

#include <array>
#include <cstdio>

#include "mmrl/common/errors.hpp"
#include "mmrl/common/io.hpp"

namespace mmrl::textmetrics {
namespace {

double scaled(double value, const EvalOptions& options) { return options.percent_scale ? value * 100.0 : value; }

std::string fixed(double value) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.4f", value);
  return buf.data();
}

}  // namespace

std::vector<std::pair<std::string, double>> MetricReport::rows() const {
  return {{"BLEU", bleu}, {"ROUGE-1", rouge1}, {"ROUGE-2", rouge2}, {"ROUGE-L", rougeL}, {"METEOR", meteor}};
}

std::vector<CaptionPair> tokenize_corpus(const std::vector<dataset::CaptionRecord>& records) {
  std::vector<CaptionPair> pairs;
  pairs.reserve(records.size());
  for (const auto& r : records) {
    CaptionPair pair;
    pair.candidate = tokenize_for_metrics(r.candidate);
    for (const auto& ref : r.references) pair.references.push_back(tokenize_for_metrics(ref));
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

MetricReport evaluate_pairs(const std::vector<CaptionPair>& pairs, const EvalOptions& options) {
  if (pairs.empty()) throw ValidationError("caption corpus has no pairs");
  MetricReport report;
  report.pair_count = pairs.size();
  report.bleu = bleu_corpus(pairs, options.bleu);
  for (const auto& p : pairs) {
    report.rouge1 += rouge_n(p.candidate, p.references, 1);
    report.rouge2 += rouge_n(p.candidate, p.references, 2);
    report.rougeL += rouge_l(p.candidate, p.references);
    report.meteor += meteor(p.candidate, p.references);
  }
  const auto n = static_cast<double>(pairs.size());
  report.rouge1 /= n;
  report.rouge2 /= n;
  report.rougeL /= n;
  report.meteor /= n;
  return report;
}

MetricReport evaluate_caption_file(const std::filesystem::path& corpus, const EvalOptions& options) {
  const auto records = dataset::read_caption_corpus(corpus);
  for (const auto& r : records) {
    if (r.references.empty()) {
      throw ValidationError(corpus.filename().string() + ": pair " + r.id + " has no references");
    }
  }
  return evaluate_pairs(tokenize_corpus(records), options);
}

std::string render_table(const MetricReport& report, const EvalOptions& options) {
  std::string out = "metric    value\n";
  for (const auto& [name, value] : report.rows()) {
    std::array<char, 64> line{};
    std::snprintf(line.data(), line.size(), "%-9s %s\n", name.c_str(), fixed(scaled(value, options)).c_str());
    out += line.data();
  }
  out += "pairs     " + std::to_string(report.pair_count) + "\n";
  return out;
}

std::string render_csv(const MetricReport& report, const EvalOptions& options) {
  std::string out = "metric,value\n";
  for (const auto& [name, value] : report.rows()) out += name + "," + format_real(scaled(value, options)) + "\n";
  return out;
}

}  // namespace mmrl::textmetrics
