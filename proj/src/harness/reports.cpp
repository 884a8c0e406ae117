// SPDX-License-Identifier: Apache-2.0
#include "mmrl/harness/reports.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "mmrl/common/errors.hpp"
#include "mmrl/common/io.hpp"

namespace mmrl::harness {

namespace {

constexpr const char* kAbsent = "\xE2\x80\x94";  // em dash

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw ValidationError("file not found: " + path.string());
  std::vector<std::string> lines;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::optional<double> parse_cell(const std::string& raw, bool percent_allowed, const std::string& where) {
  std::string s = trim(raw);
  if (s.empty() || s == "-" || s == kAbsent) return std::nullopt;
  bool percent = false;
  if (percent_allowed && s.back() == '%') {
    percent = true;
    s.pop_back();
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return percent ? v / 100.0 : v;
  } catch (const std::logic_error&) {
    throw ValidationError(where + ": not a number: '" + raw + "'");
  }
}

std::string cell(const std::optional<double>& v, const char* fmt, double scale = 1.0) {
  if (!v) return kAbsent;
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, *v * scale);
  return buf;
}

// Display width, counting each UTF-8 sequence as one column.
std::size_t columns(const std::string& s) {
  return static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

std::string pad(const std::string& s, std::size_t width, bool right) {
  const std::size_t w = columns(s);
  const std::string fill(width > w ? width - w : 0, ' ');
  return right ? fill + s : s + fill;
}

std::string render_rows(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    widths.resize(std::max(widths.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], columns(row[c]));
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) line += "  ";
      line += pad(row[c], widths[c], c > 0);
    }
    out += line + "\n";
  }
  return out;
}

}  // namespace

CaptionComparison compare_caption_files(const std::filesystem::path& before, const std::filesystem::path& after,
                                        const textmetrics::EvalOptions& options) {
  return {textmetrics::evaluate_caption_file(before, options), textmetrics::evaluate_caption_file(after, options)};
}

std::string render_caption_comparison(const CaptionComparison& cmp, const textmetrics::EvalOptions& options) {
  const double scale = options.percent_scale ? 100.0 : 1.0;
  const char* fmt = options.percent_scale ? "%.2f" : "%.4f";
  std::vector<std::vector<std::string>> rows = {{"metric", "before", "after"}};
  const auto b = cmp.before.rows();
  const auto a = cmp.after.rows();
  for (std::size_t i = 0; i < b.size(); ++i) rows.push_back({b[i].first, cell(b[i].second, fmt, scale), cell(a[i].second, fmt, scale)});
  return render_rows(rows);
}

std::string caption_comparison_csv(const CaptionComparison& cmp, const textmetrics::EvalOptions& options) {
  const double scale = options.percent_scale ? 100.0 : 1.0;
  std::string out = "metric,before,after\n";
  const auto b = cmp.before.rows();
  const auto a = cmp.after.rows();
  for (std::size_t i = 0; i < b.size(); ++i) {
    out += b[i].first + "," + format_real(b[i].second * scale) + "," + format_real(a[i].second * scale) + "\n";
  }
  return out;
}

FrameworkRow framework_row(const RunResult& run) {
  FrameworkRow row{run.label, run.summary.completion_rate, run.summary.mean_cum_reward, {}, {}, {}};
  if (run.captions) {
    row.bleu = run.captions->bleu;
    row.meteor = run.captions->meteor;
    row.rouge_l = run.captions->rougeL;
  }
  return row;
}

std::vector<FrameworkRow> read_external_rows(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw ValidationError(path.string() + ": empty file");
  const auto header = split_csv_line(lines.front());
  std::vector<std::string> names;
  for (const auto& h : header) names.push_back(trim(h));
  const std::vector<std::string> required = {"framework", "completion_rate", "cum_reward"};
  const std::vector<std::string> full = {"framework", "completion_rate", "cum_reward", "bleu", "meteor", "rouge_l"};
  if (names != required && names != full) {
    throw ValidationError(path.string() +
                          ": header must be framework,completion_rate,cum_reward[,bleu,meteor,rouge_l]");
  }
  std::vector<FrameworkRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_csv_line(lines[i]);
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    if (cells.size() != names.size()) throw ValidationError(where + ": expected " + std::to_string(names.size()) + " cells");
    FrameworkRow row;
    row.framework = trim(cells[0]);
    if (row.framework.empty()) throw ValidationError(where + ": empty framework name");
    row.completion_rate = parse_cell(cells[1], true, where);
    row.cum_reward = parse_cell(cells[2], false, where);
    if (cells.size() == full.size()) {
      row.bleu = parse_cell(cells[3], false, where);
      row.meteor = parse_cell(cells[4], false, where);
      row.rouge_l = parse_cell(cells[5], false, where);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<FrameworkRow> sort_rows(std::vector<FrameworkRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const FrameworkRow& a, const FrameworkRow& b) {
    if (!b.completion_rate) return a.completion_rate.has_value();
    if (!a.completion_rate) return false;
    return *a.completion_rate > *b.completion_rate;
  });
  return rows;
}

std::string render_comparison(const std::vector<FrameworkRow>& rows) {
  std::vector<std::vector<std::string>> table = {
      {"framework", "task completion rate", "cumulative reward", "BLEU", "METEOR", "ROUGE-L"}};
  for (const auto& r : rows) {
    table.push_back({r.framework, cell(r.completion_rate, "%.1f%%", 100.0), cell(r.cum_reward, "%.2f"),
                     cell(r.bleu, "%.4f"), cell(r.meteor, "%.4f"), cell(r.rouge_l, "%.4f")});
  }
  return render_rows(table);
}

std::string comparison_csv(const std::vector<FrameworkRow>& rows) {
  const auto num = [](const std::optional<double>& v) { return v ? format_real(*v) : std::string(); };
  std::string out = "framework,completion_rate,cum_reward,bleu,meteor,rouge_l\n";
  for (const auto& r : rows) {
    out += r.framework + "," + num(r.completion_rate) + "," + num(r.cum_reward) + "," + num(r.bleu) + "," +
           num(r.meteor) + "," + num(r.rouge_l) + "\n";
  }
  return out;
}

std::vector<double> moving_average(const std::vector<double>& values, std::size_t window) {
  if (window == 0) throw ValidationError("moving average window must be positive");
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= window) sum -= values[i - window];
    out[i] = sum / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

CurveSeries read_reward_series(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines.front() != "episode,cum_reward,accuracy,completed") {
    throw ValidationError(path.string() + ": expected header episode,cum_reward,accuracy,completed");
  }
  CurveSeries series{path.stem().string(), {}};
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cells = split_csv_line(lines[i]);
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    if (cells.size() != 4) throw ValidationError(where + ": expected 4 cells");
    const auto reward = parse_cell(cells[1], false, where);
    if (!reward) throw ValidationError(where + ": missing cum_reward");
    series.rewards.push_back(*reward);
  }
  if (series.rewards.empty()) throw ValidationError(path.string() + ": no episodes");
  return series;
}

std::string render_curve_svg(const std::vector<CurveSeries>& series, std::size_t window) {
  if (series.empty()) throw ValidationError("curve: no input series");
  constexpr double kWidth = 640, kHeight = 400, kLeft = 60, kRight = 20, kTop = 20, kBottom = 50;
  static const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  std::vector<std::vector<double>> smoothed;
  std::size_t max_len = 0;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& s : series) {
    if (s.rewards.empty()) throw ValidationError("curve: series '" + s.name + "' is empty");
    smoothed.push_back(moving_average(s.rewards, window));
    max_len = std::max(max_len, s.rewards.size());
    for (const double v : smoothed.back()) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (hi - lo < 1e-12) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  const auto x_of = [&](std::size_t i) {
    return kLeft + (max_len > 1 ? plot_w * static_cast<double>(i) / static_cast<double>(max_len - 1) : plot_w / 2);
  };
  const auto y_of = [&](double v) { return kTop + plot_h * (hi - v) / (hi - lo); };

  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                kWidth, kHeight, kWidth, kHeight);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<path d=\"M%.2f %.2f V%.2f H%.2f\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n", kLeft,
                kTop, kTop + plot_h, kLeft + plot_w);
  out += buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.2f\" y=\"%.2f\" font-size=\"12\" text-anchor=\"middle\">episode (moving average, "
                "window %zu)</text>\n",
                kLeft + plot_w / 2, kHeight - 12, window);
  out += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"end\">%s</text>\n",
                kLeft - 6, kTop + 4, format_real(hi).c_str());
  out += buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" text-anchor=\"end\">%s</text>\n",
                kLeft - 6, kTop + plot_h + 4, format_real(lo).c_str());
  out += buf;

  for (std::size_t s = 0; s < smoothed.size(); ++s) {
    const char* color = kColors[s % std::size(kColors)];
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < smoothed[s].size(); ++i) {
      std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", i == 0 ? "" : " ", x_of(i), y_of(smoothed[s][i]));
      out += buf;
    }
    out += "\"/>\n";
    const double ly = kTop + 14 + 16 * static_cast<double>(s);
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\" stroke-width=\"2\"/>\n",
                  kLeft + plot_w - 150, ly - 4, kLeft + plot_w - 130, ly - 4, color);
    out += buf;
    std::string name;
    for (const char c : series[s].name) {
      switch (c) {
        case '&': name += "&amp;"; break;
        case '<': name += "&lt;"; break;
        case '>': name += "&gt;"; break;
        case '"': name += "&quot;"; break;
        default: name += c;
      }
    }
    std::snprintf(buf, sizeof buf, "<text class=\"legend\" x=\"%.2f\" y=\"%.2f\" font-size=\"12\">",
                  kLeft + plot_w - 124, ly);
    out += buf + name + "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace mmrl::harness
