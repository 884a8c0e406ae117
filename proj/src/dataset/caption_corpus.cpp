// SPDX-License-Identifier: Apache-2.0
#include "mmrl/dataset/caption_corpus.hpp"

#include <algorithm>
#include <fstream>
#include <optional>

#include <json.hpp>

#include "mmrl/common/errors.hpp"
#include "mmrl/common/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mmrl::dataset {
namespace {

std::optional<CaptionRecord> parse_record(const std::string& text, const std::string& file, std::size_t line_no,
                                          ValidationReport& report) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error&) {
    report.add(file, line_no, "", "malformed JSON line");
    return std::nullopt;
  }
  if (!doc.is_object()) {
    report.add(file, line_no, "", "line must be a JSON object");
    return std::nullopt;
  }
  const auto before = report.violations.size();
  for (const auto& [key, value] : doc.items()) {
    if (key != "id" && key != "candidate" && key != "references") report.add(file, line_no, key, "unknown field");
  }
  CaptionRecord record;
  if (!doc.contains("id")) {
    report.add(file, line_no, "id", "missing field");
  } else if (doc["id"].is_string()) {
    record.id = doc["id"].get<std::string>();
  } else if (doc["id"].is_number_integer()) {
    record.id = doc["id"].dump();
  } else {
    report.add(file, line_no, "id", "must be an integer or string");
  }
  if (!doc.contains("candidate")) {
    report.add(file, line_no, "candidate", "missing field");
  } else if (!doc["candidate"].is_string()) {
    report.add(file, line_no, "candidate", "must be a string");
  } else {
    record.candidate = doc["candidate"].get<std::string>();
  }
  if (!doc.contains("references")) {
    report.add(file, line_no, "references", "missing field");
  } else {
    const auto& refs = doc["references"];
    if (!refs.is_array() || !std::all_of(refs.begin(), refs.end(), [](const json& r) { return r.is_string(); })) {
      report.add(file, line_no, "references", "must be an array of strings");
    } else {
      record.references = refs.get<std::vector<std::string>>();
    }
  }
  if (report.violations.size() != before) return std::nullopt;
  return record;
}

std::vector<CaptionRecord> parse_corpus(const fs::path& path, ValidationReport& report) {
  std::vector<CaptionRecord> records;
  const std::string file = path.filename().string();
  std::ifstream in(path);
  if (!fs::is_regular_file(path) || !in) {
    report.add(file, 0, "", "cannot open caption corpus");
    return records;
  }
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (auto rec = parse_record(line, file, line_no, report)) records.push_back(std::move(*rec));
  }
  if (records.empty() && report.ok()) report.add(file, 0, "", "caption corpus is empty");
  return records;
}

}  // namespace

std::vector<CaptionRecord> read_caption_corpus(const fs::path& path) {
  ValidationReport report;
  auto records = parse_corpus(path, report);
  if (!report.ok()) throw ValidationError("invalid caption corpus:\n" + report.describe());
  return records;
}

void write_caption_corpus(const fs::path& path, const std::vector<CaptionRecord>& records) {
  std::string body;
  for (const auto& r : records) {
    nlohmann::ordered_json line;
    // integer ids roundtrip as integers
    json id = json::parse(r.id, nullptr, false);
    if (id.is_number_integer()) {
      line["id"] = id;
    } else {
      line["id"] = r.id;
    }
    line["candidate"] = r.candidate;
    line["references"] = r.references;
    body += line.dump() + "\n";
  }
  write_file(path, body);
}

void validate_caption_corpus(const fs::path& path, ValidationReport& report) { parse_corpus(path, report); }

}  // namespace mmrl::dataset
