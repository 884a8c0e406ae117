// SPDX-License-Identifier: Apache-2.0
#include "mmrl/dataset/dataset.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mmrl/common/errors.hpp"
#include "mmrl/common/io.hpp"
#include "mmrl/dataset/caption_corpus.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace mmrl::dataset {
namespace {

constexpr std::array kManifestFields = {"name", "episode_count", "action_count", "feature_dim", "mode", "seed"};
constexpr std::array kStepFields = {"step", "visual", "image", "caption", "action"};

template <std::size_t N>
bool is_known(const std::array<const char*, N>& fields, const std::string& key) {
  return std::any_of(fields.begin(), fields.end(), [&](const char* f) { return key == f; });
}

bool is_positive_int(const json& v) {
  return (v.is_number_unsigned() && v.get<std::uint64_t>() > 0) ||
         (v.is_number_integer() && v.get<std::int64_t>() > 0);
}

bool is_nonnegative_int(const json& v) {
  return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
}

std::optional<DatasetManifest> parse_manifest(const fs::path& path, ValidationReport& report) {
  const std::string file = path.filename().string();
  if (!fs::is_regular_file(path)) {
    report.add(file, 0, "", "missing manifest");
    return std::nullopt;
  }
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    report.add(file, 0, "", std::string("malformed JSON: ") + e.what());
    return std::nullopt;
  }
  if (!doc.is_object()) {
    report.add(file, 0, "", "manifest must be a JSON object");
    return std::nullopt;
  }
  const auto before = report.violations.size();
  for (const auto& [key, value] : doc.items()) {
    if (!is_known(kManifestFields, key)) report.add(file, 0, key, "unknown field");
  }
  for (const char* key : kManifestFields) {
    if (!doc.contains(key)) report.add(file, 0, key, "missing field");
  }
  if (report.violations.size() != before) return std::nullopt;

  DatasetManifest m;
  if (doc["name"].is_string()) {
    m.name = doc["name"].get<std::string>();
  } else {
    report.add(file, 0, "name", "must be a string");
  }
  if (is_positive_int(doc["episode_count"])) {
    m.episode_count = doc["episode_count"].get<std::size_t>();
  } else {
    report.add(file, 0, "episode_count", "must be a positive integer");
  }
  if (doc["action_count"].is_number_integer() && doc["action_count"].get<std::int64_t>() >= 2 &&
      doc["action_count"].get<std::int64_t>() <= 1'000'000) {
    m.action_count = doc["action_count"].get<int>();
  } else {
    report.add(file, 0, "action_count", "must be an integer >= 2");
  }
  if (is_nonnegative_int(doc["feature_dim"])) {
    m.feature_dim = doc["feature_dim"].get<std::size_t>();
  } else {
    report.add(file, 0, "feature_dim", "must be a non-negative integer");
  }
  const auto& mode = doc["mode"];
  if (mode == "features") {
    m.mode = DatasetMode::kFeatures;
    if (m.feature_dim == 0) report.add(file, 0, "feature_dim", "must be positive in features mode");
  } else if (mode == "images") {
    m.mode = DatasetMode::kImages;
    if (m.feature_dim != 0) report.add(file, 0, "feature_dim", "must be 0 in images mode");
  } else {
    report.add(file, 0, "mode", "must be \"features\" or \"images\"");
  }
  const auto& seed = doc["seed"];
  if (seed.is_number_unsigned()) {
    m.seed = seed.get<std::uint64_t>();
  } else if (seed.is_number_integer() && seed.get<std::int64_t>() >= 0) {
    m.seed = static_cast<std::uint64_t>(seed.get<std::int64_t>());
  } else if (!seed.is_null()) {
    report.add(file, 0, "seed", "must be a non-negative 64-bit integer or null");
  }
  if (report.violations.size() != before) return std::nullopt;
  return m;
}

std::optional<StepRecord> parse_step(const std::string& text, const std::string& file, std::size_t line_no,
                                     const DatasetManifest& manifest, ValidationReport& report) {
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
    if (!is_known(kStepFields, key)) report.add(file, line_no, key, "unknown field");
  }
  StepRecord step;
  if (!doc.contains("step")) {
    report.add(file, line_no, "step", "missing field");
  } else if (!is_nonnegative_int(doc["step"])) {
    report.add(file, line_no, "step", "must be a non-negative integer");
  } else {
    step.step_index = doc["step"].get<std::size_t>();
  }

  const bool has_visual = doc.contains("visual");
  const bool has_image = doc.contains("image");
  if (has_visual && has_image) {
    report.add(file, line_no, "visual", "exactly one of visual/image must be present, found both");
  } else if (!has_visual && !has_image) {
    report.add(file, line_no, "visual", "exactly one of visual/image must be present, found neither");
  } else if (has_visual) {
    const auto& v = doc["visual"];
    if (manifest.mode != DatasetMode::kFeatures) {
      report.add(file, line_no, "visual", "feature vector in an images-mode dataset");
    } else if (!v.is_array() || !std::all_of(v.begin(), v.end(), [](const json& x) { return x.is_number(); })) {
      report.add(file, line_no, "visual", "must be an array of numbers");
    } else if (v.size() != manifest.feature_dim) {
      report.add(file, line_no, "visual",
                 "length " + std::to_string(v.size()) + " != feature_dim " + std::to_string(manifest.feature_dim));
    } else {
      step.visual = v.get<std::vector<double>>();
    }
  } else {
    const auto& v = doc["image"];
    if (manifest.mode != DatasetMode::kImages) {
      report.add(file, line_no, "image", "image path in a features-mode dataset");
    } else if (!v.is_string() || v.get<std::string>().empty() || fs::path(v.get<std::string>()).is_absolute()) {
      report.add(file, line_no, "image", "must be a non-empty relative path");
    } else {
      step.visual = ImageRef{v.get<std::string>()};
    }
  }

  if (!doc.contains("caption")) {
    report.add(file, line_no, "caption", "missing field");
  } else if (!doc["caption"].is_string()) {
    report.add(file, line_no, "caption", "must be a string");
  } else {
    step.caption = doc["caption"].get<std::string>();
  }

  if (!doc.contains("action")) {
    report.add(file, line_no, "action", "missing field");
  } else if (!doc["action"].is_number_integer() || doc["action"].get<std::int64_t>() < 0 ||
             doc["action"].get<std::int64_t>() >= manifest.action_count) {
    report.add(file, line_no, "action", "must be an integer in [0, " + std::to_string(manifest.action_count) + ")");
  } else {
    step.action = doc["action"].get<int>();
  }
  if (report.violations.size() != before) return std::nullopt;
  return step;
}

std::optional<EpisodeRecord> parse_episode(const fs::path& path, std::size_t episode_id,
                                           const DatasetManifest& manifest, ValidationReport& report) {
  const std::string file = "episodes/" + path.filename().string();
  std::ifstream in(path);
  if (!in) {
    report.add(file, 0, "", "cannot open");
    return std::nullopt;
  }
  EpisodeRecord episode;
  episode.episode_id = episode_id;
  bool ok = true;
  std::string line;
  std::size_t line_no = 0;
  // Counts every non-empty line, so one bad line does not cascade into
  // contiguity errors for all the lines after it.
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::size_t want = expected++;
    auto step = parse_step(line, file, line_no, manifest, report);
    if (!step) {
      ok = false;
      continue;
    }
    if (step->step_index != want) {
      report.add(file, line_no, "step",
                 "step indices must be contiguous from 0; expected " + std::to_string(want) +
                     ", found " + std::to_string(step->step_index));
      ok = false;
    }
    episode.steps.push_back(std::move(*step));
  }
  if (line_no == 0 || episode.steps.empty()) {
    if (ok) report.add(file, 0, "", "episode has no steps");
    return std::nullopt;
  }
  if (!ok) return std::nullopt;
  return episode;
}

void parse_dataset(const fs::path& root, ValidationReport& report, Dataset* out) {
  auto manifest = parse_manifest(root / "manifest.json", report);
  if (!manifest) return;

  const fs::path episodes_dir = root / "episodes";
  if (!fs::is_directory(episodes_dir)) {
    report.add("episodes", 0, "", "missing episodes directory");
    return;
  }
  static const std::regex kEpisodeName(R"(ep([0-9]{4,})\.jsonl)");
  std::vector<std::pair<std::size_t, fs::path>> files;
  std::set<std::size_t> ids;
  for (const auto& entry : fs::directory_iterator(episodes_dir)) {
    const std::string name = entry.path().filename().string();
    std::smatch match;
    if (!entry.is_regular_file() || !std::regex_match(name, match, kEpisodeName)) {
      report.add("episodes/" + name, 0, "", "unexpected entry in episodes directory");
      continue;
    }
    const std::size_t id = std::stoull(match[1].str());
    if (!ids.insert(id).second) {
      report.add("episodes/" + name, 0, "", "duplicate episode id " + std::to_string(id));
      continue;
    }
    files.emplace_back(id, entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.size() != manifest->episode_count) {
    report.add("manifest.json", 0, "episode_count",
               "declares " + std::to_string(manifest->episode_count) + " episodes but " +
                   std::to_string(files.size()) + " episode files are present");
  }

  Dataset data;
  data.manifest = *manifest;
  for (const auto& [id, path] : files) {
    auto episode = parse_episode(path, id, *manifest, report);
    if (episode) data.episodes.push_back(std::move(*episode));
  }
  if (out != nullptr && report.ok()) *out = std::move(data);
}

std::string step_line(const StepRecord& step) {
  std::string line = "{\"step\":" + std::to_string(step.step_index);
  if (const auto* features = std::get_if<std::vector<double>>(&step.visual)) {
    line += ",\"visual\":[";
    for (std::size_t i = 0; i < features->size(); ++i) {
      if (i != 0) line.push_back(',');
      line += format_real((*features)[i]);
    }
    line.push_back(']');
  } else {
    line += ",\"image\":" + json(std::get<ImageRef>(step.visual).path).dump();
  }
  line += ",\"caption\":" + json(step.caption).dump();
  line += ",\"action\":" + std::to_string(step.action) + "}\n";
  return line;
}

}  // namespace

std::string Violation::describe() const {
  std::string out = file;
  if (line != 0) out += ":" + std::to_string(line);
  if (!field.empty()) out += ": field \"" + field + "\"";
  return out + ": " + message;
}

std::string ValidationReport::describe() const {
  std::string out;
  for (const auto& v : violations) out += v.describe() + "\n";
  return out;
}

std::string to_string(DatasetMode mode) { return mode == DatasetMode::kFeatures ? "features" : "images"; }

std::string episode_file_name(std::size_t episode_id) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "ep%04zu.jsonl", episode_id);
  return buf.data();
}

Dataset load_dataset(const fs::path& root) {
  ValidationReport report;
  Dataset data;
  parse_dataset(root, report, &data);
  if (!report.ok()) throw ValidationError("invalid dataset at " + root.string() + ":\n" + report.describe());
  return data;
}

ValidationReport validate_schema(const fs::path& path) {
  ValidationReport report;
  if (fs::is_directory(path)) {
    parse_dataset(path, report, nullptr);
  } else {
    validate_caption_corpus(path, report);
  }
  return report;
}

ValidationReport validate_dataset(const Dataset& data) {
  ValidationReport report;
  const auto& m = data.manifest;
  if (m.action_count < 2) report.add("manifest.json", 0, "action_count", "must be >= 2");
  if (m.episode_count == 0) report.add("manifest.json", 0, "episode_count", "must be positive");
  if (m.episode_count != data.episodes.size()) {
    report.add("manifest.json", 0, "episode_count", "does not match the number of episodes");
  }
  if (m.mode == DatasetMode::kFeatures && m.feature_dim == 0) {
    report.add("manifest.json", 0, "feature_dim", "must be positive in features mode");
  }
  if (m.mode == DatasetMode::kImages && m.feature_dim != 0) {
    report.add("manifest.json", 0, "feature_dim", "must be 0 in images mode");
  }
  std::set<std::size_t> ids;
  for (const auto& ep : data.episodes) {
    const std::string file = "episodes/" + episode_file_name(ep.episode_id);
    if (!ids.insert(ep.episode_id).second) report.add(file, 0, "", "duplicate episode id");
    if (ep.steps.empty()) report.add(file, 0, "", "episode has no steps");
    for (std::size_t i = 0; i < ep.steps.size(); ++i) {
      const auto& s = ep.steps[i];
      if (s.step_index != i) report.add(file, i + 1, "step", "step indices must be contiguous from 0");
      if (s.action < 0 || s.action >= m.action_count) report.add(file, i + 1, "action", "out of range");
      if (const auto* f = std::get_if<std::vector<double>>(&s.visual)) {
        if (m.mode != DatasetMode::kFeatures) report.add(file, i + 1, "visual", "feature vector in images mode");
        if (f->size() != m.feature_dim) report.add(file, i + 1, "visual", "length != feature_dim");
      } else {
        const auto& ref = std::get<ImageRef>(s.visual);
        if (m.mode != DatasetMode::kImages) report.add(file, i + 1, "image", "image path in features mode");
        if (ref.path.empty() || fs::path(ref.path).is_absolute()) {
          report.add(file, i + 1, "image", "must be a non-empty relative path");
        }
      }
    }
  }
  return report;
}

void write_dataset(const Dataset& data, const fs::path& root) {
  const auto report = validate_dataset(data);
  if (!report.ok()) throw ValidationError("refusing to write invalid dataset:\n" + report.describe());

  nlohmann::ordered_json manifest;
  manifest["name"] = data.manifest.name;
  manifest["episode_count"] = data.manifest.episode_count;
  manifest["action_count"] = data.manifest.action_count;
  manifest["feature_dim"] = data.manifest.feature_dim;
  manifest["mode"] = to_string(data.manifest.mode);
  if (data.manifest.seed) {
    manifest["seed"] = *data.manifest.seed;
  } else {
    manifest["seed"] = nullptr;
  }
  write_file(root / "manifest.json", manifest.dump(2) + "\n");

  std::error_code ec;
  fs::create_directories(root / "episodes", ec);
  if (ec) throw RuntimeFailure("cannot create " + (root / "episodes").string() + ": " + ec.message());
  for (const auto& ep : data.episodes) {
    std::string body;
    for (const auto& step : ep.steps) body += step_line(step);
    write_file(root / "episodes" / episode_file_name(ep.episode_id), body);
  }
}

}  // namespace mmrl::dataset
