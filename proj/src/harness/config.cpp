// SPDX-License-Identifier: Apache-2.0
#include "mmrl/harness/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <functional>
#include <sstream>

#include "mmrl/common/errors.hpp"
#include "mmrl/common/io.hpp"

namespace mmrl::harness {

namespace {

struct Binding {
  const char* section;
  const char* key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

[[noreturn]] void bad_value(const std::string& what, const std::string& value) {
  throw ValidationError("config: invalid value '" + value + "' for " + what);
}

template <typename T>
T parse_integer(const std::string& value, const std::string& what) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end || value.empty()) bad_value(what, value);
  return out;
}

double parse_double(const std::string& value, const std::string& what) {
  try {
    std::size_t used = 0;
    const double out = std::stod(value, &used);
    if (used != value.size()) bad_value(what, value);
    return out;
  } catch (const std::logic_error&) {
    bad_value(what, value);
  }
}

bool parse_bool(const std::string& value, const std::string& what) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(what, value);
}

// Field accessors are generic lambdas returning a reference to the member;
// these helpers build the string conversions around them.
template <typename Ref>
Binding integer_binding(const char* section, const char* key, Ref ref) {
  return {section, key, [ref](const ExperimentConfig& c) { return std::to_string(ref(c)); },
          [ref, section, key](ExperimentConfig& c, const std::string& v) {
            ref(c) = parse_integer<std::remove_cvref_t<decltype(ref(c))>>(v, std::string(section) + "." + key);
          }};
}

template <typename Ref>
Binding real_binding(const char* section, const char* key, Ref ref) {
  return {section, key, [ref](const ExperimentConfig& c) { return format_real(ref(c)); },
          [ref, section, key](ExperimentConfig& c, const std::string& v) {
            ref(c) = parse_double(v, std::string(section) + "." + key);
          }};
}

template <typename Ref>
Binding bool_binding(const char* section, const char* key, Ref ref) {
  return {section, key,
          [ref](const ExperimentConfig& c) { return std::string(ref(c) ? "true" : "false"); },
          [ref, section, key](ExperimentConfig& c, const std::string& v) {
            ref(c) = parse_bool(v, std::string(section) + "." + key);
          }};
}

template <typename Ref>
Binding string_binding(const char* section, const char* key, Ref ref) {
  return {section, key, [ref](const ExperimentConfig& c) { return ref(c); },
          [ref](ExperimentConfig& c, const std::string& v) { ref(c) = v; }};
}

Binding optional_seed(const char* section, const char* key, std::optional<std::uint64_t> ExperimentConfig::*field) {
  return {section, key,
          [field](const ExperimentConfig& c) { return (c.*field) ? std::to_string(*(c.*field)) : std::string(); },
          [field, section, key](ExperimentConfig& c, const std::string& v) {
            if (v.empty()) {
              c.*field = std::nullopt;
            } else {
              c.*field = parse_integer<std::uint64_t>(v, std::string(section) + "." + key);
            }
          }};
}

#define FIELD(expr) [](auto& c) -> auto& { return expr; }

const std::vector<Binding>& bindings() {
  static const std::vector<Binding> table = {
      {"experiment", "agent", [](const ExperimentConfig& c) { return to_string(c.agent); },
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "dqn") {
           c.agent = AgentKind::kDqn;
         } else if (v == "ppo") {
           c.agent = AgentKind::kPpo;
         } else {
           bad_value("experiment.agent (expected dqn or ppo)", v);
         }
       }},
      {"experiment", "mode", [](const ExperimentConfig& c) { return fusion::to_string(c.encoder.mode); },
       [](ExperimentConfig& c, const std::string& v) { c.encoder.mode = fusion::parse_fusion_mode(v); }},
      integer_binding("experiment", "training_episodes", FIELD(c.training_episodes)),
      integer_binding("experiment", "eval_episodes", FIELD(c.eval_episodes)),
      optional_seed("experiment", "seed", &ExperimentConfig::seed),
      string_binding("experiment", "label", FIELD(c.label)),
      string_binding("experiment", "caption_corpus", FIELD(c.caption_corpus)),
      bool_binding("experiment", "write_curve", FIELD(c.write_curve)),

      string_binding("dataset", "path", FIELD(c.dataset_path)),

      string_binding("synth", "name", FIELD(c.synth.name)),
      integer_binding("synth", "episode_count", FIELD(c.synth.episode_count)),
      integer_binding("synth", "steps_per_episode", FIELD(c.synth.steps_per_episode)),
      integer_binding("synth", "action_count", FIELD(c.synth.action_count)),
      integer_binding("synth", "feature_dim", FIELD(c.synth.feature_dim)),
      real_binding("synth", "alias_fraction", FIELD(c.synth.alias_fraction)),
      real_binding("synth", "noise", FIELD(c.synth.noise)),
      {"synth", "mode",
       [](const ExperimentConfig& c) {
         return std::string(c.synth.mode == dataset::DatasetMode::kImages ? "images" : "features");
       },
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "features") {
           c.synth.mode = dataset::DatasetMode::kFeatures;
         } else if (v == "images") {
           c.synth.mode = dataset::DatasetMode::kImages;
         } else {
           bad_value("synth.mode (expected features or images)", v);
         }
       }},
      integer_binding("synth", "image_size", FIELD(c.synth.image_size)),
      optional_seed("synth", "seed", &ExperimentConfig::synth_seed),

      real_binding("env", "reward_correct", FIELD(c.env.reward_correct)),
      real_binding("env", "reward_incorrect", FIELD(c.env.reward_incorrect)),
      real_binding("env", "completion_threshold", FIELD(c.env.completion_threshold)),
      {"env", "order",
       [](const ExperimentConfig& c) {
         return std::string(c.env.order == env::EpisodeOrder::kShuffled ? "shuffled" : "sequential");
       },
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "sequential") {
           c.env.order = env::EpisodeOrder::kSequential;
         } else if (v == "shuffled") {
           c.env.order = env::EpisodeOrder::kShuffled;
         } else {
           bad_value("env.order (expected sequential or shuffled)", v);
         }
       }},

      integer_binding("encoder", "d_visual", FIELD(c.encoder.d_visual)),
      integer_binding("encoder", "d_text", FIELD(c.encoder.d_text)),
      integer_binding("encoder", "embed_dim", FIELD(c.encoder.embed_dim)),
      integer_binding("encoder", "max_caption_len", FIELD(c.encoder.max_caption_len)),
      integer_binding("encoder", "visual_hidden", FIELD(c.encoder.visual_hidden)),
      integer_binding("encoder", "vocab_min_count", FIELD(c.vocab_min_count)),

      real_binding("dqn", "gamma", FIELD(c.dqn.gamma)),
      real_binding("dqn", "lr", FIELD(c.dqn.lr)),
      integer_binding("dqn", "batch_size", FIELD(c.dqn.batch_size)),
      integer_binding("dqn", "target_sync_interval", FIELD(c.dqn.target_sync_interval)),
      real_binding("dqn", "epsilon_start", FIELD(c.dqn.epsilon_start)),
      real_binding("dqn", "epsilon_end", FIELD(c.dqn.epsilon_end)),
      real_binding("dqn", "epsilon_decay_fraction", FIELD(c.dqn.epsilon_decay_fraction)),
      integer_binding("dqn", "warmup_steps", FIELD(c.dqn.warmup_steps)),
      {"dqn", "loss", [](const ExperimentConfig& c) { return std::string(c.dqn.loss == agents::DqnLoss::kMse ? "mse" : "huber"); },
       [](ExperimentConfig& c, const std::string& v) {
         if (v == "huber") {
           c.dqn.loss = agents::DqnLoss::kHuber;
         } else if (v == "mse") {
           c.dqn.loss = agents::DqnLoss::kMse;
         } else {
           bad_value("dqn.loss (expected huber or mse)", v);
         }
       }},
      integer_binding("dqn", "buffer_capacity", FIELD(c.dqn.buffer_capacity)),
      integer_binding("dqn", "hidden", FIELD(c.dqn.hidden)),

      real_binding("ppo", "gamma", FIELD(c.ppo.gamma)),
      real_binding("ppo", "gae_lambda", FIELD(c.ppo.gae_lambda)),
      real_binding("ppo", "clip_epsilon", FIELD(c.ppo.clip_epsilon)),
      integer_binding("ppo", "rollout_length", FIELD(c.ppo.rollout_length)),
      integer_binding("ppo", "epochs", FIELD(c.ppo.epochs)),
      integer_binding("ppo", "minibatch_size", FIELD(c.ppo.minibatch_size)),
      real_binding("ppo", "value_coeff", FIELD(c.ppo.value_coeff)),
      real_binding("ppo", "entropy_coeff", FIELD(c.ppo.entropy_coeff)),
      real_binding("ppo", "lr", FIELD(c.ppo.lr)),
      bool_binding("ppo", "normalize_advantages", FIELD(c.ppo.normalize_advantages)),
      integer_binding("ppo", "hidden", FIELD(c.ppo.hidden)),
  };
  return table;
}

#undef FIELD

}  // namespace

std::string to_string(AgentKind agent) { return agent == AgentKind::kPpo ? "ppo" : "dqn"; }

std::string ExperimentConfig::display_label() const {
  return label.empty() ? to_string(agent) + "-" + fusion::to_string(encoder.mode) : label;
}

void ExperimentConfig::validate() const {
  if (!seed) throw ValidationError("config: experiment.seed is required");
  if (eval_episodes == 0) throw ValidationError("config: experiment.eval_episodes must be positive");
  if (!(synth.alias_fraction >= 0.0 && synth.alias_fraction <= 1.0)) {
    throw ValidationError("config: synth.alias_fraction must be in [0, 1]");
  }
  if (!(env.completion_threshold > 0.0 && env.completion_threshold <= 1.0)) {
    throw ValidationError("config: env.completion_threshold must be in (0, 1]");
  }
  if (encoder.d_visual == 0 || encoder.d_text == 0 || encoder.embed_dim == 0 || encoder.max_caption_len == 0 ||
      encoder.visual_hidden == 0) {
    throw ValidationError("config: encoder sizes must be positive");
  }
  if (vocab_min_count == 0) throw ValidationError("config: encoder.vocab_min_count must be positive");
  dqn.validate();
  ppo.validate();
  if (!dataset_path.empty() && !std::filesystem::is_directory(dataset_path)) {
    throw ValidationError("config: dataset.path does not exist: " + dataset_path);
  }
  if (!caption_corpus.empty() && !std::filesystem::is_regular_file(caption_corpus)) {
    throw ValidationError("config: experiment.caption_corpus does not exist: " + caption_corpus);
  }
}

void set_value(ExperimentConfig& config, const std::string& section, const std::string& key,
               const std::string& value) {
  for (const auto& b : bindings()) {
    if (section == b.section && key == b.key) {
      b.set(config, value);
      return;
    }
  }
  if (section == "experiment" && key == "output") {
    config.output = value;
    return;
  }
  throw ValidationError("config: unknown key " + section + "." + key);
}

ExperimentConfig parse_config(const std::string& ini_text) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(ini_text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  ExperimentConfig config;
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) throw ValidationError("config: key outside a section: " + section);
    for (const auto& [key, value] : body) set_value(config, section, key, value.data());
  }
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) throw ValidationError("config file not found: " + path.string());
  return parse_config(read_file(path));
}

void apply_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ValidationError("override must look like section.key=value: " + assignment);
  }
  set_value(config, assignment.substr(0, dot), assignment.substr(dot + 1, eq - dot - 1), assignment.substr(eq + 1));
}

std::string to_ini(const ExperimentConfig& config, bool include_output) {
  std::string out;
  std::string section;
  for (const auto& b : bindings()) {
    if (section != b.section) {
      if (!section.empty()) out += "\n";
      section = b.section;
      out += "[" + section + "]\n";
      if (include_output && section == "experiment") out += "output = " + config.output.generic_string() + "\n";
    }
    out += std::string(b.key) + " = " + b.get(config) + "\n";
  }
  return out;
}

std::string config_hash(const ExperimentConfig& config) { return sha256_hex(to_ini(config, false)); }

}  // namespace mmrl::harness
