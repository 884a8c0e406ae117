// SPDX-License-Identifier: Apache-2.0
#include "mmrl/nn/parameters.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mmrl/common/errors.hpp"
#include "mmrl/common/io.hpp"

namespace mmrl::nn {

ParamId ParameterSet::add(std::string name, Tensor initial) {
  for (const auto& p : params_) {
    if (p.name == name) throw ValidationError("duplicate parameter name " + name);
  }
  Parameter p;
  p.name = std::move(name);
  p.grad = Tensor(initial.shape());
  p.first_moment = Tensor(initial.shape());
  p.second_moment = Tensor(initial.shape());
  p.value = std::move(initial);
  params_.push_back(std::move(p));
  return params_.size() - 1;
}

ParamId ParameterSet::find(const std::string& name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  throw ValidationError("no parameter named " + name);
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.grad.fill(0.0);
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParameterSet::copy_values_from(const ParameterSet& other) {
  if (other.params_.size() != params_.size()) throw ValidationError("copy_values_from: layout mismatch");
  for (std::size_t i = 0; i < params_.size(); ++i) {
    require_shape(other.params_[i].value, params_[i].value.shape(), "copy_values_from");
    params_[i].value = other.params_[i].value;
  }
}

double ParameterSet::max_abs_difference(const ParameterSet& other) const {
  if (other.params_.size() != params_.size()) throw ValidationError("max_abs_difference: layout mismatch");
  double diff = 0.0;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto a = params_[i].value.data();
    const auto b = other.params_[i].value.data();
    if (a.size() != b.size()) throw ValidationError("max_abs_difference: layout mismatch");
    for (std::size_t j = 0; j < a.size(); ++j) diff = std::max(diff, std::abs(a[j] - b[j]));
  }
  return diff;
}

Tensor uniform_init(Shape shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  Tensor t(std::move(shape));
  for (auto& x : t.data()) x = rng.uniform(-bound, bound);
  return t;
}

void adam_update(ParameterSet& params, const AdamConfig& config, long t) {
  const double correction1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double correction2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  for (auto& p : params.all()) {
    auto value = p.value.data();
    auto grad = p.grad.data();
    auto m = p.first_moment.data();
    auto v = p.second_moment.data();
    for (std::size_t i = 0; i < value.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      value[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.epsilon);
      grad[i] = 0.0;
    }
  }
}

std::string checkpoint_text(const ParameterSet& params, const std::vector<std::string>& metadata) {
  std::string out = "mmrl-checkpoint 1\n";
  for (const auto& line : metadata) out += "# " + line + "\n";
  for (const auto& p : params.all()) {
    out += "param " + p.name + " " + std::to_string(p.value.rank());
    for (const auto d : p.value.shape()) out += " " + std::to_string(d);
    out += "\n";
    const auto values = p.value.data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i != 0) out.push_back(' ');
      out += format_real(values[i]);
    }
    out += "\n";
  }
  return out;
}

void save_checkpoint(const ParameterSet& params, const std::filesystem::path& path,
                     const std::vector<std::string>& metadata) {
  write_file(path, checkpoint_text(params, metadata));
}

void load_checkpoint(ParameterSet& params, const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line != "mmrl-checkpoint 1") {
    throw ValidationError(path.string() + ": not a checkpoint file");
  }
  std::size_t loaded = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream header(line);
    std::string keyword;
    std::string name;
    std::size_t rank = 0;
    header >> keyword >> name >> rank;
    if (keyword != "param" || !header) throw ValidationError(path.string() + ": malformed parameter header");
    Shape shape(rank);
    for (auto& d : shape) header >> d;
    if (!header) throw ValidationError(path.string() + ": malformed shape for " + name);

    auto& param = params[params.find(name)];
    require_shape(param.value, shape, ("checkpoint parameter " + name).c_str());
    std::string values_line;
    if (!std::getline(in, values_line)) throw ValidationError(path.string() + ": missing values for " + name);
    std::istringstream values(values_line);
    for (auto& x : param.value.data()) {
      std::string token;
      if (!(values >> token)) throw ValidationError(path.string() + ": too few values for " + name);
      x = std::strtod(token.c_str(), nullptr);
    }
    ++loaded;
  }
  if (loaded != params.size()) throw ValidationError(path.string() + ": parameter count mismatch");
}

}  // namespace mmrl::nn
