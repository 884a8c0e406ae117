// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "mmrl/common/rng.hpp"
#include "mmrl/nn/tensor.hpp"

namespace mmrl::nn {

/// A trainable tensor with its gradient and Adam moments (all same shape).
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  Tensor first_moment;
  Tensor second_moment;
};

/// Stable index of a parameter inside its ParameterSet. Layers hold ids, not
/// references, so copying a ParameterSet copies the whole network state.
using ParamId = std::size_t;

class ParameterSet {
 public:
  /// Adds a parameter; names must be unique.
  ParamId add(std::string name, Tensor initial);

  Parameter& operator[](ParamId id) { return params_.at(id); }
  const Parameter& operator[](ParamId id) const { return params_.at(id); }

  std::size_t size() const { return params_.size(); }
  std::vector<Parameter>& all() { return params_; }
  const std::vector<Parameter>& all() const { return params_; }

  /// Throws ValidationError when absent.
  ParamId find(const std::string& name) const;

  void zero_grad();
  std::size_t scalar_count() const;

  /// Copies values (not gradients or moments) from a set with identical layout.
  void copy_values_from(const ParameterSet& other);

  /// Largest |a - b| over all parameter values of two identically laid out sets.
  double max_abs_difference(const ParameterSet& other) const;

 private:
  std::vector<Parameter> params_;
};

/// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in))
Tensor uniform_init(Shape shape, std::size_t fan_in, Rng& rng);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam step number t (>= 1) on every parameter, then zeroes
/// the gradients.
void adam_update(ParameterSet& params, const AdamConfig& config, long t);

/// Text checkpoint:
///   mmrl-checkpoint 1
///   # <metadata line>            (optional, any number)
///   param <name> <rank> <dims...>
///   <values, 9 significant digits, space separated>
void save_checkpoint(const ParameterSet& params, const std::filesystem::path& path,
                     const std::vector<std::string>& metadata = {});
std::string checkpoint_text(const ParameterSet& params, const std::vector<std::string>& metadata = {});

/// Loads values into a set with the same names and shapes.
void load_checkpoint(ParameterSet& params, const std::filesystem::path& path);

}  // namespace mmrl::nn
