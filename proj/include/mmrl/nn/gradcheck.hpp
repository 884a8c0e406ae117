// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "mmrl/nn/parameters.hpp"

namespace mmrl::nn {

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  bool passed = true;
};

/// Central differences with step h on every coordinate of x (perturbed in
/// place and restored), compared with the analytic gradient using
/// 2|a - n| / (|a| + |n| + 1e-12).
GradCheckReport finite_difference_check(const std::function<double()>& f, std::span<double> x,
                                        std::span<const double> analytic, double tolerance, double h = 1e-5);

/// Runs `backward` (which must leave dL/dparam in the gradients) and checks
/// every parameter coordinate of `loss` against it.
GradCheckReport check_parameter_gradients(ParameterSet& params, const std::function<double()>& loss,
                                          const std::function<void()>& backward, double tolerance,
                                          double h = 1e-5);

}  // namespace mmrl::nn
