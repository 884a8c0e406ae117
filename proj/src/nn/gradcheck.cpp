// SPDX-License-Identifier: Apache-2.0
#include "mmrl/nn/gradcheck.hpp"

#include <cmath>
#include <vector>

#include "mmrl/common/errors.hpp"

namespace mmrl::nn {
namespace {

void merge(GradCheckReport& total, const GradCheckReport& part, std::size_t offset) {
  if (part.max_relative_error > total.max_relative_error || !std::isfinite(part.max_relative_error)) {
    total.max_relative_error = part.max_relative_error;
    total.worst_index = offset + part.worst_index;
  }
  total.checked += part.checked;
  total.passed = total.passed && part.passed;
}

}  // namespace

GradCheckReport finite_difference_check(const std::function<double()>& f, std::span<double> x,
                                        std::span<const double> analytic, double tolerance, double h) {
  if (analytic.size() != x.size()) throw ValidationError("finite_difference_check: gradient size mismatch");
  GradCheckReport report;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double plus = f();
    x[i] = saved - h;
    const double minus = f();
    x[i] = saved;
    const double numeric = (plus - minus) / (2.0 * h);
    const double a = analytic[i];
    const double rel = 2.0 * std::abs(a - numeric) / (std::abs(a) + std::abs(numeric) + 1e-12);
    if (rel > report.max_relative_error || !std::isfinite(rel)) {
      report.max_relative_error = rel;
      report.worst_index = i;
    }
    ++report.checked;
  }
  report.passed = std::isfinite(report.max_relative_error) && report.max_relative_error < tolerance;
  return report;
}

GradCheckReport check_parameter_gradients(ParameterSet& params, const std::function<double()>& loss,
                                          const std::function<void()>& backward, double tolerance, double h) {
  params.zero_grad();
  backward();
  GradCheckReport total;
  std::size_t offset = 0;
  for (auto& p : params.all()) {
    const std::vector<double> analytic(p.grad.data().begin(), p.grad.data().end());
    const auto part = finite_difference_check(loss, p.value.data(), analytic, tolerance, h);
    merge(total, part, offset);
    offset += p.value.size();
  }
  total.passed = total.passed && total.checked > 0;
  params.zero_grad();
  return total;
}

}  // namespace mmrl::nn
