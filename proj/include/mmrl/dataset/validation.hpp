// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mmrl::dataset {

struct Violation {
  std::string file;
  std::size_t line = 0;  // 1-based; 0 when not tied to a line
  std::string field;     // empty when not tied to a field
  std::string message;

  std::string describe() const;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  void add(std::string file, std::size_t line, std::string field, std::string message) {
    violations.push_back({std::move(file), line, std::move(field), std::move(message)});
  }
  std::string describe() const;
};

}  // namespace mmrl::dataset
