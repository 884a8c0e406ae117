// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace mmrl {

/// Decimal text with 9 significant digits ("%.9g"), the on-disk real format.
std::string format_real(double value);

/// Rounds a value to what format_real/parse would give back, so data that
/// will be serialized roundtrips exactly.
double quantize_real(double value);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

std::string read_file(const std::filesystem::path& path);

/// Writes bytes verbatim, creating parent directories. Throws RuntimeFailure.
void write_file(const std::filesystem::path& path, std::string_view bytes);

/// Digest over every regular file below root (relative path + contents,
/// in sorted path order).
std::string tree_hash(const std::filesystem::path& root);

}  // namespace mmrl
