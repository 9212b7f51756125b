#pragma once

#include "mareg/model_core.hpp"

#include <map>
#include <string>
#include <string_view>

namespace mareg::cli {

/// Reads a comma-separated numeric matrix. A first row containing any
/// non-numeric field is treated as a header and skipped. Blank lines are ignored.
Matrix read_csv_matrix(const std::string& path);
Matrix parse_csv_matrix(std::string_view text, const std::string& source = "<input>");

/// Writes `m` with 17 significant digits so that values round-trip exactly.
std::string format_csv_matrix(const Matrix& m);
void write_csv_matrix(const std::string& path, const Matrix& m);

/// Writes to `path` + ".tmp" and renames over `path`.
void write_file_atomically(const std::string& path, const std::string& contents);

/// Flat `key = value` document; '#' starts a comment. Keys are flag names without "--".
std::map<std::string, std::string> parse_key_value(std::string_view text, const std::string& source);
std::map<std::string, std::string> read_key_value_file(const std::string& path);

}  // namespace mareg::cli
