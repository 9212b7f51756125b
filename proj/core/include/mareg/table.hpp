#pragma once

#include "mareg/harness.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace mareg {

enum class TableFormat { csv, markdown };

/// Renders a result with estimators as rows and scenario points as columns.
/// Means use five decimals; plugin and oracle rows are followed by a row of
/// average weights. Markdown bolds the smallest 5-decimal mean in each column.
std::string emit_table(const McResult& result, TableFormat format);

/// Fixed-point rendering with `decimals` places and '.' as the separator.
std::string format_fixed(double value, int decimals);

struct ParsedTable {
  std::vector<std::string> columns;
  std::vector<std::string> row_labels;
  std::vector<std::vector<double>> values;
};

/// Parses the CSV produced by emit_table. Throws ValidationError on malformed input.
ParsedTable parse_table_csv(std::string_view text);

}  // namespace mareg
