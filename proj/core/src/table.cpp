#include "mareg/table.hpp"

#include "mareg/errors.hpp"

#include <charconv>
#include <cstdio>
#include <sstream>

namespace mareg {
namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string weight_row_label(const EstimatorSpec& est) { return "avg_w_" + est.label(); }

}  // namespace

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

std::string emit_table(const McResult& result, TableFormat format) {
  if (result.estimators.empty() || result.point_labels.empty()) {
    throw ValidationError("cannot emit an empty result table");
  }
  const std::size_t n_points = result.point_labels.size();
  std::ostringstream os;

  if (format == TableFormat::csv) {
    os << "estimator";
    for (const auto& label : result.point_labels) os << ',' << label;
    os << '\n';
    for (std::size_t e = 0; e < result.estimators.size(); ++e) {
      os << result.estimators[e].label();
      for (std::size_t j = 0; j < n_points; ++j) os << ',' << format_fixed(result.cell(e, j).mean_mse, 5);
      os << '\n';
      if (result.estimators[e].reports_weight()) {
        os << weight_row_label(result.estimators[e]);
        for (std::size_t j = 0; j < n_points; ++j) {
          os << ',' << format_fixed(result.cell(e, j).mean_weight.value_or(0.0), 5);
        }
        os << '\n';
      }
    }
    return os.str();
  }

  // Best = smallest mean after rounding to five decimals; ties are all marked.
  std::vector<std::string> best(n_points);
  for (std::size_t j = 0; j < n_points; ++j) {
    for (std::size_t e = 0; e < result.estimators.size(); ++e) {
      const std::string s = format_fixed(result.cell(e, j).mean_mse, 5);
      if (best[j].empty() || std::stod(s) < std::stod(best[j])) best[j] = s;
    }
  }
  os << "| estimator |";
  for (const auto& label : result.point_labels) os << ' ' << label << " |";
  os << "\n|---|";
  for (std::size_t j = 0; j < n_points; ++j) os << "---|";
  os << '\n';
  for (std::size_t e = 0; e < result.estimators.size(); ++e) {
    os << "| " << result.estimators[e].label() << " |";
    for (std::size_t j = 0; j < n_points; ++j) {
      const std::string s = format_fixed(result.cell(e, j).mean_mse, 5);
      if (s == best[j]) {
        os << " **" << s << "** |";
      } else {
        os << ' ' << s << " |";
      }
    }
    os << '\n';
    if (result.estimators[e].reports_weight()) {
      os << "| (" << result.estimators[e].label() << " weight) |";
      for (std::size_t j = 0; j < n_points; ++j) {
        os << " (" << format_fixed(result.cell(e, j).mean_weight.value_or(0.0), 5) << ") |";
      }
      os << '\n';
    }
  }
  return os.str();
}

ParsedTable parse_table_csv(std::string_view text) {
  ParsedTable table;
  bool header = true;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (header) {
      for (std::size_t i = 1; i < fields.size(); ++i) table.columns.emplace_back(fields[i]);
      header = false;
      continue;
    }
    if (fields.size() != table.columns.size() + 1) {
      throw ValidationError("table line " + std::to_string(line_no) + " has the wrong number of fields");
    }
    table.row_labels.emplace_back(fields[0]);
    std::vector<double> row;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(fields[i].data(), fields[i].data() + fields[i].size(), v);
      if (ec != std::errc{} || ptr != fields[i].data() + fields[i].size()) {
        throw ValidationError("table line " + std::to_string(line_no) + " has a non-numeric cell");
      }
      row.push_back(v);
    }
    table.values.push_back(std::move(row));
  }
  if (header) throw ValidationError("table is empty");
  return table;
}

}  // namespace mareg
