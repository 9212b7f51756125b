#include "cli/io.hpp"

#include "mareg/errors.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace mareg::cli {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Matrix parse_csv_matrix(std::string_view text, const std::string& source) {
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 0;
  bool first_content_line = true;
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    const std::string_view line = trim(text.substr(0, eol));
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (line.empty()) continue;

    std::vector<double> row;
    bool numeric = true;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      const std::string_view field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
      double v = 0.0;
      if (!parse_double(field, v)) numeric = false;
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!numeric) {
      if (first_content_line) {
        first_content_line = false;
        continue;
      }
      throw ValidationError(source + ":" + std::to_string(line_no) + ": non-numeric field");
    }
    first_content_line = false;
    if (!rows.empty() && row.size() != rows.front().size()) {
      std::ostringstream os;
      os << source << ":" << line_no << ": expected " << rows.front().size() << " fields, found "
         << row.size();
      throw ValidationError(os.str());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(source + ": no numeric rows");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  if (!m.allFinite()) throw ValidationError(source + ": non-finite value");
  return m;
}

Matrix read_csv_matrix(const std::string& path) { return parse_csv_matrix(slurp(path), path); }

std::string format_csv_matrix(const Matrix& m) {
  std::string out;
  char buf[40];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      if (j > 0) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void write_csv_matrix(const std::string& path, const Matrix& m) {
  write_file_atomically(path, format_csv_matrix(m));
}

void write_file_atomically(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + tmp + "'");
    out << contents;
    out.flush();
    if (!out) throw ValidationError("failed writing '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw ValidationError("cannot move output into place at '" + path + "'");
  }
}

std::map<std::string, std::string> parse_key_value(std::string_view text, const std::string& source) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError(source + ":" + std::to_string(line_no) + ": expected key = value");
    }
    std::string_view key = trim(line.substr(0, eq));
    if (key.substr(0, 2) == "--") key.remove_prefix(2);
    if (key.empty()) throw ValidationError(source + ":" + std::to_string(line_no) + ": empty key");
    out[std::string(key)] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

std::map<std::string, std::string> read_key_value_file(const std::string& path) {
  return parse_key_value(slurp(path), path);
}

}  // namespace mareg::cli
