#include "hpm/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

namespace hpm {

namespace {

std::string parse_message(std::size_t line, const std::string& reason, const std::string& file) {
  std::string where = file;
  if (line > 0) where += (file.empty() ? "line " : ":") + std::to_string(line);
  return where.empty() ? reason : where + ": " + reason;
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& reason, const std::string& file)
    : std::runtime_error(parse_message(line, reason, file)), line_(line), reason_(reason) {}

namespace csv {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view chomp(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  std::string s(buf);
  // "-0.00" reads badly in tables.
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

std::string exact(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::size_t line, std::string_view field) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end || text.empty()) {
    throw ParseError(line, "invalid number '" + std::string(text) + "' in field " +
                               std::string(field));
  }
  return v;
}

long long parse_int(std::string_view text, std::size_t line, std::string_view field) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  const auto res = std::from_chars(text.data(), end, v);
  if (res.ec != std::errc{} || res.ptr != end || text.empty()) {
    throw ParseError(line, "invalid integer '" + std::string(text) + "' in field " +
                               std::string(field));
  }
  return v;
}

std::size_t Table::column(std::string_view name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw ParseError(1, "missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

Table read_table(std::istream& in, const std::vector<std::string>& expected_header) {
  Table t;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty file (missing header)");
  ++line_no;
  for (auto f : split(chomp(line), ',')) t.header.emplace_back(f);
  if (!expected_header.empty() && t.header != expected_header) {
    throw ParseError(1, "unexpected header '" + std::string(chomp(line)) + "', expected '" +
                            join(expected_header) + "'");
  }
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = chomp(line);
    if (body.empty()) continue;
    const auto fields = split(body, ',');
    if (fields.size() != t.header.size()) {
      throw ParseError(line_no, "expected " + std::to_string(t.header.size()) + " fields, got " +
                                    std::to_string(fields.size()));
    }
    std::vector<std::string> row;
    row.reserve(fields.size());
    for (auto f : fields) row.emplace_back(f);
    t.rows.push_back(std::move(row));
    t.line_numbers.push_back(line_no);
  }
  return t;
}

Table read_table_file(const std::string& path, const std::vector<std::string>& expected_header) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return read_table(in, expected_header);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.reason(), path);
  }
}

std::string join(const std::vector<std::string>& fields, char sep) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out += sep;
    out += fields[i];
  }
  return out;
}

}  // namespace csv

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace hpm
