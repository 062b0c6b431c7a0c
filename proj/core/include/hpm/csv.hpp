#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hpm {

/// Raised for malformed input files. `line()` is 1-based; 0 when unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& reason, const std::string& file = {});
  std::size_t line() const noexcept { return line_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

namespace csv {

std::vector<std::string_view> split(std::string_view text, char sep);

/// Strips a trailing '\r' so files written on Windows still parse.
std::string_view chomp(std::string_view line);

/// Fixed-notation formatting, e.g. fixed(0.6849, 2) == "0.68".
std::string fixed(double value, int decimals);

/// Shortest text that round-trips the double exactly.
std::string exact(double value);

double parse_double(std::string_view text, std::size_t line, std::string_view field);
long long parse_int(std::string_view text, std::size_t line, std::string_view field);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // source line of each row

  std::size_t column(std::string_view name) const;
};

/// Reads a header-first CSV. Throws ParseError when the header differs from
/// `expected_header` (if given) or a row has the wrong field count.
Table read_table(std::istream& in, const std::vector<std::string>& expected_header = {});
Table read_table_file(const std::string& path,
                      const std::vector<std::string>& expected_header = {});

std::string join(const std::vector<std::string>& fields, char sep = ',');

}  // namespace csv

/// 64-bit FNV-1a. Used for content hashes in manifests and catalog checks.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);
std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace hpm
