#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace restool::csv {

using Row = std::vector<std::string>;

struct Table {
  Row header;
  std::vector<Row> rows;
  /// 1-based source line of each row, for error messages.
  std::vector<std::size_t> lines;

  /// Index of a header column, or throws DataError naming `source`.
  std::size_t column(std::string_view name, const std::string& source) const;
};

/// Parses RFC 4180-style CSV (quoted fields, CRLF tolerated, UTF-8 BOM stripped).
/// Blank lines are skipped. Every row must have as many fields as the header.
Table parse(std::string_view text, const std::string& source);

Table read_file(const std::filesystem::path& path);

/// 17 significant digits; parsing the text back yields the identical double.
std::string format_number(double v);

/// Strict full-string number parse. Throws DataError on trailing junk.
double parse_number(std::string_view text, const std::string& context);
long parse_integer(std::string_view text, const std::string& context);

std::string trim(std::string_view s);

void write_row(std::ostream& out, const Row& row);

} // namespace restool::csv
