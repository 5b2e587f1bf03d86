#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bankdensity::csv {

using Row = std::vector<std::string>;

// Minimal RFC 4180 reader: comma separated, double-quoted fields with ""
// escapes, LF or CRLF line endings, optional UTF-8 BOM. Lines starting with
// '#' before the header are treated as metadata and skipped.
class Reader {
 public:
  explicit Reader(std::istream& in);

  // Header row, empty if the stream held no rows at all.
  const Row& header() const { return header_; }

  // Next data row; blank lines are skipped. Returns false at end of stream.
  bool next(Row& row);

  // 1-based line number of the row most recently returned.
  std::size_t line() const { return line_; }

  std::optional<std::size_t> column(std::string_view name) const;

 private:
  bool read_record(Row& row);

  std::istream& in_;
  Row header_;
  std::size_t line_ = 0;
  std::size_t next_line_ = 1;
};

std::optional<double> parse_double(std::string_view text);

// Shortest decimal that parses back to the same double, locale free.
// NaN is written as "NA".
std::string format_double(double value);

// Quotes a field only when it contains a comma, quote or line break.
std::string escape_field(std::string_view field);

void write_row(std::ostream& out, const Row& row);

}  // namespace bankdensity::csv
