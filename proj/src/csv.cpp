#include "bankdensity/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

namespace bankdensity::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool is_blank(const Row& row) {
  for (const auto& f : row)
    if (!trim(f).empty()) return false;
  return true;
}

}  // namespace

Reader::Reader(std::istream& in) : in_(in) {
  Row row;
  while (read_record(row)) {
    if (is_blank(row)) continue;
    if (row.size() == 1 && !row[0].empty() && row[0][0] == '#') continue;
    if (!row.empty() && row[0].starts_with("\xEF\xBB\xBF")) row[0].erase(0, 3);
    for (auto& f : row) f = std::string(trim(f));
    header_ = std::move(row);
    break;
  }
}

bool Reader::read_record(Row& row) {
  row.clear();
  if (!in_.good() || in_.peek() == std::char_traits<char>::eof()) return false;
  line_ = next_line_;

  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in_.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in_.peek() == '"') {
          in_.get(c);
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++next_line_;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      ++next_line_;
      break;
    } else if (c == '\r') {
      if (in_.peek() == '\n') continue;
      field.push_back(c);
    } else {
      field.push_back(c);
    }
  }
  if (!any) return false;
  row.push_back(std::move(field));
  return true;
}

bool Reader::next(Row& row) {
  while (read_record(row)) {
    if (!is_blank(row)) return true;
  }
  return false;
}

std::optional<std::size_t> Reader::column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i)
    if (header_[i] == name) return i;
  return std::nullopt;
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "NA";
  if (std::isinf(value)) return value > 0 ? "Inf" : "-Inf";
  if (value == 0.0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  (void)ec;
  return std::string(buf, ptr);
}

std::string escape_field(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out << ',';
    out << escape_field(row[i]);
  }
  out << '\n';
}

}  // namespace bankdensity::csv
