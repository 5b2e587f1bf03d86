#include "bankdensity/ingest.hpp"

#include <cmath>
#include <fstream>
#include <unordered_set>

#include "bankdensity/csv.hpp"
#include "bankdensity/errors.hpp"

namespace bankdensity {

namespace {

std::size_t require_column(const csv::Reader& reader, const std::string& name,
                           std::string_view dataset) {
  auto idx = reader.column(name);
  if (!idx)
    throw InputError("schema mismatch: " + std::string(dataset) + " input has no column '" +
                     name + "'");
  return *idx;
}

std::string_view field(const csv::Row& row, std::size_t idx) {
  return idx < row.size() ? std::string_view(row[idx]) : std::string_view();
}

std::string trimmed(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return std::string(s);
}

void check_drop_ratio(std::size_t dropped, std::size_t total, std::string_view dataset) {
  if (dropped * 2 > total)
    throw InputError("schema mismatch: " + std::to_string(dropped) + " of " +
                     std::to_string(total) + " " + std::string(dataset) +
                     " rows failed validation");
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read '" + path.string() + "'");
  return in;
}

}  // namespace

bool valid_coordinate(double lat, double lon) {
  return std::isfinite(lat) && std::isfinite(lon) && std::abs(lat) <= kMaxAbsLatitude &&
         lon >= -180.0 && lon <= 180.0;
}

Parsed<BankPoint> parse_banks(std::istream& in, const BankColumns& columns) {
  if (!in) throw InputError("bank input stream is not readable");
  csv::Reader reader(in);
  Parsed<BankPoint> out;
  if (reader.header().empty()) return out;

  const auto id_col = require_column(reader, columns.id, "bank");
  const auto lat_col = require_column(reader, columns.lat, "bank");
  const auto lon_col = require_column(reader, columns.lon, "bank");

  std::unordered_set<std::string> seen;
  std::size_t total = 0;
  csv::Row row;
  while (reader.next(row)) {
    ++total;
    auto id = trimmed(field(row, id_col));
    auto lat = csv::parse_double(field(row, lat_col));
    auto lon = csv::parse_double(field(row, lon_col));
    if (id.empty() || !lat || !lon || !valid_coordinate(*lat, *lon)) {
      ++out.dropped;
      continue;
    }
    if (!seen.insert(id).second) throw InputError("duplicate bank id '" + id + "'");
    out.items.push_back({std::move(id), *lat, *lon});
  }
  if (in.bad()) throw InputError("I/O error while reading bank input");
  check_drop_ratio(out.dropped, total, "bank");
  return out;
}

Parsed<TractRecord> parse_tracts(std::istream& in, const TractColumns& columns) {
  if (!in) throw InputError("tract input stream is not readable");
  csv::Reader reader(in);
  Parsed<TractRecord> out;
  if (reader.header().empty()) return out;

  const auto geoid_col = require_column(reader, columns.geoid, "tract");
  const auto lat_col = require_column(reader, columns.lat, "tract");
  const auto lon_col = require_column(reader, columns.lon, "tract");
  const auto pop_col = require_column(reader, columns.population, "tract");
  const auto area_col = require_column(reader, columns.land_area, "tract");
  const auto dep_col = require_column(reader, columns.deprivation, "tract");

  std::unordered_set<std::string> seen;
  std::size_t total = 0;
  csv::Row row;
  while (reader.next(row)) {
    ++total;
    auto geoid = trimmed(field(row, geoid_col));
    auto lat = csv::parse_double(field(row, lat_col));
    auto lon = csv::parse_double(field(row, lon_col));
    auto pop = csv::parse_double(field(row, pop_col));
    auto area = csv::parse_double(field(row, area_col));
    auto dep = csv::parse_double(field(row, dep_col));
    const bool ok = !geoid.empty() && lat && lon && pop && area && dep &&
                    valid_coordinate(*lat, *lon) && std::isfinite(*pop) && *pop >= 0.0 &&
                    std::isfinite(*area) && *area > 0.0 && std::isfinite(*dep);
    if (!ok) {
      ++out.dropped;
      continue;
    }
    if (!seen.insert(geoid).second) throw InputError("duplicate tract geoid '" + geoid + "'");
    out.items.push_back({std::move(geoid), *lat, *lon, *pop, *area, *dep});
  }
  if (in.bad()) throw InputError("I/O error while reading tract input");
  check_drop_ratio(out.dropped, total, "tract");
  return out;
}

Parsed<BankPoint> read_banks(const std::filesystem::path& path, const BankColumns& columns) {
  auto in = open_input(path);
  return parse_banks(in, columns);
}

Parsed<TractRecord> read_tracts(const std::filesystem::path& path, const TractColumns& columns) {
  auto in = open_input(path);
  return parse_tracts(in, columns);
}

std::vector<std::string> read_geoid_list(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto id = trimmed(line);
    if (id.empty() || id[0] == '#') continue;
    ids.push_back(std::move(id));
  }
  return ids;
}

LogPopDensity log_pop_density(const TractRecord& tract) {
  if (tract.population <= 0.0) return {kZeroPopulationLogDensity, true};
  return {std::log(tract.population / tract.land_area), false};
}

}  // namespace bankdensity
