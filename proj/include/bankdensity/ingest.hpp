#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace bankdensity {

// Coordinates beyond this latitude are rejected at ingest; the grid index
// assumes a mid-latitude study region.
inline constexpr double kMaxAbsLatitude = 72.0;

// Log density assigned to tracts with zero population.
inline constexpr double kZeroPopulationLogDensity = -10.0;

struct BankPoint {
  std::string id;
  double lat = 0.0;
  double lon = 0.0;
};

struct TractRecord {
  std::string geoid;
  double lat = 0.0;
  double lon = 0.0;
  double population = 0.0;
  double land_area = 0.0;  // square miles
  double deprivation = 0.0;
};

struct LogPopDensity {
  double value = 0.0;
  bool clamped = false;
};

struct BankColumns {
  std::string id = "id";
  std::string lat = "latitude";
  std::string lon = "longitude";
};

struct TractColumns {
  std::string geoid = "geoid";
  std::string lat = "centroid_lat";
  std::string lon = "centroid_lon";
  std::string population = "population";
  std::string land_area = "land_area_sqmi";
  std::string deprivation = "deprivation";
};

template <class T>
struct Parsed {
  std::vector<T> items;
  std::size_t dropped = 0;
};

// Rows with blank, unparseable or out-of-range coordinates are dropped and
// counted. Duplicate ids, missing columns, or more than half the rows dropped
// raise InputError.
Parsed<BankPoint> parse_banks(std::istream& in, const BankColumns& columns = {});
Parsed<TractRecord> parse_tracts(std::istream& in, const TractColumns& columns = {});

Parsed<BankPoint> read_banks(const std::filesystem::path& path, const BankColumns& columns = {});
Parsed<TractRecord> read_tracts(const std::filesystem::path& path, const TractColumns& columns = {});

// One geoid per line; blank lines and '#' comments ignored.
std::vector<std::string> read_geoid_list(const std::filesystem::path& path);

LogPopDensity log_pop_density(const TractRecord& tract);

bool valid_coordinate(double lat, double lon);

// The full set of tunables for one analysis run.
struct RunConfig {
  std::vector<double> radius_schedule;  // miles, strictly ascending
  std::vector<double> headline_radii{2.0, 5.0, 10.0, 20.0};
  int segment_count = 10;
  double desert_fraction = 0.05;
  std::vector<double> quantile_probs{0.05, 0.10};
  double significance_level = 0.05;
  std::uint64_t rng_seed = 20190630;
  // 0 = one worker per hardware thread. Excluded from the fingerprint since
  // outputs do not depend on it.
  unsigned threads = 0;
  BankColumns bank_columns;
  TractColumns tract_columns;

  void validate() const;
  // Schedule and probabilities only; enough for the curve and subset commands.
  void validate_schedule() const;
};

// 0.25, 0.50, ..., 20.00 miles.
std::vector<double> default_radius_schedule();

RunConfig default_config();

// Applies one `key = value` setting. Lists are comma separated; the radius
// schedule also accepts `start:stop:step`. Unknown keys raise InputError.
void apply_setting(RunConfig& config, std::string_view key, std::string_view value);

// Reads a flat key-value document (see README) on top of `config`.
void load_config(std::istream& in, RunConfig& config);
void load_config_file(const std::filesystem::path& path, RunConfig& config);

// Canonical text of every output-affecting field; input to the fingerprint.
std::string canonical_config(const RunConfig& config);

std::vector<double> parse_number_list(std::string_view text);

}  // namespace bankdensity
