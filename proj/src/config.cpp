#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bankdensity/csv.hpp"
#include "bankdensity/errors.hpp"
#include "bankdensity/ingest.hpp"

namespace bankdensity {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double to_number(std::string_view key, std::string_view value) {
  auto v = csv::parse_double(value);
  if (!v || !std::isfinite(*v))
    throw InputError("config: '" + std::string(key) + "' expects a number, got '" +
                     std::string(value) + "'");
  return *v;
}

long long to_integer(std::string_view key, std::string_view value) {
  value = trim(value);
  long long out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw InputError("config: '" + std::string(key) + "' expects an integer, got '" +
                     std::string(value) + "'");
  return out;
}

// start:stop:step with an integer number of steps; values are start + i*step
// so multiples of binary-exact steps stay exact.
std::vector<double> parse_range(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    auto colon = text.find(':', pos);
    parts.push_back(text.substr(pos, colon - pos));
    if (colon == std::string_view::npos) break;
    pos = colon + 1;
  }
  if (parts.size() != 3) throw InputError("config: range must be start:stop:step");
  const double start = to_number("range", parts[0]);
  const double stop = to_number("range", parts[1]);
  const double step = to_number("range", parts[2]);
  if (step <= 0.0 || stop < start) throw InputError("config: invalid range");
  const auto steps = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
  std::vector<double> out;
  for (long long i = 0; i <= steps; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

std::string join(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += csv::format_double(values[i]);
  }
  return out;
}

bool contains(const std::vector<double>& values, double v) {
  return std::find(values.begin(), values.end(), v) != values.end();
}

}  // namespace

std::vector<double> parse_number_list(std::string_view text) {
  text = trim(text);
  if (text.find(':') != std::string_view::npos) return parse_range(text);
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto comma = text.find(',', pos);
    auto item = trim(text.substr(pos, comma - pos));
    if (!item.empty()) out.push_back(to_number("list", item));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<double> default_radius_schedule() {
  std::vector<double> radii;
  for (int i = 1; i <= 80; ++i) radii.push_back(0.25 * i);
  return radii;
}

RunConfig default_config() {
  RunConfig config;
  config.radius_schedule = default_radius_schedule();
  return config;
}

void RunConfig::validate_schedule() const {
  if (radius_schedule.empty()) throw InputError("config: radius_schedule is empty");
  for (std::size_t i = 0; i < radius_schedule.size(); ++i) {
    if (!(radius_schedule[i] > 0.0) || !std::isfinite(radius_schedule[i]))
      throw InputError("config: radii must be positive");
    if (i && !(radius_schedule[i] > radius_schedule[i - 1]))
      throw InputError("config: radius_schedule must be strictly ascending");
  }
  for (double p : quantile_probs)
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("config: quantile_probs must lie in [0, 1]");
}

void RunConfig::validate() const {
  validate_schedule();
  if (headline_radii.empty()) throw InputError("config: headline_radii is empty");
  for (double r : headline_radii)
    if (!contains(radius_schedule, r))
      throw InputError("config: headline radius " + csv::format_double(r) +
                       " is not in radius_schedule");
  if (segment_count < 2) throw InputError("config: segment_count must be at least 2");
  if (!(desert_fraction > 0.0 && desert_fraction < 1.0))
    throw InputError("config: desert_fraction must lie in (0, 1)");
  if (!(significance_level > 0.0 && significance_level < 1.0))
    throw InputError("config: significance_level must lie in (0, 1)");
}

void apply_setting(RunConfig& c, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "radius_schedule") {
    c.radius_schedule = parse_number_list(value);
  } else if (key == "headline_radii") {
    c.headline_radii = parse_number_list(value);
  } else if (key == "segment_count") {
    c.segment_count = static_cast<int>(to_integer(key, value));
  } else if (key == "desert_fraction") {
    c.desert_fraction = to_number(key, value);
  } else if (key == "quantile_probs") {
    c.quantile_probs = parse_number_list(value);
  } else if (key == "significance_level") {
    c.significance_level = to_number(key, value);
  } else if (key == "rng_seed") {
    auto seed = to_integer(key, value);
    if (seed < 0) throw InputError("config: rng_seed must be nonnegative");
    c.rng_seed = static_cast<std::uint64_t>(seed);
  } else if (key == "threads") {
    auto n = to_integer(key, value);
    if (n < 0) throw InputError("config: threads must be nonnegative");
    c.threads = static_cast<unsigned>(n);
  } else if (key == "bank_id_column") {
    c.bank_columns.id = value;
  } else if (key == "bank_lat_column") {
    c.bank_columns.lat = value;
  } else if (key == "bank_lon_column") {
    c.bank_columns.lon = value;
  } else if (key == "tract_geoid_column") {
    c.tract_columns.geoid = value;
  } else if (key == "tract_lat_column") {
    c.tract_columns.lat = value;
  } else if (key == "tract_lon_column") {
    c.tract_columns.lon = value;
  } else if (key == "tract_population_column") {
    c.tract_columns.population = value;
  } else if (key == "tract_land_area_column") {
    c.tract_columns.land_area = value;
  } else if (key == "tract_deprivation_column") {
    c.tract_columns.deprivation = value;
  } else {
    throw InputError("config: unknown key '" + std::string(key) + "'");
  }
}

void load_config(std::istream& in, RunConfig& config) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    auto eq = text.find('=');
    if (eq == std::string_view::npos)
      throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
    apply_setting(config, text.substr(0, eq), text.substr(eq + 1));
  }
}

void load_config_file(const std::filesystem::path& path, RunConfig& config) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config '" + path.string() + "'");
  load_config(in, config);
}

std::string canonical_config(const RunConfig& c) {
  std::ostringstream out;
  out << "radius_schedule=" << join(c.radius_schedule) << '\n'
      << "headline_radii=" << join(c.headline_radii) << '\n'
      << "segment_count=" << c.segment_count << '\n'
      << "desert_fraction=" << csv::format_double(c.desert_fraction) << '\n'
      << "quantile_probs=" << join(c.quantile_probs) << '\n'
      << "significance_level=" << csv::format_double(c.significance_level) << '\n'
      << "rng_seed=" << c.rng_seed << '\n'
      << "bank_columns=" << c.bank_columns.id << ',' << c.bank_columns.lat << ','
      << c.bank_columns.lon << '\n'
      << "tract_columns=" << c.tract_columns.geoid << ',' << c.tract_columns.lat << ','
      << c.tract_columns.lon << ',' << c.tract_columns.population << ','
      << c.tract_columns.land_area << ',' << c.tract_columns.deprivation << '\n';
  return out.str();
}

}  // namespace bankdensity
