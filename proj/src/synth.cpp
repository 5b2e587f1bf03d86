#include "bankdensity/synth.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "bankdensity/csv.hpp"
#include "bankdensity/errors.hpp"
#include "bankdensity/spatial.hpp"

namespace bankdensity::synth {

namespace {

constexpr double kMilesPerDegree = kEarthRadiusMiles * kDegToRad;
constexpr double kTractPopulationScale = 4000.0;
constexpr int kMaxRejections = 64;

std::string padded_id(char prefix, std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%c%0*zu", prefix, width, i);
  return buf;
}

bool inside(const BoundingBox& b, double lat, double lon) {
  return lat >= b.lat_min && lat <= b.lat_max && lon >= b.lon_min && lon <= b.lon_max;
}

GeoPoint uniform_point(Rng& rng, const BoundingBox& b) {
  const double lat = rng.uniform(b.lat_min, b.lat_max);
  const double lon = rng.uniform(b.lon_min, b.lon_max);
  return {lat, lon};
}

// Gaussian displacement in miles around `c`, converted with the local
// cos(lat) factor; redrawn until it lands inside the box.
GeoPoint scatter(Rng& rng, const BoundingBox& b, GeoPoint c, double sd_miles) {
  const double miles_per_deg_lon = kMilesPerDegree * std::cos(c.lat * kDegToRad);
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    const double dy = rng.normal() * sd_miles;
    const double dx = rng.normal() * sd_miles;
    const double lat = c.lat + dy / kMilesPerDegree;
    const double lon = c.lon + dx / miles_per_deg_lon;
    if (inside(b, lat, lon)) return {lat, lon};
  }
  return c;
}

double to_number(std::string_view key, std::string_view value) {
  auto v = csv::parse_double(value);
  if (!v || !std::isfinite(*v))
    throw InputError("synth: '" + std::string(key) + "' expects a number");
  return *v;
}

int to_count(std::string_view key, std::string_view value) {
  const double v = to_number(key, value);
  if (v < 0 || v != std::floor(v) || v > 1e9)
    throw InputError("synth: '" + std::string(key) + "' expects a nonnegative integer");
  return static_cast<int>(v);
}

}  // namespace

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) return 0;
  const std::uint64_t threshold = (0 - n) % n;
  while (true) {
    const std::uint64_t x = engine_();
    if (x >= threshold) return x % n;
  }
}

void LandscapeSpec::validate() const {
  if (!(bbox.lat_min < bbox.lat_max && bbox.lon_min < bbox.lon_max))
    throw InputError("synth: bbox is empty");
  if (bbox.lat_min < 24.0 || bbox.lat_max > 50.0)
    throw InputError("synth: bbox must lie within latitudes 24 to 50");
  if (bbox.lon_min < -180.0 || bbox.lon_max > 180.0)
    throw InputError("synth: bbox longitudes out of range");
  if (n_clusters < 0 || background_points < 0 || points_per_cluster < 0.0)
    throw InputError("synth: counts must be nonnegative");
  if (n_tracts <= 0) throw InputError("synth: at least one tract is required");
  if (!(popdens_lo < popdens_hi)) throw InputError("synth: popdens range is empty");
  if (!(cluster_sd >= 0.0) || !(deprivation_noise_sd >= 0.0))
    throw InputError("synth: standard deviations must be nonnegative");
  if (!(deprivation_radius > 0.0)) throw InputError("synth: deprivation_radius must be positive");
  if (!(zero_population_fraction >= 0.0 && zero_population_fraction <= 1.0) ||
      !(urban_tract_fraction >= 0.0 && urban_tract_fraction <= 1.0))
    throw InputError("synth: fractions must lie in [0, 1]");
}

Landscape generate(const LandscapeSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Landscape out;
  const auto& b = spec.bbox;

  std::vector<GeoPoint> centers;
  for (int c = 0; c < spec.n_clusters; ++c) centers.push_back(uniform_point(rng, b));

  std::vector<GeoPoint> points;
  const auto max_size = static_cast<std::uint64_t>(
      std::max(1.0, std::round(2.0 * spec.points_per_cluster - 1.0)));
  for (const auto& c : centers) {
    const auto size = spec.points_per_cluster > 0.0 ? 1 + rng.below(max_size) : 0;
    for (std::uint64_t k = 0; k < size; ++k) points.push_back(scatter(rng, b, c, spec.cluster_sd));
  }
  for (int k = 0; k < spec.background_points; ++k) points.push_back(uniform_point(rng, b));

  out.banks.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    out.banks.push_back({padded_id('B', i + 1, 7), points[i].lat, points[i].lon});

  const double mid = 0.5 * (spec.popdens_lo + spec.popdens_hi);
  for (int t = 0; t < spec.n_tracts; ++t) {
    GeoPoint where;
    double log_density;
    const bool urban = !centers.empty() && rng.uniform() < spec.urban_tract_fraction;
    if (urban) {
      where = scatter(rng, b, centers[rng.below(centers.size())], spec.cluster_sd);
      log_density = rng.uniform(mid, spec.popdens_hi);
    } else {
      where = uniform_point(rng, b);
      log_density = rng.uniform(spec.popdens_lo, spec.popdens_hi);
    }
    const bool empty = rng.uniform() < spec.zero_population_fraction;
    TractRecord tract;
    tract.geoid = padded_id('T', static_cast<std::size_t>(t + 1), 7);
    tract.lat = where.lat;
    tract.lon = where.lon;
    tract.land_area = kTractPopulationScale / std::exp(log_density);
    tract.population = empty ? 0.0 : kTractPopulationScale;
    out.tracts.push_back(std::move(tract));
  }

  // Deprivation from local bank density; the noise draws follow the tract
  // draws so the spatial queries cannot perturb the stream.
  const GeoIndex index(out.banks, spec.deprivation_radius);
  const double area = circle_area(spec.deprivation_radius);
  const double radius[] = {spec.deprivation_radius};
  std::uint32_t count[1];
  for (auto& tract : out.tracts) {
    index.count_within({tract.lat, tract.lon}, radius, count);
    tract.deprivation = spec.deprivation_coef * (count[0] / area) +
                        spec.deprivation_noise_sd * rng.normal();
  }
  return out;
}

void apply_setting(LandscapeSpec& s, std::string_view key, std::string_view value) {
  if (key == "seed") {
    std::uint64_t seed = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), seed);
    if (ec != std::errc() || ptr != value.data() + value.size())
      throw InputError("synth: seed must be a nonnegative integer");
    s.seed = seed;
  } else if (key == "lat_min") {
    s.bbox.lat_min = to_number(key, value);
  } else if (key == "lat_max") {
    s.bbox.lat_max = to_number(key, value);
  } else if (key == "lon_min") {
    s.bbox.lon_min = to_number(key, value);
  } else if (key == "lon_max") {
    s.bbox.lon_max = to_number(key, value);
  } else if (key == "n_clusters") {
    s.n_clusters = to_count(key, value);
  } else if (key == "points_per_cluster") {
    s.points_per_cluster = to_number(key, value);
  } else if (key == "cluster_sd") {
    s.cluster_sd = to_number(key, value);
  } else if (key == "background_points") {
    s.background_points = to_count(key, value);
  } else if (key == "n_tracts") {
    s.n_tracts = to_count(key, value);
  } else if (key == "popdens_lo") {
    s.popdens_lo = to_number(key, value);
  } else if (key == "popdens_hi") {
    s.popdens_hi = to_number(key, value);
  } else if (key == "zero_population_fraction") {
    s.zero_population_fraction = to_number(key, value);
  } else if (key == "deprivation_coef") {
    s.deprivation_coef = to_number(key, value);
  } else if (key == "deprivation_noise_sd") {
    s.deprivation_noise_sd = to_number(key, value);
  } else if (key == "deprivation_radius") {
    s.deprivation_radius = to_number(key, value);
  } else if (key == "urban_tract_fraction") {
    s.urban_tract_fraction = to_number(key, value);
  } else {
    throw InputError("synth: unknown key '" + std::string(key) + "'");
  }
}

void write_banks_csv(std::ostream& out, const std::vector<BankPoint>& banks) {
  csv::write_row(out, {"id", "latitude", "longitude"});
  for (const auto& b : banks)
    csv::write_row(out, {b.id, csv::format_double(b.lat), csv::format_double(b.lon)});
}

void write_tracts_csv(std::ostream& out, const std::vector<TractRecord>& tracts) {
  csv::write_row(out, {"geoid", "centroid_lat", "centroid_lon", "population", "land_area_sqmi",
                       "deprivation"});
  for (const auto& t : tracts)
    csv::write_row(out, {t.geoid, csv::format_double(t.lat), csv::format_double(t.lon),
                         csv::format_double(t.population), csv::format_double(t.land_area),
                         csv::format_double(t.deprivation)});
}

void write_landscape(const Landscape& landscape, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream banks(dir / "banks.csv", std::ios::binary);
  std::ofstream tracts(dir / "tracts.csv", std::ios::binary);
  if (!banks || !tracts) throw InputError("cannot write landscape into '" + dir.string() + "'");
  write_banks_csv(banks, landscape.banks);
  write_tracts_csv(tracts, landscape.tracts);
  if (!banks || !tracts) throw InputError("write failed in '" + dir.string() + "'");
}

}  // namespace bankdensity::synth
