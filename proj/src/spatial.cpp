#include "bankdensity/spatial.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "bankdensity/errors.hpp"

namespace bankdensity {

namespace {

// Miles per degree of latitude is R * pi / 180 ~= 69.09; dividing by 69
// gives a cell side that always exceeds the query radius.
constexpr double kMilesPerDegreeFloor = 69.0;

struct RadPoint {
  double lat;
  double lon;
  double cos_lat;
};

inline RadPoint to_rad(GeoPoint p) {
  const double lat = p.lat * kDegToRad;
  return {lat, p.lon * kDegToRad, std::cos(lat)};
}

// Both haversine_miles and the index go through this function so that the
// index reproduces the public metric bit for bit.
inline double haversine_rad(double lat1, double lon1, double cos1, double lat2, double lon2,
                            double cos2) {
  const double s_lat = std::sin((lat2 - lat1) * 0.5);
  const double s_lon = std::sin((lon2 - lon1) * 0.5);
  const double h = s_lat * s_lat + cos1 * cos2 * s_lon * s_lon;
  return 2.0 * kEarthRadiusMiles * std::asin(std::min(1.0, std::sqrt(h)));
}

}  // namespace

double haversine_miles(GeoPoint a, GeoPoint b) {
  const auto ra = to_rad(a);
  const auto rb = to_rad(b);
  return haversine_rad(ra.lat, ra.lon, ra.cos_lat, rb.lat, rb.lon, rb.cos_lat);
}

GeoIndex::GeoIndex(std::span<const BankPoint> points, double max_radius_miles)
    : max_radius_(max_radius_miles) {
  if (!(max_radius_miles > 0.0) || !std::isfinite(max_radius_miles))
    throw InputError("spatial index: max radius must be positive");
  cell_deg_ = std::min(max_radius_miles / kMilesPerDegreeFloor, 180.0);
  cols_ = static_cast<std::int64_t>(std::ceil(360.0 / cell_deg_)) + 2;

  std::vector<std::int64_t> keys(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto row = static_cast<std::int64_t>(std::floor((points[i].lat + 90.0) / cell_deg_));
    const auto col = static_cast<std::int64_t>(std::floor((points[i].lon + 180.0) / cell_deg_));
    keys[i] = key(row, col);
  }
  std::vector<std::uint32_t> order(points.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) { return keys[a] < keys[b]; });

  lat_rad_.reserve(points.size());
  lon_rad_.reserve(points.size());
  cos_lat_.reserve(points.size());
  original_ = order;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const auto rp = to_rad({points[order[pos]].lat, points[order[pos]].lon});
    lat_rad_.push_back(rp.lat);
    lon_rad_.push_back(rp.lon);
    cos_lat_.push_back(rp.cos_lat);
    const auto k = keys[order[pos]];
    auto [it, inserted] = buckets_.try_emplace(k, Bucket{static_cast<std::uint32_t>(pos), 0});
    it->second.end = static_cast<std::uint32_t>(pos + 1);
  }
}

template <class Visit>
void GeoIndex::visit_candidates(GeoPoint center, double radius_miles, Visit&& visit) const {
  if (buckets_.empty()) return;
  // Angular radius, padded so rounding can never exclude a boundary point.
  const double angle = radius_miles / kEarthRadiusMiles;
  const double dlat = angle / kDegToRad * (1.0 + 1e-9) + 1e-12;
  const double lat_lo = center.lat - dlat;
  const double lat_hi = center.lat + dlat;
  double dlon = 180.0;
  const double cos_c = std::cos(center.lat * kDegToRad);
  if (std::abs(center.lat) + dlat < 90.0) {
    const double s = std::sin(angle) / cos_c;
    dlon = s >= 1.0 ? 180.0 : std::asin(s) / kDegToRad * (1.0 + 1e-9) + 1e-12;
  }
  const double lon_lo = center.lon - dlon;
  const double lon_hi = center.lon + dlon;
  if (lon_lo < -180.0 || lon_hi > 180.0)
    throw InputError("query disc around (" + std::to_string(center.lat) + ", " +
                     std::to_string(center.lon) + ") crosses the antimeridian");

  const auto row_lo = static_cast<std::int64_t>(std::floor((lat_lo + 90.0) / cell_deg_));
  const auto row_hi = static_cast<std::int64_t>(std::floor((lat_hi + 90.0) / cell_deg_));
  const auto col_lo = static_cast<std::int64_t>(std::floor((lon_lo + 180.0) / cell_deg_));
  const auto col_hi = static_cast<std::int64_t>(std::floor((lon_hi + 180.0) / cell_deg_));

  const auto c = to_rad(center);
  for (auto row = row_lo; row <= row_hi; ++row) {
    for (auto col = col_lo; col <= col_hi; ++col) {
      auto it = buckets_.find(key(row, col));
      if (it == buckets_.end()) continue;
      for (auto i = it->second.begin; i < it->second.end; ++i) {
        const double d =
            haversine_rad(c.lat, c.lon, c.cos_lat, lat_rad_[i], lon_rad_[i], cos_lat_[i]);
        visit(i, d);
      }
    }
  }
}

void GeoIndex::count_within(GeoPoint center, std::span<const double> schedule,
                            std::span<std::uint32_t> out) const {
  std::fill(out.begin(), out.end(), 0u);
  if (schedule.empty()) return;
  const double r_max = schedule.back();
  if (r_max > max_radius_ * (1.0 + 1e-12))
    throw InputError("query radius exceeds the index maximum radius");
  // Histogram by the first radius that contains the point, then prefix-sum:
  // one gather serves every radius.
  visit_candidates(center, r_max, [&](std::uint32_t, double d) {
    if (d > r_max) return;
    const auto bin = std::lower_bound(schedule.begin(), schedule.end(), d) - schedule.begin();
    ++out[static_cast<std::size_t>(bin)];
  });
  for (std::size_t i = 1; i < out.size(); ++i) out[i] += out[i - 1];
}

CountProfile GeoIndex::count_within(GeoPoint center, std::span<const double> schedule) const {
  CountProfile profile;
  profile.counts.resize(schedule.size());
  count_within(center, schedule, profile.counts);
  return profile;
}

std::vector<std::size_t> GeoIndex::points_within(GeoPoint center, double radius_miles) const {
  if (radius_miles > max_radius_ * (1.0 + 1e-12))
    throw InputError("query radius exceeds the index maximum radius");
  std::vector<std::size_t> hits;
  visit_candidates(center, radius_miles, [&](std::uint32_t i, double d) {
    if (d <= radius_miles) hits.push_back(original_[i]);
  });
  std::sort(hits.begin(), hits.end());
  return hits;
}

DensityProfile density_profile(const CountProfile& counts, std::span<const double> schedule) {
  DensityProfile out;
  out.geoid = counts.geoid;
  const auto n = std::min(counts.counts.size(), schedule.size());
  out.densities.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.densities[i] = static_cast<double>(counts.counts[i]) / circle_area(schedule[i]);
  return out;
}

std::vector<CountProfile> count_all(const GeoIndex& index, std::span<const TractRecord> tracts,
                                    std::span<const double> schedule, unsigned threads) {
  std::vector<CountProfile> out(tracts.size());
  for (std::size_t i = 0; i < tracts.size(); ++i) {
    out[i].geoid = tracts[i].geoid;
    out[i].counts.resize(schedule.size());
  }
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, tracts.size())));

  // Static block partition: each worker owns a disjoint slice of `out`.
  std::vector<std::exception_ptr> errors(threads);
  auto work = [&](unsigned w) {
    const std::size_t begin = tracts.size() * w / threads;
    const std::size_t end = tracts.size() * (w + 1) / threads;
    try {
      for (std::size_t i = begin; i < end; ++i)
        index.count_within({tracts[i].lat, tracts[i].lon}, schedule, out[i].counts);
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

}  // namespace bankdensity
