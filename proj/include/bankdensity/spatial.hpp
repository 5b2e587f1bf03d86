#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "bankdensity/ingest.hpp"

namespace bankdensity {

inline constexpr double kEarthRadiusMiles = 3958.7613;
inline constexpr double kDegToRad = std::numbers::pi / 180.0;

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

// Great-circle distance on a sphere of radius kEarthRadiusMiles.
double haversine_miles(GeoPoint a, GeoPoint b);

// pi r^2, square miles.
inline double circle_area(double radius_miles) {
  return std::numbers::pi * radius_miles * radius_miles;
}

struct CountProfile {
  std::string geoid;
  std::vector<std::uint32_t> counts;  // one per radius, non-decreasing
};

struct DensityProfile {
  std::string geoid;
  std::vector<double> densities;  // banks per square mile, one per radius
};

// Uniform latitude/longitude grid over bank points. Cells are square in
// degrees with side >= max_radius / 69 so any admissible query touches a
// small, computable block of cells. Immutable after construction; all
// queries are const and may run concurrently.
class GeoIndex {
 public:
  GeoIndex(std::span<const BankPoint> points, double max_radius_miles);

  std::size_t point_count() const { return lat_rad_.size(); }
  std::size_t bucket_count() const { return buckets_.size(); }
  double cell_size_deg() const { return cell_deg_; }
  double max_radius() const { return max_radius_; }

  // Inclusive counts: counts[i] = #{p : haversine(center, p) <= schedule[i]}.
  // `schedule` must be ascending with back() <= max_radius(). Throws
  // InputError if the query disc would cross the antimeridian.
  CountProfile count_within(GeoPoint center, std::span<const double> schedule) const;

  // Allocation-free variant for bulk use; `out` must have schedule.size()
  // slots.
  void count_within(GeoPoint center, std::span<const double> schedule,
                    std::span<std::uint32_t> out) const;

  // Original indices of all points with distance <= radius, ascending.
  std::vector<std::size_t> points_within(GeoPoint center, double radius_miles) const;

 private:
  struct Bucket {
    std::uint32_t begin;
    std::uint32_t end;
  };

  template <class Visit>
  void visit_candidates(GeoPoint center, double radius_miles, Visit&& visit) const;

  std::int64_t key(std::int64_t row, std::int64_t col) const { return row * cols_ + col; }

  double max_radius_ = 0.0;
  double cell_deg_ = 1.0;
  std::int64_t cols_ = 1;
  // Points in bucket order, in radians, with cos(lat) cached.
  std::vector<double> lat_rad_;
  std::vector<double> lon_rad_;
  std::vector<double> cos_lat_;
  std::vector<std::uint32_t> original_;
  std::unordered_map<std::int64_t, Bucket> buckets_;
};

DensityProfile density_profile(const CountProfile& counts, std::span<const double> schedule);

// Counts for every tract centroid, computed on `threads` workers (0 = all
// hardware threads). Output order follows `tracts` irrespective of threads.
std::vector<CountProfile> count_all(const GeoIndex& index, std::span<const TractRecord> tracts,
                                    std::span<const double> schedule, unsigned threads = 0);

}  // namespace bankdensity
