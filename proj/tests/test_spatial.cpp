#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bankdensity/errors.hpp"
#include "bankdensity/spatial.hpp"
#include "bankdensity/synth.hpp"
#include "oracles.hpp"

using namespace bankdensity;

namespace {

std::vector<BankPoint> random_points(std::uint64_t seed, std::size_t n, double lat0, double lat1,
                                     double lon0, double lon1) {
  synth::Rng rng(seed);
  std::vector<BankPoint> pts;
  for (std::size_t i = 0; i < n; ++i)
    pts.push_back({"P" + std::to_string(i), rng.uniform(lat0, lat1), rng.uniform(lon0, lon1)});
  return pts;
}

// Independent metric: chord length between unit vectors.
double chord_miles(GeoPoint a, GeoPoint b) {
  auto vec = [](GeoPoint p) {
    const double la = p.lat * std::numbers::pi / 180.0;
    const double lo = p.lon * std::numbers::pi / 180.0;
    return std::array<double, 3>{std::cos(la) * std::cos(lo), std::cos(la) * std::sin(lo),
                                 std::sin(la)};
  };
  const auto u = vec(a);
  const auto v = vec(b);
  const double c = std::sqrt((u[0] - v[0]) * (u[0] - v[0]) + (u[1] - v[1]) * (u[1] - v[1]) +
                             (u[2] - v[2]) * (u[2] - v[2]));
  return 2.0 * kEarthRadiusMiles * std::asin(c / 2.0);
}

}  // namespace

TEST_CASE("haversine reference distances") {
  CHECK(haversine_miles({41.88, -87.63}, {41.88, -87.63}) == 0.0);
  const double one_degree = kEarthRadiusMiles * std::numbers::pi / 180.0;
  CHECK(haversine_miles({0, 0}, {1, 0}) == doctest::Approx(one_degree).epsilon(1e-12));
  CHECK(std::abs(haversine_miles({0, 0}, {1, 0}) - 69.09) < 0.005);
  CHECK(haversine_miles({0, 0}, {0, 180}) ==
        doctest::Approx(std::numbers::pi * kEarthRadiusMiles).epsilon(1e-12));
  CHECK(std::abs(haversine_miles({0, 0}, {0, 180}) - 12436.8) < 0.1);
}

TEST_CASE("haversine is symmetric, nonnegative and agrees with the chord formula") {
  synth::Rng rng(3);
  for (int i = 0; i < 5000; ++i) {
    const GeoPoint a{rng.uniform(-70, 70), rng.uniform(-180, 180)};
    const GeoPoint b{rng.uniform(-70, 70), rng.uniform(-180, 180)};
    const double d = haversine_miles(a, b);
    CHECK(d >= 0.0);
    CHECK(d == haversine_miles(b, a));
    CHECK(d == doctest::Approx(chord_miles(a, b)).epsilon(1e-9));
  }
}

TEST_CASE("circle areas") {
  const double radii[] = {1, 2, 5, 10, 20};
  const double areas[] = {3.14, 12.57, 78.54, 314.16, 1256.64};
  for (int i = 0; i < 5; ++i) CHECK(std::abs(circle_area(radii[i]) - areas[i]) <= 0.005);
}

TEST_CASE("empty index returns zero counts") {
  GeoIndex index({}, 20.0);
  CHECK(index.point_count() == 0);
  const auto sched = default_radius_schedule();
  auto cp = index.count_within({40, -90}, sched);
  for (auto c : cp.counts) CHECK(c == 0);
}

TEST_CASE("index rejects a non-positive radius") {
  CHECK_THROWS_AS(GeoIndex({}, 0.0), InputError);
}

TEST_CASE("every point lands in exactly one bucket and a whole-domain query finds all") {
  const auto pts = random_points(8, 88000, 39.0, 41.0, -91.0, -89.0);
  GeoIndex index(pts, 150.0);
  CHECK(index.point_count() == pts.size());
  const double r[] = {150.0};
  auto cp = index.count_within({40.0, -90.0}, r);
  CHECK(cp.counts[0] == pts.size());
  CHECK(index.points_within({40.0, -90.0}, 150.0).size() == pts.size());
}

TEST_CASE("points straddling a cell boundary are both found") {
  GeoIndex probe({}, 5.0);
  const double cell = probe.cell_size_deg();
  // A cell edge in latitude and one in longitude near (40, -90).
  const double edge_lat = std::floor((40.0 + 90.0) / cell) * cell - 90.0;
  const double edge_lon = std::floor((-90.0 + 180.0) / cell) * cell - 180.0;
  std::vector<BankPoint> pts{{"a", edge_lat - 1e-6, edge_lon + 0.01},
                             {"b", edge_lat + 1e-6, edge_lon + 0.01},
                             {"c", edge_lat + 0.01, edge_lon - 1e-6},
                             {"d", edge_lat + 0.01, edge_lon + 1e-6}};
  GeoIndex index(pts, 5.0);
  const GeoPoint center{edge_lat + 0.005, edge_lon + 0.005};
  const double sched[] = {0.5, 1.0, 5.0};
  const auto got = index.count_within(center, sched);
  const GeoPoint centers[] = {center};
  const auto want = oracle::brute_force_counts(pts, centers, sched);
  CHECK(got.counts == want[0]);
  CHECK(got.counts.back() == 4);
}

TEST_CASE("boundary distances are inside") {
  const GeoPoint center{40.0, -90.0};
  // Walk the latitude down until the computed distance is <= 2 but within
  // 1e-12 of it.
  double lat = 40.0 + 2.0 / (kEarthRadiusMiles * std::numbers::pi / 180.0);
  while (haversine_miles(center, {lat, -90.0}) > 2.0) lat = std::nextafter(lat, 0.0);
  const double d = haversine_miles(center, {lat, -90.0});
  REQUIRE(d <= 2.0);
  REQUIRE(d > 2.0 - 1e-12);
  GeoIndex index(std::vector<BankPoint>{{"x", lat, -90.0}}, 5.0);

  const double sched[] = {1.0, 2.0, 5.0};
  CHECK(index.count_within(center, sched).counts == std::vector<std::uint32_t>{0, 1, 1});

  // Radius equal to the computed distance counts; one ulp less does not.
  const double exact[] = {1.0, d, 5.0};
  CHECK(index.count_within(center, exact).counts == std::vector<std::uint32_t>{0, 1, 1});
  const double below[] = {1.0, std::nextafter(d, 0.0), 5.0};
  CHECK(index.count_within(center, below).counts == std::vector<std::uint32_t>{0, 0, 1});
}

TEST_CASE("grid counts equal brute force on a clustered cloud") {
  synth::LandscapeSpec spec;
  spec.seed = 21;
  spec.bbox = {38.0, 42.0, -92.0, -86.0};
  spec.n_clusters = 10;
  spec.points_per_cluster = 150;
  spec.background_points = 500;
  spec.n_tracts = 100;
  spec.urban_tract_fraction = 0.5;
  const auto land = synth::generate(spec);
  const auto sched = default_radius_schedule();
  GeoIndex index(land.banks, sched.back());
  std::vector<GeoPoint> centers;
  for (const auto& t : land.tracts) centers.push_back({t.lat, t.lon});
  const auto want = oracle::brute_force_counts(land.banks, centers, sched);
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const auto got = index.count_within(centers[i], sched);
    if (got.counts != want[i]) ++mismatches;
    for (std::size_t r = 1; r < got.counts.size(); ++r) CHECK(got.counts[r] >= got.counts[r - 1]);
  }
  CHECK(mismatches == 0);
}

TEST_CASE("counts are unchanged by a common longitude shift") {
  const auto pts = random_points(31, 3000, 35.0, 36.0, -100.0, -98.0);
  auto shifted = pts;
  for (auto& p : shifted) p.lon += 3.75;
  GeoIndex a(pts, 20.0);
  GeoIndex b(shifted, 20.0);
  const auto sched = default_radius_schedule();
  synth::Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const GeoPoint c{rng.uniform(35.0, 36.0), rng.uniform(-100.0, -98.0)};
    CHECK(a.count_within(c, sched).counts ==
          b.count_within({c.lat, c.lon + 3.75}, sched).counts);
  }
}

TEST_CASE("points_within matches a direct scan") {
  const auto pts = random_points(17, 2000, 40.0, 41.0, -75.0, -73.0);
  GeoIndex index(pts, 10.0);
  const GeoPoint c{40.5, -74.0};
  std::vector<std::size_t> want;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (haversine_miles(c, {pts[i].lat, pts[i].lon}) <= 7.5) want.push_back(i);
  CHECK(index.points_within(c, 7.5) == want);
}

TEST_CASE("query discs crossing the antimeridian are rejected") {
  GeoIndex index(std::vector<BankPoint>{{"x", 50.0, 179.9}}, 20.0);
  const double r[] = {20.0};
  CHECK_THROWS_AS(index.count_within({50.0, 179.9}, r), InputError);
  CHECK_THROWS_AS(index.count_within({50.0, -179.95}, r), InputError);
}

TEST_CASE("queries beyond the index radius are rejected") {
  GeoIndex index({}, 5.0);
  const double r[] = {10.0};
  CHECK_THROWS_AS(index.count_within({40, -90}, r), InputError);
}

TEST_CASE("density_profile") {
  const double sched[] = {2.0, 5.0, 10.0};
  CountProfile cp{"t", {20, 5, 5}};
  const auto dp = density_profile(cp, sched);
  CHECK(std::abs(dp.densities[0] - 1.59) <= 0.005);
  CHECK(dp.densities[1] == dp.densities[2] * 4.0);
  CountProfile zero{"z", {0, 0, 0}};
  for (double d : density_profile(zero, sched).densities) CHECK(d == 0.0);
}

TEST_CASE("count_all is independent of the worker count") {
  synth::LandscapeSpec spec;
  spec.seed = 2;
  spec.n_tracts = 700;
  spec.n_clusters = 30;
  spec.urban_tract_fraction = 0.5;
  const auto land = synth::generate(spec);
  const auto sched = default_radius_schedule();
  GeoIndex index(land.banks, sched.back());
  const auto one = count_all(index, land.tracts, sched, 1);
  const auto many = count_all(index, land.tracts, sched, 5);
  REQUIRE(one.size() == many.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].geoid == many[i].geoid);
    CHECK(one[i].counts == many[i].counts);
  }
}
