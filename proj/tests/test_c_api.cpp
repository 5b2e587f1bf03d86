#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "bankdensity/bankdensity.h"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() /
           ("bankdensity_capi_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  return p;
}

struct Landscape {
  fs::path dir;
  explicit Landscape(const std::string& name, const char* tracts = "800") : dir(scratch(name)) {
    bd_landscape* l = nullptr;
    REQUIRE(bd_landscape_create(&l) == BD_OK);
    REQUIRE(bd_landscape_set(l, "seed", "17") == BD_OK);
    REQUIRE(bd_landscape_set(l, "n_tracts", tracts) == BD_OK);
    REQUIRE(bd_landscape_set(l, "urban_tract_fraction", "0.5") == BD_OK);
    REQUIRE(bd_landscape_write(l, dir.c_str()) == BD_OK);
    bd_landscape_destroy(l);
  }
  ~Landscape() { fs::remove_all(dir); }
  std::string banks() const { return (dir / "banks.csv").string(); }
  std::string tracts() const { return (dir / "tracts.csv").string(); }
};

}  // namespace

TEST_CASE("version, status names and distance") {
  CHECK(std::strlen(bd_version()) > 0);
  CHECK(std::string(bd_status_name(BD_OK)) == "ok");
  CHECK(std::string(bd_status_name(BD_ERR_INPUT)) != std::string(bd_status_name(BD_ERR_NUMERIC)));
  CHECK(bd_haversine_miles(0, 0, 0, 180) == doctest::Approx(std::numbers::pi * 3958.7613).epsilon(1e-12));
  CHECK(bd_haversine_miles(41.88, -87.63, 41.88, -87.63) == 0.0);
}

TEST_CASE("config handle") {
  bd_config* c = nullptr;
  REQUIRE(bd_config_create(&c) == BD_OK);
  CHECK(bd_config_set(c, "desert_fraction", "0.1") == BD_OK);
  CHECK(bd_config_set(c, "no_such_key", "1") == BD_ERR_INPUT);
  CHECK(std::strlen(bd_last_error()) > 0);

  size_t len = 0;
  REQUIRE(bd_config_canonical(c, nullptr, &len) == BD_OK);
  REQUIRE(len > 1);
  std::vector<char> buf(len);
  REQUIRE(bd_config_canonical(c, buf.data(), &len) == BD_OK);
  CHECK(std::string(buf.data()).find("desert_fraction") != std::string::npos);
  size_t small = 3;
  CHECK(bd_config_canonical(c, buf.data(), &small) == BD_ERR_ARGUMENT);
  CHECK(small == len);

  const auto file = scratch("cfg.txt");
  {
    std::ofstream out(file);
    out << "# comment\nsegment_count = 5\n";
  }
  CHECK(bd_config_load_file(c, file.c_str()) == BD_OK);
  CHECK(bd_config_load_file(c, "/nonexistent/config.txt") == BD_ERR_INPUT);
  fs::remove(file);
  bd_config_destroy(c);
  bd_config_destroy(nullptr);
}

TEST_CASE("null arguments are rejected") {
  CHECK(bd_config_create(nullptr) == BD_ERR_ARGUMENT);
  CHECK(bd_config_set(nullptr, "a", "b") == BD_ERR_ARGUMENT);
  CHECK(bd_run(nullptr, "a", "b", nullptr, "c") == BD_ERR_ARGUMENT);
  CHECK(bd_analysis_tract_count(nullptr) == 0);
  CHECK(bd_analysis_comparison_count(nullptr) == 0);
  double d = 0;
  CHECK(bd_analysis_density(nullptr, 0, 0, &d) == BD_ERR_ARGUMENT);
  CHECK(std::strstr(bd_last_error(), "null") != nullptr);
}

TEST_CASE("analysis handle exposes every stage") {
  Landscape land("analysis");
  bd_config* c = nullptr;
  REQUIRE(bd_config_create(&c) == BD_OK);
  CHECK(bd_config_set(c, "threads", "2") == BD_OK);
  bd_analysis* a = nullptr;
  REQUIRE(bd_analysis_run(c, land.banks().c_str(), land.tracts().c_str(), &a) == BD_OK);
  CHECK(bd_analysis_tract_count(a) == 800);
  CHECK(bd_analysis_bank_count(a) > 0);
  REQUIRE(bd_analysis_radius_count(a) == 80);
  double r = 0;
  CHECK(bd_analysis_radius(a, 7, &r) == BD_OK);
  CHECK(r == 2.0);
  CHECK(bd_analysis_radius(a, 80, &r) == BD_ERR_ARGUMENT);

  for (size_t t = 0; t < 800; t += 37) {
    uint32_t prev = 0;
    for (size_t k = 0; k < 80; ++k) {
      uint32_t n = 0;
      double dens = 0, radius = 0;
      REQUIRE(bd_analysis_count(a, t, k, &n) == BD_OK);
      REQUIRE(bd_analysis_density(a, t, k, &dens) == BD_OK);
      REQUIRE(bd_analysis_radius(a, k, &radius) == BD_OK);
      CHECK(n >= prev);
      CHECK(dens == doctest::Approx(n / (std::numbers::pi * radius * radius)).epsilon(1e-14));
      prev = n;
    }
    int decile = 0;
    CHECK(bd_analysis_decile(a, t, &decile) == BD_OK);
    CHECK(decile >= 1);
    CHECK(decile <= 10);
  }

  size_t ncut = 0;
  REQUIRE(bd_analysis_cut_points(a, nullptr, &ncut) == BD_OK);
  REQUIRE(ncut == 9);
  std::vector<double> cuts(ncut);
  REQUIRE(bd_analysis_cut_points(a, cuts.data(), &ncut) == BD_OK);
  for (size_t i = 1; i < cuts.size(); ++i) CHECK(cuts[i] > cuts[i - 1]);

  int deserts = 0;
  for (size_t t = 0; t < 800; ++t) {
    int flag = 0;
    double adj = 0;
    REQUIRE(bd_analysis_is_desert(a, t, 2.0, &flag) == BD_OK);
    REQUIRE(bd_analysis_adjusted(a, t, 2.0, &adj) == BD_OK);
    if (flag) CHECK_FALSE(std::isnan(adj));
    deserts += flag;
  }
  CHECK(deserts > 0);
  int flag = 0;
  CHECK(bd_analysis_is_desert(a, 0, 3.0, &flag) == BD_ERR_ARGUMENT);

  const size_t rows = bd_analysis_comparison_count(a);
  CHECK(rows == 4 * 11);
  bd_comparison row{};
  REQUIRE(bd_analysis_comparison(a, 0, &row) == BD_OK);
  CHECK(row.decile == 0);
  CHECK(row.radius == 2.0);
  CHECK(row.n == 800);
  CHECK(static_cast<int>(row.n_desert) == deserts);
  CHECK(bd_analysis_comparison(a, rows, &row) == BD_ERR_ARGUMENT);

  const auto out = scratch("analysis_out");
  CHECK(bd_analysis_write(a, out.c_str()) == BD_OK);
  CHECK(fs::exists(out / "deserts.geojson"));
  CHECK(fs::exists(out / "thresholds.csv"));
  fs::remove_all(out);
  bd_analysis_destroy(a);
  bd_config_destroy(c);
}

TEST_CASE("commands write their outputs and report failures") {
  Landscape land("commands", "300");
  bd_config* c = nullptr;
  REQUIRE(bd_config_create(&c) == BD_OK);
  const auto out = scratch("commands_out");
  CHECK(bd_run(c, land.banks().c_str(), land.tracts().c_str(), nullptr, out.c_str()) == BD_OK);
  for (const char* f : {"summary.csv", "segments.csv", "thresholds.csv", "comparison.csv",
                        "type_summary.csv", "curves.csv", "group_means.csv", "deserts.geojson",
                        "report.md"})
    CHECK(fs::exists(out / f));
  CHECK_FALSE(fs::exists(out / "subset.csv"));

  const auto q = scratch("quantiles_out");
  CHECK(bd_run_quantiles(c, land.banks().c_str(), land.tracts().c_str(), q.c_str()) == BD_OK);
  CHECK(fs::exists(q / "curves.csv"));

  const auto list = land.dir / "subset.txt";
  {
    std::ofstream s(list);
    s << "T0000001\nT0000002\nT0000003\n";
  }
  const auto sub = scratch("subset_out");
  CHECK(bd_run_subset(c, land.banks().c_str(), land.tracts().c_str(), list.c_str(),
                      sub.c_str()) == BD_OK);
  CHECK(fs::exists(sub / "subset.csv"));

  CHECK(bd_run(c, "/nonexistent/b.csv", land.tracts().c_str(), nullptr, out.c_str()) ==
        BD_ERR_INPUT);
  CHECK(std::strlen(bd_last_error()) > 0);
  CHECK(bd_run_subset(c, land.banks().c_str(), land.tracts().c_str(), nullptr, sub.c_str()) ==
        BD_ERR_ARGUMENT);

  bd_landscape* l = nullptr;
  REQUIRE(bd_landscape_create(&l) == BD_OK);
  CHECK(bd_landscape_set(l, "n_tracts", "0") == BD_OK);
  CHECK(bd_landscape_write(l, sub.c_str()) == BD_ERR_INPUT);
  CHECK(bd_landscape_set(l, "bogus", "0") == BD_ERR_INPUT);
  bd_landscape_destroy(l);

  fs::remove_all(out);
  fs::remove_all(q);
  fs::remove_all(sub);
  bd_config_destroy(c);
}
