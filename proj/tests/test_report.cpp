#include <doctest.h>

#include <unistd.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bankdensity/csv.hpp"
#include "bankdensity/errors.hpp"
#include "bankdensity/report.hpp"
#include "bankdensity/synth.hpp"
#include "oracles.hpp"

using namespace bankdensity;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() /
           ("bankdensity_report_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Table load_table(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return read_table(in);
}

std::size_t column_of(const Table& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) return i;
  FAIL("no column " << name);
  return 0;
}

synth::Landscape small_landscape(std::uint64_t seed, int tracts) {
  synth::LandscapeSpec spec;
  spec.seed = seed;
  spec.n_tracts = tracts;
  spec.urban_tract_fraction = 0.5;
  spec.zero_population_fraction = 0.01;
  return synth::generate(spec);
}

const char* kAllOutputs[] = {"summary.csv",      "segments.csv",   "thresholds.csv",
                             "type_summary.csv", "comparison.csv", "curves.csv",
                             "group_means.csv",  "deserts.geojson", "report.md"};

}  // namespace

TEST_CASE("numbers survive the CSV text form") {
  synth::Rng rng(1);
  for (int i = 0; i < 5000; ++i) {
    const double v = std::ldexp(rng.uniform(-1, 1), static_cast<int>(rng.below(80)) - 40);
    const auto back = csv::parse_double(csv::format_double(v));
    REQUIRE(back.has_value());
    CHECK(*back == v);
  }
  CHECK(csv::format_double(std::nan("")) == "NA");
  CHECK(csv::format_double(0.0) == "0");
  CHECK(csv::escape_field("a,b") == "\"a,b\"");
  CHECK(csv::escape_field("say \"x\"") == "\"say \"\"x\"\"\"");
}

TEST_CASE("tables round-trip through write_table and read_table") {
  Table t{"x.csv", {"name", "value"}, {{"a, b", "1.5"}, {"q\"uote", "NA"}, {"plain", "-3e-09"}}};
  std::stringstream s;
  write_table(s, t, "abc123");
  CHECK(s.str().rfind("# fingerprint: abc123\n", 0) == 0);
  const auto back = read_table(s);
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
}

TEST_CASE("geojson coordinate order and null handling") {
  std::vector<TractRecord> tracts{{"T1", 41.88, -87.63, 5000, 1.0, 0.5},
                                  {"T2", 41.80, -87.60, 100, 1.0, 0.1}};
  std::vector<BankPoint> banks{{"B1", 41.881, -87.631}};
  auto cfg = default_config();
  cfg.segment_count = 2;
  const auto a = analyze(cfg, make_dataset(banks, tracts));
  const auto doc = nlohmann::json::parse(emit_geojson(a));
  CHECK(doc["type"] == "FeatureCollection");
  REQUIRE(doc["features"].size() == 2);
  const auto& f = doc["features"][0];
  CHECK(f["geometry"]["type"] == "Point");
  CHECK(f["geometry"]["coordinates"][0].get<double>() == -87.63);
  CHECK(f["geometry"]["coordinates"][1].get<double>() == 41.88);
  // Single-tract deciles cannot be regressed: no adjusted value, no deserts.
  for (const auto& feat : doc["features"]) {
    CHECK(feat["properties"]["adjusted_2"].is_null());
    CHECK(feat["properties"]["desert_2"] == false);
    CHECK(feat["properties"]["desert_20"] == false);
  }
  CHECK(f["properties"]["density_2"].get<double>() == a.profiles.density(0, 2.0));
  CHECK_FALSE(a.warnings.empty());
}

TEST_CASE("geojson properties equal pipeline outputs") {
  const auto land = small_landscape(3, 100);
  auto cfg = default_config();
  cfg.segment_count = 4;
  const auto a = analyze(cfg, make_dataset(land.banks, land.tracts));
  const auto doc = nlohmann::json::parse(emit_geojson(a));
  REQUIRE(doc["features"].size() == 100);
  for (std::size_t i = 0; i < 100; ++i) {
    const auto& p = doc["features"][i]["properties"];
    CHECK(p["geoid"] == land.tracts[i].geoid);
    CHECK(p["decile"].get<int>() == a.segmentation.assignment[i]);
    CHECK(p["deprivation"].get<double>() == land.tracts[i].deprivation);
    CHECK(p["log_pop_density"].get<double>() == a.data.log_density[i].value);
    for (std::size_t k = 0; k < cfg.headline_radii.size(); ++k) {
      const auto tag = csv::format_double(cfg.headline_radii[k]);
      CHECK(p["density_" + tag].get<double>() == a.profiles.density(i, cfg.headline_radii[k]));
      const double adj = a.adjusted[k].values[i];
      if (std::isnan(adj))
        CHECK(p["adjusted_" + tag].is_null());
      else
        CHECK(p["adjusted_" + tag].get<double>() == adj);
      CHECK(p["desert_" + tag].get<bool>() == (a.labels[k].is_desert[i] != 0));
    }
  }
}

TEST_CASE("quantile curves") {
  SUBCASE("single tract") {
    DensityProfiles p;
    p.schedule = {1, 2, 3};
    p.rows.push_back({"T", {0.5, 0.25, 0.0}});
    const double probs[] = {0.05, 0.10};
    const auto rows = emit_quantile_curves(p, probs);
    REQUIRE(rows.size() == 3);
    for (std::size_t r = 0; r < 3; ++r) {
      CHECK(rows[r].median == p.rows[0].densities[r]);
      for (double q : rows[r].quantiles) CHECK(q == p.rows[0].densities[r]);
    }
    CHECK(rows[2].pct_zero == 100.0);
  }
  SUBCASE("seeded fixture") {
    const auto land = small_landscape(4, 400);
    const auto sched = default_radius_schedule();
    const auto p = compute_profiles(land.banks, land.tracts, sched, 1);
    const double probs[] = {0.05, 0.10};
    const auto rows = emit_quantile_curves(p, probs);
    REQUIRE(rows.size() == 80);
    for (std::size_t r = 0; r < 80; ++r) {
      const auto col = p.column(r);
      CHECK(oracle::close_rel(rows[r].median, oracle::quantile_type7(col, 0.5), 1e-12));
      CHECK(oracle::close_rel(rows[r].quantiles[0], oracle::quantile_type7(col, 0.05), 1e-12));
      CHECK(oracle::close_rel(rows[r].quantiles[1], oracle::quantile_type7(col, 0.10), 1e-12));
    }
  }
}

TEST_CASE("run writes a complete, reproducible bundle") {
  const auto in = scratch("in");
  const auto land = small_landscape(5, 1500);
  synth::write_landscape(land, in);
  {
    std::ofstream sub(in / "subset.txt");
    for (int i = 1; i <= 60; ++i) sub << land.tracts[static_cast<std::size_t>(i * 7)].geoid << '\n';
  }
  auto cfg = default_config();
  cfg.threads = 1;
  const RunInputs inputs{in / "banks.csv", in / "tracts.csv", in / "subset.txt"};
  const auto out1 = scratch("out1");
  const auto out2 = scratch("out2");
  const auto a = run(cfg, inputs, out1);
  cfg.threads = 4;
  run(cfg, inputs, out2);

  for (const char* name : kAllOutputs) {
    INFO(name);
    REQUIRE(fs::exists(out1 / name));
    CHECK(slurp(out1 / name) == slurp(out2 / name));
  }
  CHECK(slurp(out1 / "subset.csv") == slurp(out2 / "subset.csv"));
  const auto fp = input_fingerprint(cfg, inputs);
  CHECK(slurp(out1 / "summary.csv").rfind("# fingerprint: " + fp + "\n", 0) == 0);

  // Summary medians against a sort oracle over the written densities.
  const auto summary = load_table(out1 / "summary.csv");
  std::size_t median_row = 0;
  while (summary.rows[median_row][0] != "median") ++median_row;
  for (double r : {1.0, 2.0, 5.0, 10.0, 20.0}) {
    const auto col = a.profiles.column(a.profiles.radius_index(r));
    const auto cell = summary.rows[median_row][column_of(summary, csv::format_double(r) + "-mile")];
    CHECK(*csv::parse_double(cell) == doctest::Approx(oracle::quantile_type7(col, 0.5)).epsilon(1e-15));
  }
  std::vector<double> dep;
  for (const auto& t : land.tracts) dep.push_back(t.deprivation);
  CHECK(*csv::parse_double(summary.rows[median_row][column_of(summary, "deprivation")]) ==
        doctest::Approx(oracle::quantile_type7(dep, 0.5)).epsilon(1e-15));
  const auto area = summary.rows.back();
  CHECK(area[0] == "area");
  CHECK(std::abs(*csv::parse_double(area[column_of(summary, "2-mile")]) - 12.57) < 0.005);

  const auto segments = load_table(out1 / "segments.csv");
  CHECK(segments.rows.size() == 10);
  const auto thresholds = load_table(out1 / "thresholds.csv");
  CHECK(thresholds.rows.size() == 11 * 4);
  CHECK(column_of(thresholds, "q0.05") > 0);
  const auto subset = load_table(out1 / "subset.csv");
  CHECK(subset.rows.size() == 5);

  fs::remove_all(in);
  fs::remove_all(out1);
  fs::remove_all(out2);
}

TEST_CASE("changing the config changes the fingerprint") {
  const auto in = scratch("fp");
  synth::write_landscape(small_landscape(6, 50), in);
  const RunInputs inputs{in / "banks.csv", in / "tracts.csv", std::nullopt};
  auto a = default_config();
  auto b = default_config();
  b.desert_fraction = 0.10;
  CHECK(input_fingerprint(a, inputs) != input_fingerprint(b, inputs));
  b = default_config();
  b.threads = 3;
  CHECK(input_fingerprint(a, inputs) == input_fingerprint(b, inputs));
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  fs::remove_all(in);
}

TEST_CASE("empty bank file gives zero densities everywhere") {
  const auto in = scratch("empty");
  const auto land = small_landscape(7, 300);
  synth::write_landscape({{}, land.tracts}, in);
  const auto out = scratch("empty_out");
  const auto a = run(default_config(), {in / "banks.csv", in / "tracts.csv", std::nullopt}, out);
  for (const auto& row : a.profiles.rows)
    for (double d : row.densities) CHECK(d == 0.0);
  const auto t = load_table(out / "thresholds.csv");
  const auto col = column_of(t, "pct_zero");
  for (const auto& row : t.rows) {
    if (row[col] == "NA") continue;
    CHECK(*csv::parse_double(row[col]) == 100.0);
  }
  fs::remove_all(in);
  fs::remove_all(out);
}

TEST_CASE("run reports unreadable input") {
  const auto out = scratch("bad");
  CHECK_THROWS_AS(run(default_config(), {"/nonexistent/b.csv", "/nonexistent/t.csv", std::nullopt}, out),
                  InputError);
  fs::remove_all(out);
}
