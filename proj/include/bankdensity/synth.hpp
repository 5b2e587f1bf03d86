#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <string_view>
#include <vector>

#include "bankdensity/ingest.hpp"

namespace bankdensity::synth {

struct BoundingBox {
  double lat_min = 25.0;
  double lat_max = 49.0;
  double lon_min = -124.0;
  double lon_max = -67.0;
};

struct LandscapeSpec {
  std::uint64_t seed = 1;
  BoundingBox bbox;
  int n_clusters = 50;
  double points_per_cluster = 100.0;  // mean; sizes uniform on [1, 2m - 1]
  double cluster_sd = 5.0;            // miles
  int background_points = 1000;
  int n_tracts = 1000;
  double popdens_lo = -2.0;  // log persons per square mile
  double popdens_hi = 11.0;
  double zero_population_fraction = 0.0;
  // deprivation = coef * (banks per sq mi within deprivation_radius) + N(0, sd)
  double deprivation_coef = -1.0;
  double deprivation_noise_sd = 1.0;
  double deprivation_radius = 2.0;
  // Share of tracts centred on a bank cluster (Gaussian, cluster_sd) and
  // drawn from the upper half of the log-density range. 0 gives uniformly
  // placed tracts.
  double urban_tract_fraction = 0.0;

  void validate() const;
};

struct Landscape {
  std::vector<BankPoint> banks;
  std::vector<TractRecord> tracts;
};

// Stream: std::mt19937_64 (sequence fixed by the C++ standard). Uniforms take
// the top 53 bits; normals use the Marsaglia polar method. No standard
// library distributions are used, so output is reproducible across
// toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform();                        // [0, 1)
  double uniform(double lo, double hi);    // [lo, hi)
  double normal();                         // N(0, 1)
  std::uint64_t below(std::uint64_t n);    // [0, n)

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

Landscape generate(const LandscapeSpec& spec);

void apply_setting(LandscapeSpec& spec, std::string_view key, std::string_view value);

void write_banks_csv(std::ostream& out, const std::vector<BankPoint>& banks);
void write_tracts_csv(std::ostream& out, const std::vector<TractRecord>& tracts);

// Writes banks.csv and tracts.csv into `dir`.
void write_landscape(const Landscape& landscape, const std::filesystem::path& dir);

}  // namespace bankdensity::synth
