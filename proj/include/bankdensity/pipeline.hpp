#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "bankdensity/ingest.hpp"
#include "bankdensity/spatial.hpp"
#include "bankdensity/stats.hpp"

namespace bankdensity {

// Decile number used for rows aggregated over every tract.
inline constexpr int kAllTracts = 0;

struct Dataset {
  std::vector<BankPoint> banks;
  std::vector<TractRecord> tracts;
  std::vector<LogPopDensity> log_density;  // parallel to tracts
  std::size_t dropped_banks = 0;
  std::size_t dropped_tracts = 0;
};

Dataset make_dataset(std::vector<BankPoint> banks, std::vector<TractRecord> tracts);

// Bank counts and densities for every tract over the full radius schedule.
struct DensityProfiles {
  std::vector<double> schedule;
  std::vector<CountProfile> counts;     // parallel to tracts
  std::vector<DensityProfile> rows;     // parallel to tracts

  // Position of `radius` in the schedule; throws InputError if absent.
  std::size_t radius_index(double radius) const;
  double density(std::size_t tract, double radius) const {
    return rows[tract].densities[radius_index(radius)];
  }
  std::vector<double> column(std::size_t radius_idx) const;
};

DensityProfiles compute_profiles(std::span<const BankPoint> banks,
                                 std::span<const TractRecord> tracts,
                                 std::span<const double> schedule, unsigned threads = 0);

struct BinStats {
  int decile = 0;
  std::size_t size = 0;
  double pct_tracts = 0.0;
  double cum_pct_tracts = 0.0;
  double cum_pct_area = 0.0;
  double cum_pct_population = 0.0;
  // Bin boundaries in log density; bin 1 starts at the lowest value present
  // (the zero-population sentinel when there is one).
  double lower = 0.0;
  double upper = 0.0;
  // Observed range inside the bin, NaN when empty.
  double min_log_density = 0.0;
  double max_log_density = 0.0;
};

struct Segmentation {
  int segment_count = 0;
  double finite_min = 0.0;  // lowest non-sentinel log density
  double max = 0.0;
  std::vector<double> cut_points;  // segment_count - 1, equally spaced
  std::vector<int> assignment;     // tract -> 1..segment_count
  std::vector<BinStats> bins;

  std::vector<std::size_t> members(int decile) const;
};

// Equal-width bins over [finite min, max] of log density. Decile d holds
// values in (cut[d-1], cut[d]]; bin 1 is open below and absorbs the
// zero-population sentinel.
Segmentation segment_deciles(std::span<const TractRecord> tracts,
                             std::span<const LogPopDensity> log_density, int segment_count);

struct ThresholdCell {
  int decile = 0;  // kAllTracts for the all-tracts row
  double radius = 0.0;
  std::size_t n = 0;
  bool insufficient = false;
  double pct_zero = 0.0;
  std::vector<double> quantiles;  // one per probability
};

struct ThresholdTable {
  std::vector<double> radii;
  std::vector<double> probs;
  std::vector<ThresholdCell> cells;  // all-tracts row first, then deciles, radius-major within

  const ThresholdCell& at(int decile, double radius) const;
};

ThresholdTable threshold_table(const DensityProfiles& profiles, const Segmentation& seg,
                               std::span<const double> radii, std::span<const double> probs);

struct DecileFit {
  int decile = 0;
  std::size_t n = 0;
  bool skipped = false;
  std::string reason;
  double intercept = 0.0;
  double slope = 0.0;
  double slope_se = 0.0;
  double slope_t = 0.0;
  double slope_p = 1.0;
};

// Residuals of the per-decile regression of density on log population
// density. Tracts in skipped deciles carry NaN.
struct AdjustedDensity {
  double radius = 0.0;
  std::vector<double> values;  // parallel to tracts
  std::vector<DecileFit> fits;  // index decile - 1
};

AdjustedDensity adjust_density(const DensityProfiles& profiles, const Segmentation& seg,
                               std::span<const LogPopDensity> log_density, double radius);

struct DesertLabeling {
  double radius = 0.0;
  double fraction = 0.0;
  std::vector<char> is_desert;                        // parallel to tracts
  std::vector<std::vector<std::size_t>> by_decile;    // index decile - 1, ranked order
  std::vector<char> labeled;                          // index decile - 1; 0 if skipped
};

// ceil(fraction * n), guarded against representation error in the product.
std::size_t desert_count(std::size_t n, double fraction);

// Lowest ceil(fraction * n) adjusted values per decile; ties broken by
// ascending geoid.
DesertLabeling classify_deserts(const AdjustedDensity& adjusted, const Segmentation& seg,
                                std::span<const TractRecord> tracts, double fraction);

enum class RowStatus { ok, insufficient, skipped };

const char* to_string(RowStatus status);

struct ComparisonRow {
  int decile = 0;
  double radius = 0.0;
  std::size_t n = 0;
  std::size_t n_desert = 0;
  RowStatus status = RowStatus::ok;
  std::string note;
  double slope = 0.0;
  double slope_p = 1.0;
  double spearman_rho = 0.0;  // NaN when undefined
  stats::WelchResult welch;   // desert minus rest
  bool significant = false;   // t > 0 and p < level
};

// One all-tracts row (deserts pooled across deciles) followed by one row per
// decile.
std::vector<ComparisonRow> compare_deprivation(const DesertLabeling& labels,
                                               std::span<const TractRecord> tracts,
                                               const AdjustedDensity& adjusted,
                                               const DensityProfiles& profiles,
                                               const Segmentation& seg,
                                               double significance_level);

struct SubsetTable {
  std::vector<double> radii;
  std::vector<double> probs;
  std::size_t n = 0;
  std::size_t unmatched = 0;              // requested geoids absent from the data
  std::vector<std::vector<double>> values;  // [radius][prob]
};

inline constexpr double kSubsetRadii[] = {1.0, 2.0, 5.0, 10.0, 20.0};
inline constexpr double kSubsetProbs[] = {0.01, 0.05, 0.10};

SubsetTable subset_quantiles(const DensityProfiles& profiles, std::span<const std::string> geoids,
                             std::span<const double> radii = kSubsetRadii,
                             std::span<const double> probs = kSubsetProbs);

struct AreaType {
  std::string label;
  int first_decile = 1;
  int last_decile = 1;
  double radius = 0.0;
};

// Urban / less urban / rural / very rural bands expressed as percentile
// ranges (70-90, 50-70, 30-50, 0-30) and mapped onto `segment_count` bins.
std::vector<AreaType> default_area_types(int segment_count);

struct TypeSummaryRow {
  AreaType type;
  std::size_t cells = 0;
  double min_density = 0.0;
  double max_density = 0.0;
  long long min_banks = 0;
  long long max_banks = 0;
};

// density * pi r^2 rounded to the nearest integer.
long long implied_banks(double density, double radius);

std::vector<TypeSummaryRow> summarize_types(const ThresholdTable& table,
                                            std::span<const AreaType> mapping);

// Every stage of one run.
struct Analysis {
  RunConfig config;
  Dataset data;
  DensityProfiles profiles;
  Segmentation segmentation;
  ThresholdTable thresholds;
  std::vector<AdjustedDensity> adjusted;  // one per headline radius
  std::vector<DesertLabeling> labels;     // one per headline radius
  std::vector<ComparisonRow> comparison;  // headline radius-major
  std::vector<TypeSummaryRow> types;
  std::vector<std::string> warnings;
};

Analysis analyze(const RunConfig& config, Dataset data);

}  // namespace bankdensity
