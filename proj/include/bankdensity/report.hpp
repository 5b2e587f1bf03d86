#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bankdensity/csv.hpp"
#include "bankdensity/pipeline.hpp"

namespace bankdensity {

std::string sha256_hex(std::string_view data);
std::string file_sha256_hex(const std::filesystem::path& path);

// SHA-256 over the canonical config text followed by the input digests.
std::string config_fingerprint(const RunConfig& config, std::span<const std::string> input_digests);

// A rendered CSV table. Written with a leading "# fingerprint: ..." line.
struct Table {
  std::string file_name;
  csv::Row header;
  std::vector<csv::Row> rows;
};

struct SummaryColumn {
  std::string label;  // "<r>-mile" or "deprivation"
  double radius = 0.0;  // NaN for the deprivation column
  double min = 0.0, q1 = 0.0, median = 0.0, mean = 0.0, q3 = 0.0, max = 0.0;
  double area = 0.0;  // circle area, NaN for deprivation
};

// Five-number summaries plus mean at 1 mile (when scheduled) and every
// headline radius, and for the deprivation score.
std::vector<SummaryColumn> summary_stats(const Analysis& analysis);

struct CurveRow {
  double radius = 0.0;
  double median = 0.0;
  std::vector<double> quantiles;  // one per probability
  double pct_zero = 0.0;
};

std::vector<CurveRow> emit_quantile_curves(const DensityProfiles& profiles,
                                           std::span<const double> probs);

struct GroupSummary {
  std::size_t n = 0;
  double mean = 0.0, min = 0.0, max = 0.0;  // NaN when n == 0
};

struct GroupMeansRow {
  int decile = 0;
  double radius = 0.0;
  GroupSummary desert;
  GroupSummary rest;
};

std::vector<GroupMeansRow> group_means(const Analysis& analysis);

// RFC 7946 FeatureCollection, one Point feature per tract.
std::string emit_geojson(const Analysis& analysis);

struct ReportBundle {
  std::string fingerprint;
  Table summary_stats;
  Table segmentation_table;
  Table threshold_table;
  std::optional<Table> subset_table;
  Table type_summary;
  Table comparison_table;
  Table quantile_curves;
  Table group_means;
  std::string geojson;
  std::string markdown;
};

ReportBundle build_bundle(const Analysis& analysis, const std::string& fingerprint,
                          const SubsetTable* subset = nullptr);

Table curves_table(const std::vector<CurveRow>& rows, std::span<const double> probs);
Table subset_table(const SubsetTable& subset);

void write_table(std::ostream& out, const Table& table, const std::string& fingerprint);
void write_table_file(const std::filesystem::path& dir, const Table& table,
                      const std::string& fingerprint);
void write_bundle(const ReportBundle& bundle, const std::filesystem::path& out_dir);

// Reads a CSV written by write_table back into rows.
Table read_table(std::istream& in);

// Load inputs under `config`, run every stage, write the bundle.
struct RunInputs {
  std::filesystem::path banks;
  std::filesystem::path tracts;
  std::optional<std::filesystem::path> subset;
};

Dataset load_dataset(const RunConfig& config, const RunInputs& inputs);
std::string input_fingerprint(const RunConfig& config, const RunInputs& inputs);

Analysis run(const RunConfig& config, const RunInputs& inputs,
             const std::filesystem::path& out_dir);

// curves.csv only, over the full radius schedule.
void run_quantiles(const RunConfig& config, const RunInputs& inputs,
                   const std::filesystem::path& out_dir);

// subset.csv only; inputs.subset is required.
void run_subset(const RunConfig& config, const RunInputs& inputs,
                const std::filesystem::path& out_dir);

}  // namespace bankdensity
