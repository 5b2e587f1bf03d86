#include "bankdensity/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "bankdensity/errors.hpp"

namespace bankdensity {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) { return csv::format_double(v); }

std::string num(std::size_t v) { return std::to_string(v); }

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "NA";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, digits);
  (void)ec;
  return std::string(buf, ptr);
}

std::string decile_label(int decile) { return decile == kAllTracts ? "All" : std::to_string(decile); }

std::string percentile_label(int decile, int k) {
  if (decile == kAllTracts) return "All";
  return num(100.0 * decile / k);
}

std::string prob_column(double p) { return "q" + num(p); }

GroupSummary summarize(const std::vector<double>& v) {
  GroupSummary g;
  g.n = v.size();
  if (v.empty()) {
    g.mean = g.min = g.max = kNaN;
    return g;
  }
  g.mean = stats::mean(v);
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  g.min = *lo;
  g.max = *hi;
  return g;
}

std::vector<double> summary_radii(const RunConfig& config) {
  std::vector<double> radii = config.headline_radii;
  if (std::find(config.radius_schedule.begin(), config.radius_schedule.end(), 1.0) !=
          config.radius_schedule.end() &&
      std::find(radii.begin(), radii.end(), 1.0) == radii.end())
    radii.push_back(1.0);
  std::sort(radii.begin(), radii.end());
  return radii;
}

SummaryColumn describe(std::string label, double radius, std::vector<double> values) {
  SummaryColumn c;
  c.label = std::move(label);
  c.radius = radius;
  c.area = std::isnan(radius) ? kNaN : circle_area(radius);
  std::sort(values.begin(), values.end());
  c.min = values.front();
  c.q1 = stats::quantile_sorted(values, 0.25);
  c.median = stats::quantile_sorted(values, 0.5);
  c.mean = stats::mean(values);
  c.q3 = stats::quantile_sorted(values, 0.75);
  c.max = values.back();
  return c;
}

const char* geojson_key_radius(double r, std::string& buf, const char* prefix) {
  buf = prefix + num(r);
  return buf.c_str();
}

void markdown_table(std::ostream& md, const Table& t, int digits) {
  md << '|';
  for (const auto& h : t.header) md << ' ' << h << " |";
  md << "\n|";
  for (std::size_t i = 0; i < t.header.size(); ++i) md << "---|";
  md << '\n';
  for (const auto& row : t.rows) {
    md << '|';
    for (const auto& cell : row) {
      auto v = csv::parse_double(cell);
      md << ' ' << (v && cell.find('.') != std::string::npos ? fixed(*v, digits) : cell) << " |";
    }
    md << '\n';
  }
  md << '\n';
}

}  // namespace

std::vector<SummaryColumn> summary_stats(const Analysis& a) {
  std::vector<SummaryColumn> out;
  for (double r : summary_radii(a.config))
    out.push_back(describe(num(r) + "-mile", r, a.profiles.column(a.profiles.radius_index(r))));
  std::vector<double> dep;
  for (const auto& t : a.data.tracts) dep.push_back(t.deprivation);
  out.push_back(describe("deprivation", kNaN, std::move(dep)));
  return out;
}

std::vector<CurveRow> emit_quantile_curves(const DensityProfiles& profiles,
                                           std::span<const double> probs) {
  std::vector<CurveRow> out;
  if (profiles.rows.empty()) throw InputError("quantile curves: no tracts");
  for (std::size_t ri = 0; ri < profiles.schedule.size(); ++ri) {
    auto values = profiles.column(ri);
    std::sort(values.begin(), values.end());
    CurveRow row;
    row.radius = profiles.schedule[ri];
    row.median = stats::quantile_sorted(values, 0.5);
    for (double p : probs) row.quantiles.push_back(stats::quantile_sorted(values, p));
    row.pct_zero = stats::pct_zero(values);
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<GroupMeansRow> group_means(const Analysis& a) {
  std::vector<GroupMeansRow> out;
  const int k = a.segmentation.segment_count;
  for (const auto& labels : a.labels) {
    const auto ai = static_cast<std::size_t>(&labels - a.labels.data());
    const auto& adj = a.adjusted[ai];
    for (int d = 0; d <= k; ++d) {
      std::vector<double> desert;
      std::vector<double> rest;
      for (std::size_t i = 0; i < a.data.tracts.size(); ++i) {
        if (d != kAllTracts && a.segmentation.assignment[i] != d) continue;
        if (std::isnan(adj.values[i])) continue;
        (labels.is_desert[i] ? desert : rest).push_back(a.data.tracts[i].deprivation);
      }
      out.push_back({d, labels.radius, summarize(desert), summarize(rest)});
    }
  }
  return out;
}

std::string emit_geojson(const Analysis& a) {
  using nlohmann::ordered_json;
  std::ostringstream out;
  out << "{\"type\":\"FeatureCollection\",\"features\":[";
  const auto& radii = a.config.headline_radii;
  std::vector<std::size_t> ridx;
  for (double r : radii) ridx.push_back(a.profiles.radius_index(r));
  std::string key;
  for (std::size_t i = 0; i < a.data.tracts.size(); ++i) {
    const auto& t = a.data.tracts[i];
    ordered_json props;
    props["geoid"] = t.geoid;
    props["decile"] = a.segmentation.assignment[i];
    props["log_pop_density"] = a.data.log_density[i].value;
    props["deprivation"] = t.deprivation;
    for (std::size_t k = 0; k < radii.size(); ++k) {
      props[geojson_key_radius(radii[k], key, "density_")] = a.profiles.rows[i].densities[ridx[k]];
      const double adj = a.adjusted[k].values[i];
      if (std::isnan(adj))
        props[geojson_key_radius(radii[k], key, "adjusted_")] = nullptr;
      else
        props[geojson_key_radius(radii[k], key, "adjusted_")] = adj;
      props[geojson_key_radius(radii[k], key, "desert_")] = a.labels[k].is_desert[i] != 0;
    }
    ordered_json feature;
    feature["type"] = "Feature";
    feature["geometry"] = {{"type", "Point"}, {"coordinates", {t.lon, t.lat}}};
    feature["properties"] = std::move(props);
    out << (i ? ",\n" : "\n") << feature.dump();
  }
  out << "\n]}\n";
  return out.str();
}

Table curves_table(const std::vector<CurveRow>& rows, std::span<const double> probs) {
  Table t{"curves.csv", {"radius", "area", "median", "pct_zero"}, {}};
  for (double p : probs) t.header.push_back(prob_column(p));
  for (const auto& r : rows) {
    csv::Row row{num(r.radius), num(circle_area(r.radius)), num(r.median), num(r.pct_zero)};
    for (double q : r.quantiles) row.push_back(num(q));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table subset_table(const SubsetTable& s) {
  Table t{"subset.csv", {"radius", "n"}, {}};
  for (double p : s.probs) t.header.push_back(prob_column(p));
  for (std::size_t ri = 0; ri < s.radii.size(); ++ri) {
    csv::Row row{num(s.radii[ri]), num(s.n)};
    for (double q : s.values[ri]) row.push_back(num(q));
    t.rows.push_back(std::move(row));
  }
  return t;
}

ReportBundle build_bundle(const Analysis& a, const std::string& fingerprint,
                          const SubsetTable* subset) {
  ReportBundle b;
  b.fingerprint = fingerprint;
  const int k = a.segmentation.segment_count;

  const auto summary = summary_stats(a);
  b.summary_stats = {"summary.csv", {"statistic"}, {}};
  for (const auto& c : summary) b.summary_stats.header.push_back(c.label);
  const std::pair<const char*, double SummaryColumn::*> stat_rows[] = {
      {"min", &SummaryColumn::min},   {"q1", &SummaryColumn::q1},
      {"median", &SummaryColumn::median}, {"mean", &SummaryColumn::mean},
      {"q3", &SummaryColumn::q3},     {"max", &SummaryColumn::max},
      {"area", &SummaryColumn::area}};
  for (const auto& [name, member] : stat_rows) {
    csv::Row row{name};
    for (const auto& c : summary) row.push_back(num(c.*member));
    b.summary_stats.rows.push_back(std::move(row));
  }

  b.segmentation_table = {"segments.csv",
                          {"decile", "percentile", "size", "pct_tracts", "cum_pct_tracts",
                           "cum_pct_area", "cum_pct_population", "lower", "upper", "exp_lower",
                           "exp_upper", "min_log_density", "max_log_density"},
                          {}};
  for (const auto& bin : a.segmentation.bins)
    b.segmentation_table.rows.push_back(
        {decile_label(bin.decile), percentile_label(bin.decile, k), num(bin.size),
         num(bin.pct_tracts), num(bin.cum_pct_tracts), num(bin.cum_pct_area),
         num(bin.cum_pct_population), num(bin.lower), num(bin.upper), num(std::exp(bin.lower)),
         num(std::exp(bin.upper)), num(bin.min_log_density), num(bin.max_log_density)});

  b.threshold_table = {"thresholds.csv",
                       {"decile", "percentile", "radius", "n", "status", "pct_zero"},
                       {}};
  for (double p : a.thresholds.probs) b.threshold_table.header.push_back(prob_column(p));
  for (const auto& c : a.thresholds.cells) {
    csv::Row row{decile_label(c.decile), percentile_label(c.decile, k), num(c.radius), num(c.n),
                 c.insufficient ? "insufficient" : "ok", num(c.pct_zero)};
    for (double q : c.quantiles) row.push_back(num(q));
    b.threshold_table.rows.push_back(std::move(row));
  }

  if (subset) b.subset_table = subset_table(*subset);

  b.type_summary = {"type_summary.csv",
                    {"type", "first_decile", "last_decile", "radius", "cells", "min_density",
                     "max_density", "min_banks", "max_banks"},
                    {}};
  for (const auto& r : a.types)
    b.type_summary.rows.push_back({r.type.label, std::to_string(r.type.first_decile),
                                   std::to_string(r.type.last_decile), num(r.type.radius),
                                   num(r.cells), num(r.min_density), num(r.max_density),
                                   r.cells ? std::to_string(r.min_banks) : "NA",
                                   r.cells ? std::to_string(r.max_banks) : "NA"});

  b.comparison_table = {"comparison.csv",
                        {"radius", "decile", "percentile", "n", "n_desert", "status", "slope",
                         "slope_p", "spearman_rho", "t", "df", "p_two_sided", "mean_desert",
                         "mean_rest", "significant", "note"},
                        {}};
  for (const auto& r : a.comparison)
    b.comparison_table.rows.push_back(
        {num(r.radius), decile_label(r.decile), percentile_label(r.decile, k), num(r.n),
         num(r.n_desert), to_string(r.status), num(r.slope), num(r.slope_p), num(r.spearman_rho),
         num(r.welch.t), num(r.welch.df), num(r.welch.p_two_sided), num(r.welch.mean_a),
         num(r.welch.mean_b), r.significant ? "1" : "0", r.note});

  b.quantile_curves = curves_table(emit_quantile_curves(a.profiles, a.config.quantile_probs),
                                   a.config.quantile_probs);

  b.group_means = {"group_means.csv",
                   {"radius", "decile", "desert_n", "desert_mean", "desert_min", "desert_max",
                    "rest_n", "rest_mean", "rest_min", "rest_max"},
                   {}};
  for (const auto& g : group_means(a))
    b.group_means.rows.push_back({num(g.radius), decile_label(g.decile), num(g.desert.n),
                                  num(g.desert.mean), num(g.desert.min), num(g.desert.max),
                                  num(g.rest.n), num(g.rest.mean), num(g.rest.min),
                                  num(g.rest.max)});

  b.geojson = emit_geojson(a);

  std::ostringstream md;
  md << "# Bank density report\n\n"
     << "- fingerprint: `" << fingerprint << "`\n"
     << "- banks: " << a.data.banks.size() << " (dropped " << a.data.dropped_banks << ")\n"
     << "- tracts: " << a.data.tracts.size() << " (dropped " << a.data.dropped_tracts << ")\n"
     << "- radius schedule: " << a.config.radius_schedule.size() << " radii, "
     << num(a.config.radius_schedule.front()) << " to " << num(a.config.radius_schedule.back())
     << " miles\n"
     << "- desert fraction: " << num(a.config.desert_fraction)
     << ", significance level: " << num(a.config.significance_level) << "\n\n";
  md << "## Summary statistics (banks per square mile)\n\n";
  markdown_table(md, b.summary_stats, 3);
  md << "## Log population density segments\n\n";
  markdown_table(md, b.segmentation_table, 2);
  md << "## Lower-quantile thresholds\n\n";
  markdown_table(md, b.threshold_table, 3);
  if (b.subset_table) {
    md << "## Subset quantiles\n\n";
    markdown_table(md, *b.subset_table, 3);
  }
  md << "## Threshold summary by area type\n\n";
  markdown_table(md, b.type_summary, 3);
  md << "## Adjusted vs unadjusted density and deprivation tests\n\n";
  {
    Table brief{"", {"radius", "decile", "n", "n_desert", "spearman_rho", "t", "p_two_sided",
                     "significant", "status"}, {}};
    for (const auto& r : b.comparison_table.rows)
      brief.rows.push_back({r[0], r[1], r[3], r[4], r[8], r[9], r[11], r[14], r[5]});
    markdown_table(md, brief, 3);
  }
  if (!a.warnings.empty()) {
    md << "## Warnings\n\n";
    for (const auto& w : a.warnings) md << "- " << w << '\n';
    md << '\n';
  }
  b.markdown = md.str();
  return b;
}

void write_table(std::ostream& out, const Table& table, const std::string& fingerprint) {
  out << "# fingerprint: " << fingerprint << '\n';
  csv::write_row(out, table.header);
  for (const auto& row : table.rows) csv::write_row(out, row);
}

void write_table_file(const std::filesystem::path& dir, const Table& table,
                      const std::string& fingerprint) {
  std::ofstream out(dir / table.file_name, std::ios::binary);
  if (!out) throw InputError("cannot write '" + (dir / table.file_name).string() + "'");
  write_table(out, table, fingerprint);
  if (!out) throw InputError("write failed for '" + (dir / table.file_name).string() + "'");
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InputError("write failed for '" + path.string() + "'");
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (!std::filesystem::is_directory(dir))
    throw InputError("cannot create output directory '" + dir.string() + "'");
}

}  // namespace

void write_bundle(const ReportBundle& b, const std::filesystem::path& out_dir) {
  ensure_dir(out_dir);
  for (const Table* t : {&b.summary_stats, &b.segmentation_table, &b.threshold_table,
                         &b.type_summary, &b.comparison_table, &b.quantile_curves, &b.group_means})
    write_table_file(out_dir, *t, b.fingerprint);
  if (b.subset_table) write_table_file(out_dir, *b.subset_table, b.fingerprint);
  write_text(out_dir / "deserts.geojson", b.geojson);
  write_text(out_dir / "report.md", b.markdown);
}

Table read_table(std::istream& in) {
  csv::Reader reader(in);
  Table t;
  t.header = reader.header();
  csv::Row row;
  while (reader.next(row)) t.rows.push_back(row);
  return t;
}

Dataset load_dataset(const RunConfig& config, const RunInputs& inputs) {
  auto banks = read_banks(inputs.banks, config.bank_columns);
  auto tracts = read_tracts(inputs.tracts, config.tract_columns);
  auto data = make_dataset(std::move(banks.items), std::move(tracts.items));
  data.dropped_banks = banks.dropped;
  data.dropped_tracts = tracts.dropped;
  return data;
}

std::string input_fingerprint(const RunConfig& config, const RunInputs& inputs) {
  std::vector<std::string> digests{file_sha256_hex(inputs.banks), file_sha256_hex(inputs.tracts)};
  if (inputs.subset) digests.push_back(file_sha256_hex(*inputs.subset));
  return config_fingerprint(config, digests);
}

Analysis run(const RunConfig& config, const RunInputs& inputs,
             const std::filesystem::path& out_dir) {
  config.validate();
  auto analysis = analyze(config, load_dataset(config, inputs));
  std::optional<SubsetTable> subset;
  if (inputs.subset)
    subset = subset_quantiles(analysis.profiles, read_geoid_list(*inputs.subset));
  const auto bundle =
      build_bundle(analysis, input_fingerprint(config, inputs), subset ? &*subset : nullptr);
  write_bundle(bundle, out_dir);
  return analysis;
}

void run_quantiles(const RunConfig& config, const RunInputs& inputs,
                   const std::filesystem::path& out_dir) {
  config.validate_schedule();
  auto data = load_dataset(config, inputs);
  if (data.tracts.empty()) throw InputError("no valid tracts");
  const auto profiles =
      compute_profiles(data.banks, data.tracts, config.radius_schedule, config.threads);
  const auto table = curves_table(emit_quantile_curves(profiles, config.quantile_probs),
                                  config.quantile_probs);
  ensure_dir(out_dir);
  write_table_file(out_dir, table, input_fingerprint(config, inputs));
}

void run_subset(const RunConfig& config, const RunInputs& inputs,
                const std::filesystem::path& out_dir) {
  config.validate_schedule();
  if (!inputs.subset) throw InputError("subset: a geoid list is required");
  auto data = load_dataset(config, inputs);
  if (data.tracts.empty()) throw InputError("no valid tracts");
  const auto profiles =
      compute_profiles(data.banks, data.tracts, config.radius_schedule, config.threads);
  const auto subset = subset_quantiles(profiles, read_geoid_list(*inputs.subset));
  ensure_dir(out_dir);
  write_table_file(out_dir, subset_table(subset), input_fingerprint(config, inputs));
}

}  // namespace bankdensity
