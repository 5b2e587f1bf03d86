#include "bankdensity/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>

#include "bankdensity/csv.hpp"
#include "bankdensity/errors.hpp"

namespace bankdensity {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<double> gather(const std::vector<double>& column, std::span<const std::size_t> idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(column[i]);
  return out;
}

}  // namespace

Dataset make_dataset(std::vector<BankPoint> banks, std::vector<TractRecord> tracts) {
  Dataset d;
  d.banks = std::move(banks);
  d.tracts = std::move(tracts);
  d.log_density.reserve(d.tracts.size());
  for (const auto& t : d.tracts) d.log_density.push_back(log_pop_density(t));
  return d;
}

std::size_t DensityProfiles::radius_index(double radius) const {
  auto it = std::find(schedule.begin(), schedule.end(), radius);
  if (it == schedule.end())
    throw InputError("radius " + csv::format_double(radius) + " is not in the radius schedule");
  return static_cast<std::size_t>(it - schedule.begin());
}

std::vector<double> DensityProfiles::column(std::size_t radius_idx) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.densities[radius_idx]);
  return out;
}

DensityProfiles compute_profiles(std::span<const BankPoint> banks,
                                 std::span<const TractRecord> tracts,
                                 std::span<const double> schedule, unsigned threads) {
  if (schedule.empty()) throw InputError("empty radius schedule");
  DensityProfiles out;
  out.schedule.assign(schedule.begin(), schedule.end());
  GeoIndex index(banks, schedule.back());
  out.counts = count_all(index, tracts, schedule, threads);
  out.rows.reserve(out.counts.size());
  for (const auto& c : out.counts) out.rows.push_back(density_profile(c, schedule));
  return out;
}

std::vector<std::size_t> Segmentation::members(int decile) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < assignment.size(); ++i)
    if (assignment[i] == decile) idx.push_back(i);
  return idx;
}

Segmentation segment_deciles(std::span<const TractRecord> tracts,
                             std::span<const LogPopDensity> log_density, int k) {
  if (k < 2) throw InputError("segmentation: segment count must be at least 2");
  if (tracts.size() != log_density.size())
    throw InputError("segmentation: tract and log density lengths differ");
  std::set<double> distinct;
  double overall_min = std::numeric_limits<double>::infinity();
  for (const auto& ld : log_density) {
    overall_min = std::min(overall_min, ld.value);
    if (!ld.clamped) distinct.insert(ld.value);
  }
  if (distinct.empty())
    throw InputError("segmentation: every tract has zero population");
  if (static_cast<std::size_t>(k) > distinct.size())
    throw InputError("segmentation: " + std::to_string(k) + " segments requested but only " +
                     std::to_string(distinct.size()) + " distinct log densities");

  Segmentation seg;
  seg.segment_count = k;
  seg.finite_min = *distinct.begin();
  seg.max = *distinct.rbegin();
  const double width = (seg.max - seg.finite_min) / k;
  for (int j = 1; j < k; ++j) seg.cut_points.push_back(seg.finite_min + j * width);

  seg.assignment.resize(tracts.size());
  for (std::size_t i = 0; i < tracts.size(); ++i) {
    const auto pos = std::lower_bound(seg.cut_points.begin(), seg.cut_points.end(),
                                      log_density[i].value) -
                     seg.cut_points.begin();
    seg.assignment[i] = 1 + static_cast<int>(pos);
  }

  double total_area = 0.0;
  double total_pop = 0.0;
  for (const auto& t : tracts) {
    total_area += t.land_area;
    total_pop += t.population;
  }
  seg.bins.resize(static_cast<std::size_t>(k));
  for (int d = 1; d <= k; ++d) {
    auto& b = seg.bins[static_cast<std::size_t>(d - 1)];
    b.decile = d;
    b.lower = d == 1 ? std::min(overall_min, seg.finite_min) : seg.cut_points[d - 2];
    b.upper = d == k ? seg.max : seg.cut_points[d - 1];
    b.min_log_density = kNaN;
    b.max_log_density = kNaN;
  }
  std::vector<double> area(k, 0.0);
  std::vector<double> pop(k, 0.0);
  for (std::size_t i = 0; i < tracts.size(); ++i) {
    const auto d = static_cast<std::size_t>(seg.assignment[i] - 1);
    auto& b = seg.bins[d];
    const double v = log_density[i].value;
    b.min_log_density = b.size ? std::min(b.min_log_density, v) : v;
    b.max_log_density = b.size ? std::max(b.max_log_density, v) : v;
    ++b.size;
    area[d] += tracts[i].land_area;
    pop[d] += tracts[i].population;
  }
  double cum_n = 0.0;
  double cum_area = 0.0;
  double cum_pop = 0.0;
  const double n = static_cast<double>(tracts.size());
  for (int d = 0; d < k; ++d) {
    auto& b = seg.bins[static_cast<std::size_t>(d)];
    cum_n += static_cast<double>(b.size);
    cum_area += area[d];
    cum_pop += pop[d];
    b.pct_tracts = 100.0 * static_cast<double>(b.size) / n;
    b.cum_pct_tracts = 100.0 * cum_n / n;
    b.cum_pct_area = total_area > 0.0 ? 100.0 * cum_area / total_area : 0.0;
    b.cum_pct_population = total_pop > 0.0 ? 100.0 * cum_pop / total_pop : 0.0;
  }
  return seg;
}

const ThresholdCell& ThresholdTable::at(int decile, double radius) const {
  for (const auto& c : cells)
    if (c.decile == decile && c.radius == radius) return c;
  throw InputError("threshold table has no cell for decile " + std::to_string(decile) +
                   ", radius " + csv::format_double(radius));
}

ThresholdTable threshold_table(const DensityProfiles& profiles, const Segmentation& seg,
                               std::span<const double> radii, std::span<const double> probs) {
  if (profiles.rows.size() != seg.assignment.size())
    throw InputError("threshold table: profiles do not cover every tract");
  ThresholdTable table;
  table.radii.assign(radii.begin(), radii.end());
  table.probs.assign(probs.begin(), probs.end());

  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> all(seg.assignment.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  groups.push_back(std::move(all));
  for (int d = 1; d <= seg.segment_count; ++d) groups.push_back(seg.members(d));

  std::vector<std::vector<double>> columns;
  for (double r : radii) columns.push_back(profiles.column(profiles.radius_index(r)));

  for (std::size_t g = 0; g < groups.size(); ++g) {
    for (std::size_t ri = 0; ri < radii.size(); ++ri) {
      ThresholdCell cell;
      cell.decile = static_cast<int>(g);
      cell.radius = radii[ri];
      cell.n = groups[g].size();
      if (cell.n == 0) {
        cell.insufficient = true;
        cell.pct_zero = kNaN;
        cell.quantiles.assign(probs.size(), kNaN);
      } else {
        auto values = gather(columns[ri], groups[g]);
        std::sort(values.begin(), values.end());
        cell.pct_zero = stats::pct_zero(values);
        for (double p : probs) cell.quantiles.push_back(stats::quantile_sorted(values, p));
      }
      table.cells.push_back(std::move(cell));
    }
  }
  return table;
}

AdjustedDensity adjust_density(const DensityProfiles& profiles, const Segmentation& seg,
                               std::span<const LogPopDensity> log_density, double radius) {
  AdjustedDensity out;
  out.radius = radius;
  const auto column = profiles.column(profiles.radius_index(radius));
  out.values.assign(column.size(), kNaN);
  for (int d = 1; d <= seg.segment_count; ++d) {
    const auto idx = seg.members(d);
    DecileFit fit;
    fit.decile = d;
    fit.n = idx.size();
    std::vector<double> x;
    x.reserve(idx.size());
    for (auto i : idx) x.push_back(log_density[i].value);
    const auto y = gather(column, idx);
    try {
      auto ols = stats::ols_fit(x, y);
      fit.intercept = ols.intercept;
      fit.slope = ols.slope;
      fit.slope_se = ols.slope_se;
      fit.slope_t = ols.slope_t;
      fit.slope_p = ols.slope_p;
      for (std::size_t k = 0; k < idx.size(); ++k) out.values[idx[k]] = ols.residuals[k];
    } catch (const NumericalError& e) {
      fit.skipped = true;
      fit.reason = e.what();
      fit.slope = kNaN;
      fit.slope_se = kNaN;
      fit.slope_t = kNaN;
      fit.slope_p = kNaN;
      fit.intercept = kNaN;
    }
    out.fits.push_back(std::move(fit));
  }
  return out;
}

std::size_t desert_count(std::size_t n, double fraction) {
  const double x = fraction * static_cast<double>(n);
  const auto c = static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
  return std::min(n, c);
}

DesertLabeling classify_deserts(const AdjustedDensity& adjusted, const Segmentation& seg,
                                std::span<const TractRecord> tracts, double fraction) {
  DesertLabeling out;
  out.radius = adjusted.radius;
  out.fraction = fraction;
  out.is_desert.assign(tracts.size(), 0);
  for (int d = 1; d <= seg.segment_count; ++d) {
    auto idx = seg.members(d);
    const bool usable = !adjusted.fits[static_cast<std::size_t>(d - 1)].skipped && !idx.empty();
    out.labeled.push_back(usable ? 1 : 0);
    if (!usable) {
      out.by_decile.emplace_back();
      continue;
    }
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      const double va = adjusted.values[a];
      const double vb = adjusted.values[b];
      if (va != vb) return va < vb;
      return tracts[a].geoid < tracts[b].geoid;
    });
    idx.resize(desert_count(idx.size(), fraction));
    for (auto i : idx) out.is_desert[i] = 1;
    out.by_decile.push_back(std::move(idx));
  }
  return out;
}

const char* to_string(RowStatus status) {
  switch (status) {
    case RowStatus::ok: return "ok";
    case RowStatus::insufficient: return "insufficient";
    case RowStatus::skipped: return "skipped";
  }
  return "unknown";
}

namespace {

ComparisonRow compare_group(int decile, std::span<const std::size_t> idx,
                            const DesertLabeling& labels, std::span<const TractRecord> tracts,
                            const AdjustedDensity& adjusted, const std::vector<double>& density,
                            double level) {
  ComparisonRow row;
  row.decile = decile;
  row.radius = labels.radius;
  row.n = idx.size();
  row.spearman_rho = kNaN;
  row.welch = {kNaN, kNaN, kNaN, kNaN, kNaN};

  std::vector<double> adj;
  std::vector<double> raw;
  std::vector<double> dep_desert;
  std::vector<double> dep_rest;
  for (auto i : idx) {
    if (std::isnan(adjusted.values[i])) continue;
    adj.push_back(adjusted.values[i]);
    raw.push_back(density[i]);
    (labels.is_desert[i] ? dep_desert : dep_rest).push_back(tracts[i].deprivation);
  }
  row.n_desert = dep_desert.size();
  if (adj.empty()) {
    row.status = RowStatus::skipped;
    row.note = "no adjusted densities";
    return row;
  }
  try {
    row.spearman_rho = stats::spearman(adj, raw);
  } catch (const NumericalError& e) {
    row.note = e.what();
  }
  if (dep_desert.size() < 2 || dep_rest.size() < 2) {
    row.status = RowStatus::insufficient;
    if (!row.note.empty()) row.note += "; ";
    row.note += "desert or remaining group has fewer than 2 tracts";
    return row;
  }
  try {
    row.welch = stats::welch_t(dep_desert, dep_rest);
  } catch (const NumericalError& e) {
    const double ma = stats::mean(dep_desert);
    const double mb = stats::mean(dep_rest);
    if (ma == mb) {
      // Both groups constant at the same value: no difference to detect.
      row.welch = {0.0, kNaN, 1.0, ma, mb};
    } else {
      row.status = RowStatus::insufficient;
      row.welch.mean_a = ma;
      row.welch.mean_b = mb;
      if (!row.note.empty()) row.note += "; ";
      row.note += e.what();
      return row;
    }
  }
  row.significant = row.welch.t > 0.0 && row.welch.p_two_sided < level;
  return row;
}

}  // namespace

std::vector<ComparisonRow> compare_deprivation(const DesertLabeling& labels,
                                               std::span<const TractRecord> tracts,
                                               const AdjustedDensity& adjusted,
                                               const DensityProfiles& profiles,
                                               const Segmentation& seg, double level) {
  const auto density = profiles.column(profiles.radius_index(labels.radius));
  std::vector<ComparisonRow> rows;
  std::vector<std::size_t> all(tracts.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  rows.push_back(compare_group(kAllTracts, all, labels, tracts, adjusted, density, level));
  for (int d = 1; d <= seg.segment_count; ++d) {
    const auto& fit = adjusted.fits[static_cast<std::size_t>(d - 1)];
    const auto idx = seg.members(d);
    ComparisonRow row;
    if (fit.skipped) {
      row.decile = d;
      row.radius = labels.radius;
      row.n = idx.size();
      row.status = RowStatus::skipped;
      row.note = fit.reason;
      row.spearman_rho = kNaN;
      row.welch = {kNaN, kNaN, kNaN, kNaN, kNaN};
    } else {
      row = compare_group(d, idx, labels, tracts, adjusted, density, level);
    }
    row.slope = fit.slope;
    row.slope_p = fit.slope_p;
    rows.push_back(std::move(row));
  }
  rows.front().slope = kNaN;
  rows.front().slope_p = kNaN;
  return rows;
}

SubsetTable subset_quantiles(const DensityProfiles& profiles, std::span<const std::string> geoids,
                             std::span<const double> radii, std::span<const double> probs) {
  if (geoids.empty()) throw InputError("subset: geoid filter is empty");
  std::unordered_map<std::string_view, std::size_t> position;
  for (std::size_t i = 0; i < profiles.rows.size(); ++i) position.emplace(profiles.rows[i].geoid, i);

  std::set<std::size_t> picked;
  SubsetTable out;
  for (const auto& g : geoids) {
    auto it = position.find(g);
    if (it == position.end())
      ++out.unmatched;
    else
      picked.insert(it->second);
  }
  if (picked.empty()) throw InputError("subset: no geoid in the filter matches a tract");
  out.radii.assign(radii.begin(), radii.end());
  out.probs.assign(probs.begin(), probs.end());
  out.n = picked.size();
  for (double r : radii) {
    const auto ri = profiles.radius_index(r);
    std::vector<double> values;
    for (auto i : picked) values.push_back(profiles.rows[i].densities[ri]);
    std::sort(values.begin(), values.end());
    std::vector<double> q;
    for (double p : probs) q.push_back(stats::quantile_sorted(values, p));
    out.values.push_back(std::move(q));
  }
  return out;
}

std::vector<AreaType> default_area_types(int k) {
  struct Band {
    const char* label;
    double lo, hi;  // percentile band (lo, hi]
    double radius;
  };
  constexpr Band bands[] = {{"Urban", 70.0, 90.0, 2.0},
                            {"Less Urban", 50.0, 70.0, 5.0},
                            {"Rural", 30.0, 50.0, 20.0},
                            {"Very Rural", 0.0, 30.0, 20.0}};
  std::vector<AreaType> out;
  for (const auto& b : bands) {
    int first = 0;
    int last = 0;
    for (int d = 1; d <= k; ++d) {
      const double pct = 100.0 * d / k;
      if (pct > b.lo + 1e-9 && pct <= b.hi + 1e-9) {
        if (!first) first = d;
        last = d;
      }
    }
    if (first) out.push_back({b.label, first, last, b.radius});
  }
  return out;
}

long long implied_banks(double density, double radius) {
  return std::llround(density * circle_area(radius));
}

std::vector<TypeSummaryRow> summarize_types(const ThresholdTable& table,
                                            std::span<const AreaType> mapping) {
  std::vector<TypeSummaryRow> out;
  for (const auto& type : mapping) {
    TypeSummaryRow row;
    row.type = type;
    row.min_density = std::numeric_limits<double>::infinity();
    row.max_density = -std::numeric_limits<double>::infinity();
    for (int d = type.first_decile; d <= type.last_decile; ++d) {
      const auto& cell = table.at(d, type.radius);
      if (cell.insufficient) continue;
      ++row.cells;
      for (double q : cell.quantiles) {
        row.min_density = std::min(row.min_density, q);
        row.max_density = std::max(row.max_density, q);
      }
    }
    if (row.cells == 0) {
      row.min_density = kNaN;
      row.max_density = kNaN;
    } else {
      row.min_banks = implied_banks(row.min_density, type.radius);
      row.max_banks = implied_banks(row.max_density, type.radius);
    }
    out.push_back(std::move(row));
  }
  return out;
}

Analysis analyze(const RunConfig& config, Dataset data) {
  config.validate();
  if (data.tracts.empty()) throw InputError("no valid tracts");
  Analysis a;
  a.config = config;
  a.data = std::move(data);
  const auto& tracts = a.data.tracts;

  a.profiles = compute_profiles(a.data.banks, tracts, config.radius_schedule, config.threads);
  a.segmentation = segment_deciles(tracts, a.data.log_density, config.segment_count);
  a.thresholds =
      threshold_table(a.profiles, a.segmentation, config.headline_radii, config.quantile_probs);

  for (double r : config.headline_radii) {
    auto adj = adjust_density(a.profiles, a.segmentation, a.data.log_density, r);
    for (const auto& fit : adj.fits)
      if (fit.skipped)
        a.warnings.push_back("radius " + csv::format_double(r) + ", decile " +
                             std::to_string(fit.decile) + ": regression skipped (" + fit.reason +
                             ")");
    auto labels = classify_deserts(adj, a.segmentation, tracts, config.desert_fraction);
    auto rows = compare_deprivation(labels, tracts, adj, a.profiles, a.segmentation,
                                    config.significance_level);
    a.comparison.insert(a.comparison.end(), rows.begin(), rows.end());
    a.adjusted.push_back(std::move(adj));
    a.labels.push_back(std::move(labels));
  }

  std::vector<AreaType> types;
  for (const auto& t : default_area_types(config.segment_count)) {
    if (std::find(config.headline_radii.begin(), config.headline_radii.end(), t.radius) !=
        config.headline_radii.end())
      types.push_back(t);
    else
      a.warnings.push_back("type summary '" + t.label + "' omitted: radius " +
                           csv::format_double(t.radius) + " is not a headline radius");
  }
  a.types = summarize_types(a.thresholds, types);
  return a;
}

}  // namespace bankdensity
