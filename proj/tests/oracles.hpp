#pragma once

// Independent reference implementations used only by tests. None of these
// call into the code paths they check, except the shared distance metric in
// brute_force_counts (the oracle checks the index, not the metric).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "bankdensity/ingest.hpp"
#include "bankdensity/spatial.hpp"

namespace oracle {

// O(N*M) all-pairs count at every radius, one distance per pair.
inline std::vector<std::vector<std::uint32_t>> brute_force_counts(
    std::span<const bankdensity::BankPoint> banks, std::span<const bankdensity::GeoPoint> centers,
    std::span<const double> schedule) {
  std::vector<std::vector<std::uint32_t>> out(centers.size(),
                                              std::vector<std::uint32_t>(schedule.size(), 0));
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (const auto& b : banks) {
      const double d = bankdensity::haversine_miles(centers[c], {b.lat, b.lon});
      for (std::size_t r = 0; r < schedule.size(); ++r)
        if (d <= schedule[r]) ++out[c][r];
    }
  }
  return out;
}

// Brute force with a single bin lookup per pair; same answer, fast enough
// for timing comparisons at 10k x 5k.
inline std::vector<std::vector<std::uint32_t>> brute_force_counts_binned(
    std::span<const bankdensity::BankPoint> banks, std::span<const bankdensity::GeoPoint> centers,
    std::span<const double> schedule) {
  std::vector<std::vector<std::uint32_t>> out(centers.size(),
                                              std::vector<std::uint32_t>(schedule.size(), 0));
  for (std::size_t c = 0; c < centers.size(); ++c) {
    auto& row = out[c];
    for (const auto& b : banks) {
      const double d = bankdensity::haversine_miles(centers[c], {b.lat, b.lon});
      if (d > schedule.back()) continue;
      ++row[static_cast<std::size_t>(
          std::lower_bound(schedule.begin(), schedule.end(), d) - schedule.begin())];
    }
    for (std::size_t r = 1; r < row.size(); ++r) row[r] += row[r - 1];
  }
  return out;
}

// Hyndman-Fan type 7 written in its 1-based form: position m = 1 + (n-1)p.
inline double quantile_type7(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double m = 1.0 + (static_cast<double>(v.size()) - 1.0) * p;
  const double j = std::floor(m);
  const double g = m - j;
  const auto at = [&](double pos) {
    const auto i = static_cast<std::size_t>(std::clamp(pos, 1.0, static_cast<double>(v.size())));
    return v[i - 1];
  };
  return (1.0 - g) * at(j) + g * at(j + 1.0);
}

// Rank = (#less) + (#equal + 1) / 2, computed by direct comparison.
inline std::vector<double> naive_average_ranks(std::span<const double> v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0.0;
    double equal = 0.0;
    for (double w : v) {
      if (w < v[i]) less += 1.0;
      if (w == v[i]) equal += 1.0;
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

inline double pearson(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

inline double spearman_naive(std::span<const double> x, std::span<const double> y) {
  const auto rx = naive_average_ranks(x);
  const auto ry = naive_average_ranks(y);
  return pearson(rx, ry);
}

inline bool close_rel(double a, double b, double rel, double abs_floor = 0.0) {
  if (a == b) return true;
  return std::abs(a - b) <= std::max(rel * std::max(std::abs(a), std::abs(b)), abs_floor);
}

}  // namespace oracle
