#include "bankdensity/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bankdensity/errors.hpp"

namespace bankdensity::stats {

double quantile_sorted(std::span<const double> v, double p) {
  if (v.empty()) throw NumericalError("quantile of an empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw NumericalError("quantile probability outside [0, 1]");
  const double h = static_cast<double>(v.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0) return v[lo];
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

double quantile(std::span<const double> values, double p) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return quantile_sorted(sorted, p);
}

double pct_zero(std::span<const double> values) {
  if (values.empty()) throw NumericalError("pct_zero of an empty sample");
  const auto zeros = std::count(values.begin(), values.end(), 0.0);
  return 100.0 * static_cast<double>(zeros) / static_cast<double>(values.size());
}

double mean(std::span<const double> values) {
  if (values.empty()) throw NumericalError("mean of an empty sample");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
  if (values.size() < 2) throw NumericalError("variance needs at least two values");
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return ss / static_cast<double>(values.size() - 1);
}

OlsFit ols_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw NumericalError("ols: x and y lengths differ");
  const std::size_t n = x.size();
  if (n < 3) throw NumericalError("ols: insufficient data (need at least 3 points)");
  const auto [xmin, xmax] = std::minmax_element(x.begin(), x.end());
  if (*xmin == *xmax) throw NumericalError("ols: degenerate regressor (x is constant)");

  const double xbar = mean(x);
  const double ybar = mean(y);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - xbar;
    sxx += dx * dx;
    sxy += dx * (y[i] - ybar);
  }

  OlsFit fit;
  fit.n = n;
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;
  fit.residuals.resize(n);
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = (y[i] - ybar) - fit.slope * (x[i] - xbar);
    fit.residuals[i] = r;
    ssr += r * r;
  }
  const double dof = static_cast<double>(n - 2);
  fit.slope_se = std::sqrt(ssr / dof / sxx);
  if (fit.slope_se > 0.0) {
    fit.slope_t = fit.slope / fit.slope_se;
    fit.slope_p = student_t_two_sided_p(fit.slope_t, dof);
  } else if (fit.slope != 0.0) {
    fit.slope_t = std::copysign(std::numeric_limits<double>::infinity(), fit.slope);
    fit.slope_p = 0.0;
  } else {
    fit.slope_t = std::numeric_limits<double>::quiet_NaN();
    fit.slope_p = 1.0;
  }
  return fit;
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    // positions i+1 .. j share their mean rank
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = rank;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw NumericalError("spearman: lengths differ");
  if (x.size() < 3) throw NumericalError("spearman: need at least 3 observations");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double mx = mean(rx);
  const double my = mean(ry);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mx;
    const double dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw NumericalError("spearman: undefined correlation (zero rank variance)");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

WelchResult welch_t(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw NumericalError("welch: each group needs at least two values");
  WelchResult r;
  r.mean_a = mean(a);
  r.mean_b = mean(b);
  const double ua = sample_variance(a) / static_cast<double>(a.size());
  const double ub = sample_variance(b) / static_cast<double>(b.size());
  const double se2 = ua + ub;
  if (!(se2 > 0.0)) throw NumericalError("welch: both groups have zero variance");
  r.t = (r.mean_a - r.mean_b) / std::sqrt(se2);
  r.df = se2 * se2 /
         (ua * ua / static_cast<double>(a.size() - 1) + ub * ub / static_cast<double>(b.size() - 1));
  r.p_two_sided = student_t_two_sided_p(r.t, r.df);
  return r;
}

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) <= kEps) return h;
  }
  throw NumericalError("incomplete beta: continued fraction did not converge");
}

// I_x(a, b) given both x and y = 1 - x, so callers can supply y without
// cancellation.
double ibeta(double a, double b, double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
  if (x < (a + 1.0) / (a + b + 2.0))
    return std::exp(log_front) * beta_continued_fraction(a, b, x) / a;
  return 1.0 - std::exp(log_front) * beta_continued_fraction(b, a, y) / b;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) throw NumericalError("incomplete beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw NumericalError("incomplete beta: x outside [0, 1]");
  return ibeta(a, b, x, 1.0 - x);
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw NumericalError("student t: degrees of freedom must be positive");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  const double t2 = t * t;
  const double x = df / (df + t2);
  const double y = t2 / (df + t2);
  return std::clamp(ibeta(0.5 * df, 0.5, x, y), 0.0, 1.0);
}

double student_t_cdf(double t, double df) {
  const double tail = 0.5 * student_t_two_sided_p(t, df);
  return t < 0.0 ? tail : 1.0 - tail;
}

}  // namespace bankdensity::stats
