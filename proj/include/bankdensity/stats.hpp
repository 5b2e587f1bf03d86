#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bankdensity::stats {

// Linear interpolation between order statistics at h = (n-1) p.
double quantile(std::span<const double> values, double p);

// Same estimator on data already sorted ascending.
double quantile_sorted(std::span<const double> sorted, double p);

// Percentage of entries exactly equal to zero.
double pct_zero(std::span<const double> values);

double mean(std::span<const double> values);

// Unbiased (n-1) sample variance.
double sample_variance(std::span<const double> values);

struct OlsFit {
  double intercept = 0.0;
  double slope = 0.0;
  std::vector<double> residuals;
  double slope_se = 0.0;
  // slope / slope_se; +-inf for an exact non-flat fit, NaN for an exact flat one.
  double slope_t = 0.0;
  double slope_p = 1.0;  // two-sided, n-2 degrees of freedom
  std::size_t n = 0;
};

// Bivariate least squares of y on x. Throws NumericalError when n < 3 or x is
// constant.
OlsFit ols_fit(std::span<const double> x, std::span<const double> y);

// 1-based ranks; tied values share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson correlation of average ranks. Throws NumericalError on zero rank
// variance or fewer than 3 observations.
double spearman(std::span<const double> x, std::span<const double> y);

struct WelchResult {
  double t = 0.0;  // positive when mean_a > mean_b
  double df = 0.0;
  double p_two_sided = 1.0;
  double mean_a = 0.0;
  double mean_b = 0.0;
};

// Welch's unequal-variance two-sample t-test. Throws NumericalError when a
// group has fewer than 2 values or both groups have zero variance.
WelchResult welch_t(std::span<const double> a, std::span<const double> b);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double regularized_incomplete_beta(double a, double b, double x);

// Student-t distribution function with `df` > 0 degrees of freedom.
double student_t_cdf(double t, double df);

// P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);

}  // namespace bankdensity::stats
