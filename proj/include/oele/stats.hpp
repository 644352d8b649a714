#pragma once

#include <span>
#include <utility>
#include <vector>

namespace oele::stats {

double mean(std::span<const double> xs);
// Sample variance (n - 1 denominator); 0 for fewer than two values.
double variance(std::span<const double> xs);
double sd(std::span<const double> xs);
// Bias-adjusted sample skewness G1 and excess kurtosis G2. Need n >= 3 and
// n >= 4 respectively with nonzero variance; otherwise 0.
double skewness(std::span<const double> xs);
double excess_kurtosis(std::span<const double> xs);
double median(std::vector<double> xs);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);
// Two-sided p-value of Student's t with df degrees of freedom.
double t_two_sided_p(double t, double df);
// Upper tail P(F > f) of the F distribution.
double f_upper_p(double f, double df1, double df2);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double effect_size = 0.0;
  double df1 = 0.0;
  double df2 = 0.0;
};

// Pooled-variance two-sample t test; effect_size is Cohen's d with pooled SD.
// With zero pooled variance: t = 0 and p = 1 for equal means, +-inf and p = 0
// otherwise. Fewer than three values in total yields NaN statistics.
TestResult pooled_t_test(std::span<const double> a, std::span<const double> b);

// Two-group one-way ANOVA: F = MS_between / MS_within on (1, n - 2) df,
// effect_size is Cohen's d. Throws DegenerateVariance when a group has fewer
// than two values or the pooled variance is zero.
TestResult one_way_anova(std::span<const double> a, std::span<const double> b);

struct CovariatePair {
  double covariate = 0.0;
  double outcome = 0.0;
};

struct AncovaResult {
  TestResult test;              // F on (1, n - 3) df; effect = adjusted d
  double common_slope = 0.0;    // pooled within-group regression slope
  double adjusted_mean_a = 0.0;
  double adjusted_mean_b = 0.0;
  double ss_between_adjusted = 0.0;
  double ss_within_adjusted = 0.0;
};

// Single-covariate ANCOVA with a common within-group slope. Throws
// DegenerateCovariate when a group has fewer than three pairs or the
// covariate has no within-group variation.
AncovaResult one_way_ancova(std::span<const CovariatePair> a, std::span<const CovariatePair> b);

// Ordinary least squares slope of y on x. Throws InsufficientEdits for fewer
// than two points and DegenerateVariance when x is constant.
double ols_slope(std::span<const double> x, std::span<const double> y);

}  // namespace oele::stats
