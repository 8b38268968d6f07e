#pragma once

#include <span>
#include <vector>

namespace sonimon {

// Standard normal CDF.
double normal_cdf(double x);

// Inverse of normal_cdf. Throws std::invalid_argument unless 0 < p < 1.
double probit(double p);

// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

// Upper tail P(F > f) of the F distribution with (d1, d2) degrees of freedom.
double f_sf(double f, double d1, double d2);

struct AnovaResult {
  double F = 0.0;
  double p = 1.0;
  double df_between = 0.0;
  double df_within = 0.0;
  double ss_between = 0.0;
  double ss_within = 0.0;
  // Pooled within-group variance is zero. F is +inf (p = 0) when the means
  // differ and NaN (p = 1) when they do not.
  bool zero_within_variance = false;
};

// Needs at least two groups with at least two values each.
AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups);

struct FiveNumber {
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
};

// Quantile with linear interpolation between order statistics (position q*(n-1)).
double quantile(std::vector<double> values, double q);
FiveNumber five_number(std::span<const double> values);
double mean(std::span<const double> values);

}  // namespace sonimon
