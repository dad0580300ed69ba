#pragma once

#include <cstddef>
#include <span>

namespace denom {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, n-1 denominator
};

double mean_of(std::span<const double> xs);          // n >= 1
MeanStd mean_std(std::span<const double> xs);        // n >= 2

struct CorrelationResult {
  double r = 0.0;
  std::size_t n = 0;
  double p_two_tailed = 1.0;
};

// Product-moment correlation with the two-tailed p of p_from_r.
// Requires n >= 3 and nonzero variance in both lists.
CorrelationResult pearson(std::span<const double> xs, std::span<const double> ys);

// Two-tailed p for a correlation r at sample size n, via the t-transform
// t = r*sqrt((n-2)/(1-r^2)) with n-2 degrees of freedom. |r| >= 1 gives 0.
double p_from_r(double r, std::size_t n);

struct GroupStats {
  double mean = 0.0;
  double std = 0.0;
  std::size_t n = 0;
};

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p_two_tailed = 1.0;
  GroupStats group_x;
  GroupStats group_y;
};

// Welch's unequal-variance statistic with Welch-Satterthwaite df.
// Both groups need n >= 2 and at least one nonzero variance; two constant
// unequal groups follow the infinite-t convention (p = 0).
TTestResult welch_t(std::span<const double> xs, std::span<const double> ys);

// Student's pooled-variance variant, kept for sensitivity analysis.
TTestResult pooled_t(std::span<const double> xs, std::span<const double> ys);

// Upper tail P(T > t) of Student's t with df > 0 degrees of freedom,
// evaluated through the regularized incomplete beta function.
double student_t_sf(double t, double df);

// Continued-fraction evaluation (modified Lentz), absolute tolerance 1e-14,
// iteration cap 300. Exposed for the oracle-grid tests.
double regularized_incomplete_beta(double x, double a, double b);

}  // namespace denom
