#include "denom/stats.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "denom/error.hpp"

namespace denom {
namespace {

constexpr double kCfTolerance = 1e-14;  // absolute, on the Lentz multiplier
constexpr int kCfMaxIterations = 300;

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

// Continued fraction for the incomplete beta (modified Lentz). Valid for
// x <= (a+1)/(a+b+2); the caller applies the symmetry for the other side.
double incomplete_beta_cf(double x, double a, double b) {
  constexpr double tiny = 1e-300;
  double c = 1.0;
  double d = 1.0 - (a + b) * x / (a + 1.0);
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double result = d;
  for (int m = 1; m <= kCfMaxIterations; ++m) {
    const double dm = static_cast<double>(m);
    // even-step coefficient
    double numer = dm * (b - dm) * x / ((a + 2.0 * dm - 1.0) * (a + 2.0 * dm));
    d = 1.0 + numer * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + numer / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    result *= d * c;
    // odd-step coefficient
    numer = -(a + dm) * (a + b + dm) * x / ((a + 2.0 * dm) * (a + 2.0 * dm + 1.0));
    d = 1.0 + numer * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + numer / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double mult = d * c;
    result *= mult;
    if (std::fabs(mult - 1.0) < kCfTolerance) return result;
  }
  return result;  // converged to working precision in practice long before the cap
}

double sum_of(std::span<const double> xs) {
  double sum = 0.0;
  for (const double x : xs) sum += x;
  return sum;
}

double centered_sq_sum(std::span<const double> xs, double mean) {
  double sum = 0.0;
  for (const double x : xs) sum += (x - mean) * (x - mean);
  return sum;
}

GroupStats group_stats_of(std::span<const double> xs) {
  const MeanStd ms = mean_std(xs);
  return GroupStats{ms.mean, ms.std, xs.size()};
}

TTestResult finish_t_test(double t, double df, std::span<const double> xs,
                          std::span<const double> ys) {
  TTestResult result;
  result.t = t;
  result.df = df;
  result.p_two_tailed = 2.0 * student_t_sf(std::fabs(t), df);
  if (result.p_two_tailed > 1.0) result.p_two_tailed = 1.0;
  result.group_x = group_stats_of(xs);
  result.group_y = group_stats_of(ys);
  return result;
}

}  // namespace

double regularized_incomplete_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0) || std::isnan(x)) {
    throw Error("regularized_incomplete_beta: invalid arguments");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front = std::exp(a * std::log(x) + b * std::log1p(-x) - log_beta(a, b));
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * incomplete_beta_cf(x, a, b) / a;
  }
  return 1.0 - std::exp(b * std::log1p(-x) + a * std::log(x) - log_beta(a, b)) *
                   incomplete_beta_cf(1.0 - x, b, a) / b;
}

double student_t_sf(double t, double df) {
  if (!(df > 0.0)) throw Error("student_t_sf: df must be positive");
  if (std::isinf(t)) return t > 0 ? 0.0 : 1.0;
  if (t == 0.0) return 0.5;
  const double x = df / (t * t + df);
  const double half_tail = 0.5 * regularized_incomplete_beta(x, 0.5 * df, 0.5);
  return t > 0 ? half_tail : 1.0 - half_tail;
}

double mean_of(std::span<const double> xs) {
  if (xs.empty()) throw DegenerateDataError("mean of empty list");
  return sum_of(xs) / static_cast<double>(xs.size());
}

MeanStd mean_std(std::span<const double> xs) {
  if (xs.size() < 2) throw DegenerateDataError("sample std needs at least 2 values");
  const double mean = mean_of(xs);
  const double var = centered_sq_sum(xs, mean) / static_cast<double>(xs.size() - 1);
  return MeanStd{mean, std::sqrt(var)};
}

double p_from_r(double r, std::size_t n) {
  if (n < 3) throw DegenerateDataError("p_from_r needs n >= 3");
  if (std::fabs(r) >= 1.0) return 0.0;
  const double df = static_cast<double>(n - 2);
  const double t = r * std::sqrt(df / (1.0 - r * r));
  return 2.0 * student_t_sf(std::fabs(t), df);
}

CorrelationResult pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw Error("pearson: length mismatch");
  const std::size_t n = xs.size();
  if (n < 3) throw DegenerateDataError("pearson needs n >= 3");
  const double mean_x = mean_of(xs);
  const double mean_y = mean_of(ys);
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
  const double sxx = centered_sq_sum(xs, mean_x);
  const double syy = centered_sq_sum(ys, mean_y);
  if (sxx == 0.0 || syy == 0.0) throw DegenerateDataError("pearson: constant input list");
  double r = sxy / std::sqrt(sxx * syy);
  if (r > 1.0) r = 1.0;
  if (r < -1.0) r = -1.0;
  return CorrelationResult{r, n, p_from_r(r, n)};
}

TTestResult welch_t(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() < 2 || ys.size() < 2) throw DegenerateDataError("welch_t needs n >= 2 per group");
  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());
  const double mean_x = mean_of(xs);
  const double mean_y = mean_of(ys);
  const double var_x = centered_sq_sum(xs, mean_x) / (nx - 1.0);
  const double var_y = centered_sq_sum(ys, mean_y) / (ny - 1.0);
  if (var_x == 0.0 && var_y == 0.0) {
    if (mean_x == mean_y) throw DegenerateDataError("welch_t: both groups constant and equal");
    // infinite-|t| convention
    const double t = mean_x > mean_y ? std::numeric_limits<double>::infinity()
                                     : -std::numeric_limits<double>::infinity();
    return finish_t_test(t, nx + ny - 2.0, xs, ys);
  }
  const double se_x = var_x / nx;
  const double se_y = var_y / ny;
  const double t = (mean_x - mean_y) / std::sqrt(se_x + se_y);
  const double df =
      (se_x + se_y) * (se_x + se_y) / (se_x * se_x / (nx - 1.0) + se_y * se_y / (ny - 1.0));
  return finish_t_test(t, df, xs, ys);
}

TTestResult pooled_t(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() < 2 || ys.size() < 2) throw DegenerateDataError("pooled_t needs n >= 2 per group");
  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());
  const double mean_x = mean_of(xs);
  const double mean_y = mean_of(ys);
  const double ssq = centered_sq_sum(xs, mean_x) + centered_sq_sum(ys, mean_y);
  const double df = nx + ny - 2.0;
  if (ssq == 0.0) {
    if (mean_x == mean_y) throw DegenerateDataError("pooled_t: both groups constant and equal");
    const double t = mean_x > mean_y ? std::numeric_limits<double>::infinity()
                                     : -std::numeric_limits<double>::infinity();
    return finish_t_test(t, df, xs, ys);
  }
  const double pooled_var = ssq / df;
  const double t = (mean_x - mean_y) / std::sqrt(pooled_var * (1.0 / nx + 1.0 / ny));
  return finish_t_test(t, df, xs, ys);
}

}  // namespace denom
