#pragma once

#include <span>

namespace somqe::stats {

struct TrendResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double t_stat = 0.0;
  int df = 0;
  double p_value = 1.0;
  int n = 0;
};

struct CorrelationResult {
  double r = 0.0;
  double p_value = 1.0;
  int n = 0;
};

/// Ordinary least squares of ys on xs with a two-sided slope t-test at n-2
/// degrees of freedom. Constant ys give a zero trend with p = 1.
TrendResult linear_trend(std::span<const double> xs, std::span<const double> ys);

/// Sample Pearson r with a two-sided t-test at n-2 degrees of freedom.
CorrelationResult pearson(std::span<const double> xs, std::span<const double> ys);

/// Two-sided tail P(|T| >= |t|) of Student's t with df degrees of freedom.
double student_t_sf(double t, double df);

/// Regularized incomplete beta I_x(a, b). `y` must equal 1 - x; passing it
/// separately avoids cancellation when x is close to 1.
double incomplete_beta(double a, double b, double x, double y);

}  // namespace somqe::stats
