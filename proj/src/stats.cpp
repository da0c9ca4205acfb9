#include "somqe/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "somqe/error.hpp"

namespace somqe::stats {

namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 20000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;

    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) return h;
  }
  throw InvariantError("incomplete beta continued fraction did not converge");
}

void check_pair(std::span<const double> xs, std::span<const double> ys, const char* what) {
  if (xs.size() != ys.size()) {
    throw InputError(std::string(what) + ": xs and ys differ in length");
  }
  if (xs.size() < 3) {
    throw InputError(std::string(what) + ": need at least 3 points, got " +
                     std::to_string(xs.size()));
  }
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
      throw InputError(std::string(what) + ": non-finite value at index " + std::to_string(i));
    }
  }
}

struct Moments {
  double x_mean = 0.0;
  double y_mean = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
};

// Two-pass centered sums.
Moments moments(std::span<const double> xs, std::span<const double> ys) {
  Moments m;
  const double n = static_cast<double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    m.x_mean += xs[i];
    m.y_mean += ys[i];
  }
  m.x_mean /= n;
  m.y_mean /= n;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - m.x_mean;
    const double dy = ys[i] - m.y_mean;
    m.sxx += dx * dx;
    m.syy += dy * dy;
    m.sxy += dx * dy;
  }
  return m;
}

}  // namespace

double incomplete_beta(double a, double b, double x, double y) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw InputError("incomplete beta needs a > 0 and b > 0");
  }
  if (!(x >= 0.0 && x <= 1.0) || !(y >= 0.0 && y <= 1.0)) {
    throw InputError("incomplete beta argument outside [0, 1]");
  }
  if (x == 0.0) return 0.0;
  if (y == 0.0) return 1.0;
  const double log_front = a * std::log(x) + b * std::log(y) -
                           (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, y) / b;
}

double student_t_sf(double t, double df) {
  if (!(df >= 1.0) || !std::isfinite(df)) {
    throw InputError("student_t_sf needs df >= 1");
  }
  if (std::isnan(t)) {
    throw InputError("student_t_sf: t is NaN");
  }
  if (t == 0.0) return 1.0;
  const double t2 = t * t;
  if (!std::isfinite(t2)) return 0.0;
  const double x = df / (df + t2);
  const double y = t2 / (df + t2);
  return std::clamp(incomplete_beta(0.5 * df, 0.5, x, y), 0.0, 1.0);
}

TrendResult linear_trend(std::span<const double> xs, std::span<const double> ys) {
  check_pair(xs, ys, "linear_trend");
  const Moments m = moments(xs, ys);
  if (!(m.sxx > 0.0)) {
    throw InputError("linear_trend: xs have zero variance");
  }

  TrendResult out;
  out.n = static_cast<int>(xs.size());
  out.df = out.n - 2;
  if (m.syy == 0.0) {
    out.intercept = m.y_mean;
    return out;
  }

  out.slope = m.sxy / m.sxx;
  out.intercept = m.y_mean - out.slope * m.x_mean;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (out.intercept + out.slope * xs[i]);
    ss_res += r * r;
  }
  out.r_squared = std::clamp(1.0 - ss_res / m.syy, 0.0, 1.0);

  if (ss_res == 0.0) {
    out.t_stat = out.slope > 0.0 ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
    out.p_value = 0.0;
    return out;
  }
  const double se = std::sqrt(ss_res / out.df / m.sxx);
  out.t_stat = out.slope / se;
  out.p_value = student_t_sf(out.t_stat, out.df);
  return out;
}

CorrelationResult pearson(std::span<const double> xs, std::span<const double> ys) {
  check_pair(xs, ys, "pearson");
  const Moments m = moments(xs, ys);
  if (!(m.sxx > 0.0) || !(m.syy > 0.0)) {
    throw InputError("pearson: a series has zero variance");
  }
  CorrelationResult out;
  out.n = static_cast<int>(xs.size());
  out.r = std::clamp(m.sxy / std::sqrt(m.sxx * m.syy), -1.0, 1.0);
  if (std::fabs(out.r) == 1.0) {
    out.p_value = 0.0;
    return out;
  }
  const double df = out.n - 2;
  const double t = out.r * std::sqrt(df / (1.0 - out.r * out.r));
  out.p_value = student_t_sf(t, df);
  return out;
}

}  // namespace somqe::stats
