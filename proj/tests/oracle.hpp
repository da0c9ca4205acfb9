#pragma once

// Independent reference statistics for tests: Boost.Math for the t tail and
// an Eigen QR least-squares fit for regression. Nothing here calls into
// somqe::stats.

#include <cmath>
#include <span>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

namespace somqe::oracle {

inline double t_two_sided(double t, double df) {
  boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(t)));
}

struct OlsReference {
  double slope;
  double intercept;
  double r_squared;
  double t_stat;
  double p_value;
};

inline OlsReference ols(std::span<const double> xs, std::span<const double> ys) {
  const auto n = static_cast<Eigen::Index>(xs.size());
  Eigen::MatrixXd design(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    design(i, 1) = xs[static_cast<std::size_t>(i)];
    y(i) = ys[static_cast<std::size_t>(i)];
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
  const Eigen::Vector2d beta = qr.solve(y);
  const Eigen::VectorXd resid = y - design * beta;
  const double ss_res = resid.squaredNorm();
  const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();

  // (X^T X)^-1 = R^-1 R^-T
  const Eigen::Matrix2d r = qr.matrixQR().topRows(2).triangularView<Eigen::Upper>();
  const Eigen::Matrix2d r_inv = r.inverse();
  const Eigen::Matrix2d cov_unscaled = r_inv * r_inv.transpose();
  const double df = static_cast<double>(n - 2);
  const double se_slope = std::sqrt(ss_res / df * cov_unscaled(1, 1));
  const double t = beta(1) / se_slope;
  return {beta(1), beta(0), 1.0 - ss_res / ss_tot, t, t_two_sided(t, df)};
}

struct PearsonReference {
  double r;
  double p_value;
};

// Textbook single-pass sums in long double.
inline PearsonReference pearson(std::span<const double> xs, std::span<const double> ys) {
  long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  const long double n = static_cast<long double>(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += static_cast<long double>(xs[i]) * xs[i];
    syy += static_cast<long double>(ys[i]) * ys[i];
    sxy += static_cast<long double>(xs[i]) * ys[i];
  }
  const long double cov = n * sxy - sx * sy;
  const long double r = cov / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
  const double df = static_cast<double>(xs.size()) - 2.0;
  const double rd = static_cast<double>(r);
  const double t = rd * std::sqrt(df / (1.0 - rd * rd));
  return {rd, t_two_sided(t, df)};
}

}  // namespace somqe::oracle
