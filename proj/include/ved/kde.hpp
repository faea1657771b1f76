#pragma once

#include <Eigen/Core>

namespace ved {

/// Gaussian kernel density estimate on an evenly spaced grid.
struct DensityCurve {
  Eigen::VectorXd x;
  Eigen::VectorXd density;
  double bandwidth = 0.0;
};

/// Scott's rule bandwidth (sigma * n^(-1/5)); the grid spans
/// [min - 3 sigma, max + 3 sigma]. Throws StatisticsError for fewer than
/// two samples. A constant sample gets a small nominal spread.
DensityCurve gaussian_kde(const Eigen::VectorXd& samples, int points = 256);

/// Trapezoidal integral of the curve over its grid.
double trapezoid(const DensityCurve& curve);

}  // namespace ved
