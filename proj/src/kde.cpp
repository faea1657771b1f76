#include "ved/kde.hpp"

#include <cmath>
#include <numbers>

#include "ved/errors.hpp"

namespace ved {

DensityCurve gaussian_kde(const Eigen::VectorXd& samples, int points) {
  const Eigen::Index n = samples.size();
  if (n < 2) throw StatisticsError("density estimate needs at least 2 samples");
  if (points < 2) throw ConfigError("density grid needs at least 2 points");
  if (!samples.allFinite()) throw NumericalError("non-finite samples in density estimate");
  const double mean = samples.mean();
  double sigma = std::sqrt((samples.array() - mean).square().sum() / static_cast<double>(n - 1));
  if (sigma <= 0.0) sigma = 1e-6 * std::max(1.0, std::abs(mean));

  DensityCurve c;
  c.bandwidth = sigma * std::pow(static_cast<double>(n), -0.2);
  c.x = Eigen::VectorXd::LinSpaced(points, samples.minCoeff() - 3.0 * sigma, samples.maxCoeff() + 3.0 * sigma);
  c.density.resize(points);
  const double norm = 1.0 / (static_cast<double>(n) * c.bandwidth * std::sqrt(2.0 * std::numbers::pi));
  for (int i = 0; i < points; ++i) {
    const Eigen::ArrayXd u = (samples.array() - c.x(i)) / c.bandwidth;
    c.density(i) = norm * (-0.5 * u.square()).exp().sum();
  }
  return c;
}

double trapezoid(const DensityCurve& curve) {
  double acc = 0.0;
  for (Eigen::Index i = 1; i < curve.x.size(); ++i)
    acc += 0.5 * (curve.density(i) + curve.density(i - 1)) * (curve.x(i) - curve.x(i - 1));
  return acc;
}

}  // namespace ved
