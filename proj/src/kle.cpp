#include "ved/kle.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "ved/errors.hpp"
#include "ved/rng.hpp"

namespace ved {

Eigen::MatrixXd kernel_matrix(const FlowGrid& grid, const CovarianceKernel& kernel) {
  if (!(kernel.variance > 0.0)) throw ConfigError("kernel variance must be positive");
  if (!(kernel.length_scale > 0.0)) throw ConfigError("kernel length_scale must be positive");
  const int n = grid.n_active();
  const double inv_two_l2 = 1.0 / (2.0 * kernel.length_scale * kernel.length_scale);
  Eigen::MatrixXd k(n, n);
  for (int j = 0; j < n; ++j) {
    const Eigen::Vector2d cj = grid.center(j);
    for (int i = j; i < n; ++i) {
      const double d2 = (grid.center(i) - cj).squaredNorm();
      k(i, j) = k(j, i) = kernel.variance * std::exp(-d2 * inv_two_l2);
    }
  }
  return k;
}

KLEBasis build_kle(const FlowGrid& grid, const CovarianceKernel& kernel, int order, double mean) {
  const int n = grid.n_active();
  if (order < 1 || order > n)
    throw DimensionError("KLE order " + std::to_string(order) + " must lie in [1, " +
                         std::to_string(n) + "]");
  const Eigen::MatrixXd k = kernel_matrix(grid, kernel);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(k);
  if (eig.info() != Eigen::Success) throw DecompositionError("kernel eigendecomposition failed");

  const Eigen::VectorXd& values = eig.eigenvalues();  // ascending
  const double largest = values(n - 1);
  // SE kernels are numerically rank deficient; tiny negative eigenvalues are
  // round-off, anything larger means the matrix is not a covariance.
  const double tolerance = 1e-8 * std::max(largest, 1.0);
  KLEBasis kle;
  kle.eigenvalues.resize(order);
  kle.modes.resize(n, order);
  for (int k_idx = 0; k_idx < order; ++k_idx) {
    const int src = n - 1 - k_idx;
    double lambda = values(src);
    if (lambda < -tolerance) {
      std::ostringstream msg;
      msg << "kernel matrix is not positive semi-definite: eigenvalue " << k_idx << " = " << lambda
          << ", largest = " << largest << ", condition estimate = "
          << (values(0) != 0.0 ? std::abs(largest / values(0)) : INFINITY);
      throw DecompositionError(msg.str());
    }
    kle.eigenvalues(k_idx) = std::max(lambda, 0.0);
    Eigen::VectorXd mode = eig.eigenvectors().col(src);
    Eigen::Index arg = 0;
    mode.cwiseAbs().maxCoeff(&arg);
    if (mode(arg) < 0.0) mode = -mode;
    kle.modes.col(k_idx) = mode;
  }
  kle.mean_field = Eigen::VectorXd::Constant(n, mean);
  return kle;
}

Eigen::VectorXd kle_field(const KLEBasis& kle, const Eigen::VectorXd& xi) {
  if (xi.size() != kle.order()) throw DimensionError("xi length must equal the KLE order");
  return kle.mean_field + kle.modes * (kle.eigenvalues.array().sqrt() * xi.array()).matrix();
}

Eigen::VectorXd sample_log_transmissivity(const KLEBasis& kle, std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::VectorXd xi = standard_normal<double>(rng, kle.order(), 1);
  return kle_field(kle, xi);
}

}  // namespace ved
