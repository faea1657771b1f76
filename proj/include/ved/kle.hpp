#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "ved/flow_grid.hpp"

namespace ved {

/// Squared-exponential covariance  k(a, b) = variance * exp(-|a - b|^2 / (2 l^2)).
struct CovarianceKernel {
  double variance = 1.0;
  double length_scale = 1.0;
};

/// Truncated Karhunen-Loeve basis of a Gaussian field over active cells.
struct KLEBasis {
  Eigen::VectorXd eigenvalues;  // K entries, non-increasing, >= 0
  Eigen::MatrixXd modes;        // n x K, orthonormal columns
  Eigen::VectorXd mean_field;   // n

  int order() const { return static_cast<int>(eigenvalues.size()); }
  int n_cells() const { return static_cast<int>(modes.rows()); }
};

/// Dense n x n kernel matrix over active-cell centres.
Eigen::MatrixXd kernel_matrix(const FlowGrid& grid, const CovarianceKernel& kernel);

/// Top-K eigenpairs of the kernel matrix. Mode signs are fixed so that the
/// largest-magnitude entry of each mode is positive.
///
/// Throws DimensionError when K is outside [1, n], ConfigError for a
/// non-positive variance or length scale, DecompositionError when the
/// eigensolver fails or a retained eigenvalue is materially negative.
KLEBasis build_kle(const FlowGrid& grid, const CovarianceKernel& kernel, int order,
                   double mean = 0.0);

/// mean_field + sum_k sqrt(eigenvalue_k) * xi_k * mode_k for given xi.
Eigen::VectorXd kle_field(const KLEBasis& kle, const Eigen::VectorXd& xi);

/// Same with xi ~ N(0, I) drawn from `seed`; bit-identical for equal seeds.
Eigen::VectorXd sample_log_transmissivity(const KLEBasis& kle, std::uint64_t seed);

}  // namespace ved
