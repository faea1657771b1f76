#pragma once

#include <optional>

#include <Eigen/Core>

namespace ved {

/// Canonical correlation fit of outputs on inputs.
///
/// Solves  S_XY S_YY^-1 S_YX a = s^2 (S_XX + eps I) a  for the k = min(n, m)
/// leading pairs (descending s^2), with a^T (S_XX + eps I) a = 1. S_YY is
/// regularised by delta = 1e-10 trace(S_YY) / m before inversion.
struct CCAResult {
  Eigen::VectorXd s2;   // k
  Eigen::MatrixXd A;    // n x k
  Eigen::MatrixXd C;    // m x k, C = S_YX A
  Eigen::VectorXd cev;  // k, CEV_i = trace(C_{:,1:i} C_{:,1:i}^T)
  double ridge_eps = 0.0;
  double ridge_delta = 0.0;
  double output_variance = 0.0;  // trace(S_YY)

  int k() const { return static_cast<int>(s2.size()); }
  /// trace(C C^T) / trace(S_YY): share of total output variance captured.
  double explained_fraction() const;
};

struct SampleCovariances {
  Eigen::MatrixXd xx;  // n x n
  Eigen::MatrixXd yy;  // m x m
  Eigen::MatrixXd xy;  // n x m
};

/// Mean-centred sample covariances with divisor N - 1. Rows are samples.
SampleCovariances sample_covariances(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

/// Default ridge: 1e-6 * trace(S_XX) / n.
double default_ridge(const Eigen::MatrixXd& sxx);

/// Rows of x (N x n) and y (N x m) are paired samples. Throws
/// StatisticsError for N <= 1, DimensionError on mismatched rows,
/// DecompositionError when S_XX + eps I is not positive definite.
CCAResult fit_cca(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                  std::optional<double> eps = std::nullopt);

/// CEV_i / CEV_k for i = 1..k. Throws StatisticsError when CEV_k is zero.
Eigen::VectorXd cev_curve(const CCAResult& res);

/// Smallest i (1-based) whose normalised CEV reaches tau, tau in (0, 1].
int latent_dim_for_threshold(const CCAResult& res, double tau);

/// Per-column z-scoring with statistics taken from rows [0, n_fit).
Eigen::MatrixXd standardize_columns(const Eigen::MatrixXd& m, Eigen::Index n_fit);

}  // namespace ved
