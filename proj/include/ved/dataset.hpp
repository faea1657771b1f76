#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Core>

#include "ved/flow_grid.hpp"
#include "ved/kle.hpp"

namespace ved {

using RowMatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-column mean and standard deviation (population divisor).
struct NormStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd std;
};

/// Paired inputs (log-transmissivity per active cell) and well heads. Rows
/// [0, n_train) form the training split, the remaining n_test rows the test
/// split.
struct Dataset {
  FlowGrid grid;
  CovarianceKernel kernel;
  int kle_order = 0;
  RowMatrixXf X;  // N x n
  RowMatrixXf Y;  // N x m
  std::vector<int> well_indices;
  std::uint64_t seed = 0;
  int n_train = 0;
  int n_test = 0;
  NormStats y_norm;  // training split only
  NormStats x_norm;  // training split only

  int n_samples() const { return static_cast<int>(X.rows()); }
  int n_inputs() const { return static_cast<int>(X.cols()); }
  int n_outputs() const { return static_cast<int>(Y.cols()); }
};

/// Column statistics over rows [begin, end). Zero deviations are replaced by
/// 1 so normalisation stays finite.
NormStats column_stats(const RowMatrixXf& m, int begin, int end);

/// Draws `n_samples` fields from the KLE, solves the flow problem for each
/// and records heads at `n_wells` wells drawn once (without replacement)
/// from the non-Dirichlet cells. Every draw is derived from (seed, purpose,
/// sample index), so the output does not depend on the thread count.
///
/// Throws ConfigError if n_wells exceeds the candidate cells, n_samples < 1
/// or train_fraction is outside (0, 1].
Dataset generate_dataset(const FlowGrid& grid, const CovarianceKernel& kernel, const KLEBasis& kle,
                         int n_samples, int n_wells, double train_fraction, std::uint64_t seed,
                         int threads = 0);

/// Writes manifest.json, X.bin, Y.bin (f32le row-major) and mask.bin.
void save_dataset(const Dataset& data, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace ved
