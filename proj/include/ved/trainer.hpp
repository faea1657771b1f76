#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "ved/dataset.hpp"
#include "ved/model.hpp"
#include "ved/schedule.hpp"

namespace ved {

struct TrainConfig {
  int epochs = 100;
  int batch_size = 100;
  double lr_init = 1e-3;
  double lr_final = 1e-5;
  double clip_norm = 1.0;
  Schedule beta = Schedule::constant(0.01);
  Schedule lambda = Schedule::constant(0.01);
  std::uint64_t seed = 0;
  int train_size = 0;  // 0 = whole training split
  int test_size = 0;   // 0 = whole test split
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  /// metrics.csv and checkpoint/ are written here; empty keeps everything in memory.
  std::filesystem::path out_dir;
  bool verbose = false;

  void validate() const;
};

/// Normalised model inputs and targets, columns are samples.
struct PreparedData {
  Eigen::MatrixXf train_images;  // (H*W) x n_train
  Eigen::MatrixXf train_y;       // m x n_train
  Eigen::MatrixXf test_images;
  Eigen::MatrixXf test_y;
};

/// Applies the stored normalisation, maps inputs onto the grid (zero fill)
/// and keeps the first train_size / test_size rows of each split (0 = all).
PreparedData prepare_data(const Dataset& data, int train_size = 0, int test_size = 0);

/// Architecture sized for `data` with latent dimension r and default layers.
ArchConfig arch_for(const Dataset& data, int latent_dim);

/// Reporting-convention metrics of one split.
struct SplitMetrics {
  double mse_report = 0.0;
  double kld_report = 0.0;
  double cov = 0.0;
  double total = 0.0;  // training convention: 1/2 mse + beta kld + lambda cov
};

/// Eval-mode metrics over all columns with the given eps (r x N). The
/// covariance penalty uses the aggregate covariance of the whole split.
SplitMetrics evaluate_split(const VedModel<float>& model, const Eigen::MatrixXf& images, const Eigen::MatrixXf& y,
                            const Eigen::MatrixXf& eps, double beta, double lambda);

/// The fixed evaluation draw used for test metrics.
Eigen::MatrixXf evaluation_eps(std::uint64_t seed, int latent_dim, int n);

struct EpochRecord {
  int epoch = 0;
  double beta = 0.0;
  double lambda = 0.0;
  double lr = 0.0;  // at the last step of the epoch
  SplitMetrics train;  // mean over the epoch's steps, train mode
  SplitMetrics test;   // eval mode, fixed eps
};

struct MetricsRecord {
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_mse = std::numeric_limits<double>::infinity();
  double best_kld = 0.0;
  std::filesystem::path best_checkpoint;
  std::vector<double> step_losses;  // training total per step
  std::vector<double> grad_norms;   // global norm after clipping, per step
  std::vector<double> learning_rates;
  double seconds = 0.0;
};

struct TrainResult {
  MetricsRecord metrics;
  VedModel<float> model;  // parameters of the best epoch
};

/// Adam on shuffled mini-batches with cosine learning-rate decay and
/// global-norm clipping; test metrics after every epoch, best test MSE kept.
/// A trailing batch smaller than 2 is dropped (batch normalisation).
///
/// Throws ConfigError for invalid settings or an architecture that does not
/// fit the data, NumericalError on divergence (the last best checkpoint
/// stays on disk).
TrainResult train(const Dataset& data, const ArchConfig& arch, const TrainConfig& cfg);

/// Same on already prepared data.
TrainResult train(const PreparedData& data, const ArchConfig& arch, const TrainConfig& cfg);

}  // namespace ved
