#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ved/kde.hpp"
#include "ved/model.hpp"

namespace ved {

/// Per-feature reconstruction quality on a test split.
struct FeatureReport {
  Eigen::VectorXd rmse;   // m
  std::vector<int> best;  // lowest RMSE first
  std::vector<int> worst; // highest RMSE first
  std::vector<DensityCurve> truth_density;
  std::vector<DensityCurve> recon_density;
  std::string warning;    // set when rankings were truncated
};

/// From targets and predictions (m x N each). Rankings hold 3 features, or
/// max(1, m / 2) with a warning when m < 6.
FeatureReport feature_report(const Eigen::MatrixXf& y_true, const Eigen::MatrixXf& y_pred);

/// Reconstructions through the model in eval mode with a fresh eps per row.
FeatureReport feature_report(const VedModel<float>& model, const Eigen::MatrixXf& images, const Eigen::MatrixXf& y,
                             Rng& rng);

/// Decoded prior samples against the test marginals.
struct GenerativeReport {
  Eigen::VectorXd synth_mean, synth_std;
  Eigen::VectorXd test_mean, test_std;
  double score = 0.0;  // mean over features of |d mean| + |d std|
  std::vector<DensityCurve> synth_density;
  std::vector<DensityCurve> test_density;
};

using Decoder = std::function<Eigen::MatrixXf(const Eigen::MatrixXf&)>;
using Encoder = std::function<EncoderOutput<float>(const Eigen::MatrixXf&)>;

/// Mean over features of |mean_a - mean_b| + |std_a - std_b| (population
/// moments, columns are samples).
double moment_mismatch(const Eigen::MatrixXf& a, const Eigen::MatrixXf& b);

/// Draws n_samples codes from N(0, I_r) and decodes them. Throws ConfigError
/// for n_samples < 2.
GenerativeReport decode_noise(const Decoder& decoder, int latent_dim, const Eigen::MatrixXf& test_y, int n_samples,
                              Rng& rng);
GenerativeReport decode_noise(const VedModel<float>& model, const Eigen::MatrixXf& test_y, int n_samples, Rng& rng);

/// Empirical covariance of one sampled code per input.
struct LatentCovReport {
  Eigen::MatrixXd cov;  // r x r, divisor N
  double off_diagonal_energy = 0.0;  // sum_{i != j} cov_ij^2
  double diagonal_deviation = 0.0;   // sum_i (cov_ii - 1)^2
};

/// Throws StatisticsError for fewer than two inputs.
LatentCovReport latent_covariance(const Encoder& encoder, const Eigen::MatrixXf& images, Rng& rng);
LatentCovReport latent_covariance(const VedModel<float>& model, const Eigen::MatrixXf& images, Rng& rng);

/// recon_features.csv and recon_densities.svg.
void write_feature_report(const std::filesystem::path& dir, const FeatureReport& rep);
/// decode_noise.csv and decode_noise_densities.svg.
void write_generative_report(const std::filesystem::path& dir, const GenerativeReport& rep);
/// latent_cov.csv and latent_cov.svg.
void write_latent_cov_report(const std::filesystem::path& dir, const LatentCovReport& rep);

}  // namespace ved
