#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ved/flow_grid.hpp"
#include "ved/kle.hpp"
#include "ved/sweep.hpp"
#include "ved/trainer.hpp"

namespace ved {

struct GridConfig {
  int height = 24;
  int width = 18;
  double corner_bite_fraction = 0.2;
  double cell_size = 1.0;
  BoundarySpec boundary;
};

struct FieldConfig {
  double variance = 1.0;
  double length_scale = 3.6;
  int kle_order = 200;
  double mean = 0.0;
};

struct DataConfig {
  int n_samples = 4000;
  int n_wells = 30;
  double train_fraction = 0.75;
};

struct CcaConfig {
  double threshold = 0.95;
  std::optional<double> ridge;  // default 1e-6 tr(S_XX) / n
};

struct ModelConfig {
  int latent_dim = 32;
  std::vector<int> channels{1, 16, 32, 64, 128, 256};
  int n_res_blocks = 4;
  int decoder_hidden = 512;
};

struct EvalConfig {
  int n_samples = 0;  // decoded prior samples; 0 = size of the test split
};

/// Everything one experiment needs; every section is optional in the file
/// and unknown keys are rejected.
struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out = "run";
  GridConfig grid;
  FieldConfig field;
  DataConfig data;
  CcaConfig cca;
  ModelConfig model;
  TrainConfig train;
  SweepGrid sweep{{8, 16, 32}, {0.0, 0.01, 0.1}, {0.0, 0.01, 0.1}};
  EvalConfig eval;

  /// Throws ConfigError for out-of-range values.
  void validate() const;
};

/// Throws ConfigError for a missing or malformed file.
RunConfig load_config(const std::filesystem::path& path);
RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& cfg);

/// Architecture for the configured model on a grid with m outputs.
ArchConfig arch_from_config(const RunConfig& cfg, int height, int width, int output_dim, int latent_dim);

}  // namespace ved
