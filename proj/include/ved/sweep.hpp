#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ved/trainer.hpp"

namespace ved {

struct SweepGrid {
  std::vector<int> r;
  std::vector<double> beta;
  std::vector<double> lambda;

  std::size_t size() const { return r.size() * beta.size() * lambda.size(); }
};

struct SweepCell {
  int r = 0;
  double beta = 0.0;
  double lambda = 0.0;
  bool ok = false;
  std::string error;  // set when the cell failed
  double best_mse = 0.0;
  double best_kld = 0.0;
  int best_epoch = -1;
  bool best_for_r = false;  // lowest MSE among cells sharing r
  double seconds = 0.0;
  std::filesystem::path run_dir;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // r-major, then beta, then lambda
};

/// Trains every (r, beta, lambda) cell with constant weights, using `arch`
/// with its latent dimension replaced by r. All cells use
/// the base seed so that trends compare like with like. A failing cell is
/// recorded and the sweep moves on. With a non-empty `out_dir` each cell gets
/// a run directory and sweep.csv / sweep.md are written.
SweepResult run_sweep(const Dataset& data, const ArchConfig& arch, const TrainConfig& base, const SweepGrid& grid,
                      const std::filesystem::path& out_dir = {});

void write_sweep_csv(const std::filesystem::path& path, const SweepResult& res);
/// Markdown table with the per-r best MSE in bold.
void write_sweep_markdown(const std::filesystem::path& path, const SweepResult& res);

std::string cell_name(int r, double beta, double lambda);

}  // namespace ved
