#include "ved/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "json.hpp"

#include "ved/binary_io.hpp"
#include "ved/darcy.hpp"
#include "ved/errors.hpp"
#include "ved/parallel.hpp"
#include "ved/rng.hpp"
#include "ved/serialization.hpp"

namespace ved {

using nlohmann::json;

NormStats column_stats(const RowMatrixXf& m, int begin, int end) {
  if (begin < 0 || end > m.rows() || end - begin < 1)
    throw StatisticsError("column_stats needs at least one row");
  const auto rows = m.middleRows(begin, end - begin).cast<double>();
  NormStats s;
  s.mean = rows.colwise().mean().transpose();
  s.std = ((rows.rowwise() - s.mean.transpose()).array().square().colwise().sum() /
           static_cast<double>(end - begin))
              .sqrt()
              .transpose();
  for (Eigen::Index j = 0; j < s.std.size(); ++j)
    if (!(s.std(j) > 1e-12)) s.std(j) = 1.0;
  return s;
}

Dataset generate_dataset(const FlowGrid& grid, const CovarianceKernel& kernel, const KLEBasis& kle,
                         int n_samples, int n_wells, double train_fraction, std::uint64_t seed,
                         int threads) {
  if (n_samples < 1) throw ConfigError("dataset needs at least one sample");
  if (!(train_fraction > 0.0 && train_fraction <= 1.0))
    throw ConfigError("train_fraction must lie in (0, 1]");
  if (kle.n_cells() != grid.n_active()) throw DimensionError("KLE basis does not match the grid");

  std::vector<int> candidates = grid.free_cells();
  if (n_wells < 1 || n_wells > static_cast<int>(candidates.size()))
    throw ConfigError("requested " + std::to_string(n_wells) + " wells but only " +
                      std::to_string(candidates.size()) + " non-Dirichlet cells exist");
  Rng well_rng = make_rng(seed, "wells");
  std::shuffle(candidates.begin(), candidates.end(), well_rng);
  std::vector<int> wells(candidates.begin(), candidates.begin() + n_wells);
  std::sort(wells.begin(), wells.end());

  const int n = grid.n_active();
  Dataset data{.grid = grid, .kernel = kernel, .kle_order = kle.order()};
  data.X.resize(n_samples, n);
  data.Y.resize(n_samples, n_wells);
  data.well_indices = wells;
  data.seed = seed;

  parallel_for(
      static_cast<std::size_t>(n_samples),
      [&](std::size_t i) {
        const Eigen::VectorXd log_t = sample_log_transmissivity(kle, derive_seed(seed, "field", i));
        const Eigen::VectorXd heads = solve_flow(grid, log_t);
        const auto row = static_cast<Eigen::Index>(i);
        data.X.row(row) = log_t.cast<float>().transpose();
        for (int w = 0; w < n_wells; ++w)
          data.Y(row, w) = static_cast<float>(heads(wells[static_cast<std::size_t>(w)]));
      },
      threads);

  data.n_train = std::clamp(static_cast<int>(std::lround(train_fraction * n_samples)), 1, n_samples);
  data.n_test = n_samples - data.n_train;
  data.y_norm = column_stats(data.Y, 0, data.n_train);
  data.x_norm = column_stats(data.X, 0, data.n_train);
  return data;
}

void save_dataset(const Dataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json manifest;
  manifest["format"] = "ved-dataset";
  manifest["version"] = 1;
  manifest["dtype"] = "f32le";
  manifest["layout"] = "row-major";
  manifest["n_samples"] = data.n_samples();
  manifest["n_inputs"] = data.n_inputs();
  manifest["n_outputs"] = data.n_outputs();
  manifest["n_train"] = data.n_train;
  manifest["n_test"] = data.n_test;
  manifest["seed"] = data.seed;
  manifest["grid"] = grid_to_json(data.grid);
  manifest["kernel"] = {{"variance", data.kernel.variance},
                        {"length_scale", data.kernel.length_scale}};
  manifest["kle_order"] = data.kle_order;
  manifest["well_indices"] = data.well_indices;
  manifest["norm_stats"] = {{"y_mean", to_std_vector(data.y_norm.mean)},
                            {"y_std", to_std_vector(data.y_norm.std)},
                            {"x_mean", to_std_vector(data.x_norm.mean)},
                            {"x_std", to_std_vector(data.x_norm.std)}};
  manifest["files"] = {{"X", "X.bin"}, {"Y", "Y.bin"}, {"mask", "mask.bin"}};

  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  write_f32le(dir / "X.bin", std::span<const float>(data.X.data(), static_cast<std::size_t>(data.X.size())));
  write_f32le(dir / "Y.bin", std::span<const float>(data.Y.data(), static_cast<std::size_t>(data.Y.size())));
  write_bytes(dir / "mask.bin", data.grid.mask());
}

Dataset load_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  json manifest;
  try {
    manifest = json::parse(read_text(manifest_path));
  } catch (const json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
  try {
    if (manifest.at("dtype") != "f32le") throw DataError("unsupported dtype in " + manifest_path.string());
    const int n_samples = manifest.at("n_samples");
    const int n_inputs = manifest.at("n_inputs");
    const int n_outputs = manifest.at("n_outputs");
    const json& g = manifest.at("grid");
    const int h = g.at("height");
    const int w = g.at("width");
    auto mask = read_bytes(dir / "mask.bin", static_cast<std::size_t>(h * w));
    FlowGrid grid(h, w, std::move(mask), boundary_from_json(g.at("bc")), g.at("cell_size"));
    if (grid.n_active() != n_inputs) throw DataError("mask does not match n_inputs");

    Dataset data{.grid = std::move(grid)};
    data.kernel = {manifest.at("kernel").at("variance"), manifest.at("kernel").at("length_scale")};
    data.kle_order = manifest.at("kle_order");
    data.seed = manifest.at("seed");
    data.n_train = manifest.at("n_train");
    data.n_test = manifest.at("n_test");
    data.well_indices = manifest.at("well_indices").get<std::vector<int>>();
    const json& ns = manifest.at("norm_stats");
    data.y_norm = {from_std_vector(ns.at("y_mean")), from_std_vector(ns.at("y_std"))};
    data.x_norm = {from_std_vector(ns.at("x_mean")), from_std_vector(ns.at("x_std"))};

    auto x = read_f32le(dir / "X.bin", static_cast<std::size_t>(n_samples) * n_inputs);
    auto y = read_f32le(dir / "Y.bin", static_cast<std::size_t>(n_samples) * n_outputs);
    data.X = Eigen::Map<RowMatrixXf>(x.data(), n_samples, n_inputs);
    data.Y = Eigen::Map<RowMatrixXf>(y.data(), n_samples, n_outputs);
    if (static_cast<int>(data.well_indices.size()) != n_outputs ||
        data.n_train + data.n_test != n_samples)
      throw DataError("inconsistent dataset manifest: " + manifest_path.string());
    return data;
  } catch (const json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }
}

}  // namespace ved
