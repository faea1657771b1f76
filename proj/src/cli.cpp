#include "ved/cli.hpp"

#include <chrono>
#include <ctime>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ved/binary_io.hpp"
#include "ved/cca.hpp"
#include "ved/checkpoint.hpp"
#include "ved/config.hpp"
#include "ved/dataset.hpp"
#include "ved/errors.hpp"
#include "ved/eval.hpp"
#include "ved/kle.hpp"
#include "ved/svg.hpp"
#include "ved/sweep.hpp"
#include "ved/trainer.hpp"

namespace ved {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const DimensionError*>(&e) ||
      dynamic_cast<const StatisticsError*>(&e))
    return kExitData;
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  return kExitOther;
}

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> r;
  std::optional<double> beta;
  std::optional<double> lambda;
  std::optional<int> epochs;
  std::optional<int> train_size;
  std::optional<std::string> data;
  std::optional<std::string> checkpoint;
};

/// Records what a command did; written as <out>/manifest_<command>.json.
class RunManifest {
 public:
  RunManifest(std::string command, const RunConfig& cfg) : command_(std::move(command)), cfg_(cfg) {
    start_ = std::chrono::steady_clock::now();
    const std::time_t now = std::time(nullptr);
    std::ostringstream ts;
    ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
    started_at_ = ts.str();
  }

  void artifact(const fs::path& p) { artifacts_.push_back(fs::relative(p, cfg_.out).generic_string()); }
  void stage(const std::string& name, const std::string& status, const std::string& detail = {}) {
    json s = {{"stage", name}, {"status", status}};
    if (!detail.empty()) s["detail"] = detail;
    stages_.push_back(std::move(s));
  }
  void result(const std::string& key, json value) { results_[key] = std::move(value); }

  fs::path write(const std::string& status) {
    const fs::path path = cfg_.out / ("manifest_" + command_ + ".json");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json j = {{"command", command_},
              {"status", status},
              {"toolkit_version", kVersion},
              {"started_at", started_at_},
              {"wall_clock_seconds", secs},
              {"config", config_to_json(cfg_)},
              {"seeds",
               {{"root", cfg_.seed},
                {"streams", {"mask", "wells", "field", "init", "shuffle", "eps", "eval", "eval-recon", "eval-decode",
                             "eval-cov"}}}},
              {"stages", stages_},
              {"results", results_},
              {"artifacts", artifacts_}};
    fs::create_directories(cfg_.out);
    write_text(path, j.dump(2) + "\n");
    return path;
  }

 private:
  std::string command_;
  RunConfig cfg_;
  std::chrono::steady_clock::time_point start_;
  std::string started_at_;
  json stages_ = json::array();
  json results_ = json::object();
  std::vector<std::string> artifacts_;
};

void add_dir_artifacts(RunManifest& man, const fs::path& dir) {
  if (!fs::exists(dir)) return;
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) man.artifact(f);
}

fs::path data_dir(const RunConfig& cfg, const Overrides& ov) { return ov.data ? fs::path(*ov.data) : cfg.out / "data"; }

fs::path checkpoint_dir(const RunConfig& cfg, const Overrides& ov) {
  return ov.checkpoint ? fs::path(*ov.checkpoint) : cfg.out / "train" / "checkpoint";
}

// ------------------------------------------------------------------ stages

Dataset stage_generate(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
  const FlowGrid grid = FlowGrid::with_corner_bites(cfg.grid.height, cfg.grid.width, cfg.grid.corner_bite_fraction,
                                                    cfg.seed, cfg.grid.boundary, cfg.grid.cell_size);
  const CovarianceKernel kernel{cfg.field.variance, cfg.field.length_scale};
  const int order = std::min(cfg.field.kle_order, grid.n_active());
  log << "generate: " << grid.height() << "x" << grid.width() << " grid, " << grid.n_active()
      << " active cells, KLE order " << order << ", " << cfg.data.n_samples << " samples\n";
  const KLEBasis kle = build_kle(grid, kernel, order, cfg.field.mean);
  Dataset data = generate_dataset(grid, kernel, kle, cfg.data.n_samples, cfg.data.n_wells, cfg.data.train_fraction,
                                  cfg.seed);
  save_dataset(data, dir);
  log << "generate: wrote " << dir.string() << "\n";
  return data;
}

json stage_cca(const RunConfig& cfg, const Dataset& data, const fs::path& dir, std::ostream& log) {
  const Eigen::MatrixXd x = data.X.topRows(data.n_train).cast<double>();
  Eigen::MatrixXd y = data.Y.topRows(data.n_train).cast<double>();
  y = (y.rowwise() - data.y_norm.mean.transpose()).array().rowwise() / data.y_norm.std.transpose().array();
  const CCAResult res = fit_cca(x, y, cfg.cca.ridge);
  const Eigen::VectorXd curve = cev_curve(res);
  const int dim = latent_dim_for_threshold(res, cfg.cca.threshold);

  fs::create_directories(dir);
  std::ostringstream csv;
  csv.precision(10);
  csv << "i,s2,cev,cev_fraction\n";
  for (int i = 0; i < res.k(); ++i) csv << i + 1 << ',' << res.s2(i) << ',' << res.cev(i) << ',' << curve(i) << '\n';
  write_text(dir / "cev.csv", csv.str());
  svg::line_plot(dir / "cev.svg", "CCA cumulative explained variance", "number of canonical pairs",
                 "fraction of CEV", {{"CEV", Eigen::VectorXd::LinSpaced(res.k(), 1, res.k()), curve}});
  json summary = {{"k", res.k()},
                  {"threshold", cfg.cca.threshold},
                  {"latent_dim_for_threshold", dim},
                  {"explained_fraction_of_output_variance", res.explained_fraction()},
                  {"ridge_eps", res.ridge_eps},
                  {"ridge_delta", res.ridge_delta}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  log << "cca: " << res.k() << " pairs, latent_dim_for_threshold(" << cfg.cca.threshold << ") = " << dim << "\n";
  return summary;
}

void write_history(const fs::path& dir, const MetricsRecord& m) {
  const auto n = static_cast<Eigen::Index>(m.epochs.size());
  Eigen::VectorXd ep(n), tr(n), te(n), kl(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& e = m.epochs[static_cast<std::size_t>(i)];
    ep(i) = e.epoch + 1;
    tr(i) = e.train.mse_report;
    te(i) = e.test.mse_report;
    kl(i) = e.test.kld_report;
  }
  svg::line_plot(dir / "loss_history.svg", "Loss history", "epoch", "per-feature value",
                 {{"train MSE", ep, tr}, {"test MSE", ep, te}, {"test KLD", ep, kl}}, true);
}

json stage_train(const RunConfig& cfg, const Dataset& data, const fs::path& dir, std::ostream& log) {
  TrainConfig tc = cfg.train;
  tc.out_dir = dir;
  const ArchConfig arch =
      arch_from_config(cfg, data.grid.height(), data.grid.width(), data.n_outputs(), cfg.model.latent_dim);
  log << "train: r = " << arch.latent_dim << ", " << tc.epochs << " epochs\n";
  const TrainResult res = train(data, arch, tc);
  write_history(dir, res.metrics);
  json summary = {{"latent_dim", arch.latent_dim},
                  {"best_epoch", res.metrics.best_epoch},
                  {"best_test_mse", res.metrics.best_mse},
                  {"best_test_kld", res.metrics.best_kld},
                  {"seconds", res.metrics.seconds},
                  {"checkpoint", "checkpoint"}};
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  log << "train: best test MSE " << res.metrics.best_mse << " at epoch " << res.metrics.best_epoch + 1 << "\n";
  return summary;
}

SweepResult stage_sweep(const RunConfig& cfg, const Dataset& data, const fs::path& dir, std::ostream& log) {
  const ArchConfig arch = arch_from_config(cfg, data.grid.height(), data.grid.width(), data.n_outputs(), 1);
  log << "sweep: " << cfg.sweep.size() << " cells\n";
  SweepResult res = run_sweep(data, arch, cfg.train, cfg.sweep, dir);
  for (const auto& c : res.cells)
    log << "  " << cell_name(c.r, c.beta, c.lambda) << ": "
        << (c.ok ? "MSE " + std::to_string(c.best_mse) + ", KLD " + std::to_string(c.best_kld) : "failed: " + c.error)
        << "\n";
  return res;
}

enum class EvalKind { Recon, Decode, Cov };

json stage_eval(EvalKind kind, const RunConfig& cfg, const Dataset& data, const fs::path& ckpt, const fs::path& dir,
                std::ostream& log) {
  const LoadedCheckpoint lc = load_checkpoint(ckpt);
  const VedModel<float>& model = lc.model;
  if (model.arch().output_dim != data.n_outputs() || model.arch().height != data.grid.height() ||
      model.arch().width != data.grid.width())
    throw DataError("checkpoint " + ckpt.string() + " does not match the dataset");
  const PreparedData prepared = prepare_data(data, 0, cfg.train.test_size);
  json summary;
  switch (kind) {
    case EvalKind::Recon: {
      Rng rng = make_rng(cfg.seed, "eval-recon");
      const FeatureReport rep = feature_report(model, prepared.test_images, prepared.test_y, rng);
      write_feature_report(dir, rep);
      if (!rep.warning.empty()) log << "eval-recon: warning: " << rep.warning << "\n";
      summary = {{"mean_rmse", rep.rmse.mean()}, {"best", rep.best}, {"worst", rep.worst}};
      log << "eval-recon: mean per-feature RMSE " << rep.rmse.mean() << "\n";
      break;
    }
    case EvalKind::Decode: {
      Rng rng = make_rng(cfg.seed, "eval-decode");
      const int n = cfg.eval.n_samples > 0 ? cfg.eval.n_samples : static_cast<int>(prepared.test_y.cols());
      const GenerativeReport rep = decode_noise(model, prepared.test_y, n, rng);
      write_generative_report(dir, rep);
      summary = {{"n_samples", n}, {"moment_mismatch_score", rep.score}};
      log << "eval-decode: moment mismatch " << rep.score << "\n";
      break;
    }
    case EvalKind::Cov: {
      Rng rng = make_rng(cfg.seed, "eval-cov");
      const LatentCovReport rep = latent_covariance(model, prepared.test_images, rng);
      write_latent_cov_report(dir, rep);
      summary = {{"off_diagonal_energy", rep.off_diagonal_energy}, {"diagonal_deviation", rep.diagonal_deviation}};
      log << "eval-cov: off-diagonal energy " << rep.off_diagonal_energy << "\n";
      break;
    }
  }
  return summary;
}

RunConfig resolve_config(const Overrides& ov) {
  RunConfig cfg = ov.config.empty() ? RunConfig{} : load_config(ov.config);
  if (ov.seed) cfg.seed = *ov.seed;
  if (ov.out) cfg.out = *ov.out;
  if (ov.r) {
    cfg.model.latent_dim = *ov.r;
    cfg.sweep.r = {*ov.r};
  }
  if (ov.beta) {
    cfg.train.beta = Schedule::constant(*ov.beta);
    cfg.sweep.beta = {*ov.beta};
  }
  if (ov.lambda) {
    cfg.train.lambda = Schedule::constant(*ov.lambda);
    cfg.sweep.lambda = {*ov.lambda};
  }
  if (ov.epochs) cfg.train.epochs = *ov.epochs;
  if (ov.train_size) cfg.train.train_size = *ov.train_size;
  cfg.train.seed = cfg.seed;
  cfg.validate();
  return cfg;
}

int run_command(const std::string& command, const Overrides& ov, std::ostream& log) {
  const RunConfig cfg = resolve_config(ov);
  RunManifest man(command, cfg);
  std::string current = command;
  try {
    auto load = [&]() {
      const fs::path dir = data_dir(cfg, ov);
      log << "loading dataset " << dir.string() << "\n";
      return load_dataset(dir);
    };
    if (command == "generate") {
      const fs::path dir = data_dir(cfg, ov);
      stage_generate(cfg, dir, log);
      add_dir_artifacts(man, dir);
      man.stage("generate", "ok");
    } else if (command == "cca") {
      const Dataset data = load();
      man.result("cca", stage_cca(cfg, data, cfg.out / "cca", log));
      add_dir_artifacts(man, cfg.out / "cca");
      man.stage("cca", "ok");
    } else if (command == "train") {
      const Dataset data = load();
      man.result("train", stage_train(cfg, data, cfg.out / "train", log));
      add_dir_artifacts(man, cfg.out / "train");
      man.stage("train", "ok");
    } else if (command == "sweep") {
      const Dataset data = load();
      const SweepResult res = stage_sweep(cfg, data, cfg.out / "sweep", log);
      add_dir_artifacts(man, cfg.out / "sweep");
      man.stage("sweep", "ok");
      man.result("sweep_cells", res.cells.size());
    } else if (command == "eval-recon" || command == "eval-decode" || command == "eval-cov") {
      const Dataset data = load();
      const EvalKind kind = command == "eval-recon"   ? EvalKind::Recon
                            : command == "eval-decode" ? EvalKind::Decode
                                                       : EvalKind::Cov;
      man.result(command, stage_eval(kind, cfg, data, checkpoint_dir(cfg, ov), cfg.out / "eval", log));
      add_dir_artifacts(man, cfg.out / "eval");
      man.stage(command, "ok");
    } else if (command == "pipeline") {
      current = "generate";
      const Dataset data = stage_generate(cfg, data_dir(cfg, ov), log);
      man.stage(current, "ok");
      current = "cca";
      man.result("cca", stage_cca(cfg, data, cfg.out / "cca", log));
      man.stage(current, "ok");
      current = "sweep";
      const SweepResult sweep = stage_sweep(cfg, data, cfg.out / "sweep", log);
      man.stage(current, "ok");
      // evaluate the cell with the lowest test MSE
      const SweepCell* best = nullptr;
      for (const auto& c : sweep.cells)
        if (c.ok && (!best || c.best_mse < best->best_mse)) best = &c;
      if (!best) throw NumericalError("every sweep cell failed");
      man.result("evaluated_cell", cell_name(best->r, best->beta, best->lambda));
      const fs::path ckpt = best->run_dir / "checkpoint";
      for (auto [kind, name] : {std::pair{EvalKind::Recon, "eval-recon"}, std::pair{EvalKind::Decode, "eval-decode"},
                                std::pair{EvalKind::Cov, "eval-cov"}}) {
        current = name;
        man.result(name, stage_eval(kind, cfg, data, ckpt, cfg.out / "eval", log));
        man.stage(current, "ok");
      }
      for (const char* sub : {"data", "cca", "sweep", "eval"}) add_dir_artifacts(man, cfg.out / sub);
    }
  } catch (const std::exception& e) {
    man.stage(current, "failed", e.what());
    for (const char* sub : {"data", "cca", "train", "sweep", "eval"}) add_dir_artifacts(man, cfg.out / sub);
    man.write("failed");
    throw;
  }
  const fs::path path = man.write("ok");
  log << "manifest: " << path.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& log) {
  CLI::App app{"Variational encoder-decoder surrogate toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1, 1);
  app.fallthrough();

  Overrides ov;
  std::uint64_t seed = 0;
  std::string out, data, checkpoint;
  int r = 0, epochs = 0, train_size = 0;
  double beta = 0.0, lambda = 0.0;
  app.add_option("--config", ov.config, "JSON config file");
  auto* o_seed = app.add_option("--seed", seed, "root seed");
  auto* o_out = app.add_option("--out", out, "run directory");
  auto* o_r = app.add_option("--r", r, "latent dimension (train) or the only sweep r");
  auto* o_beta = app.add_option("--beta", beta, "constant KL weight");
  auto* o_lambda = app.add_option("--lambda", lambda, "constant covariance penalty weight");
  auto* o_epochs = app.add_option("--epochs", epochs, "training epochs");
  auto* o_train = app.add_option("--train-size", train_size, "training rows to use (0 = all)");
  auto* o_data = app.add_option("--data", data, "dataset directory (default <out>/data)");
  auto* o_ckpt = app.add_option("--checkpoint", checkpoint, "checkpoint directory (default <out>/train/checkpoint)");

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"generate", "simulate the dataset"},
      {"cca", "canonical correlation analysis of the training split"},
      {"train", "train one model"},
      {"sweep", "train every (r, beta, lambda) cell"},
      {"eval-recon", "per-feature reconstruction report"},
      {"eval-decode", "decode prior samples and compare marginals"},
      {"eval-cov", "latent code covariance report"},
      {"pipeline", "generate, cca, sweep and evaluate the best cell"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  if (o_seed->count()) ov.seed = seed;
  if (o_out->count()) ov.out = out;
  if (o_r->count()) ov.r = r;
  if (o_beta->count()) ov.beta = beta;
  if (o_lambda->count()) ov.lambda = lambda;
  if (o_epochs->count()) ov.epochs = epochs;
  if (o_train->count()) ov.train_size = train_size;
  if (o_data->count()) ov.data = data;
  if (o_ckpt->count()) ov.checkpoint = checkpoint;

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run_command(command, ov, log);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}

}  // namespace ved
