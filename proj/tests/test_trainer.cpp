#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "ved/checkpoint.hpp"
#include "ved/errors.hpp"
#include "ved/schedule.hpp"
#include "ved/sweep.hpp"
#include "ved/trainer.hpp"

using namespace ved;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ved_test_trainer_" + name);
  fs::remove_all(p);
  return p;
}

const Dataset& small_data() {
  static const Dataset d = [] {
    const FlowGrid grid = FlowGrid::with_corner_bites(10, 8, 0.2, 3);
    const CovarianceKernel kernel{1.0, 1.6};
    return generate_dataset(grid, kernel, build_kle(grid, kernel, 30), 250, 6, 0.8, 11);
  }();
  return d;
}

ArchConfig small_arch(int r) {
  ArchConfig a = arch_for(small_data(), r);
  a.channels = {1, 2, 3, 4, 5, 6};
  a.decoder_hidden = 16;
  return a;
}

TrainConfig small_cfg(int epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 20;
  c.seed = 5;
  return c;
}

}  // namespace

TEST_CASE("schedule values") {
  CHECK(schedule_value(Schedule::constant(0.01), 0, 100) == 0.01);
  CHECK(schedule_value(Schedule::constant(0.01), 99, 100) == 0.01);
  CHECK(schedule_value(Schedule::linear(0.0, 1.0), 50, 100) == doctest::Approx(0.5));
  CHECK(schedule_value(Schedule::linear(0.0, 1.0), 0, 100) == 0.0);
  CHECK(schedule_value(Schedule::cyclic(0.0, 1.0, 4), 26, 100) == doctest::Approx(0.04));
  CHECK(schedule_value(Schedule::cyclic(0.0, 1.0, 4), 25, 100) == doctest::Approx(0.0));
  CHECK(schedule_value(Schedule::cyclic(0.0, 1.0, 4), 24, 100) == doctest::Approx(0.96));

  Schedule step;
  step.kind = ScheduleKind::Step;
  step.value = 0.0;
  step.steps = {{0.5, 0.1}, {0.75, 0.2}};
  CHECK(schedule_value(step, 49, 100) == 0.0);
  CHECK(schedule_value(step, 50, 100) == 0.1);
  CHECK(schedule_value(step, 74, 100) == 0.1);
  CHECK(schedule_value(step, 75, 100) == 0.2);

  CHECK_THROWS_AS(schedule_value(Schedule::constant(1.0), 100, 100), ConfigError);
  CHECK_THROWS_AS(parse_schedule_kind("sawtooth"), ConfigError);
  CHECK(parse_schedule_kind("cyclic") == ScheduleKind::Cyclic);
  CHECK_THROWS_AS(Schedule::constant(-0.1).validate(), ConfigError);
}

TEST_CASE("schedule json round trip") {
  const Schedule c = schedule_from_json(0.25);
  CHECK(c.kind == ScheduleKind::Constant);
  CHECK(c.value == 0.25);
  const Schedule cyc = schedule_from_json(schedule_to_json(Schedule::cyclic(0.0, 0.1, 3)));
  CHECK(cyc.kind == ScheduleKind::Cyclic);
  CHECK(cyc.cycles == 3);
  CHECK(cyc.end == 0.1);
  CHECK_THROWS_AS(schedule_from_json(nlohmann::json{{"kind", "warp"}}), ConfigError);
}

TEST_CASE("cosine learning rate endpoints") {
  CHECK(cosine_lr(0, 100, 1e-3, 1e-5) == doctest::Approx(1e-3));
  CHECK(cosine_lr(99, 100, 1e-3, 1e-5) == doctest::Approx(1e-5));
  CHECK(cosine_lr(0, 1, 1e-3, 1e-5) == doctest::Approx(1e-3));
  for (long s = 1; s < 100; ++s) CHECK(cosine_lr(s, 100, 1e-3, 1e-5) <= cosine_lr(s - 1, 100, 1e-3, 1e-5));
}

TEST_CASE("tiny run descends, clips and keeps the best epoch") {
  const TrainConfig cfg = small_cfg(5);
  const TrainResult res = train(small_data(), small_arch(4), cfg);
  const auto& m = res.metrics;
  REQUIRE(m.epochs.size() == 5);
  CHECK(m.epochs.back().train.total < m.epochs.front().train.total);
  for (double g : m.grad_norms) CHECK(g <= cfg.clip_norm * (1.0 + 1e-6));
  CHECK(m.step_losses.size() == 5 * (200 / 20));
  CHECK(m.learning_rates.front() == doctest::Approx(cfg.lr_init));
  CHECK(m.learning_rates.back() == doctest::Approx(cfg.lr_final));

  double best = 1e300;
  int best_epoch = -1;
  for (const auto& e : m.epochs) {
    if (e.test.mse_report < best) best = e.test.mse_report, best_epoch = e.epoch;
    CHECK(e.beta == 0.01);
    CHECK(e.lambda == 0.01);
  }
  CHECK(m.best_mse == best);
  CHECK(m.best_epoch == best_epoch);
}

TEST_CASE("training is deterministic and the checkpoint reproduces the best test MSE") {
  TrainConfig cfg = small_cfg(3);
  cfg.out_dir = scratch("det");
  const TrainResult a = train(small_data(), small_arch(3), cfg);
  TrainConfig again = cfg;
  again.out_dir.clear();
  const TrainResult b = train(small_data(), small_arch(3), again);
  CHECK(a.metrics.best_mse == b.metrics.best_mse);
  CHECK(a.metrics.step_losses == b.metrics.step_losses);

  CHECK(fs::exists(cfg.out_dir / "metrics.csv"));
  REQUIRE(fs::exists(a.metrics.best_checkpoint / "manifest.json"));
  const LoadedCheckpoint lc = load_checkpoint(a.metrics.best_checkpoint);
  const PreparedData p = prepare_data(small_data());
  const Eigen::MatrixXf eps = evaluation_eps(cfg.seed, 3, static_cast<int>(p.test_y.cols()));
  const SplitMetrics sm = evaluate_split(lc.model, p.test_images, p.test_y, eps, 0.01, 0.01);
  CHECK(std::abs(sm.mse_report - a.metrics.best_mse) <= 1e-6);
  // the returned model holds the best parameters as well
  CHECK(std::abs(evaluate_split(a.model, p.test_images, p.test_y, eps, 0.01, 0.01).mse_report -
                 a.metrics.best_mse) <= 1e-6);
  fs::remove_all(cfg.out_dir);
}

TEST_CASE("kld is larger without the KL weight") {
  TrainConfig free = small_cfg(4);
  free.beta = Schedule::constant(0.0);
  free.lambda = Schedule::constant(0.0);
  TrainConfig weighted = small_cfg(4);
  weighted.beta = Schedule::constant(0.1);
  weighted.lambda = Schedule::constant(0.0);
  const TrainResult a = train(small_data(), small_arch(4), free);
  const TrainResult b = train(small_data(), small_arch(4), weighted);
  CHECK(a.metrics.epochs.back().test.kld_report > b.metrics.epochs.back().test.kld_report);
}

TEST_CASE("prepared data is normalised with training statistics") {
  const Dataset& d = small_data();
  const PreparedData p = prepare_data(d);
  CHECK(p.train_y.cols() == d.n_train);
  CHECK(p.test_y.cols() == d.n_test);
  CHECK(p.train_images.rows() == d.grid.height() * d.grid.width());
  CHECK((p.train_y.rowwise().mean()).cwiseAbs().maxCoeff() < 1e-4);
  const PreparedData q = prepare_data(d, 50, 10);
  CHECK(q.train_y.cols() == 50);
  CHECK(q.test_y.cols() == 10);
  CHECK_THROWS_AS(prepare_data(d, d.n_train + 1, 0), ConfigError);
}

TEST_CASE("sweep covers the grid and flags the per-r best") {
  TrainConfig base = small_cfg(1);
  const SweepResult res = run_sweep(small_data(), small_arch(1), base, {{2, 3}, {0.0, 0.01}, {0.0}});
  REQUIRE(res.cells.size() == 4);
  for (const auto& c : res.cells) {
    CHECK(c.ok);
    CHECK(std::isfinite(c.best_mse));
  }
  for (int r : {2, 3}) {
    int flagged = 0;
    double lowest = 1e300;
    for (const auto& c : res.cells)
      if (c.r == r) lowest = std::min(lowest, c.best_mse);
    for (const auto& c : res.cells)
      if (c.r == r && c.best_for_r) {
        ++flagged;
        CHECK(c.best_mse == lowest);
      }
    CHECK(flagged == 1);
  }
  CHECK(cell_name(16, 0.01, 0.1) == "r16_beta0.01_lambda0.1");
}

TEST_CASE("trainer rejects bad settings") {
  TrainConfig cfg = small_cfg(0);
  CHECK_THROWS_AS(train(small_data(), small_arch(2), cfg), ConfigError);
  cfg = small_cfg(1);
  cfg.batch_size = 1;
  CHECK_THROWS_AS(train(small_data(), small_arch(2), cfg), ConfigError);
  cfg = small_cfg(1);
  cfg.clip_norm = 0.0;
  CHECK_THROWS_AS(train(small_data(), small_arch(2), cfg), ConfigError);
  ArchConfig wrong = small_arch(2);
  wrong.output_dim = 7;
  CHECK_THROWS_AS(train(small_data(), wrong, small_cfg(1)), ConfigError);
}
