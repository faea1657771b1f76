#include "ved/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>

#include "ved/checkpoint.hpp"
#include "ved/errors.hpp"
#include "ved/grid_map.hpp"
#include "ved/losses.hpp"

namespace ved {

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 2) throw ConfigError("batch_size must be >= 2 (batch normalisation)");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be > 0");
  if (!(lr_init > 0.0) || !(lr_final > 0.0)) throw ConfigError("learning rates must be > 0");
  if (train_size < 0 || test_size < 0) throw ConfigError("train_size and test_size must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0 && adam_eps > 0.0))
    throw ConfigError("invalid Adam parameters");
  beta.validate();
  lambda.validate();
}

PreparedData prepare_data(const Dataset& data, int train_size, int test_size) {
  if (train_size < 0 || test_size < 0) throw ConfigError("train_size and test_size must be >= 0");
  if (train_size > data.n_train)
    throw ConfigError("train_size " + std::to_string(train_size) + " exceeds the training split (" +
                      std::to_string(data.n_train) + ")");
  if (test_size > data.n_test)
    throw ConfigError("test_size " + std::to_string(test_size) + " exceeds the test split (" +
                      std::to_string(data.n_test) + ")");
  const int n_tr = train_size > 0 ? train_size : data.n_train;
  const int n_te = test_size > 0 ? test_size : data.n_test;
  const GridMap map = GridMap::from_grid(data.grid, 0.0);

  const Eigen::ArrayXf x_mean = data.x_norm.mean.cast<float>().array();
  const Eigen::ArrayXf x_std = data.x_norm.std.cast<float>().array();
  const Eigen::ArrayXf y_mean = data.y_norm.mean.cast<float>().array();
  const Eigen::ArrayXf y_std = data.y_norm.std.cast<float>().array();

  auto inputs = [&](int begin, int count) {
    Eigen::MatrixXf xs = data.X.middleRows(begin, count).transpose();
    xs = ((xs.array().colwise() - x_mean).colwise() / x_std).matrix();
    return map.map_batch<float>(xs);
  };
  auto targets = [&](int begin, int count) {
    Eigen::MatrixXf ys = data.Y.middleRows(begin, count).transpose();
    return Eigen::MatrixXf(((ys.array().colwise() - y_mean).colwise() / y_std).matrix());
  };
  PreparedData out;
  out.train_images = inputs(0, n_tr);
  out.train_y = targets(0, n_tr);
  out.test_images = inputs(data.n_train, n_te);
  out.test_y = targets(data.n_train, n_te);
  return out;
}

ArchConfig arch_for(const Dataset& data, int latent_dim) {
  ArchConfig a;
  a.height = data.grid.height();
  a.width = data.grid.width();
  a.latent_dim = latent_dim;
  a.output_dim = data.n_outputs();
  return a;
}

Eigen::MatrixXf evaluation_eps(std::uint64_t seed, int latent_dim, int n) {
  Rng rng = make_rng(seed, "eval");
  return standard_normal<float>(rng, latent_dim, n);
}

SplitMetrics evaluate_split(const VedModel<float>& model, const Eigen::MatrixXf& images, const Eigen::MatrixXf& y,
                            const Eigen::MatrixXf& eps, double beta, double lambda) {
  const Eigen::Index n = images.cols();
  if (n < 1 || y.cols() != n || eps.cols() != n) throw DimensionError("evaluate_split: column counts differ");
  const int r = model.arch().latent_dim;
  Eigen::MatrixXf g(r, n), h(r, n);
  double sq = 0.0;
  constexpr Eigen::Index kChunk = 500;
  for (Eigen::Index b = 0; b < n; b += kChunk) {
    const Eigen::Index len = std::min(kChunk, n - b);
    const Eigen::MatrixXf e = eps.middleCols(b, len);
    const ForwardResult<float> fwd = model.forward(images.middleCols(b, len), e);
    sq += (fwd.y_hat - y.middleCols(b, len)).cast<double>().squaredNorm();
    g.middleCols(b, len) = fwd.g;
    h.middleCols(b, len) = fwd.h;
  }
  SplitMetrics m;
  const double mse = sq / static_cast<double>(n);
  const double kld = kld_loss<float>(g, h);
  m.mse_report = mse / static_cast<double>(y.rows());
  m.kld_report = kld / static_cast<double>(r);
  m.cov = n >= 2 ? cov_penalty<float>(aggregate_cov<float>(g, h)) : 0.0;
  m.total = combine_loss(mse, kld, m.cov, beta, lambda);
  return m;
}

namespace {

struct Adam {
  std::vector<std::vector<float>> m, v;
  long t = 0;

  explicit Adam(const std::vector<nn::ParamView<float>>& params) {
    for (const auto& p : params) {
      m.emplace_back(static_cast<std::size_t>(p.size), 0.0f);
      v.emplace_back(static_cast<std::size_t>(p.size), 0.0f);
    }
  }

  void step(std::vector<nn::ParamView<float>>& params, const TrainConfig& cfg, double lr) {
    ++t;
    const double c1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(t));
    const float b1 = static_cast<float>(cfg.adam_beta1), b2 = static_cast<float>(cfg.adam_beta2);
    const float step_size = static_cast<float>(lr / c1);
    const float inv_c2 = static_cast<float>(1.0 / c2);
    const float eps = static_cast<float>(cfg.adam_eps);
    for (std::size_t k = 0; k < params.size(); ++k) {
      Eigen::Map<Eigen::ArrayXf> w(params[k].value, params[k].size);
      Eigen::Map<const Eigen::ArrayXf> g(params[k].grad, params[k].size);
      Eigen::Map<Eigen::ArrayXf> mk(m[k].data(), params[k].size);
      Eigen::Map<Eigen::ArrayXf> vk(v[k].data(), params[k].size);
      mk = b1 * mk + (1.0f - b1) * g;
      vk = b2 * vk + (1.0f - b2) * g.square();
      w -= step_size * mk / ((vk * inv_c2).sqrt() + eps);
    }
  }
};

double global_norm(const std::vector<nn::ParamView<float>>& params) {
  double acc = 0.0;
  for (const auto& p : params)
    acc += Eigen::Map<const Eigen::VectorXf>(p.grad, p.size).cast<double>().squaredNorm();
  return std::sqrt(acc);
}

// Scales gradients to a global norm of at most clip_norm; returns the norm
// after clipping, measured on the stored float values.
double clip_gradients(std::vector<nn::ParamView<float>>& params, double clip_norm) {
  double norm = global_norm(params);
  if (!std::isfinite(norm)) throw NumericalError("non-finite gradient norm");
  double target = clip_norm;
  while (norm > clip_norm) {
    const float scale = static_cast<float>(target / norm);
    for (auto& p : params) Eigen::Map<Eigen::VectorXf>(p.grad, p.size) *= scale;
    norm = global_norm(params);
    target *= 1.0 - 1e-6;  // float rounding can land a hair above the ceiling
  }
  return norm;
}

void write_csv_header(std::ofstream& csv) { csv << "epoch,split,mse_report,kld_report,cov,total,beta,lambda\n"; }

void write_csv_row(std::ofstream& csv, int epoch, const char* split, const SplitMetrics& m, double beta,
                   double lambda) {
  csv << epoch << ',' << split << ',' << std::setprecision(10) << m.mse_report << ',' << m.kld_report << ','
      << m.cov << ',' << m.total << ',' << beta << ',' << lambda << '\n';
}

}  // namespace

TrainResult train(const Dataset& data, const ArchConfig& arch, const TrainConfig& cfg) {
  cfg.validate();
  if (arch.height != data.grid.height() || arch.width != data.grid.width() || arch.output_dim != data.n_outputs())
    throw ConfigError("architecture does not match the dataset geometry");
  return train(prepare_data(data, cfg.train_size, cfg.test_size), arch, cfg);
}

TrainResult train(const PreparedData& data, const ArchConfig& arch, const TrainConfig& cfg) {
  cfg.validate();
  arch.validate();
  const auto t_start = std::chrono::steady_clock::now();
  const Eigen::Index n_train = data.train_images.cols();
  const Eigen::Index n_test = data.test_images.cols();
  if (data.train_images.rows() != static_cast<Eigen::Index>(arch.height) * arch.width ||
      data.train_y.rows() != arch.output_dim)
    throw ConfigError("architecture does not match the prepared data");
  if (n_train < 2) throw ConfigError("training needs at least 2 samples");
  if (n_test < 1) throw ConfigError("training needs a non-empty test split");

  const int batch_size = static_cast<int>(std::min<Eigen::Index>(cfg.batch_size, n_train));
  const long full_batches = static_cast<long>(n_train / batch_size);
  const long tail = static_cast<long>(n_train % batch_size);
  const long steps_per_epoch = full_batches + (tail >= 2 ? 1 : 0);
  const long total_steps = steps_per_epoch * cfg.epochs;

  VedModel<float> model(arch, derive_seed(cfg.seed, "init"));
  auto params = model.parameters();
  Adam adam(params);
  const Eigen::MatrixXf test_eps = evaluation_eps(cfg.seed, arch.latent_dim, static_cast<int>(n_test));

  std::ofstream csv;
  std::filesystem::path ckpt_dir;
  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    csv.open(cfg.out_dir / "metrics.csv");
    if (!csv) throw DataError("cannot write " + (cfg.out_dir / "metrics.csv").string());
    write_csv_header(csv);
    ckpt_dir = cfg.out_dir / "checkpoint";
  }

  MetricsRecord rec;
  rec.step_losses.reserve(static_cast<std::size_t>(total_steps));
  std::vector<float> best_state;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_train));
  long step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double beta = schedule_value(cfg.beta, epoch, cfg.epochs);
    const double lambda = schedule_value(cfg.lambda, epoch, cfg.epochs);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng shuffle_rng = make_rng(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    Rng eps_rng = make_rng(cfg.seed, "eps", static_cast<std::uint64_t>(epoch));

    EpochRecord er;
    er.epoch = epoch;
    er.beta = beta;
    er.lambda = lambda;
    double sum_mse = 0.0, sum_kld = 0.0, sum_cov = 0.0, sum_total = 0.0;
    for (long s = 0; s < steps_per_epoch; ++s, ++step) {
      const Eigen::Index begin = s * batch_size;
      const Eigen::Index len = std::min<Eigen::Index>(batch_size, n_train - begin);
      const std::vector<Eigen::Index> idx(order.begin() + begin, order.begin() + begin + len);
      const Eigen::MatrixXf xb = data.train_images(Eigen::all, idx);
      const Eigen::MatrixXf yb = data.train_y(Eigen::all, idx);
      const Eigen::MatrixXf eps = standard_normal<float>(eps_rng, arch.latent_dim, len);

      LossBreakdown loss;
      double norm = 0.0;
      try {
        loss = loss_and_backward(model, xb, yb, eps, beta, lambda);
        norm = clip_gradients(params, cfg.clip_norm);
      } catch (const NumericalError& e) {
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) + ", step " +
                             std::to_string(step) + ": " + e.what() +
                             (ckpt_dir.empty() ? std::string() : "; last good checkpoint: " + ckpt_dir.string()));
      }
      const double lr = cosine_lr(step, total_steps, cfg.lr_init, cfg.lr_final);
      adam.step(params, cfg, lr);

      rec.step_losses.push_back(loss.total);
      rec.grad_norms.push_back(norm);
      rec.learning_rates.push_back(lr);
      er.lr = lr;
      sum_mse += loss.mse;
      sum_kld += loss.kld;
      sum_cov += loss.cov;
      sum_total += loss.total;
    }
    const double steps = static_cast<double>(steps_per_epoch);
    er.train.mse_report = sum_mse / steps / arch.output_dim;
    er.train.kld_report = sum_kld / steps / arch.latent_dim;
    er.train.cov = sum_cov / steps;
    er.train.total = sum_total / steps;

    try {
      er.test = evaluate_split(model, data.test_images, data.test_y, test_eps, beta, lambda);
    } catch (const NumericalError& e) {
      throw NumericalError("evaluation diverged at epoch " + std::to_string(epoch) + ": " + e.what());
    }
    rec.epochs.push_back(er);
    if (csv) {
      write_csv_row(csv, epoch, "train", er.train, beta, lambda);
      write_csv_row(csv, epoch, "test", er.test, beta, lambda);
      csv.flush();
    }

    if (er.test.mse_report < rec.best_mse) {
      rec.best_mse = er.test.mse_report;
      rec.best_kld = er.test.kld_report;
      rec.best_epoch = epoch;
      best_state = model.state();
      if (!ckpt_dir.empty()) {
        save_checkpoint(ckpt_dir, model,
                        {{"epoch", epoch},
                         {"seed", cfg.seed},
                         {"test_mse_report", er.test.mse_report},
                         {"test_kld_report", er.test.kld_report},
                         {"beta", beta},
                         {"lambda", lambda}});
        rec.best_checkpoint = ckpt_dir;
      }
    }
    if (cfg.verbose)
      std::cerr << "epoch " << epoch + 1 << "/" << cfg.epochs << "  train total " << er.train.total
                << "  test mse " << er.test.mse_report << "  test kld " << er.test.kld_report << "\n";
  }

  model.load_state(best_state);
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {std::move(rec), std::move(model)};
}

}  // namespace ved
