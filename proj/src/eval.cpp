#include "ved/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "ved/binary_io.hpp"
#include "ved/errors.hpp"
#include "ved/svg.hpp"

namespace ved {

namespace {

constexpr Eigen::Index kChunk = 500;

Eigen::VectorXd row_mean(const Eigen::MatrixXf& m) { return m.cast<double>().rowwise().mean(); }

Eigen::VectorXd row_std(const Eigen::MatrixXf& m) {
  const Eigen::MatrixXd d = m.cast<double>();
  const Eigen::MatrixXd c = d.colwise() - d.rowwise().mean();
  return (c.rowwise().squaredNorm() / static_cast<double>(m.cols())).cwiseSqrt();
}

std::vector<DensityCurve> densities(const Eigen::MatrixXf& m) {
  std::vector<DensityCurve> out;
  out.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(gaussian_kde(m.row(i).transpose().cast<double>()));
  return out;
}

svg::Series curve_series(const std::string& label, const DensityCurve& c) { return {label, c.x, c.density}; }

}  // namespace

FeatureReport feature_report(const Eigen::MatrixXf& y_true, const Eigen::MatrixXf& y_pred) {
  if (y_true.rows() != y_pred.rows() || y_true.cols() != y_pred.cols())
    throw DimensionError("feature_report: targets and predictions differ in shape");
  if (y_true.cols() < 2) throw StatisticsError("feature_report needs at least 2 test rows");
  const Eigen::Index m = y_true.rows();
  FeatureReport rep;
  rep.rmse = ((y_true - y_pred).cast<double>().rowwise().squaredNorm() / static_cast<double>(y_true.cols())).cwiseSqrt();

  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rep.rmse(a) < rep.rmse(b); });
  int k = 3;
  if (m < 6) {
    k = std::max<int>(1, static_cast<int>(m / 2));
    rep.warning = "only " + std::to_string(m) + " features; rankings truncated to " + std::to_string(k);
  }
  rep.best.assign(order.begin(), order.begin() + k);
  rep.worst.assign(order.rbegin(), order.rbegin() + k);
  rep.truth_density = densities(y_true);
  rep.recon_density = densities(y_pred);
  return rep;
}

FeatureReport feature_report(const VedModel<float>& model, const Eigen::MatrixXf& images, const Eigen::MatrixXf& y,
                             Rng& rng) {
  const Eigen::MatrixXf eps = standard_normal<float>(rng, model.arch().latent_dim, images.cols());
  Eigen::MatrixXf pred(model.arch().output_dim, images.cols());
  for (Eigen::Index b = 0; b < images.cols(); b += kChunk) {
    const Eigen::Index len = std::min(kChunk, images.cols() - b);
    pred.middleCols(b, len) = model.forward(images.middleCols(b, len), Eigen::MatrixXf(eps.middleCols(b, len))).y_hat;
  }
  return feature_report(y, pred);
}

double moment_mismatch(const Eigen::MatrixXf& a, const Eigen::MatrixXf& b) {
  if (a.rows() != b.rows()) throw DimensionError("moment_mismatch: feature counts differ");
  if (a.cols() < 1 || b.cols() < 1) throw StatisticsError("moment_mismatch needs samples on both sides");
  return ((row_mean(a) - row_mean(b)).cwiseAbs() + (row_std(a) - row_std(b)).cwiseAbs()).mean();
}

GenerativeReport decode_noise(const Decoder& decoder, int latent_dim, const Eigen::MatrixXf& test_y, int n_samples,
                              Rng& rng) {
  if (n_samples < 2) throw ConfigError("decode_noise needs n_samples >= 2");
  if (test_y.cols() < 2) throw StatisticsError("decode_noise needs at least 2 test rows");
  const Eigen::MatrixXf z = standard_normal<float>(rng, latent_dim, n_samples);
  Eigen::MatrixXf synth(test_y.rows(), n_samples);
  for (Eigen::Index b = 0; b < n_samples; b += kChunk) {
    const Eigen::Index len = std::min<Eigen::Index>(kChunk, n_samples - b);
    const Eigen::MatrixXf out = decoder(z.middleCols(b, len));
    if (out.rows() != test_y.rows() || out.cols() != len) throw DimensionError("decoder output has the wrong shape");
    synth.middleCols(b, len) = out;
  }
  GenerativeReport rep;
  rep.synth_mean = row_mean(synth);
  rep.synth_std = row_std(synth);
  rep.test_mean = row_mean(test_y);
  rep.test_std = row_std(test_y);
  rep.score = moment_mismatch(synth, test_y);
  rep.synth_density = densities(synth);
  rep.test_density = densities(test_y);
  return rep;
}

GenerativeReport decode_noise(const VedModel<float>& model, const Eigen::MatrixXf& test_y, int n_samples, Rng& rng) {
  return decode_noise([&](const Eigen::MatrixXf& z) { return model.decode(z); }, model.arch().latent_dim, test_y,
                      n_samples, rng);
}

LatentCovReport latent_covariance(const Encoder& encoder, const Eigen::MatrixXf& images, Rng& rng) {
  const Eigen::Index n = images.cols();
  if (n < 2) throw StatisticsError("latent_covariance needs at least 2 inputs");
  Eigen::MatrixXd codes;
  for (Eigen::Index b = 0; b < n; b += kChunk) {
    const Eigen::Index len = std::min(kChunk, n - b);
    const EncoderOutput<float> enc = encoder(images.middleCols(b, len));
    if (enc.g.cols() != len || enc.h.rows() != enc.g.rows() || enc.h.cols() != len)
      throw DimensionError("encoder output has the wrong shape");
    if (codes.size() == 0) codes.resize(enc.g.rows(), n);
    const Eigen::MatrixXf eps = standard_normal<float>(rng, enc.g.rows(), len);
    codes.middleCols(b, len) = reparameterize<float>(enc.g, enc.h, eps).cast<double>();
  }
  const Eigen::MatrixXd centered = codes.colwise() - codes.rowwise().mean();
  LatentCovReport rep;
  rep.cov = centered * centered.transpose() / static_cast<double>(n);
  rep.cov = 0.5 * (rep.cov + rep.cov.transpose());
  const Eigen::VectorXd diag = rep.cov.diagonal();
  rep.off_diagonal_energy = rep.cov.squaredNorm() - diag.squaredNorm();
  rep.diagonal_deviation = (diag.array() - 1.0).square().sum();
  return rep;
}

LatentCovReport latent_covariance(const VedModel<float>& model, const Eigen::MatrixXf& images, Rng& rng) {
  return latent_covariance([&](const Eigen::MatrixXf& x) { return model.encode(x); }, images, rng);
}

void write_feature_report(const std::filesystem::path& dir, const FeatureReport& rep) {
  std::filesystem::create_directories(dir);
  std::vector<int> rank(static_cast<std::size_t>(rep.rmse.size()));
  {
    std::vector<int> order(rank.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rep.rmse(a) < rep.rmse(b); });
    for (std::size_t i = 0; i < order.size(); ++i) rank[static_cast<std::size_t>(order[i])] = static_cast<int>(i) + 1;
  }
  std::ostringstream csv;
  csv.precision(10);
  csv << "feature,rmse,rank\n";
  for (Eigen::Index i = 0; i < rep.rmse.size(); ++i) csv << i << ',' << rep.rmse(i) << ',' << rank[static_cast<std::size_t>(i)] << '\n';
  write_text(dir / "recon_features.csv", csv.str());

  std::vector<svg::Panel> panels;
  auto add = [&](int f, const char* tag) {
    char title[96];
    std::snprintf(title, sizeof title, "%s: feature %d (RMSE %.3g)", tag, f, rep.rmse(f));
    panels.push_back({title,
                      {curve_series("test", rep.truth_density[static_cast<std::size_t>(f)]),
                       curve_series("reconstruction", rep.recon_density[static_cast<std::size_t>(f)])}});
  };
  for (int f : rep.best) add(f, "best");
  for (int f : rep.worst) add(f, "worst");
  svg::panel_plot(dir / "recon_densities.svg", "Reconstruction densities, best and worst features", panels,
                  static_cast<int>(std::max<std::size_t>(1, rep.best.size())));
}

void write_generative_report(const std::filesystem::path& dir, const GenerativeReport& rep) {
  std::filesystem::create_directories(dir);
  std::ostringstream csv;
  csv.precision(10);
  csv << "feature,synth_mean,synth_std,test_mean,test_std\n";
  for (Eigen::Index i = 0; i < rep.synth_mean.size(); ++i)
    csv << i << ',' << rep.synth_mean(i) << ',' << rep.synth_std(i) << ',' << rep.test_mean(i) << ','
        << rep.test_std(i) << '\n';
  write_text(dir / "decode_noise.csv", csv.str());

  std::vector<svg::Panel> panels;
  const std::size_t shown = std::min<std::size_t>(6, rep.synth_density.size());
  for (std::size_t f = 0; f < shown; ++f)
    panels.push_back({"feature " + std::to_string(f),
                      {curve_series("test", rep.test_density[f]), curve_series("decoded noise", rep.synth_density[f])}});
  char title[96];
  std::snprintf(title, sizeof title, "Decoded prior samples vs test data (mismatch %.4g)", rep.score);
  svg::panel_plot(dir / "decode_noise_densities.svg", title, panels, 3);
}

void write_latent_cov_report(const std::filesystem::path& dir, const LatentCovReport& rep) {
  std::filesystem::create_directories(dir);
  std::ostringstream csv;
  csv.precision(10);
  for (Eigen::Index i = 0; i < rep.cov.rows(); ++i) {
    for (Eigen::Index j = 0; j < rep.cov.cols(); ++j) csv << (j ? "," : "") << rep.cov(i, j);
    csv << '\n';
  }
  write_text(dir / "latent_cov.csv", csv.str());
  char title[128];
  std::snprintf(title, sizeof title, "Latent code covariance (off-diagonal energy %.4g)", rep.off_diagonal_energy);
  svg::heatmap(dir / "latent_cov.svg", title, rep.cov);
}

}  // namespace ved
