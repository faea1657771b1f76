#include <cmath>
#include <filesystem>

#include <Eigen/Dense>

#include "doctest.h"
#include "ved/errors.hpp"
#include "ved/eval.hpp"
#include "ved/kde.hpp"

using namespace ved;
namespace fs = std::filesystem;
using Mf = Eigen::MatrixXf;

namespace {

Mf normals(std::uint64_t seed, int rows, int cols) {
  Rng rng(seed);
  return standard_normal<float>(rng, rows, cols);
}

}  // namespace

TEST_CASE("perfect reconstruction has zero error") {
  const Mf y = normals(1, 8, 300);
  const FeatureReport rep = feature_report(y, y);
  CHECK(rep.rmse.maxCoeff() == 0.0);
  CHECK(rep.best.size() == 3);
  CHECK(rep.worst.size() == 3);
  CHECK(rep.warning.empty());
  CHECK(rep.truth_density.size() == 8);
}

TEST_CASE("mean predictor on normalised data scores about one") {
  const Mf y = normals(2, 10, 2000);
  const FeatureReport rep = feature_report(y, Mf::Zero(10, 2000));
  for (int j = 0; j < 10; ++j) CHECK(std::abs(rep.rmse(j) - 1.0) < 0.05);
}

TEST_CASE("feature rankings") {
  Mf y = Mf::Zero(8, 50);
  Mf pred = y;
  for (int j = 0; j < 8; ++j) pred.row(j).setConstant(static_cast<float>((j * 5) % 8));
  const FeatureReport rep = feature_report(y, pred);
  // rmse of feature j is (5 j mod 8)
  CHECK(rep.best == std::vector<int>{0, 5, 2});
  CHECK(rep.worst == std::vector<int>{3, 6, 1});

  const FeatureReport few = feature_report(y.topRows(4), pred.topRows(4));
  CHECK(few.best.size() == 2);
  CHECK_FALSE(few.warning.empty());
  CHECK_THROWS_AS(feature_report(y, pred.leftCols(10)), DimensionError);
}

TEST_CASE("moment mismatch") {
  Mf a(1, 2), b(1, 2);
  a << 0, 2;
  b << 1, 1;
  CHECK(moment_mismatch(a, b) == doctest::Approx(1.0));
  CHECK(moment_mismatch(a, a) == 0.0);
}

TEST_CASE("linear decoder pushes the prior to unit marginals") {
  const int r = 6, m = 4, n = 20000;
  const Eigen::HouseholderQR<Mf> qr(normals(3, r, r));
  const Mf q = qr.householderQ();
  const Mf w = q.leftCols(m).transpose();  // orthonormal rows
  const Decoder decoder = [&](const Mf& z) -> Mf { return w * z; };
  Rng rng(4);
  const GenerativeReport rep = decode_noise(decoder, r, normals(5, m, 500), n, rng);
  const double tol = 3.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < m; ++j) {
    CHECK(std::abs(rep.synth_std(j) - 1.0) < tol);
    CHECK(std::abs(rep.synth_mean(j)) < tol);
  }
  CHECK(rep.synth_density.size() == static_cast<std::size_t>(m));
  CHECK(rep.score < 0.5);
  CHECK_THROWS_AS(decode_noise(decoder, r, normals(5, m, 500), 0, rng), ConfigError);
  CHECK_THROWS_AS(decode_noise(decoder, r, normals(5, m, 500), 1, rng), ConfigError);
}

TEST_CASE("latent covariance of oracle encoders") {
  const int r = 5, n = 4000;
  const Mf images = Mf::Zero(12, n);
  {
    const Encoder enc = [&](const Mf& x) {
      return EncoderOutput<float>{Mf::Zero(r, x.cols()), Mf::Zero(r, x.cols())};
    };
    Rng rng(6);
    const LatentCovReport rep = latent_covariance(enc, images, rng);
    // three standard errors: 1/sqrt(N) off the diagonal, sqrt(2/N) on it since Var(z^2) = 2
    const double se = 1.0 / std::sqrt(double(n));
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j)
        CHECK(std::abs(rep.cov(i, j) - (i == j ? 1.0 : 0.0)) < 3.0 * se * (i == j ? std::sqrt(2.0) : 1.0));
  }
  {
    Eigen::VectorXf g(r);
    g << 0.3f, -1.0f, 2.0f, 0.0f, 5.0f;
    const Encoder enc = [&](const Mf& x) {
      return EncoderOutput<float>{g.replicate(1, x.cols()), Mf::Constant(r, x.cols(), -10.0f)};
    };
    Rng rng(7);
    const LatentCovReport rep = latent_covariance(enc, images, rng);
    CHECK(rep.cov.cwiseAbs().maxCoeff() < 1e-4);
    CHECK(rep.off_diagonal_energy < 1e-8);
    CHECK(rep.diagonal_deviation == doctest::Approx(5.0).epsilon(1e-3));
  }
  {
    const Encoder enc = [&](const Mf& x) {
      return EncoderOutput<float>{Mf::Zero(r, x.cols()), Mf::Zero(r, x.cols())};
    };
    Rng rng(8);
    CHECK_THROWS_AS(latent_covariance(enc, Mf::Zero(12, 1), rng), StatisticsError);
  }
}

TEST_CASE("kernel density estimate") {
  const Eigen::VectorXd s = normals(9, 1, 3000).cast<double>().transpose();
  const DensityCurve c = gaussian_kde(s);
  CHECK(c.x.size() == 256);
  CHECK(std::abs(trapezoid(c) - 1.0) < 1e-3);
  const double sd = std::sqrt((s.array() - s.mean()).square().sum() / (s.size() - 1));
  CHECK(c.bandwidth == doctest::Approx(sd * std::pow(3000.0, -0.2)));
  // peak near zero for a standard normal sample
  Eigen::Index arg;
  c.density.maxCoeff(&arg);
  CHECK(std::abs(c.x(arg)) < 0.3);

  const DensityCurve flat = gaussian_kde(Eigen::VectorXd::Constant(10, 2.0));
  CHECK(flat.density.allFinite());
  CHECK(std::abs(trapezoid(flat) - 1.0) < 1e-3);
  CHECK_THROWS_AS(gaussian_kde(Eigen::VectorXd::Constant(1, 0.0)), StatisticsError);
}

TEST_CASE("report writers produce their artifacts") {
  const fs::path dir = fs::temp_directory_path() / "ved_test_eval_writers";
  fs::remove_all(dir);
  const Mf y = normals(10, 6, 200);
  write_feature_report(dir, feature_report(y, y * 0.9f));
  const Decoder dec = [](const Mf& z) -> Mf { return z.topRows(6); };
  Rng rng(11);
  write_generative_report(dir, decode_noise(dec, 8, y, 100, rng));
  const Encoder enc = [](const Mf& x) {
    return EncoderOutput<float>{Mf::Zero(3, x.cols()), Mf::Zero(3, x.cols())};
  };
  write_latent_cov_report(dir, latent_covariance(enc, Mf::Zero(4, 50), rng));
  for (const char* f : {"recon_features.csv", "recon_densities.svg", "decode_noise.csv", "decode_noise_densities.svg",
                        "latent_cov.csv", "latent_cov.svg"})
    CHECK_MESSAGE(fs::exists(dir / f), f);
  fs::remove_all(dir);
}
