#include "doctest.h"
#include "ved/errors.hpp"
#include "ved/model.hpp"

using namespace ved;

namespace {

ArchConfig small_arch() {
  ArchConfig a;
  a.height = 12;
  a.width = 10;
  a.latent_dim = 4;
  a.channels = {1, 4, 6, 8, 10, 12};
  a.decoder_hidden = 16;
  a.output_dim = 5;
  return a;
}

Eigen::MatrixXf images(int pixels, int batch, std::uint64_t seed) {
  Rng rng(seed);
  return standard_normal<float>(rng, pixels, batch);
}

}  // namespace

TEST_CASE("architecture geometry") {
  ArchConfig full;
  full.height = 69;
  full.width = 54;
  full.latent_dim = 147;
  full.output_dim = 323;
  full.validate();
  CHECK(full.conv_layer_count() == 13);
  CHECK(full.final_height() == 3);
  CHECK(full.final_width() == 2);
  CHECK(full.flattened_size() == 3 * 2 * 256);
  const auto sizes = full.stage_sizes();
  REQUIRE(sizes.size() == 5);
  CHECK(sizes[0] == std::pair{35, 27});
  CHECK(sizes[1] == std::pair{18, 14});

  ArchConfig desk = full;
  desk.height = 24;
  desk.width = 18;
  CHECK(desk.flattened_size() == 256);

  ArchConfig bad = full;
  bad.channels = {1, 16, 32};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = full;
  bad.latent_dim = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("forward shapes and determinism") {
  const ArchConfig arch = small_arch();
  VedModel<float> model(arch, 3);
  const Eigen::MatrixXf x = images(120, 6, 1);
  const Eigen::MatrixXf eps = Eigen::MatrixXf::Zero(4, 6);
  const auto a = model.forward(x, eps, Mode::Eval);
  CHECK(a.y_hat.rows() == 5);
  CHECK(a.y_hat.cols() == 6);
  CHECK(a.g.rows() == 4);
  CHECK(a.h.rows() == 4);
  const auto b = model.forward(x, eps, Mode::Eval);
  CHECK(a.y_hat == b.y_hat);
  // eps = 0 reduces to decoding the mean
  CHECK((a.y_hat - model.decode(a.g, Mode::Eval)).cwiseAbs().maxCoeff() == 0.0f);

  VedModel<float> twin(arch, 3);
  CHECK(twin.state() == model.state());
  VedModel<float> other(arch, 4);
  CHECK(other.state() != model.state());

  Rng r1(8), r2(8);
  CHECK(model.forward(x, r1, Mode::Eval).y_hat == model.forward(x, r2, Mode::Eval).y_hat);
}

TEST_CASE("zero output layers return their biases") {
  VedModel<float> model(small_arch(), 5);
  model.head_g().weight().setZero();
  model.head_g().bias() << 1, 2, 3, 4;
  model.head_h().weight().setZero();
  model.head_h().bias().setConstant(-0.5f);
  model.decoder_output_layer().weight().setZero();
  model.decoder_output_layer().bias() << 0.1f, 0.2f, 0.3f, 0.4f, 0.5f;
  const auto enc = model.encode(images(120, 3, 2), Mode::Eval);
  for (int b = 0; b < 3; ++b) {
    CHECK(enc.g.col(b) == Eigen::Vector4f(1, 2, 3, 4));
    CHECK(enc.h.col(b) == Eigen::Vector4f::Constant(-0.5f));
  }
  const Eigen::MatrixXf y = model.decode(Eigen::MatrixXf::Random(4, 3), Mode::Eval);
  CHECK(y.rows() == 5);
  CHECK(y.cols() == 3);
  for (int b = 0; b < 3; ++b) CHECK((y.col(b) - model.decoder_output_layer().bias()).norm() == 0.0f);
}

TEST_CASE("reparameterisation examples") {
  Eigen::MatrixXd g(2, 1), h(2, 1), eps(2, 1);
  g << 0.0, 1.0;
  h << 0.0, std::log(4.0);
  eps << 1.0, -1.0;
  const Eigen::MatrixXd z = reparameterize<double>(g, h, eps);
  CHECK(z(0, 0) == doctest::Approx(1.0));
  CHECK(z(1, 0) == doctest::Approx(-1.0));
  CHECK(reparameterize<double>(g, h, Eigen::MatrixXd::Zero(2, 1)) == g);
  CHECK_THROWS_AS(reparameterize<double>(g, h, Eigen::MatrixXd::Zero(3, 1)), DimensionError);
}

TEST_CASE("eval mode leaves state untouched, train mode updates statistics") {
  VedModel<float> model(small_arch(), 6);
  const auto before = model.state();
  const Eigen::MatrixXf x = images(120, 4, 3);
  (void)model.encode(x, Mode::Eval);
  (void)model.decode(Eigen::MatrixXf::Ones(4, 4), Mode::Eval);
  CHECK(model.state() == before);
  (void)model.forward(x, Eigen::MatrixXf::Zero(4, 4), Mode::Train);
  CHECK(model.state() != before);
  // parameters are untouched, only buffers moved
  const auto params = model.parameters();
  Eigen::Index n = 0;
  for (const auto& p : params) n += p.size;
  CHECK(std::equal(before.begin(), before.begin() + n, model.state().begin()));
}

TEST_CASE("model error paths") {
  VedModel<float> model(small_arch(), 7);
  CHECK_THROWS_AS(model.encode(images(119, 2, 1), Mode::Eval), DimensionError);
  CHECK_THROWS_AS(model.forward(images(120, 1, 1), Eigen::MatrixXf::Zero(4, 1), Mode::Train),
                  StatisticsError);
  CHECK_THROWS_AS(model.decode(Eigen::MatrixXf::Zero(3, 2), Mode::Eval), DimensionError);
  Eigen::MatrixXf x = images(120, 2, 1);
  x(5, 1) = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(model.encode(x, Mode::Eval), NumericalError);
  std::vector<float> bad(3);
  CHECK_THROWS_AS(model.load_state(bad), DimensionError);
}

TEST_CASE("state round trip") {
  VedModel<float> a(small_arch(), 1);
  VedModel<float> b(small_arch(), 2);
  b.load_state(a.state());
  const Eigen::MatrixXf x = images(120, 3, 9);
  CHECK(a.encode(x).g == b.encode(x).g);
}
