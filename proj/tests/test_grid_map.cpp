#include "doctest.h"
#include "ved/errors.hpp"
#include "ved/grid_map.hpp"

using namespace ved;

namespace {
using Img = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
}

TEST_CASE("full mask maps ones to ones") {
  const GridMap map(3, 3, {0, 1, 2, 3, 4, 5, 6, 7, 8});
  const Img img = map.map_to_grid<double>(Eigen::VectorXd::Ones(9));
  CHECK(img == Img::Ones(3, 3));
}

TEST_CASE("one-hot lands on its pixel") {
  const FlowGrid grid = FlowGrid::with_corner_bites(7, 6, 0.3, 4);
  const GridMap map = GridMap::from_grid(grid, -1.0);
  for (int i = 0; i < grid.n_active(); ++i) {
    const Img img = map.map_to_grid<double>(Eigen::VectorXd::Unit(grid.n_active(), i));
    CHECK(img(grid.row_of(i), grid.col_of(i)) == 1.0);
    CHECK((img.array() == 1.0).count() == 1);
    CHECK((img.array() == -1.0).count() == 42 - grid.n_active());
  }
}

TEST_CASE("round trips and linearity") {
  const FlowGrid grid = FlowGrid::with_corner_bites(8, 9, 0.4, 1);
  const GridMap map = GridMap::from_grid(grid);
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(grid.n_active(), -2.0, 3.0);
  const Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(grid.n_active(), 5.0, 1.0);
  CHECK(map.grid_to_vector<double>(map.map_to_grid<double>(x)) == x);

  Img img = map.map_to_grid<double>(x);
  const Eigen::VectorXd back = map.grid_to_vector<double>(img);
  CHECK(map.map_to_grid<double>(back) == img);

  const Eigen::VectorXd combo = 2.0 * x - 0.5 * y;
  const Img lhs = map.map_to_grid<double>(combo);
  const Img rhs = 2.0 * map.map_to_grid<double>(x) - 0.5 * map.map_to_grid<double>(y);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::MatrixXf batch(grid.n_active(), 2);
  batch.col(0) = x.cast<float>();
  batch.col(1) = y.cast<float>();
  const Eigen::MatrixXf images = map.map_batch<float>(batch);
  CHECK(images.rows() == 72);
  const auto img1 = map.map_to_grid<float>(y.cast<float>());
  for (int p = 0; p < 72; ++p) CHECK(images(p, 1) == img1.data()[p]);
}

TEST_CASE("grid map error paths") {
  CHECK_THROWS_AS(GridMap(2, 2, {0, 4}), DimensionError);
  CHECK_THROWS_AS(GridMap(2, 2, {1, 1}), DimensionError);
  CHECK_THROWS_AS(GridMap(0, 2, {}), DimensionError);
  const GridMap map(2, 2, {0, 3});
  CHECK_THROWS_AS(map.map_to_grid<double>(Eigen::VectorXd::Zero(3)), DimensionError);
  CHECK_THROWS_AS(map.grid_to_vector<double>(Img::Zero(3, 2)), DimensionError);
}
