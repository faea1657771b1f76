#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "ved/darcy.hpp"
#include "ved/errors.hpp"
#include "ved/kle.hpp"

using namespace ved;

namespace {

Eigen::VectorXd random_log_t(const FlowGrid& grid, std::uint64_t seed) {
  const KLEBasis kle = build_kle(grid, {1.0, 0.2 * grid.width()}, std::min(grid.n_active(), 40));
  return sample_log_transmissivity(kle, seed);
}

}  // namespace

TEST_CASE("grid construction") {
  const FlowGrid rect = FlowGrid::rectangle(4, 5);
  CHECK(rect.n_active() == 20);
  CHECK(rect.cell_at(1, 2) == 7);
  CHECK(rect.dirichlet_cells().size() == 8);
  CHECK(*rect.dirichlet_value(rect.cell_at(2, 0)) == 1.0);
  CHECK(*rect.dirichlet_value(rect.cell_at(2, 4)) == 0.0);
  CHECK_FALSE(rect.dirichlet_value(rect.cell_at(2, 2)).has_value());

  const FlowGrid bitten = FlowGrid::with_corner_bites(24, 18, 0.2, 7);
  CHECK(bitten.n_active() < 24 * 18);
  CHECK(bitten.n_active() > 24 * 18 - 4 * 5 * 4);
  CHECK(bitten.mask() == FlowGrid::with_corner_bites(24, 18, 0.2, 7).mask());
  CHECK(bitten.dirichlet_cells().size() >= 2);

  // two islands
  std::vector<std::uint8_t> mask = {1, 0, 1, 1, 0, 1};
  CHECK_THROWS_AS(FlowGrid(2, 3, mask), ConfigError);
  CHECK_THROWS_AS(FlowGrid(2, 3, std::vector<std::uint8_t>(6, 0)), ConfigError);
  CHECK_THROWS_AS(FlowGrid(2, 3, std::vector<std::uint8_t>(5, 1)), DimensionError);
}

TEST_CASE("constant transmissivity gives the exact linear profile") {
  const FlowGrid grid = FlowGrid::rectangle(6, 10);
  const Eigen::VectorXd heads = solve_flow(grid, Eigen::VectorXd::Constant(grid.n_active(), 0.3));
  double max_err = 0.0;
  for (int c = 0; c < grid.n_active(); ++c) {
    const double expected = 1.0 - static_cast<double>(grid.col_of(c)) / (grid.width() - 1);
    max_err = std::max(max_err, std::abs(heads(c) - expected));
  }
  CHECK(max_err < 1e-10);
}

TEST_CASE("uniform log-T shift leaves heads unchanged") {
  const FlowGrid grid = FlowGrid::with_corner_bites(12, 10, 0.2, 3);
  const Eigen::VectorXd log_t = random_log_t(grid, 11);
  const Eigen::VectorXd a = solve_flow(grid, log_t);
  const Eigen::VectorXd b = solve_flow(grid, (log_t.array() + 2.5).matrix());
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("checkerboard heads agree with a dense solve") {
  const FlowGrid grid = FlowGrid::rectangle(8, 8);
  const int n = grid.n_active();
  Eigen::VectorXd log_t(n);
  for (int c = 0; c < n; ++c) log_t(c) = ((grid.row_of(c) + grid.col_of(c)) % 2 == 0) ? 0.0 : std::log(10.0);

  const Eigen::VectorXd expected = oracle::dense_heads(grid, log_t);
  const Eigen::VectorXd heads = solve_flow(grid, log_t);
  CHECK((heads - expected).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("irregular grid heads agree with a dense solve") {
  BoundarySpec bc;
  bc.top = SideCondition::dirichlet(0.25);
  const FlowGrid grid = FlowGrid::with_corner_bites(9, 11, 0.3, 8, bc);
  const Eigen::VectorXd log_t = random_log_t(grid, 4);
  CHECK((solve_flow(grid, log_t) - oracle::dense_heads(grid, log_t)).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("mass conservation and maximum principle on random fields") {
  BoundarySpec bc;
  bc.left = SideCondition::dirichlet(2.0);
  bc.right = SideCondition::dirichlet(-1.0);
  bc.top = SideCondition::dirichlet(0.5);
  const FlowGrid grid = FlowGrid::with_corner_bites(16, 14, 0.25, 5, bc);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Eigen::VectorXd log_t = random_log_t(grid, seed);
    const Eigen::VectorXd heads = solve_flow(grid, log_t);
    const Eigen::VectorXd flux = net_outflow(grid, log_t, heads);
    for (int c : grid.free_cells()) CHECK(std::abs(flux(c)) < 1e-9);
    CHECK(heads.maxCoeff() <= 2.0 + 1e-10);
    CHECK(heads.minCoeff() >= -1.0 - 1e-10);
  }
}

TEST_CASE("flow error paths") {
  BoundarySpec closed;
  closed.left = SideCondition::no_flow();
  closed.right = SideCondition::no_flow();
  const FlowGrid sealed = FlowGrid::rectangle(4, 4, closed);
  CHECK_THROWS_AS(solve_flow(sealed, Eigen::VectorXd::Zero(16)), WellPosednessError);

  const FlowGrid grid = FlowGrid::rectangle(4, 4);
  CHECK_THROWS_AS(solve_flow(grid, Eigen::VectorXd::Zero(15)), DimensionError);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(16);
  bad(3) = NAN;
  CHECK_THROWS_AS(solve_flow(grid, bad), NumericalError);
}
