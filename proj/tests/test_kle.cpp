#include <cmath>

#include <Eigen/Dense>

#include "doctest.h"
#include "oracles.hpp"
#include "ved/errors.hpp"
#include "ved/kle.hpp"
#include "ved/rng.hpp"

using namespace ved;

TEST_CASE("full-order basis preserves the trace") {
  const FlowGrid grid = FlowGrid::rectangle(4, 5);
  const KLEBasis kle = build_kle(grid, {1.7, 1.3}, grid.n_active());
  CHECK(std::abs(kle.eigenvalues.sum() - 1.7 * 20) < 1e-6);
}

TEST_CASE("very long correlation length is rank one") {
  const FlowGrid grid = FlowGrid::rectangle(4, 4);
  const KLEBasis kle = build_kle(grid, {1.0, 1e6}, 16);
  CHECK(std::abs(kle.eigenvalues(0) - 16.0) < 1e-6);
  CHECK(kle.eigenvalues.tail(15).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((kle.modes.col(0).array() - 0.25).abs().maxCoeff() < 1e-6);
}

TEST_CASE("eigenpairs agree with a Jacobi reference") {
  const FlowGrid grid = FlowGrid::rectangle(6, 6);
  const int n = grid.n_active();
  const int order = 10;
  Eigen::MatrixXd k(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double dx = grid.col_of(i) - grid.col_of(j);
      const double dy = grid.row_of(i) - grid.row_of(j);
      k(i, j) = std::exp(-(dx * dx + dy * dy) / (2.0 * 2.0 * 2.0));
    }
  }
  Eigen::VectorXd ref_vals;
  Eigen::MatrixXd ref_vecs;
  oracle::jacobi_eigen(k, ref_vals, ref_vecs);

  const KLEBasis kle = build_kle(grid, {1.0, 2.0}, order);
  for (int i = 0; i < order; ++i) CHECK(std::abs(kle.eigenvalues(i) - ref_vals(i)) < 1e-8);

  // The square grid has degenerate eigenvalues, so compare eigenspaces:
  // each computed mode must lie in the span of the reference group sharing
  // its eigenvalue.
  for (int i = 0; i < order; ++i) {
    Eigen::MatrixXd group(n, 0);
    for (int j = 0; j < n; ++j) {
      if (std::abs(ref_vals(j) - ref_vals(i)) < 1e-7 * ref_vals(0)) {
        group.conservativeResize(n, group.cols() + 1);
        group.col(group.cols() - 1) = ref_vecs.col(j);
      }
    }
    const Eigen::VectorXd v = kle.modes.col(i);
    const Eigen::VectorXd resid = v - group * (group.transpose() * v);
    CHECK(resid.norm() < 1e-8);
    if (group.cols() == 1) {
      Eigen::VectorXd r = group.col(0);
      Eigen::Index arg;
      r.cwiseAbs().maxCoeff(&arg);
      if (r(arg) < 0) r = -r;
      CHECK((v - r).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("basis structure") {
  const FlowGrid grid = FlowGrid::with_corner_bites(10, 8, 0.3, 2);
  const KLEBasis kle = build_kle(grid, {2.0, 3.0}, 30, 0.5);
  CHECK(kle.order() == 30);
  CHECK(kle.n_cells() == grid.n_active());
  for (int i = 1; i < kle.order(); ++i) CHECK(kle.eigenvalues(i) <= kle.eigenvalues(i - 1));
  CHECK(kle.eigenvalues.minCoeff() >= 0.0);
  const Eigen::MatrixXd gram = kle.modes.transpose() * kle.modes;
  CHECK((gram - Eigen::MatrixXd::Identity(30, 30)).cwiseAbs().maxCoeff() < 1e-8);
  for (int i = 0; i < kle.order(); ++i) {
    Eigen::Index arg;
    kle.modes.col(i).cwiseAbs().maxCoeff(&arg);
    CHECK(kle.modes(arg, i) > 0);
  }
  CHECK(kle_field(kle, Eigen::VectorXd::Zero(30)) == Eigen::VectorXd::Constant(grid.n_active(), 0.5));
}

TEST_CASE("sampling is reproducible") {
  const FlowGrid grid = FlowGrid::rectangle(5, 6);
  const KLEBasis kle = build_kle(grid, {1.0, 2.0}, 12);
  const Eigen::VectorXd a = sample_log_transmissivity(kle, 99);
  const Eigen::VectorXd b = sample_log_transmissivity(kle, 99);
  const Eigen::VectorXd c = sample_log_transmissivity(kle, 100);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("empirical covariance of full-order samples matches the kernel") {
  const FlowGrid grid = FlowGrid::rectangle(5, 5);
  const CovarianceKernel kernel{1.0, 2.0};
  const KLEBasis kle = build_kle(grid, kernel, 25);
  const int draws = 200000;
  Rng rng(2024);
  const Eigen::MatrixXd xi = standard_normal<double>(rng, 25, draws);
  const Eigen::MatrixXd fields =
      kle.modes * kle.eigenvalues.cwiseMax(0.0).cwiseSqrt().asDiagonal() * xi;
  const Eigen::MatrixXd emp = fields * fields.transpose() / static_cast<double>(draws);
  const Eigen::MatrixXd k = kernel_matrix(grid, kernel);
  CHECK((emp - k).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("kle error paths") {
  const FlowGrid grid = FlowGrid::rectangle(3, 3);
  CHECK_THROWS_AS(build_kle(grid, {1.0, 1.0}, 0), DimensionError);
  CHECK_THROWS_AS(build_kle(grid, {1.0, 1.0}, 10), DimensionError);
  CHECK_THROWS_AS(build_kle(grid, {1.0, 0.0}, 3), ConfigError);
  CHECK_THROWS_AS(build_kle(grid, {-1.0, 1.0}, 3), ConfigError);
  const KLEBasis kle = build_kle(grid, {1.0, 1.0}, 3);
  CHECK_THROWS_AS(kle_field(kle, Eigen::VectorXd::Zero(4)), DimensionError);
}
