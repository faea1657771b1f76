#include "ved/darcy.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "ved/errors.hpp"

namespace ved {
namespace {

void check_input(const FlowGrid& grid, const Eigen::VectorXd& log_t) {
  if (log_t.size() != grid.n_active())
    throw DimensionError("log_t has " + std::to_string(log_t.size()) + " entries, grid has " +
                         std::to_string(grid.n_active()) + " active cells");
  if (!log_t.allFinite()) throw NumericalError("log-transmissivity contains non-finite values");
}

}  // namespace

Eigen::VectorXd solve_flow(const FlowGrid& grid, const Eigen::VectorXd& log_t) {
  check_input(grid, log_t);
  const int n = grid.n_active();

  std::vector<int> unknown(static_cast<std::size_t>(n), -1);
  Eigen::VectorXd heads = Eigen::VectorXd::Zero(n);
  int n_free = 0;
  int n_fixed = 0;
  for (int c = 0; c < n; ++c) {
    if (auto v = grid.dirichlet_value(c)) {
      heads(c) = *v;
      ++n_fixed;
    } else {
      unknown[static_cast<std::size_t>(c)] = n_free++;
    }
  }
  if (n_fixed == 0) throw WellPosednessError("flow problem has no Dirichlet cells (all no-flow)");
  if (n_free == 0) return heads;

  const Eigen::VectorXd t = log_t.array().exp();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(5 * n_free));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_free);
  for (int c = 0; c < n; ++c) {
    const int row = unknown[static_cast<std::size_t>(c)];
    if (row < 0) continue;
    double diag = 0.0;
    for (int nb : grid.neighbours(c)) {
      if (nb < 0) continue;  // no-flow: inactive neighbour or outer boundary
      const double tf = harmonic_mean(t(c), t(nb));
      diag += tf;
      const int col = unknown[static_cast<std::size_t>(nb)];
      if (col >= 0)
        triplets.emplace_back(row, col, -tf);
      else
        rhs(row) += tf * heads(nb);
    }
    triplets.emplace_back(row, row, diag);
  }
  Eigen::SparseMatrix<double> a(n_free, n_free);
  a.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(a);
  if (solver.info() != Eigen::Success) throw NumericalError("flow matrix factorization failed");
  Eigen::VectorXd u = solver.solve(rhs);
  if (solver.info() != Eigen::Success || !u.allFinite())
    throw NumericalError("flow solve failed");

  const double rhs_norm = rhs.norm();
  const double residual = (a * u - rhs).norm();
  const double rel = rhs_norm > 0.0 ? residual / rhs_norm : residual;
  if (rel > 1e-10)
    throw NumericalError("flow solve relative residual " + std::to_string(rel) + " above 1e-10");

  for (int c = 0; c < n; ++c) {
    const int row = unknown[static_cast<std::size_t>(c)];
    if (row >= 0) heads(c) = u(row);
  }
  return heads;
}

Eigen::VectorXd net_outflow(const FlowGrid& grid, const Eigen::VectorXd& log_t,
                            const Eigen::VectorXd& heads) {
  check_input(grid, log_t);
  if (heads.size() != grid.n_active()) throw DimensionError("heads length mismatch");
  const int n = grid.n_active();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int c = 0; c < n; ++c) {
    for (int nb : grid.neighbours(c)) {
      if (nb < 0) continue;
      out(c) += harmonic_mean(std::exp(log_t(c)), std::exp(log_t(nb))) * (heads(c) - heads(nb));
    }
  }
  return out;
}

}  // namespace ved
