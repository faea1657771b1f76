#pragma once

#include <Eigen/Core>

#include "ved/flow_grid.hpp"

namespace ved {

/// Face transmissibility between two cells: harmonic mean of their T values.
inline double harmonic_mean(double t1, double t2) { return 2.0 * t1 * t2 / (t1 + t2); }

/// Steady saturated flow div(T grad u) = 0 with T = exp(log_t), two-point
/// flux cell-centred finite volumes on square cells. Returns heads for all
/// active cells (Dirichlet cells carry their prescribed value).
///
/// Throws WellPosednessError without Dirichlet cells, DimensionError on a
/// length mismatch, NumericalError for non-finite input or when the relative
/// residual exceeds 1e-10.
Eigen::VectorXd solve_flow(const FlowGrid& grid, const Eigen::VectorXd& log_t);

/// Net outward flux of every active cell for the given heads. Zero (to
/// round-off) at free cells of a converged solution.
Eigen::VectorXd net_outflow(const FlowGrid& grid, const Eigen::VectorXd& log_t,
                            const Eigen::VectorXd& heads);

}  // namespace ved
