#pragma once

#include <vector>

#include <Eigen/Core>
#include "json.hpp"

#include "ved/flow_grid.hpp"

namespace ved {

nlohmann::json boundary_to_json(const BoundarySpec& bc);
BoundarySpec boundary_from_json(const nlohmann::json& j);

/// Grid geometry and boundary conditions; the mask itself lives in mask.bin.
nlohmann::json grid_to_json(const FlowGrid& grid);

inline std::vector<double> to_std_vector(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

inline Eigen::VectorXd from_std_vector(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace ved
