#include "ved/serialization.hpp"

#include "ved/errors.hpp"

namespace ved {
namespace {

nlohmann::json side_to_json(const SideCondition& s) {
  if (s.kind == BoundaryKind::Dirichlet) return {{"type", "dirichlet"}, {"value", s.value}};
  return {{"type", "no_flow"}};
}

SideCondition side_from_json(const nlohmann::json& j) {
  const std::string type = j.at("type");
  if (type == "dirichlet") return SideCondition::dirichlet(j.at("value"));
  if (type == "no_flow") return SideCondition::no_flow();
  throw ConfigError("unknown boundary type '" + type + "' (expected dirichlet or no_flow)");
}

}  // namespace

nlohmann::json boundary_to_json(const BoundarySpec& bc) {
  return {{"left", side_to_json(bc.left)},
          {"right", side_to_json(bc.right)},
          {"top", side_to_json(bc.top)},
          {"bottom", side_to_json(bc.bottom)}};
}

BoundarySpec boundary_from_json(const nlohmann::json& j) {
  BoundarySpec bc;
  if (j.contains("left")) bc.left = side_from_json(j.at("left"));
  if (j.contains("right")) bc.right = side_from_json(j.at("right"));
  if (j.contains("top")) bc.top = side_from_json(j.at("top"));
  if (j.contains("bottom")) bc.bottom = side_from_json(j.at("bottom"));
  return bc;
}

nlohmann::json grid_to_json(const FlowGrid& grid) {
  return {{"height", grid.height()},
          {"width", grid.width()},
          {"cell_size", grid.cell_size()},
          {"n_active", grid.n_active()},
          {"bc", boundary_to_json(grid.boundary())}};
}

}  // namespace ved
