#pragma once

#include <cstdint>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ved {

enum class BoundaryKind { NoFlow, Dirichlet };

struct SideCondition {
  BoundaryKind kind = BoundaryKind::NoFlow;
  double value = 0.0;  // head, used only for Dirichlet sides

  static SideCondition dirichlet(double head) { return {BoundaryKind::Dirichlet, head}; }
  static SideCondition no_flow() { return {}; }
};

/// Per-side boundary conditions. A Dirichlet side pins the head of every
/// active cell in the outermost row/column on that side. Left/right take
/// precedence over top/bottom at corners.
struct BoundarySpec {
  SideCondition left = SideCondition::dirichlet(1.0);
  SideCondition right = SideCondition::dirichlet(0.0);
  SideCondition top;
  SideCondition bottom;
};

/// Cartesian H x W grid with an activity mask. Active cells are enumerated
/// in row-major order; `cell` below always means an active-cell index.
class FlowGrid {
 public:
  /// `mask` is row-major H*W, nonzero = active. Throws ConfigError when the
  /// mask is empty or the active region is not 4-connected.
  FlowGrid(int height, int width, std::vector<std::uint8_t> mask, BoundarySpec bc = {},
           double cell_size = 1.0);

  static FlowGrid rectangle(int height, int width, BoundarySpec bc = {}, double cell_size = 1.0);

  /// Rectangle minus a random rectangular bite at each corner. Bite extents
  /// are uniform in [1, ceil(max_fraction * dim)] per axis, drawn from `seed`.
  static FlowGrid with_corner_bites(int height, int width, double max_fraction, std::uint64_t seed,
                                    BoundarySpec bc = {}, double cell_size = 1.0);

  int height() const { return height_; }
  int width() const { return width_; }
  double cell_size() const { return cell_size_; }
  int n_active() const { return static_cast<int>(active_index_.size()); }
  const BoundarySpec& boundary() const { return bc_; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }

  /// Row-major pixel positions (row * W + col) of the active cells.
  std::span<const int> active_index() const { return active_index_; }

  /// Active-cell index at (row, col), or -1 if outside the grid or inactive.
  int cell_at(int row, int col) const;
  int row_of(int cell) const { return active_index_[static_cast<std::size_t>(cell)] / width_; }
  int col_of(int cell) const { return active_index_[static_cast<std::size_t>(cell)] % width_; }
  Eigen::Vector2d center(int cell) const;

  /// Head value if the cell is pinned by a Dirichlet side.
  std::optional<double> dirichlet_value(int cell) const;
  std::vector<int> dirichlet_cells() const;
  std::vector<int> free_cells() const;

  /// The four edge-neighbour active cells (-1 where absent).
  std::array<int, 4> neighbours(int cell) const;

 private:
  int height_;
  int width_;
  double cell_size_;
  BoundarySpec bc_;
  std::vector<std::uint8_t> mask_;
  std::vector<int> active_index_;
  std::vector<int> cell_of_pixel_;
};

}  // namespace ved
