#include "ved/flow_grid.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>

#include "ved/errors.hpp"
#include "ved/rng.hpp"

namespace ved {

FlowGrid::FlowGrid(int height, int width, std::vector<std::uint8_t> mask, BoundarySpec bc,
                   double cell_size)
    : height_(height), width_(width), cell_size_(cell_size), bc_(bc), mask_(std::move(mask)) {
  if (height_ < 1 || width_ < 1) throw ConfigError("grid dimensions must be positive");
  if (!(cell_size_ > 0.0)) throw ConfigError("cell_size must be positive");
  if (mask_.size() != static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_))
    throw DimensionError("mask size does not match grid dimensions");

  cell_of_pixel_.assign(mask_.size(), -1);
  for (std::size_t p = 0; p < mask_.size(); ++p) {
    if (mask_[p]) {
      mask_[p] = 1;
      cell_of_pixel_[p] = static_cast<int>(active_index_.size());
      active_index_.push_back(static_cast<int>(p));
    }
  }
  if (active_index_.empty()) throw ConfigError("grid has no active cells");

  // single connected component
  std::vector<char> seen(active_index_.size(), 0);
  std::queue<int> frontier;
  frontier.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    int c = frontier.front();
    frontier.pop();
    for (int nb : neighbours(c)) {
      if (nb >= 0 && !seen[static_cast<std::size_t>(nb)]) {
        seen[static_cast<std::size_t>(nb)] = 1;
        ++reached;
        frontier.push(nb);
      }
    }
  }
  if (reached != active_index_.size()) throw ConfigError("active cells are not connected");
}

FlowGrid FlowGrid::rectangle(int height, int width, BoundarySpec bc, double cell_size) {
  if (height < 1 || width < 1) throw ConfigError("grid dimensions must be positive");
  return FlowGrid(height, width,
                  std::vector<std::uint8_t>(static_cast<std::size_t>(height * width), 1), bc,
                  cell_size);
}

FlowGrid FlowGrid::with_corner_bites(int height, int width, double max_fraction,
                                     std::uint64_t seed, BoundarySpec bc, double cell_size) {
  if (height < 3 || width < 3) throw ConfigError("corner bites need at least a 3x3 grid");
  if (max_fraction < 0.0 || max_fraction >= 0.5)
    throw ConfigError("corner bite fraction must lie in [0, 0.5)");
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(height * width), 1);
  if (max_fraction > 0.0) {
    Rng rng = make_rng(seed, "mask");
    const int max_h = std::max(1, static_cast<int>(std::ceil(max_fraction * height)));
    const int max_w = std::max(1, static_cast<int>(std::ceil(max_fraction * width)));
    std::uniform_int_distribution<int> bite_h(1, std::min(max_h, (height - 1) / 2));
    std::uniform_int_distribution<int> bite_w(1, std::min(max_w, (width - 1) / 2));
    for (int corner = 0; corner < 4; ++corner) {
      const int bh = bite_h(rng);
      const int bw = bite_w(rng);
      const bool bottom = corner >= 2;
      const bool right = corner % 2 == 1;
      for (int i = 0; i < bh; ++i) {
        for (int j = 0; j < bw; ++j) {
          const int row = bottom ? height - 1 - i : i;
          const int col = right ? width - 1 - j : j;
          mask[static_cast<std::size_t>(row * width + col)] = 0;
        }
      }
    }
  }
  return FlowGrid(height, width, std::move(mask), bc, cell_size);
}

int FlowGrid::cell_at(int row, int col) const {
  if (row < 0 || row >= height_ || col < 0 || col >= width_) return -1;
  return cell_of_pixel_[static_cast<std::size_t>(row * width_ + col)];
}

Eigen::Vector2d FlowGrid::center(int cell) const {
  return {(col_of(cell) + 0.5) * cell_size_, (row_of(cell) + 0.5) * cell_size_};
}

std::optional<double> FlowGrid::dirichlet_value(int cell) const {
  const int r = row_of(cell);
  const int c = col_of(cell);
  if (c == 0 && bc_.left.kind == BoundaryKind::Dirichlet) return bc_.left.value;
  if (c == width_ - 1 && bc_.right.kind == BoundaryKind::Dirichlet) return bc_.right.value;
  if (r == 0 && bc_.top.kind == BoundaryKind::Dirichlet) return bc_.top.value;
  if (r == height_ - 1 && bc_.bottom.kind == BoundaryKind::Dirichlet) return bc_.bottom.value;
  return std::nullopt;
}

std::vector<int> FlowGrid::dirichlet_cells() const {
  std::vector<int> out;
  for (int c = 0; c < n_active(); ++c)
    if (dirichlet_value(c)) out.push_back(c);
  return out;
}

std::vector<int> FlowGrid::free_cells() const {
  std::vector<int> out;
  for (int c = 0; c < n_active(); ++c)
    if (!dirichlet_value(c)) out.push_back(c);
  return out;
}

std::array<int, 4> FlowGrid::neighbours(int cell) const {
  const int r = row_of(cell);
  const int c = col_of(cell);
  return {cell_at(r, c - 1), cell_at(r, c + 1), cell_at(r - 1, c), cell_at(r + 1, c)};
}

}  // namespace ved
