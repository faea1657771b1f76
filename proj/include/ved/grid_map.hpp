#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ved/errors.hpp"
#include "ved/flow_grid.hpp"

namespace ved {

/// Scatters an n-vector of active-cell values onto an H x W Cartesian image
/// (row-major pixels) and gathers it back. Off-mask pixels hold fill_value.
class GridMap {
 public:
  GridMap(int height, int width, std::vector<int> active_index, double fill_value = 0.0)
      : height_(height), width_(width), fill_(fill_value), active_(std::move(active_index)) {
    if (height_ < 1 || width_ < 1) throw DimensionError("grid map dimensions must be positive");
    mask_.assign(static_cast<std::size_t>(height_ * width_), 0);
    for (int p : active_) {
      if (p < 0 || p >= height_ * width_)
        throw DimensionError("active index " + std::to_string(p) + " outside the image");
      if (mask_[static_cast<std::size_t>(p)]) throw DimensionError("duplicate active index");
      mask_[static_cast<std::size_t>(p)] = 1;
    }
  }

  static GridMap from_grid(const FlowGrid& grid, double fill_value = 0.0) {
    return {grid.height(), grid.width(),
            std::vector<int>(grid.active_index().begin(), grid.active_index().end()), fill_value};
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int pixels() const { return height_ * width_; }
  int n_active() const { return static_cast<int>(active_.size()); }
  double fill_value() const { return fill_; }
  const std::vector<int>& active_index() const { return active_; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }

  /// x (n) -> image (H x W).
  template <class T>
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> map_to_grid(
      const Eigen::Ref<const Eigen::Matrix<T, Eigen::Dynamic, 1>>& x) const {
    check_length(x.size());
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> img(height_, width_);
    img.setConstant(static_cast<T>(fill_));
    for (std::size_t i = 0; i < active_.size(); ++i) img.data()[active_[i]] = x(static_cast<Eigen::Index>(i));
    return img;
  }

  /// image (H x W) -> x (n), in active_index order.
  template <class T>
  Eigen::Matrix<T, Eigen::Dynamic, 1> grid_to_vector(
      const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>& img) const {
    if (img.rows() != height_ || img.cols() != width_)
      throw DimensionError("image is " + std::to_string(img.rows()) + "x" + std::to_string(img.cols()) +
                           ", grid map is " + std::to_string(height_) + "x" + std::to_string(width_));
    Eigen::Matrix<T, Eigen::Dynamic, 1> x(n_active());
    for (std::size_t i = 0; i < active_.size(); ++i) x(static_cast<Eigen::Index>(i)) = img.data()[active_[i]];
    return x;
  }

  /// Batch form: columns of `xs` (n x B) become columns of flattened images
  /// ((H*W) x B), the layout the encoder consumes.
  template <class T>
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> map_batch(
      const Eigen::Ref<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>>& xs) const {
    check_length(xs.rows());
    Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> out =
        Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>::Constant(pixels(), xs.cols(), static_cast<T>(fill_));
    for (Eigen::Index b = 0; b < xs.cols(); ++b)
      for (std::size_t i = 0; i < active_.size(); ++i) out(active_[i], b) = xs(static_cast<Eigen::Index>(i), b);
    return out;
  }

 private:
  void check_length(Eigen::Index len) const {
    if (len != n_active())
      throw DimensionError("vector has " + std::to_string(len) + " entries, grid map expects " +
                           std::to_string(n_active()));
  }

  int height_;
  int width_;
  double fill_;
  std::vector<int> active_;
  std::vector<std::uint8_t> mask_;
};

}  // namespace ved
