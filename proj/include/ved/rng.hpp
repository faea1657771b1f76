#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include <Eigen/Core>

namespace ved {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a root seed, a stream name and an
/// index. Used so that every random draw is a pure function of
/// (root seed, purpose, index) and independent of execution order.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t root, std::string_view stream, std::uint64_t index = 0) {
  return Rng(derive_seed(root, stream, index));
}

template <class T>
Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> standard_normal(Rng& rng, Eigen::Index rows,
                                                                  Eigen::Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic> out(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = static_cast<T>(normal(rng));
  return out;
}

}  // namespace ved
