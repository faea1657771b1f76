#pragma once

// Minimal layers with hand-written backward passes. Activations are stored
// as (channels) x (batch * height * width) column-major matrices, column
// index b*H*W + y*W + x, so each pixel's channel vector is contiguous and a
// convolution is one GEMM over an im2col matrix.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ved/errors.hpp"
#include "ved/rng.hpp"

namespace ved::nn {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

enum class Mode { Train, Eval };

struct FeatureShape {
  int batch = 0;
  int height = 0;
  int width = 0;

  Eigen::Index columns() const { return static_cast<Eigen::Index>(batch) * height * width; }
  int pixels() const { return height * width; }
};

inline int conv_output_size(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

/// Non-owning view of a trainable tensor and its gradient.
template <class T>
struct ParamView {
  std::string name;
  std::vector<int> shape;
  T* value;
  T* grad;
  Eigen::Index size;
};

/// Non-owning view of a non-trainable state tensor (batch-norm statistics).
template <class T>
struct BufferView {
  std::string name;
  std::vector<int> shape;
  T* value;
  Eigen::Index size;
};

template <class T>
void uniform_fill(Rng& rng, T* data, Eigen::Index n, double bound) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index i = 0; i < n; ++i) data[i] = static_cast<T>(dist(rng));
}

// ---------------------------------------------------------------- Conv2d

template <class T>
struct ConvCache {
  Mat<T> col;
  FeatureShape in;
  FeatureShape out;
};

/// 2-D convolution, square kernel, zero padding. Weight layout
/// out_ch x (kernel * kernel * in_ch) with patch rows ordered (ky, kx, c),
/// i.e. row-major [out, ky, kx, in].
template <class T>
class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(std::string name, int in_ch, int out_ch, int kernel, int stride, int pad, bool bias)
      : name_(std::move(name)), in_ch_(in_ch), out_ch_(out_ch), k_(kernel), stride_(stride),
        pad_(pad), has_bias_(bias) {
    w_ = Mat<T>::Zero(out_ch_, k_ * k_ * in_ch_);
    dw_ = Mat<T>::Zero(w_.rows(), w_.cols());
    b_ = Vec<T>::Zero(out_ch_);
    db_ = Vec<T>::Zero(out_ch_);
  }

  void init(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(k_ * k_ * in_ch_));
    uniform_fill(rng, w_.data(), w_.size(), bound);
    if (has_bias_) uniform_fill(rng, b_.data(), b_.size(), bound);
  }

  FeatureShape output_shape(const FeatureShape& in) const {
    return {in.batch, conv_output_size(in.height, k_, stride_, pad_),
            conv_output_size(in.width, k_, stride_, pad_)};
  }

  Mat<T> forward(const Mat<T>& x, const FeatureShape& in, ConvCache<T>* cache) const {
    if (x.rows() != in_ch_ || x.cols() != in.columns())
      throw DimensionError(name_ + ": input is " + std::to_string(x.rows()) + "x" +
                           std::to_string(x.cols()) + ", expected " + std::to_string(in_ch_) +
                           "x" + std::to_string(in.columns()));
    const FeatureShape out = output_shape(in);
    Mat<T> y;
    if (pointwise()) {
      y.noalias() = w_ * x;
      if (cache) cache->col = x;
    } else {
      Mat<T> col = im2col(x, in, out);
      y.noalias() = w_ * col;
      if (cache) cache->col = std::move(col);
    }
    if (has_bias_) y.colwise() += b_;
    if (cache) {
      cache->in = in;
      cache->out = out;
    }
    return y;
  }

  /// Stores parameter gradients and returns the input gradient (empty when
  /// need_input_grad is false).
  Mat<T> backward(const Mat<T>& dy, const ConvCache<T>& cache, bool need_input_grad = true) {
    dw_.noalias() = dy * cache.col.transpose();
    if (has_bias_) db_ = dy.rowwise().sum();
    if (!need_input_grad) return {};
    Mat<T> dcol;
    dcol.noalias() = w_.transpose() * dy;
    if (pointwise()) return dcol;
    return col2im(dcol, cache.in, cache.out);
  }

  void collect(std::vector<ParamView<T>>& out) {
    out.push_back({name_ + ".weight", {out_ch_, k_, k_, in_ch_}, w_.data(), dw_.data(), w_.size()});
    if (has_bias_) out.push_back({name_ + ".bias", {out_ch_}, b_.data(), db_.data(), b_.size()});
  }

  Mat<T>& weight() { return w_; }
  Vec<T>& bias() { return b_; }
  int in_channels() const { return in_ch_; }
  int out_channels() const { return out_ch_; }
  int kernel() const { return k_; }
  int stride() const { return stride_; }
  int padding() const { return pad_; }

 private:
  bool pointwise() const { return k_ == 1 && stride_ == 1 && pad_ == 0; }

  Mat<T> im2col(const Mat<T>& x, const FeatureShape& in, const FeatureShape& out) const {
    Mat<T> col(static_cast<Eigen::Index>(k_) * k_ * in_ch_, out.columns());
    const int in_px = in.pixels();
    const int out_px = out.pixels();
    for (int b = 0; b < in.batch; ++b) {
      for (int oy = 0; oy < out.height; ++oy) {
        for (int ox = 0; ox < out.width; ++ox) {
          const Eigen::Index j = static_cast<Eigen::Index>(b) * out_px + oy * out.width + ox;
          for (int ky = 0; ky < k_; ++ky) {
            const int iy = oy * stride_ - pad_ + ky;
            for (int kx = 0; kx < k_; ++kx) {
              const int ix = ox * stride_ - pad_ + kx;
              auto seg = col.col(j).segment((ky * k_ + kx) * in_ch_, in_ch_);
              if (iy < 0 || iy >= in.height || ix < 0 || ix >= in.width)
                seg.setZero();
              else
                seg = x.col(static_cast<Eigen::Index>(b) * in_px + iy * in.width + ix);
            }
          }
        }
      }
    }
    return col;
  }

  Mat<T> col2im(const Mat<T>& dcol, const FeatureShape& in, const FeatureShape& out) const {
    Mat<T> dx = Mat<T>::Zero(in_ch_, in.columns());
    const int in_px = in.pixels();
    const int out_px = out.pixels();
    for (int b = 0; b < in.batch; ++b) {
      for (int oy = 0; oy < out.height; ++oy) {
        for (int ox = 0; ox < out.width; ++ox) {
          const Eigen::Index j = static_cast<Eigen::Index>(b) * out_px + oy * out.width + ox;
          for (int ky = 0; ky < k_; ++ky) {
            const int iy = oy * stride_ - pad_ + ky;
            if (iy < 0 || iy >= in.height) continue;
            for (int kx = 0; kx < k_; ++kx) {
              const int ix = ox * stride_ - pad_ + kx;
              if (ix < 0 || ix >= in.width) continue;
              dx.col(static_cast<Eigen::Index>(b) * in_px + iy * in.width + ix) +=
                  dcol.col(j).segment((ky * k_ + kx) * in_ch_, in_ch_);
            }
          }
        }
      }
    }
    return dx;
  }

  std::string name_;
  int in_ch_ = 0;
  int out_ch_ = 0;
  int k_ = 1;
  int stride_ = 1;
  int pad_ = 0;
  bool has_bias_ = true;
  Mat<T> w_, dw_;
  Vec<T> b_, db_;
};

// ---------------------------------------------------------------- Linear

template <class T>
struct LinearCache {
  Mat<T> x;
};

/// y = W x + b on column batches; W is out x in.
template <class T>
class Linear {
 public:
  Linear() = default;
  Linear(std::string name, int in, int out) : name_(std::move(name)), in_(in), out_(out) {
    w_ = Mat<T>::Zero(out_, in_);
    dw_ = Mat<T>::Zero(out_, in_);
    b_ = Vec<T>::Zero(out_);
    db_ = Vec<T>::Zero(out_);
  }

  void init(Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_));
    uniform_fill(rng, w_.data(), w_.size(), bound);
    uniform_fill(rng, b_.data(), b_.size(), bound);
  }

  Mat<T> forward(const Mat<T>& x, LinearCache<T>* cache) const {
    if (x.rows() != in_)
      throw DimensionError(name_ + ": input has " + std::to_string(x.rows()) + " features, expected " +
                           std::to_string(in_));
    Mat<T> y;
    y.noalias() = w_ * x;
    y.colwise() += b_;
    if (cache) cache->x = x;
    return y;
  }

  Mat<T> backward(const Mat<T>& dy, const LinearCache<T>& cache) {
    dw_.noalias() = dy * cache.x.transpose();
    db_ = dy.rowwise().sum();
    Mat<T> dx;
    dx.noalias() = w_.transpose() * dy;
    return dx;
  }

  void collect(std::vector<ParamView<T>>& out) {
    out.push_back({name_ + ".weight", {out_, in_}, w_.data(), dw_.data(), w_.size()});
    out.push_back({name_ + ".bias", {out_}, b_.data(), db_.data(), b_.size()});
  }

  Mat<T>& weight() { return w_; }
  Vec<T>& bias() { return b_; }
  const Mat<T>& weight() const { return w_; }
  const Vec<T>& bias() const { return b_; }

 private:
  std::string name_;
  int in_ = 0;
  int out_ = 0;
  Mat<T> w_, dw_;
  Vec<T> b_, db_;
};

// ------------------------------------------------------------- BatchNorm

template <class T>
struct BatchNormCache {
  Mat<T> xhat;
  Vec<T> inv_std;
};

/// Per-row (channel) normalisation over all columns. Train mode uses batch
/// statistics and updates running estimates with `momentum`; eval mode uses
/// the running estimates and leaves them untouched.
template <class T>
class BatchNorm {
 public:
  BatchNorm() = default;
  BatchNorm(std::string name, int channels, double momentum = 0.1, double eps = 1e-5)
      : name_(std::move(name)), channels_(channels), momentum_(momentum), eps_(eps) {
    gamma_ = Vec<T>::Ones(channels_);
    beta_ = Vec<T>::Zero(channels_);
    dgamma_ = Vec<T>::Zero(channels_);
    dbeta_ = Vec<T>::Zero(channels_);
    running_mean_ = Vec<T>::Zero(channels_);
    running_var_ = Vec<T>::Ones(channels_);
  }

  Mat<T> forward_train(const Mat<T>& x, BatchNormCache<T>* cache) {
    check(x);
    const Eigen::Index count = x.cols();
    if (count < 2) throw StatisticsError(name_ + ": batch normalisation in train mode needs >= 2 values per channel");
    const Vec<T> mean = x.rowwise().mean();
    Mat<T> centered = x.colwise() - mean;
    const Vec<T> var = centered.rowwise().squaredNorm() / static_cast<T>(count);
    const Vec<T> inv_std = (var.array() + static_cast<T>(eps_)).rsqrt();
    Mat<T> xhat = inv_std.asDiagonal() * centered;
    Mat<T> y = (gamma_.asDiagonal() * xhat).colwise() + beta_;

    const T m = static_cast<T>(momentum_);
    const T unbias = static_cast<T>(count) / static_cast<T>(count - 1);
    running_mean_ = (T(1) - m) * running_mean_ + m * mean;
    running_var_ = (T(1) - m) * running_var_ + m * unbias * var;
    if (cache) {
      cache->xhat = std::move(xhat);
      cache->inv_std = inv_std;
    }
    return y;
  }

  Mat<T> forward_eval(const Mat<T>& x) const {
    check(x);
    const Vec<T> scale = gamma_.array() * (running_var_.array() + static_cast<T>(eps_)).rsqrt();
    const Vec<T> shift = beta_.array() - running_mean_.array() * scale.array();
    return (scale.asDiagonal() * x).colwise() + shift;
  }

  Mat<T> backward(const Mat<T>& dy, const BatchNormCache<T>& cache) {
    const T count = static_cast<T>(dy.cols());
    dbeta_ = dy.rowwise().sum();
    dgamma_ = dy.cwiseProduct(cache.xhat).rowwise().sum();
    // dx = (gamma * inv_std / N) (N dy - sum(dy) - xhat * sum(dy * xhat))
    Mat<T> dx = dy * count;
    dx.colwise() -= dbeta_;
    dx -= dgamma_.asDiagonal() * cache.xhat;
    const Vec<T> scale = gamma_.cwiseProduct(cache.inv_std) / count;
    return scale.asDiagonal() * dx;
  }

  void collect(std::vector<ParamView<T>>& out) {
    out.push_back({name_ + ".gamma", {channels_}, gamma_.data(), dgamma_.data(), gamma_.size()});
    out.push_back({name_ + ".beta", {channels_}, beta_.data(), dbeta_.data(), beta_.size()});
  }

  void collect_buffers(std::vector<BufferView<T>>& out) {
    out.push_back({name_ + ".running_mean", {channels_}, running_mean_.data(), running_mean_.size()});
    out.push_back({name_ + ".running_var", {channels_}, running_var_.data(), running_var_.size()});
  }

 private:
  void check(const Mat<T>& x) const {
    if (x.rows() != channels_)
      throw DimensionError(name_ + ": expected " + std::to_string(channels_) + " channels, got " +
                           std::to_string(x.rows()));
  }

  std::string name_;
  int channels_ = 0;
  double momentum_ = 0.1;
  double eps_ = 1e-5;
  Vec<T> gamma_, beta_, dgamma_, dbeta_;
  Vec<T> running_mean_, running_var_;
};

// ------------------------------------------------------------------ ReLU

template <class T>
void relu_inplace(Mat<T>& x) {
  x = x.cwiseMax(T(0));
}

/// Gradient of ReLU given its output y.
template <class T>
Mat<T> relu_backward(const Mat<T>& dy, const Mat<T>& y) {
  return (y.array() > T(0)).select(dy, T(0));
}

}  // namespace ved::nn
