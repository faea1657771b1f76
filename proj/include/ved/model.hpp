#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ved/nn.hpp"
#include "ved/rng.hpp"

namespace ved {

using nn::Mode;

/// Architecture of the variational encoder-decoder.
///
/// Encoder: a stride-2 3x3 stem raising 1 -> channels[1], then
/// n_res_blocks units of [1x1 channel-raising conv + stride-2 residual
/// block]. The final feature map is flattened into two linear heads of size
/// latent_dim (mean g and log-variance h). Decoder: linear latent_dim ->
/// decoder_hidden, batch norm, ReLU, linear -> output_dim.
struct ArchConfig {
  int height = 0;
  int width = 0;
  int latent_dim = 0;
  std::vector<int> channels{1, 16, 32, 64, 128, 256};
  int n_res_blocks = 4;
  int decoder_hidden = 512;
  int output_dim = 0;
  int kernel = 3;
  int padding = 1;

  /// Throws ConfigError when the configuration is inconsistent.
  void validate() const;

  /// Spatial size after each of the 1 + n_res_blocks stride-2 stages.
  std::vector<std::pair<int, int>> stage_sizes() const;
  int final_height() const { return stage_sizes().back().first; }
  int final_width() const { return stage_sizes().back().second; }
  int flattened_size() const { return final_height() * final_width() * channels.back(); }

  /// Stem + per unit (channel raise + two block convs); projection shortcuts
  /// are counted only on request.
  int conv_layer_count(bool include_projections = false) const;
};

template <class T>
struct EncoderOutput {
  nn::Mat<T> g;  // r x B latent mean
  nn::Mat<T> h;  // r x B latent log-variance, clamped to [-10, 10]
};

template <class T>
struct ForwardResult {
  nn::Mat<T> y_hat;  // m x B
  nn::Mat<T> g;      // r x B
  nn::Mat<T> h;      // r x B
  nn::Mat<T> z;      // r x B
  nn::Mat<T> eps;    // r x B
};

/// z = g + eps * exp(h / 2), elementwise.
template <class T>
nn::Mat<T> reparameterize(const nn::Mat<T>& g, const nn::Mat<T>& h, const nn::Mat<T>& eps) {
  if (g.rows() != h.rows() || g.cols() != h.cols() || g.rows() != eps.rows() || g.cols() != eps.cols())
    throw DimensionError("reparameterize: g, h and eps must have equal shapes");
  return (g.array() + eps.array() * (h.array() * T(0.5)).exp()).matrix();
}

inline constexpr double kLogVarianceClamp = 10.0;

/// Variational encoder-decoder. Batches are column-major: images are
/// (H*W) x B with row-major pixels per column, latents r x B, outputs m x B.
///
/// Train-mode calls record a tape for backward() and update batch-norm
/// running statistics; eval-mode calls are const and touch no state.
template <class T>
class VedModel {
 public:
  using Mat = nn::Mat<T>;

  VedModel(const ArchConfig& arch, std::uint64_t seed);

  const ArchConfig& arch() const { return arch_; }

  EncoderOutput<T> encode(const Mat& images, Mode mode);
  EncoderOutput<T> encode(const Mat& images) const;
  Mat decode(const Mat& z, Mode mode);
  Mat decode(const Mat& z) const;

  /// Full pass with caller-supplied eps (r x B).
  ForwardResult<T> forward(const Mat& images, const Mat& eps, Mode mode);
  ForwardResult<T> forward(const Mat& images, const Mat& eps) const;
  /// One standard-normal eps draw per sample.
  ForwardResult<T> forward(const Mat& images, Rng& rng, Mode mode);

  /// Back-propagates through the last train-mode forward(). d_g and d_h are
  /// the loss gradients that act on g and h directly (KL and covariance
  /// terms); the reparameterised path through z is added here. Parameter
  /// gradients are overwritten.
  void backward(const Mat& d_yhat, const Mat& d_g, const Mat& d_h);

  std::vector<nn::ParamView<T>> parameters();
  std::vector<nn::BufferView<T>> buffers();
  Eigen::Index parameter_count();

  /// Flat copy of all parameters followed by all buffers.
  std::vector<T> state();
  void load_state(const std::vector<T>& state);

  nn::Linear<T>& head_g() { return head_g_; }
  nn::Linear<T>& head_h() { return head_h_; }
  nn::Linear<T>& decoder_hidden_layer() { return dec_fc_; }
  nn::Linear<T>& decoder_output_layer() { return dec_out_; }

 private:
  struct Unit {
    nn::Conv2d<T> raise;
    nn::Conv2d<T> conv1;
    nn::BatchNorm<T> bn1;
    nn::Conv2d<T> conv2;
    nn::BatchNorm<T> bn2;
    nn::Conv2d<T> proj;
    bool has_proj = true;
  };

  struct UnitTape {
    nn::ConvCache<T> raise, conv1, conv2, proj;
    nn::BatchNormCache<T> bn1, bn2;
    Mat raised;  // post-ReLU
    Mat a1;      // post-ReLU after bn1
    Mat out;     // post-ReLU block output
  };

  struct Tape {
    nn::ConvCache<T> stem;
    Mat stem_out;
    std::vector<UnitTape> units;
    nn::LinearCache<T> head_g, head_h;
    Mat h_raw, h, eps;
    nn::LinearCache<T> dec_fc, dec_out;
    nn::BatchNormCache<T> dec_bn;
    Mat dec_act;
    bool complete = false;
  };

  template <class Self>
  static EncoderOutput<T> encode_impl(Self& self, const Mat& images, Tape* tape);
  template <class Self>
  static Mat decode_impl(Self& self, const Mat& z, Tape* tape);

  void check_images(const Mat& images, Mode mode) const;

  ArchConfig arch_;
  nn::Conv2d<T> stem_;
  std::vector<Unit> units_;
  nn::Linear<T> head_g_, head_h_;
  nn::Linear<T> dec_fc_;
  nn::BatchNorm<T> dec_bn_;
  nn::Linear<T> dec_out_;
  Tape tape_;
};

extern template class VedModel<float>;
extern template class VedModel<double>;

}  // namespace ved
