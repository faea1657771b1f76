#include "ved/model.hpp"

#include <algorithm>
#include <type_traits>

#include "ved/errors.hpp"

namespace ved {

void ArchConfig::validate() const {
  if (height < 1 || width < 1) throw ConfigError("input shape must be positive");
  if (latent_dim < 1) throw ConfigError("latent dimension r must be >= 1");
  if (output_dim < 1) throw ConfigError("output dimension m must be >= 1");
  if (decoder_hidden < 1) throw ConfigError("decoder_hidden must be >= 1");
  if (n_res_blocks < 1) throw ConfigError("n_res_blocks must be >= 1");
  if (static_cast<int>(channels.size()) != n_res_blocks + 2)
    throw ConfigError("channel schedule needs n_res_blocks + 2 entries (input, stem, one per block)");
  if (channels.front() != 1) throw ConfigError("channel schedule must start at 1 input channel");
  for (std::size_t i = 1; i < channels.size(); ++i)
    if (channels[i] <= channels[i - 1]) throw ConfigError("channel schedule must be strictly increasing");
  if (kernel < 1 || padding < 0) throw ConfigError("invalid kernel/padding");
  for (auto [h, w] : stage_sizes())
    if (h < 1 || w < 1) throw ConfigError("input too small for the stride-2 stages");
}

std::vector<std::pair<int, int>> ArchConfig::stage_sizes() const {
  std::vector<std::pair<int, int>> sizes;
  int h = height;
  int w = width;
  for (int s = 0; s < n_res_blocks + 1; ++s) {
    h = nn::conv_output_size(h, kernel, 2, padding);
    w = nn::conv_output_size(w, kernel, 2, padding);
    sizes.emplace_back(h, w);
  }
  return sizes;
}

int ArchConfig::conv_layer_count(bool include_projections) const {
  int count = 1 + 3 * n_res_blocks;
  if (include_projections) {
    const auto sizes = stage_sizes();
    for (std::size_t u = 1; u < sizes.size(); ++u)
      if (sizes[u] != sizes[u - 1]) ++count;
  }
  return count;
}

template <class T>
VedModel<T>::VedModel(const ArchConfig& arch, std::uint64_t seed) : arch_(arch) {
  arch_.validate();
  const auto& ch = arch_.channels;
  const int k = arch_.kernel;
  const int p = arch_.padding;
  stem_ = nn::Conv2d<T>("encoder.stem", ch[0], ch[1], k, 2, p, true);
  const auto sizes = arch_.stage_sizes();
  for (int u = 0; u < arch_.n_res_blocks; ++u) {
    const std::string prefix = "encoder.unit" + std::to_string(u) + ".";
    const int c_in = ch[static_cast<std::size_t>(u + 1)];
    const int c = ch[static_cast<std::size_t>(u + 2)];
    Unit unit;
    unit.raise = nn::Conv2d<T>(prefix + "raise", c_in, c, 1, 1, 0, true);
    unit.conv1 = nn::Conv2d<T>(prefix + "conv1", c, c, k, 2, p, false);
    unit.bn1 = nn::BatchNorm<T>(prefix + "bn1", c);
    unit.conv2 = nn::Conv2d<T>(prefix + "conv2", c, c, k, 1, p, false);
    unit.bn2 = nn::BatchNorm<T>(prefix + "bn2", c);
    unit.has_proj = sizes[static_cast<std::size_t>(u)] != sizes[static_cast<std::size_t>(u + 1)];
    if (unit.has_proj) unit.proj = nn::Conv2d<T>(prefix + "proj", c, c, 1, 2, 0, false);
    units_.push_back(std::move(unit));
  }
  const int flat = arch_.flattened_size();
  head_g_ = nn::Linear<T>("encoder.head_g", flat, arch_.latent_dim);
  head_h_ = nn::Linear<T>("encoder.head_h", flat, arch_.latent_dim);
  dec_fc_ = nn::Linear<T>("decoder.fc1", arch_.latent_dim, arch_.decoder_hidden);
  dec_bn_ = nn::BatchNorm<T>("decoder.bn", arch_.decoder_hidden);
  dec_out_ = nn::Linear<T>("decoder.out", arch_.decoder_hidden, arch_.output_dim);

  Rng rng(seed);
  stem_.init(rng);
  for (auto& unit : units_) {
    unit.raise.init(rng);
    unit.conv1.init(rng);
    unit.conv2.init(rng);
    if (unit.has_proj) unit.proj.init(rng);
  }
  head_g_.init(rng);
  head_h_.init(rng);
  dec_fc_.init(rng);
  dec_out_.init(rng);
}

namespace {

template <class T>
void check_finite(const nn::Mat<T>& m, const char* where) {
  if (!m.allFinite()) throw NumericalError(std::string("non-finite activations after ") + where);
}

template <class BN, class T>
nn::Mat<T> batch_norm(BN& bn, const nn::Mat<T>& x, nn::BatchNormCache<T>* cache) {
  if constexpr (std::is_const_v<BN>) {
    return bn.forward_eval(x);
  } else {
    return cache ? bn.forward_train(x, cache) : bn.forward_eval(x);
  }
}

}  // namespace

template <class T>
void VedModel<T>::check_images(const Mat& images, Mode mode) const {
  if (images.rows() != static_cast<Eigen::Index>(arch_.height) * arch_.width)
    throw DimensionError("image batch has " + std::to_string(images.rows()) + " pixels, expected " +
                         std::to_string(arch_.height * arch_.width));
  if (images.cols() < 1) throw DimensionError("empty batch");
  if (mode == Mode::Train && images.cols() < 2)
    throw StatisticsError("train mode needs a batch of at least 2 (batch normalisation)");
}

template <class T>
template <class Self>
EncoderOutput<T> VedModel<T>::encode_impl(Self& self, const Mat& images, Tape* tape) {
  const int batch = static_cast<int>(images.cols());
  nn::FeatureShape shape{batch, self.arch_.height, self.arch_.width};
  Mat x = Eigen::Map<const Mat>(images.data(), 1, images.size());

  Mat a = self.stem_.forward(x, shape, tape ? &tape->stem : nullptr);
  shape = self.stem_.output_shape(shape);
  nn::relu_inplace(a);
  check_finite(a, "encoder.stem");
  if (tape) {
    tape->stem_out = a;
    tape->units.assign(self.units_.size(), UnitTape{});
  }

  for (std::size_t u = 0; u < self.units_.size(); ++u) {
    auto& unit = self.units_[u];
    UnitTape* ut = tape ? &tape->units[u] : nullptr;
    Mat raised = unit.raise.forward(a, shape, ut ? &ut->raise : nullptr);
    nn::relu_inplace(raised);

    Mat c1 = unit.conv1.forward(raised, shape, ut ? &ut->conv1 : nullptr);
    const nn::FeatureShape out_shape = unit.conv1.output_shape(shape);
    Mat a1 = batch_norm(unit.bn1, c1, ut ? &ut->bn1 : nullptr);
    nn::relu_inplace(a1);
    Mat c2 = unit.conv2.forward(a1, out_shape, ut ? &ut->conv2 : nullptr);
    Mat out = batch_norm(unit.bn2, c2, ut ? &ut->bn2 : nullptr);
    if (unit.has_proj)
      out += unit.proj.forward(raised, shape, ut ? &ut->proj : nullptr);
    else
      out += raised;
    nn::relu_inplace(out);
    check_finite(out, ("encoder.unit" + std::to_string(u)).c_str());
    if (ut) {
      ut->raised = std::move(raised);
      ut->a1 = std::move(a1);
      ut->out = out;
    }
    a = std::move(out);
    shape = out_shape;
  }

  const Mat flat = Eigen::Map<const Mat>(a.data(), a.rows() * shape.pixels(), batch);
  EncoderOutput<T> enc;
  enc.g = self.head_g_.forward(flat, tape ? &tape->head_g : nullptr);
  Mat h_raw = self.head_h_.forward(flat, tape ? &tape->head_h : nullptr);
  check_finite(enc.g, "encoder.head_g");
  check_finite(h_raw, "encoder.head_h");
  const T bound = static_cast<T>(kLogVarianceClamp);
  enc.h = h_raw.cwiseMax(-bound).cwiseMin(bound);
  if (tape) {
    tape->h_raw = std::move(h_raw);
    tape->h = enc.h;
  }
  return enc;
}

template <class T>
template <class Self>
typename VedModel<T>::Mat VedModel<T>::decode_impl(Self& self, const Mat& z, Tape* tape) {
  if (z.rows() != self.arch_.latent_dim)
    throw DimensionError("latent batch has " + std::to_string(z.rows()) + " rows, expected r = " +
                         std::to_string(self.arch_.latent_dim));
  if (!z.allFinite()) throw NumericalError("non-finite latent codes");
  Mat hidden = self.dec_fc_.forward(z, tape ? &tape->dec_fc : nullptr);
  Mat act = batch_norm(self.dec_bn_, hidden, tape ? &tape->dec_bn : nullptr);
  nn::relu_inplace(act);
  Mat y = self.dec_out_.forward(act, tape ? &tape->dec_out : nullptr);
  check_finite(y, "decoder.out");
  if (tape) tape->dec_act = std::move(act);
  return y;
}

template <class T>
EncoderOutput<T> VedModel<T>::encode(const Mat& images, Mode mode) {
  check_images(images, mode);
  tape_.complete = false;
  if (mode == Mode::Eval) return encode_impl(std::as_const(*this), images, nullptr);
  return encode_impl(*this, images, &tape_);
}

template <class T>
EncoderOutput<T> VedModel<T>::encode(const Mat& images) const {
  check_images(images, Mode::Eval);
  return encode_impl(*this, images, nullptr);
}

template <class T>
typename VedModel<T>::Mat VedModel<T>::decode(const Mat& z, Mode mode) {
  if (mode == Mode::Eval) return decode_impl(std::as_const(*this), z, nullptr);
  if (z.cols() < 2) throw StatisticsError("train mode needs a batch of at least 2 (batch normalisation)");
  tape_.complete = false;
  return decode_impl(*this, z, &tape_);
}

template <class T>
typename VedModel<T>::Mat VedModel<T>::decode(const Mat& z) const {
  return decode_impl(*this, z, nullptr);
}

template <class T>
ForwardResult<T> VedModel<T>::forward(const Mat& images, const Mat& eps, Mode mode) {
  if (mode == Mode::Eval) return std::as_const(*this).forward(images, eps);
  check_images(images, mode);
  ForwardResult<T> res;
  EncoderOutput<T> enc = encode_impl(*this, images, &tape_);
  res.z = reparameterize<T>(enc.g, enc.h, eps);
  res.y_hat = decode_impl(*this, res.z, &tape_);
  res.g = std::move(enc.g);
  res.h = std::move(enc.h);
  res.eps = eps;
  tape_.eps = eps;
  tape_.complete = true;
  return res;
}

template <class T>
ForwardResult<T> VedModel<T>::forward(const Mat& images, const Mat& eps) const {
  check_images(images, Mode::Eval);
  ForwardResult<T> res;
  EncoderOutput<T> enc = encode_impl(*this, images, nullptr);
  res.z = reparameterize<T>(enc.g, enc.h, eps);
  res.y_hat = decode_impl(*this, res.z, nullptr);
  res.g = std::move(enc.g);
  res.h = std::move(enc.h);
  res.eps = eps;
  return res;
}

template <class T>
ForwardResult<T> VedModel<T>::forward(const Mat& images, Rng& rng, Mode mode) {
  const Mat eps = standard_normal<T>(rng, arch_.latent_dim, images.cols());
  return forward(images, eps, mode);
}

template <class T>
void VedModel<T>::backward(const Mat& d_yhat, const Mat& d_g, const Mat& d_h) {
  if (!tape_.complete) throw Error("backward() requires a preceding train-mode forward()");
  const Eigen::Index batch = tape_.eps.cols();
  if (d_yhat.rows() != arch_.output_dim || d_yhat.cols() != batch || d_g.rows() != arch_.latent_dim ||
      d_g.cols() != batch || d_h.rows() != d_g.rows() || d_h.cols() != batch)
    throw DimensionError("backward: gradient shapes do not match the recorded forward pass");

  // decoder
  Mat d = dec_out_.backward(d_yhat, tape_.dec_out);
  d = nn::relu_backward<T>(d, tape_.dec_act);
  d = dec_bn_.backward(d, tape_.dec_bn);
  const Mat dz = dec_fc_.backward(d, tape_.dec_fc);

  // reparameterisation and clamp
  const Mat dg = d_g + dz;
  Mat dh = d_h.array() + dz.array() * tape_.eps.array() * T(0.5) * (tape_.h.array() * T(0.5)).exp();
  const T bound = static_cast<T>(kLogVarianceClamp);
  dh = (tape_.h_raw.array() > -bound && tape_.h_raw.array() < bound).select(dh, T(0));

  Mat dflat = head_g_.backward(dg, tape_.head_g);
  dflat += head_h_.backward(dh, tape_.head_h);

  // encoder units, last to first
  const int final_channels = arch_.channels.back();
  Mat da = Eigen::Map<const Mat>(dflat.data(), final_channels, dflat.size() / final_channels);
  for (std::size_t i = units_.size(); i-- > 0;) {
    Unit& unit = units_[i];
    UnitTape& ut = tape_.units[i];
    const Mat dout = nn::relu_backward<T>(da, ut.out);
    Mat d2 = unit.bn2.backward(dout, ut.bn2);
    Mat da1 = unit.conv2.backward(d2, ut.conv2);
    da1 = nn::relu_backward<T>(da1, ut.a1);
    Mat d1 = unit.bn1.backward(da1, ut.bn1);
    Mat draised = unit.conv1.backward(d1, ut.conv1);
    if (unit.has_proj)
      draised += unit.proj.backward(dout, ut.proj);
    else
      draised += dout;
    draised = nn::relu_backward<T>(draised, ut.raised);
    da = unit.raise.backward(draised, ut.raise);
  }
  da = nn::relu_backward<T>(da, tape_.stem_out);
  stem_.backward(da, tape_.stem, /*need_input_grad=*/false);
  tape_.complete = false;
}

template <class T>
std::vector<nn::ParamView<T>> VedModel<T>::parameters() {
  std::vector<nn::ParamView<T>> out;
  stem_.collect(out);
  for (auto& unit : units_) {
    unit.raise.collect(out);
    unit.conv1.collect(out);
    unit.bn1.collect(out);
    unit.conv2.collect(out);
    unit.bn2.collect(out);
    if (unit.has_proj) unit.proj.collect(out);
  }
  head_g_.collect(out);
  head_h_.collect(out);
  dec_fc_.collect(out);
  dec_bn_.collect(out);
  dec_out_.collect(out);
  return out;
}

template <class T>
std::vector<nn::BufferView<T>> VedModel<T>::buffers() {
  std::vector<nn::BufferView<T>> out;
  for (auto& unit : units_) {
    unit.bn1.collect_buffers(out);
    unit.bn2.collect_buffers(out);
  }
  dec_bn_.collect_buffers(out);
  return out;
}

template <class T>
Eigen::Index VedModel<T>::parameter_count() {
  Eigen::Index n = 0;
  for (const auto& p : parameters()) n += p.size;
  return n;
}

template <class T>
std::vector<T> VedModel<T>::state() {
  std::vector<T> out;
  for (const auto& p : parameters()) out.insert(out.end(), p.value, p.value + p.size);
  for (const auto& b : buffers()) out.insert(out.end(), b.value, b.value + b.size);
  return out;
}

template <class T>
void VedModel<T>::load_state(const std::vector<T>& state) {
  std::size_t offset = 0;
  auto take = [&](T* dst, Eigen::Index n) {
    if (offset + static_cast<std::size_t>(n) > state.size()) throw DimensionError("state vector too short");
    std::copy_n(state.begin() + static_cast<std::ptrdiff_t>(offset), n, dst);
    offset += static_cast<std::size_t>(n);
  };
  for (auto& p : parameters()) take(p.value, p.size);
  for (auto& b : buffers()) take(b.value, b.size);
  if (offset != state.size()) throw DimensionError("state vector too long");
}

template class VedModel<float>;
template class VedModel<double>;

}  // namespace ved
