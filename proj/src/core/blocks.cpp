#include "avs/core/blocks.hpp"

#include <stdexcept>

namespace avs::nn {

template <typename T>
Tensor<T> upsample2(const Tensor<T>& x) {
  return bilinear_resize(x, x.dim(-2) * 2, x.dim(-1) * 2);
}

template <typename T>
Tensor<T> upsample2_backward(const Tensor<T>& grad, int in_h, int in_w) {
  return bilinear_resize_backward(grad, in_h, in_w);
}

template <typename T>
void relu_mask_inplace(const Tensor<T>& y, Tensor<T>& grad) {
  y.require_same_shape(grad, "relu_mask_inplace");
  for (std::size_t i = 0; i < y.size(); ++i)
    if (!(y[i] > T(0))) grad[i] = T(0);
}

template <typename T>
ConvEncoder<T>::ConvEncoder(const std::string& name, int in_channels, const std::vector<int>& channels, Rng& rng) {
  int c = in_channels;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    convs_.emplace_back(name + ".stage" + std::to_string(i), c, channels[i], 3, 2, rng);
    c = channels[i];
  }
}

template <typename T>
const std::vector<Tensor<T>>& ConvEncoder<T>::forward(const Tensor<T>& x) {
  outs_.resize(convs_.size());
  const Tensor<T>* in = &x;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    outs_[i] = relu(convs_[i].forward(*in));
    in = &outs_[i];
  }
  return outs_;
}

template <typename T>
Tensor<T> ConvEncoder<T>::backward(const std::vector<Tensor<T>>& grads, bool need_input) {
  Tensor<T> g;
  for (std::size_t i = convs_.size(); i-- > 0;) {
    if (i < grads.size() && !grads[i].empty()) {
      if (g.empty()) {
        g = grads[i];
      } else {
        g += grads[i];
      }
    }
    if (g.empty()) continue;
    relu_mask_inplace(outs_[i], g);
    g = convs_[i].backward(g, i > 0 || need_input);
  }
  return g;
}

template <typename T>
void ConvEncoder<T>::collect(ParamList<T>& out) {
  for (auto& c : convs_) c.collect(out);
}

template <typename T>
ResidualEncoder<T>::ResidualEncoder(const std::string& name, int in_channels, const std::vector<int>& channels,
                                    Rng& rng) {
  int c = in_channels;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    const std::string stage = name + ".block" + std::to_string(i);
    down_.emplace_back(stage + ".down", c, channels[i], 3, 2, rng);
    body_.emplace_back(stage + ".body", channels[i], channels[i], 3, 1, rng);
    c = channels[i];
  }
}

template <typename T>
const Tensor<T>& ResidualEncoder<T>::forward(const Tensor<T>& x) {
  h_.resize(down_.size());
  y_.resize(down_.size());
  const Tensor<T>* in = &x;
  for (std::size_t i = 0; i < down_.size(); ++i) {
    h_[i] = relu(down_[i].forward(*in));
    Tensor<T> pre = body_[i].forward(h_[i]);
    pre += h_[i];
    y_[i] = relu(pre);
    in = &y_[i];
  }
  return y_.back();
}

template <typename T>
Tensor<T> ResidualEncoder<T>::backward(const Tensor<T>& grad_out, bool need_input) {
  Tensor<T> g = grad_out;
  for (std::size_t i = down_.size(); i-- > 0;) {
    relu_mask_inplace(y_[i], g);
    Tensor<T> gh = body_[i].backward(g, true);
    gh += g;
    relu_mask_inplace(h_[i], gh);
    g = down_[i].backward(gh, i > 0 || need_input);
  }
  return g;
}

template <typename T>
void ResidualEncoder<T>::collect(ParamList<T>& out) {
  for (std::size_t i = 0; i < down_.size(); ++i) {
    down_[i].collect(out);
    body_[i].collect(out);
  }
}

template <typename T>
SkipDecoder<T>::SkipDecoder(const std::string& name, int in_channels, const std::vector<int>& skip_channels,
                            const std::vector<int>& channels, Rng& rng)
    : skip_channels_(skip_channels) {
  if (skip_channels.size() != channels.size())
    throw std::invalid_argument(name + ": skip/channel lists differ in length");
  int c = in_channels;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    up_channels_.push_back(c);
    convs_.emplace_back(name + ".stage" + std::to_string(i), c + skip_channels[i], channels[i], 3, 1, rng);
    c = channels[i];
  }
}

template <typename T>
const std::vector<Tensor<T>>& SkipDecoder<T>::forward(const Tensor<T>& bottleneck,
                                                     const std::vector<const Tensor<T>*>& skips) {
  outs_.resize(convs_.size());
  in_sizes_.resize(convs_.size());
  const Tensor<T>* in = &bottleneck;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    in_sizes_[i] = {in->dim(1), in->dim(2)};
    Tensor<T> up = upsample2(*in);
    if (skip_channels_[i] > 0) {
      if (i >= skips.size() || skips[i] == nullptr || skips[i]->dim(0) != skip_channels_[i])
        throw std::invalid_argument("SkipDecoder: missing or mismatched skip feature at stage " + std::to_string(i));
      up = concat_channels(up, *skips[i]);
    }
    outs_[i] = relu(convs_[i].forward(up));
    in = &outs_[i];
  }
  return outs_;
}

template <typename T>
typename SkipDecoder<T>::Grads SkipDecoder<T>::backward(const std::vector<Tensor<T>>& grads) {
  Grads out;
  out.skips.resize(convs_.size());
  Tensor<T> g;
  for (std::size_t i = convs_.size(); i-- > 0;) {
    if (i < grads.size() && !grads[i].empty()) {
      if (g.empty()) {
        g = grads[i];
      } else {
        g += grads[i];
      }
    }
    if (g.empty()) continue;
    relu_mask_inplace(outs_[i], g);
    Tensor<T> gin = convs_[i].backward(g, true);
    if (skip_channels_[i] > 0) {
      auto [gu, gs] = split_channels(gin, up_channels_[i]);
      out.skips[i] = std::move(gs);
      gin = std::move(gu);
    }
    g = upsample2_backward(gin, in_sizes_[i].first, in_sizes_[i].second);
  }
  out.bottleneck = std::move(g);
  return out;
}

template <typename T>
void SkipDecoder<T>::collect(ParamList<T>& out) {
  for (auto& c : convs_) c.collect(out);
}

template class ConvEncoder<float>;
template class ConvEncoder<double>;
template class ResidualEncoder<float>;
template class ResidualEncoder<double>;
template class SkipDecoder<float>;
template class SkipDecoder<double>;
template Tensor<float> upsample2(const Tensor<float>&);
template Tensor<double> upsample2(const Tensor<double>&);
template Tensor<float> upsample2_backward(const Tensor<float>&, int, int);
template Tensor<double> upsample2_backward(const Tensor<double>&, int, int);
template void relu_mask_inplace(const Tensor<float>&, Tensor<float>&);
template void relu_mask_inplace(const Tensor<double>&, Tensor<double>&);

}  // namespace avs::nn
