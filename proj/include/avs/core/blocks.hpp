#pragma once

#include <vector>

#include "avs/core/nn.hpp"

namespace avs::nn {

/// Stack of 3x3 stride-2 conv + ReLU stages. Stage i runs at stride 2^(i+1).
template <typename T>
class ConvEncoder {
 public:
  ConvEncoder() = default;
  ConvEncoder(const std::string& name, int in_channels, const std::vector<int>& channels, Rng& rng);

  const std::vector<Tensor<T>>& forward(const Tensor<T>& x);
  /// `grads[i]` is dL/d(stage i output) and may be empty.
  Tensor<T> backward(const std::vector<Tensor<T>>& grads, bool need_input = false);
  void collect(ParamList<T>& out);
  const std::vector<Tensor<T>>& outputs() const { return outs_; }

 private:
  std::vector<Conv2d<T>> convs_;
  std::vector<Tensor<T>> outs_;
};

/// Residual stages h = relu(conv_s2(x)), y = relu(h + conv_s1(h)).
template <typename T>
class ResidualEncoder {
 public:
  ResidualEncoder() = default;
  ResidualEncoder(const std::string& name, int in_channels, const std::vector<int>& channels, Rng& rng);

  const Tensor<T>& forward(const Tensor<T>& x);
  Tensor<T> backward(const Tensor<T>& grad_out, bool need_input = false);
  void collect(ParamList<T>& out);

 private:
  std::vector<Conv2d<T>> down_;
  std::vector<Conv2d<T>> body_;
  std::vector<Tensor<T>> h_;
  std::vector<Tensor<T>> y_;
};

/// U-Net style decoder: each stage upsamples by two, concatenates an
/// optional skip feature, then applies 3x3 conv + ReLU.
template <typename T>
class SkipDecoder {
 public:
  SkipDecoder() = default;
  /// `skip_channels[i]` is 0 for stages without a skip input.
  SkipDecoder(const std::string& name, int in_channels, const std::vector<int>& skip_channels,
              const std::vector<int>& channels, Rng& rng);

  /// `skips[i]` must be provided (non-empty) where skip_channels[i] > 0.
  const std::vector<Tensor<T>>& forward(const Tensor<T>& bottleneck, const std::vector<const Tensor<T>*>& skips);
  struct Grads {
    Tensor<T> bottleneck;
    std::vector<Tensor<T>> skips;
  };
  Grads backward(const std::vector<Tensor<T>>& grads);
  void collect(ParamList<T>& out);
  const std::vector<Tensor<T>>& outputs() const { return outs_; }

 private:
  std::vector<Conv2d<T>> convs_;
  std::vector<int> skip_channels_;
  std::vector<Tensor<T>> outs_;
  std::vector<std::pair<int, int>> in_sizes_;
  std::vector<int> up_channels_;
};

/// Upsamples a CHW tensor by two with bilinear interpolation.
template <typename T>
Tensor<T> upsample2(const Tensor<T>& x);
template <typename T>
Tensor<T> upsample2_backward(const Tensor<T>& grad, int in_h, int in_w);

/// ReLU backward given the activation output.
template <typename T>
void relu_mask_inplace(const Tensor<T>& y, Tensor<T>& grad);

}  // namespace avs::nn
