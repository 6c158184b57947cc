#pragma once

#include <filesystem>
#include <vector>

#include "avs/core/blocks.hpp"
#include "avs/core/checkpoint.hpp"

namespace avs::selfsup {

struct DepthNetConfig {
  int height = 64;
  int width = 128;
  int n_scales = 4;  // heads at 1, 1/2, 1/4[, 1/8]
  std::vector<int> encoder_channels{16, 32, 64, 96, 128};
  std::vector<int> decoder_channels{96, 64, 32, 16, 16};
  std::uint64_t seed = 0;

  KeyValues to_hyper() const;
  static DepthNetConfig from_hyper(const KeyValues& kv);
  /// Throws std::invalid_argument on a resolution not divisible by 32 or bad scale count.
  void validate() const;
};

/// Encoder-decoder producing sigmoid disparities; disp()[i] has shape
/// 1 x (H / 2^i) x (W / 2^i).
template <typename T>
class DepthNet {
 public:
  explicit DepthNet(const DepthNetConfig& config = {});

  const std::vector<Tensor<T>>& forward(const Tensor<T>& rgb);
  /// `grads[i]` is dL/d disp()[i] (may be empty). Accumulates parameter grads.
  void backward(const std::vector<Tensor<T>>& grads);
  const std::vector<Tensor<T>>& disp() const { return disp_; }

  nn::ParamList<T> parameters();
  const DepthNetConfig& config() const { return config_; }
  void save(const std::filesystem::path& dir, const KeyValues& extra = {});
  static DepthNet load(const std::filesystem::path& dir);

 private:
  DepthNetConfig config_;
  nn::ConvEncoder<T> encoder_;
  nn::SkipDecoder<T> decoder_;
  std::vector<nn::Conv2d<T>> heads_;
  std::vector<Tensor<T>> disp_;
};

struct PoseNetConfig {
  std::vector<int> encoder_channels{16, 32, 64, 96, 128};
  double output_scale = 0.01;
  std::uint64_t seed = 1;

  KeyValues to_hyper() const;
  static PoseNetConfig from_hyper(const KeyValues& kv);
};

/// Conv stack on [target, source] (6 x H x W), 1x1 conv to 6 channels, global
/// average pool, times output_scale. The result [rx, ry, rz, tx, ty, tz] maps
/// target-frame points into the source frame.
template <typename T>
class PoseNet {
 public:
  explicit PoseNet(const PoseNetConfig& config = {});

  Tensor<T> forward(const Tensor<T>& target, const Tensor<T>& source);
  /// Uses the activations of the latest forward call.
  void backward(const Tensor<T>& grad_pose);

  nn::ParamList<T> parameters();
  nn::Conv2d<T>& final_layer() { return head_; }
  const PoseNetConfig& config() const { return config_; }
  void save(const std::filesystem::path& dir, const KeyValues& extra = {});
  static PoseNet load(const std::filesystem::path& dir);

 private:
  PoseNetConfig config_;
  nn::ConvEncoder<T> encoder_;
  nn::Conv2d<T> head_;
  Shape head_shape_;
};

/// Input normalisation shared by both networks.
template <typename T>
Tensor<T> normalize_rgb(const Tensor<T>& rgb);

}  // namespace avs::selfsup
