#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "avs/avsnet/heads.hpp"
#include "avs/core/blocks.hpp"
#include "avs/core/checkpoint.hpp"

namespace avs::avsnet {

struct AvsNetConfig {
  int height = 64;
  int width = 128;
  std::vector<int> encoder_channels{16, 32, 64, 128, 192};
  /// Decoder stages at strides 16, 8, 4, 2.
  std::vector<int> decoder_channels{64, 32, 24, 16};
  /// Residual audio stages; the last width must equal the visual bottleneck.
  std::vector<int> audio_channels{16, 32, 64, 128, 192};
  int heads = 4;
  int bins = 64;
  int bin_embedding = 32;
  /// Attractors per stage, one stage per decoder feature.
  std::vector<int> attractors{16, 8, 4, 1};
  double attractor_alpha = 300.0;
  int attractor_gamma = 2;
  double d_min = 0.1;
  double d_max = 12.0;
  bool use_audio = true;
  /// Compress spectrogram magnitudes with log(1 + m) before the encoder.
  bool audio_log = true;
  std::uint64_t seed = 0;

  KeyValues to_hyper() const;
  static AvsNetConfig from_hyper(const KeyValues& kv);
  void validate() const;
};

template <typename T>
struct AvsOutput {
  Tensor<T> depth;                       // H x W, metres
  Tensor<T> seed_centers;                // K
  std::vector<Tensor<T>> stage_centers;  // K x h x w per attractor stage
};

/// Audio-visual metric depth network: visual encoder/decoder, audio encoder,
/// cross-modal fusion of the bottleneck tokens, seed bins refined by
/// attractor stages, and a log-binomial head over the finest decoder feature.
template <typename T>
class AvsNet {
 public:
  explicit AvsNet(const AvsNetConfig& config);

  /// rgb: 3 x H x W in [0, 1]; spec: 2 x F x T magnitudes (ignored without audio).
  const AvsOutput<T>& forward(const Tensor<T>& rgb, const Tensor<T>& spec);
  /// Accumulates parameter gradients for dL/d(depth) of the last forward.
  /// Returns dL/d(spec) when requested and audio is enabled, else empty.
  Tensor<T> backward(const Tensor<T>& grad_depth, bool need_spec_grad = false);

  /// Runs the visual encoder and decoder; returns the bottleneck tokens f_v
  /// (decoder features are kept for the bins head).
  const Tensor<T>& encode_visual(const Tensor<T>& rgb);
  /// Resizes the spectrogram to the image grid and returns audio tokens f_a.
  const Tensor<T>& encode_audio(const Tensor<T>& spec);
  const std::vector<Tensor<T>>& decoder_features() const { return decoder_.outputs(); }

  nn::ParamList<T> parameters();
  const AvsNetConfig& config() const { return config_; }

  void save(const std::filesystem::path& dir, const KeyValues& extra = {});
  static AvsNet load(const std::filesystem::path& dir);

 private:
  struct Stage {
    nn::Conv2d<T> proj;     // decoder feature -> bin embedding
    nn::Conv2d<T> hidden;   // embedding -> hidden
    nn::Conv2d<T> points;   // hidden -> attractor logits
    Tensor<T> emb, z, attr_sig, attractors, centers_in;
    AttractorResult<T> result;
    int h = 0, w = 0;
  };

  AvsNetConfig config_;
  nn::ConvEncoder<T> visual_;
  nn::SkipDecoder<T> decoder_;
  nn::ResidualEncoder<T> audio_;
  Param<T> wq_, wk_, wv_;
  Param<T> seed_w_, seed_b_;
  nn::Linear<T> seed_proj_;
  std::vector<Stage> stages_;
  nn::Conv2d<T> qt_head_;

  // forward cache
  Tensor<T> spec_, audio_in_;
  Tensor<T> fv_, fa_, fused_, emb0_;
  AttentionCache<T> att_cache_;
  SeedBins<T> seed_;
  Tensor<T> qt_raw_, q_, t_, probs_, depth2_;
  int tok_h_ = 0, tok_w_ = 0;
  AvsOutput<T> out_;
};

/// C x h x w feature map -> (h w) x C tokens.
template <typename T>
Tensor<T> map_to_tokens(const Tensor<T>& map);
/// Inverse of map_to_tokens.
template <typename T>
Tensor<T> tokens_to_map(const Tensor<T>& tokens, int h, int w);

}  // namespace avs::avsnet
