#pragma once

#include <filesystem>
#include <functional>
#include <limits>
#include <vector>

#include "avs/avsnet/model.hpp"
#include "avs/core/optim.hpp"

namespace avs::avsnet {

/// One supervised example: rgb 3xHxW, spectrogram 2xFxT, depth HxW (0 = invalid).
template <typename T>
struct AvsSample {
  Tensor<T> rgb, spec, depth;
};

struct AvsTrainConfig {
  long steps = 2000;
  int batch_size = 4;
  double lr = 1e-3;
  double warmup_fraction = 0.05;
  nn::OptimizerConfig optimizer{};
  SiLossParams loss{};
  std::uint64_t seed = 0;
  /// Validation period in steps; 0 evaluates ten times per run.
  long eval_every = 0;
  /// Ground truth at or beyond this is ignored when scoring validation.
  double max_depth = 12.0;
  /// When set, the best-validation weights are also written here.
  std::filesystem::path checkpoint_dir;
  std::function<void(long step, double loss, double lr)> on_step;
};

struct AvsTrainResult {
  std::vector<double> loss_trace;  // mean batch SI loss per step
  double best_val_abs_rel = std::numeric_limits<double>::infinity();
  long best_step = -1;
};

/// Momentum SGD with warmup + cosine decay on the SI loss. Batches are drawn
/// by a seeded shuffle. With a validation set, the weights left in `net` are
/// the ones with the lowest validation Abs Rel. Throws nn::DivergenceError on
/// a non-finite loss.
template <typename T>
AvsTrainResult train_avsnet(AvsNet<T>& net, const std::vector<AvsSample<T>>& train,
                            const std::vector<AvsSample<T>>& val, const AvsTrainConfig& config);

/// Mean Abs Rel of the network over a sample set.
template <typename T>
double evaluate_abs_rel(AvsNet<T>& net, const std::vector<AvsSample<T>>& samples, double max_depth);

template <typename T>
struct Saliency {
  std::vector<double> profile;  // per time frame
  Tensor<T> map;                // 2 x F x T
};

/// |d mean(depth) / d spec|, summed over channels and frequency for the
/// profile. Parameter gradients are left zeroed.
template <typename T>
Saliency<T> saliency(AvsNet<T>& net, const Tensor<T>& rgb, const Tensor<T>& spec);

}  // namespace avs::avsnet
