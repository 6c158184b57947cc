#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "avs/core/optim.hpp"
#include "avs/geometry/geometry.hpp"
#include "avs/selfsup/losses.hpp"
#include "avs/selfsup/nets.hpp"

namespace avs::selfsup {

/// Frames t - interval, t, t + interval of one scene.
template <typename T>
struct FrameTriple {
  Tensor<T> prev, target, next;
};

struct ObjectiveTerms {
  double total = 0.0;
  std::vector<double> pe;      // per scale, auto-masked mean photometric error
  std::vector<double> smooth;  // per scale
  std::vector<double> masked_fraction;  // share of pixels where mu = 1
};

/// Multi-scale joint objective for one target view. Disparities are upsampled
/// to full resolution, converted to depth and used to warp every source into
/// the target view. Per pixel the loss is the best reprojection error where
/// the auto-mask keeps it and the best identity error elsewhere (no gradient);
/// the pixel mean gives pe_i. Smoothness uses the target resized to scale i.
template <typename T>
class JointObjective {
 public:
  JointObjective(geometry::CameraIntrinsics K, PhotometricParams params, double d_min = 0.1, double d_max = 100.0);

  /// `disps[i]` is 1 x h_i x w_i, `poses[s]` (6) maps target points into source s.
  ObjectiveTerms forward(const Tensor<T>& target, const std::vector<Tensor<T>>& sources,
                         const std::vector<Tensor<T>>& disps, const std::vector<Tensor<T>>& poses);

  struct Grads {
    std::vector<Tensor<T>> disps;
    std::vector<Tensor<T>> poses;
  };
  /// Gradient of `total` from the latest forward call, scaled by `scale`.
  Grads backward(double scale = 1.0) const;

  const std::vector<Tensor<T>>& masks() const { return masks_; }

 private:
  geometry::CameraIntrinsics K_;
  PhotometricParams params_;
  double d_min_, d_max_;
  Tensor<T> target_;
  std::vector<Tensor<T>> sources_, disps_, poses_, up_, depth_, masks_, small_rgb_;
  std::vector<std::vector<Tensor<T>>> synth_;  // [scale][source]
  std::vector<std::vector<int>> choice_;        // [scale] argmin source per pixel
};

struct SelfSupTrainConfig {
  long steps = 2000;
  int batch_size = 4;
  double lr = 1e-4;
  double warmup_fraction = 0.05;
  nn::OptimizerConfig optimizer{nn::OptimizerKind::Adam};
  PhotometricParams params{};
  double d_min = 0.1;
  double d_max = 100.0;
  std::uint64_t seed = 0;
  /// Keep the pose at identity and do not train PoseNet.
  bool freeze_pose = false;
  std::filesystem::path checkpoint_dir;  // writes depth/ and pose/ when set
  std::function<void(long step, double loss, double lr)> on_step;
};

struct SelfSupResult {
  std::vector<double> loss_trace;  // mean batch L_joint per step
};

/// Joint DepthNet + PoseNet training on frame triples. Throws
/// nn::DivergenceError on a non-finite loss.
template <typename T>
SelfSupResult train_selfsup(DepthNet<T>& depth, PoseNet<T>& pose, const std::vector<FrameTriple<T>>& triples,
                            const geometry::CameraIntrinsics& K, const SelfSupTrainConfig& config);

/// L_joint of one triple under the current networks (no parameter updates).
template <typename T>
ObjectiveTerms evaluate_triple(DepthNet<T>& depth, PoseNet<T>& pose, const FrameTriple<T>& triple,
                               const geometry::CameraIntrinsics& K, const SelfSupTrainConfig& config);

/// Relative depth R from the finest disparity.
template <typename T>
Tensor<T> predict_relative_depth(DepthNet<T>& depth, const Tensor<T>& rgb, double d_min = 0.1, double d_max = 100.0);

}  // namespace avs::selfsup
