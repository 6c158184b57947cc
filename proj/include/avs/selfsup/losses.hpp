#pragma once

#include <vector>

#include "avs/core/tensor.hpp"

namespace avs::selfsup {

struct PhotometricParams {
  double beta = 0.15;   // L1 weight
  double gamma = 0.85;  // (1 - SSIM) / 2 weight
  double lambda_smooth = 1e-3;
  int n_scales = 4;     // disparity scales 1, 1/2, 1/4[, 1/8]
};

inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

/// Per-pixel SSIM of two C x H x W images (per channel), from 3x3 mean-filter
/// statistics with reflection padding. H and W must be at least 2.
template <typename T>
Tensor<T> ssim(const Tensor<T>& x, const Tensor<T>& y);
/// d(sum grad * ssim(x, y)) / dx.
template <typename T>
Tensor<T> ssim_backward(const Tensor<T>& x, const Tensor<T>& y, const Tensor<T>& grad);

/// H x W map: mean over channels of beta * |t - s| + gamma * (1 - SSIM(s, t)) / 2.
template <typename T>
Tensor<T> photometric_error(const Tensor<T>& target, const Tensor<T>& synthesized, const PhotometricParams& p);
/// Gradient w.r.t. `synthesized`.
template <typename T>
Tensor<T> photometric_error_backward(const Tensor<T>& target, const Tensor<T>& synthesized, const Tensor<T>& grad,
                                     const PhotometricParams& p);

template <typename T>
struct MinLoss {
  Tensor<T> loss;           // H x W, per-pixel minimum over sources
  std::vector<int> source;  // argmin per pixel (first on ties)
};

/// Per-pixel minimum photometric error over the synthesized views.
template <typename T>
MinLoss<T> photometric_loss(const Tensor<T>& target, const std::vector<Tensor<T>>& synthesized,
                            const PhotometricParams& p);

/// Edge-aware smoothness of d* = disp / mean(disp) against image gradients:
/// mean|dx d*| e^{-|dx I|} + mean|dy d*| e^{-|dy I|}, |d I| averaged over channels.
/// `disp` is 1 x h x w (or h x w), `rgb` is C x h x w.
template <typename T>
double smoothness_loss(const Tensor<T>& disp, const Tensor<T>& rgb);
template <typename T>
Tensor<T> smoothness_loss_backward(const Tensor<T>& disp, const Tensor<T>& rgb, double grad = 1.0);

/// 1 where the best reprojection error beats the best identity error
/// (unwarped source vs target), 0 elsewhere.
template <typename T>
Tensor<T> auto_mask(const Tensor<T>& target, const std::vector<Tensor<T>>& raw_sources,
                    const std::vector<Tensor<T>>& synthesized, const PhotometricParams& p);

/// (1/N) sum_i (pe_i + lambda_smooth * smooth_i).
double joint_loss(const std::vector<double>& pe, const std::vector<double>& smooth, const PhotometricParams& p);

}  // namespace avs::selfsup
