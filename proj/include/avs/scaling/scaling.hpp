#pragma once

#include <string>

#include "avs/core/tensor.hpp"

namespace avs::scaling {

enum class Method { Median, MeanStd };

std::string method_name(Method m);
/// Accepts "median" or "meanstd"; throws std::invalid_argument otherwise.
Method parse_method(const std::string& name);

struct ScaleFactor {
  Method method = Method::Median;
  double s = 1.0;  // median ratio
  double mu_r = 0.0, sigma_r = 1.0, mu_m = 0.0, sigma_m = 1.0;
  std::size_t pixels = 0;  // size of the population the statistics were taken over

  /// Key-value text record, one "key = value" per line.
  std::string to_string() const;
  static ScaleFactor parse(const std::string& text);
};

template <typename T>
struct Scaled {
  Tensor<T> depth;
  ScaleFactor factor;
};

/// Lower bound applied to mean/std outputs, metres.
inline constexpr double kMeanStdFloor = 1e-3;

/// Median of `values` (mean of the two central order statistics for an even count).
double median(std::vector<double> values);

/// Pixels used for the statistics: `mask` (empty = all) intersected with
/// finite positive entries of both maps.
template <typename T>
Tensor<T> joint_valid_mask(const Tensor<T>& relative, const Tensor<T>& pseudo, const Tensor<T>& mask);

/// relative * MEDIAN(pseudo) / MEDIAN(relative) over the joint valid pixels.
template <typename T>
Scaled<T> median_scale(const Tensor<T>& relative, const Tensor<T>& pseudo, const Tensor<T>& mask = {});

/// (relative - mu_r) / sigma_r * sigma_m + mu_m, clamped below at kMeanStdFloor.
template <typename T>
Scaled<T> meanstd_scale(const Tensor<T>& relative, const Tensor<T>& pseudo, const Tensor<T>& mask = {});

/// Applies an already computed factor to another map.
template <typename T>
Tensor<T> apply_scale(const Tensor<T>& relative, const ScaleFactor& factor);

template <typename T>
Scaled<T> scale(Method method, const Tensor<T>& relative, const Tensor<T>& pseudo, const Tensor<T>& mask = {});

}  // namespace avs::scaling
