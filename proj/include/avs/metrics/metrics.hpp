#pragma once

#include <string>
#include <vector>

#include "avs/core/tensor.hpp"

namespace avs::metrics {

/// Standard depth accuracy suite over valid pixels.
struct MetricsReport {
  double abs_rel = 0, sq_rel = 0, rmse = 0, rmse_log = 0;
  double delta1 = 0, delta2 = 0, delta3 = 0;
  long valid_count = 0;
};

/// Column order used by every table this project prints.
inline const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"abs_rel", "sq_rel", "rmse", "rmse_log", "delta1", "delta2", "delta3"};
  return names;
}
std::vector<double> as_row(const MetricsReport& r);

/// Valid pixels: 0 < gt < max_depth (both strict). `pred` is bilinearly
/// resized to the gt grid when the shapes differ. Throws on an empty mask or
/// a non-positive prediction at a valid pixel.
template <typename T>
MetricsReport compute_metrics(const Tensor<T>& pred, const Tensor<T>& gt, double max_depth);

/// Unweighted mean over samples (each sample counts once).
MetricsReport mean_report(const std::vector<MetricsReport>& reports);

}  // namespace avs::metrics
